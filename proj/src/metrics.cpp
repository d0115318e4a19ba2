#include "flt/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace flt {

double vor(const BoundingBox& a, const BoundingBox& b) {
  double ix = std::max(0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  double iy = std::max(0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  double inter = ix * iy;
  double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double cle(const BoundingBox& a, const BoundingBox& b) {
  return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

EvalReport evaluate(const std::vector<BoundingBox>& trajectory,
                    const std::vector<BoundingBox>& truth) {
  if (trajectory.size() != truth.size()) {
    throw std::runtime_error("trajectory length " + std::to_string(trajectory.size()) +
                             " != truth length " + std::to_string(truth.size()));
  }
  if (trajectory.empty()) throw std::runtime_error("nothing to evaluate");

  EvalReport report;
  double sum_vor = 0, sum_cle = 0;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    FrameMetrics fm;
    fm.frame = static_cast<int>(i) + 1;
    fm.vor = vor(trajectory[i], truth[i]);
    fm.cle = cle(trajectory[i], truth[i]);
    sum_vor += fm.vor;
    sum_cle += fm.cle;
    report.per_frame.push_back(fm);
  }
  report.mean_vor = sum_vor / static_cast<double>(trajectory.size());
  report.mean_cle = sum_cle / static_cast<double>(trajectory.size());
  return report;
}

void write_report_csv(const std::filesystem::path& file, const EvalReport& report) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + file.string());
  out << "frame,vor,cle\n";
  char buf[96];
  for (const FrameMetrics& fm : report.per_frame) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", fm.frame, fm.vor, fm.cle);
    out << buf;
  }
}

EvalReport read_report_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open report: " + file.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame,", 0) != 0) {
    throw std::runtime_error("missing report header in " + file.string());
  }
  EvalReport report;
  double sum_vor = 0, sum_cle = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FrameMetrics fm;
    std::istringstream ss(line);
    char c1, c2;
    if (!(ss >> fm.frame >> c1 >> fm.vor >> c2 >> fm.cle) || c1 != ',' || c2 != ',') {
      throw std::runtime_error("bad report line: " + line);
    }
    sum_vor += fm.vor;
    sum_cle += fm.cle;
    report.per_frame.push_back(fm);
  }
  if (report.per_frame.empty()) throw std::runtime_error("empty report: " + file.string());
  report.mean_vor = sum_vor / static_cast<double>(report.per_frame.size());
  report.mean_cle = sum_cle / static_cast<double>(report.per_frame.size());
  return report;
}

}  // namespace flt
