#include "flt/lssvm.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace flt {

namespace {

// Shared closed-form solve once the class means and covariance are in hand.
LinearModel solve_closed_form(Eigen::MatrixXd cov, const Eigen::VectorXd& mean_pos,
                              const Eigen::VectorXd& mean_neg, const Eigen::VectorXd& mean,
                              double n_pos, double n_neg, double gamma, bool bias_verbatim) {
  const double n = n_pos + n_neg;
  cov.diagonal().array() += gamma / n;

  Eigen::VectorXd rhs = (2.0 * n_pos * n_neg / (n * n)) * (mean_pos - mean_neg);
  LinearModel model;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    model.w = llt.solve(rhs);
  } else {
    std::cerr << "lssvm: regularized covariance not positive definite, "
                 "falling back to least-squares solve\n";
    model.w = cov.colPivHouseholderQr().solve(rhs);
  }
  model.b = bias_verbatim ? n_pos * n_neg / n - mean.dot(model.w)
                          : (n_pos - n_neg) / n - mean.dot(model.w);
  model.gamma = gamma;
  return model;
}

}  // namespace

LinearModel lssvm_train(const std::vector<LabeledFeature>& samples, double gamma,
                        bool bias_verbatim) {
  if (gamma <= 0) throw std::runtime_error("gamma must be > 0");
  if (samples.empty()) throw std::runtime_error("no training samples");

  const Eigen::Index dim = samples.front().first.size();
  double n_pos = 0, n_neg = 0;
  for (const auto& [x, y] : samples) {
    if (x.size() != dim) throw std::runtime_error("inconsistent feature dimensions");
    if (!x.allFinite()) throw std::runtime_error("non-finite feature value");
    if (y > 0) {
      n_pos += 1;
    } else {
      n_neg += 1;
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::runtime_error("training set must contain both classes");
  }
  const double n = n_pos + n_neg;

  Eigen::VectorXd mean_pos = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mean_neg = Eigen::VectorXd::Zero(dim);
  for (const auto& [x, y] : samples) {
    (y > 0 ? mean_pos : mean_neg) += x;
  }
  mean_pos /= n_pos;
  mean_neg /= n_neg;
  Eigen::VectorXd mean = (n_pos * mean_pos + n_neg * mean_neg) / n;

  // S = (1/N) sum (x - mu)(x - mu)', built as one rank-N update
  Eigen::MatrixXd centered(dim, samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    centered.col(static_cast<Eigen::Index>(i)) = samples[i].first - mean;
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / n);
  cov = cov.selfadjointView<Eigen::Lower>();

  return solve_closed_form(std::move(cov), mean_pos, mean_neg, mean, n_pos, n_neg, gamma,
                           bias_verbatim);
}

void ClassifierStats::ensure_dim(Eigen::Index dim) {
  if (second_moment_.rows() == 0) {
    second_moment_ = Eigen::MatrixXd::Zero(dim, dim);
    sum_pos_ = Eigen::VectorXd::Zero(dim);
    sum_neg_ = Eigen::VectorXd::Zero(dim);
  } else if (second_moment_.rows() != dim) {
    throw std::runtime_error("inconsistent feature dimensions");
  }
}

void ClassifierStats::add(const std::vector<LabeledFeature>& samples) {
  if (samples.empty()) return;
  ensure_dim(samples.front().first.size());
  Eigen::MatrixXd block(second_moment_.rows(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [x, y] = samples[i];
    if (x.size() != second_moment_.rows()) {
      throw std::runtime_error("inconsistent feature dimensions");
    }
    if (!x.allFinite()) throw std::runtime_error("non-finite feature value");
    block.col(static_cast<Eigen::Index>(i)) = x;
    if (y > 0) {
      sum_pos_ += x;
      n_pos_ += 1;
    } else {
      sum_neg_ += x;
      n_neg_ += 1;
    }
  }
  second_moment_.selfadjointView<Eigen::Lower>().rankUpdate(block, 1.0);
}

void ClassifierStats::remove(const std::vector<LabeledFeature>& samples) {
  if (samples.empty()) return;
  ensure_dim(samples.front().first.size());
  Eigen::MatrixXd block(second_moment_.rows(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [x, y] = samples[i];
    block.col(static_cast<Eigen::Index>(i)) = x;
    if (y > 0) {
      sum_pos_ -= x;
      n_pos_ -= 1;
    } else {
      sum_neg_ -= x;
      n_neg_ -= 1;
    }
  }
  if (n_pos_ < 0 || n_neg_ < 0) throw std::runtime_error("removed more samples than added");
  second_moment_.selfadjointView<Eigen::Lower>().rankUpdate(block, -1.0);
}

LinearModel ClassifierStats::train(double gamma, bool bias_verbatim) const {
  if (gamma <= 0) throw std::runtime_error("gamma must be > 0");
  if (n_pos_ == 0 || n_neg_ == 0) {
    throw std::runtime_error("training set must contain both classes");
  }
  const double n_pos = static_cast<double>(n_pos_);
  const double n_neg = static_cast<double>(n_neg_);
  const double n = n_pos + n_neg;
  Eigen::VectorXd mean_pos = sum_pos_ / n_pos;
  Eigen::VectorXd mean_neg = sum_neg_ / n_neg;
  Eigen::VectorXd mean = (sum_pos_ + sum_neg_) / n;

  Eigen::MatrixXd cov = second_moment_.selfadjointView<Eigen::Lower>();
  cov /= n;
  cov.selfadjointView<Eigen::Lower>().rankUpdate(mean, -1.0);
  cov = cov.selfadjointView<Eigen::Lower>();

  return solve_closed_form(std::move(cov), mean_pos, mean_neg, mean, n_pos, n_neg, gamma,
                           bias_verbatim);
}

double lssvm_predict(const LinearModel& model, const Eigen::VectorXd& feature) {
  if (model.w.size() != feature.size()) {
    throw std::runtime_error("feature dimension " + std::to_string(feature.size()) +
                             " does not match model dimension " + std::to_string(model.w.size()));
  }
  return model.w.dot(feature) + model.b;
}

std::vector<LabeledFeature> Reservoir::push(int frame_index,
                                            std::vector<LabeledFeature> samples) {
  if (frame_index <= last_frame_) {
    throw std::runtime_error("frame index " + std::to_string(frame_index) +
                             " not increasing (last was " + std::to_string(last_frame_) + ")");
  }
  last_frame_ = frame_index;
  frames_seen_ += 1;
  entries_[frame_index] = std::move(samples);

  // Evict anything that is neither in the first head_keep_ frames nor among
  // the tail_keep_ most recent ones.
  std::vector<LabeledFeature> evicted;
  if (static_cast<int>(entries_.size()) > head_keep_ + tail_keep_) {
    auto it = entries_.begin();
    std::advance(it, head_keep_);
    evicted = std::move(it->second);
    entries_.erase(it);
  }
  return evicted;
}

std::vector<LabeledFeature> Reservoir::training_set() const {
  std::vector<LabeledFeature> all;
  for (const auto& [frame, samples] : entries_) {
    all.insert(all.end(), samples.begin(), samples.end());
  }
  return all;
}

std::vector<int> Reservoir::selected_frames() const {
  std::vector<int> frames;
  frames.reserve(entries_.size());
  for (const auto& [frame, samples] : entries_) frames.push_back(frame);
  return frames;
}

}  // namespace flt
