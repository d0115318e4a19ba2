#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "flt/dictionary.hpp"
#include "flt/encode.hpp"
#include "flt/lasso.hpp"
#include "flt/lssvm.hpp"
#include "flt/metrics.hpp"
#include "flt/patches.hpp"
#include "flt/pooling.hpp"
#include "flt/sequence.hpp"
#include "flt/tracker.hpp"

namespace py = pybind11;
using namespace flt;

namespace {

py::array_t<std::uint8_t> frame_to_array(const GrayFrame& f) {
  py::array_t<std::uint8_t> arr({f.height, f.width});
  std::memcpy(arr.mutable_data(), f.pixels.data(), f.pixels.size());
  return arr;
}

GrayFrame frame_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 2) throw std::runtime_error("expected a 2-D uint8 array");
  GrayFrame f;
  f.height = static_cast<int>(arr.shape(0));
  f.width = static_cast<int>(arr.shape(1));
  f.pixels.resize(static_cast<std::size_t>(f.width) * f.height);
  std::memcpy(f.pixels.data(), arr.data(), f.pixels.size());
  return f;
}

std::vector<LabeledFeature> to_samples(const Eigen::MatrixXd& features,
                                       const std::vector<int>& labels) {
  if (static_cast<std::size_t>(features.cols()) != labels.size()) {
    throw std::runtime_error("features and labels disagree in count");
  }
  std::vector<LabeledFeature> samples;
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    samples.emplace_back(features.col(c), labels[static_cast<std::size_t>(c)]);
  }
  return samples;
}

}  // namespace

PYBIND11_MODULE(flt, m) {
  m.doc() = "online feature-learning tracker: dictionary learning, patch "
            "encoding, pyramid pooling, LS-SVM and the tracking loop";

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<int, int, int, int>(), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &BoundingBox::x)
      .def_readwrite("y", &BoundingBox::y)
      .def_readwrite("w", &BoundingBox::w)
      .def_readwrite("h", &BoundingBox::h)
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__repr__", [](const BoundingBox& b) {
        return "BoundingBox(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
               std::to_string(b.w) + ", " + std::to_string(b.h) + ")";
      });
  m.def("vor", &vor, py::arg("a"), py::arg("b"));
  m.def("cle", &cle, py::arg("a"), py::arg("b"));

  py::class_<GrayFrame>(m, "GrayFrame")
      .def(py::init(&frame_from_array), py::arg("pixels"))
      .def_readonly("width", &GrayFrame::width)
      .def_readonly("height", &GrayFrame::height)
      .def("pixels", &frame_to_array);

  py::class_<Sequence>(m, "Sequence")
      .def_readwrite("frames", &Sequence::frames)
      .def_readwrite("truth", &Sequence::truth)
      .def_readwrite("name", &Sequence::name)
      .def("__len__", &Sequence::size);

  m.def("parse_truth_line", &parse_truth_line, py::arg("line"));
  m.def("load_sequence", &load_sequence, py::arg("frame_dir"), py::arg("truth_path") = py::none(),
        py::arg("truth_one_based") = false);
  m.def("save_sequence", &save_sequence, py::arg("dir"), py::arg("seq"));

  py::class_<SynthSpec>(m, "SynthSpec")
      .def(py::init<>())
      .def_readwrite("frame_w", &SynthSpec::frame_w)
      .def_readwrite("frame_h", &SynthSpec::frame_h)
      .def_readwrite("n_frames", &SynthSpec::n_frames)
      .def_readwrite("target_size", &SynthSpec::target_size)
      .def_readwrite("velocity_x", &SynthSpec::velocity_x)
      .def_readwrite("velocity_y", &SynthSpec::velocity_y)
      .def_readwrite("jitter_sigma", &SynthSpec::jitter_sigma)
      .def_readwrite("noise_sigma", &SynthSpec::noise_sigma)
      .def_readwrite("seed", &SynthSpec::seed)
      .def_readwrite("start_x", &SynthSpec::start_x)
      .def_readwrite("start_y", &SynthSpec::start_y);
  m.def("synth_sequence", &synth_sequence, py::arg("spec"));

  py::class_<PatchGridSpec>(m, "PatchGridSpec")
      .def(py::init<int, int>(), py::arg("patch_size") = 8, py::arg("stride") = 4)
      .def_readwrite("patch_size", &PatchGridSpec::patch_size)
      .def_readwrite("stride", &PatchGridSpec::stride)
      .def_static("for_target", &PatchGridSpec::for_target, py::arg("w"), py::arg("h"));

  py::class_<PatchPos>(m, "PatchPos")
      .def_readonly("row", &PatchPos::row)
      .def_readonly("col", &PatchPos::col);

  py::class_<PatchMatrix>(m, "PatchMatrix")
      .def_readwrite("data", &PatchMatrix::data)
      .def_readonly("positions", &PatchMatrix::positions)
      .def("dim", &PatchMatrix::dim)
      .def("count", &PatchMatrix::count);

  m.def("extract_patches", &extract_patches, py::arg("frame"), py::arg("region"), py::arg("spec"));
  m.def("contrast_normalize", &contrast_normalize, py::arg("patches"));

  m.def(
      "lasso_solve",
      [](const Eigen::MatrixXd& dict, const Eigen::VectorXd& signal, double lam, double tol,
         int max_iter) { return lasso_solve(LassoProblem{dict, signal, lam}, tol, max_iter); },
      py::arg("dict"), py::arg("signal"), py::arg("lam"), py::arg("tol") = 1e-6,
      py::arg("max_iter") = 1000);
  m.def("lasso_solve_batch", &lasso_solve_batch, py::arg("dict"), py::arg("signals"),
        py::arg("lam"), py::arg("tol") = 1e-6, py::arg("max_iter") = 1000);
  m.def("lasso_objective", &lasso_objective, py::arg("dict"), py::arg("signal"), py::arg("lam"),
        py::arg("alpha"));
  m.def("lasso_kkt_residual", &lasso_kkt_residual, py::arg("dict"), py::arg("signal"),
        py::arg("lam"), py::arg("alpha"));

  py::enum_<DictMethod>(m, "DictMethod")
      .value("odl", DictMethod::kOdl)
      .value("kmeans", DictMethod::kKmeans)
      .value("random_sample", DictMethod::kRandomSample);

  py::class_<Dictionary>(m, "Dictionary")
      .def(py::init<>())
      .def_readwrite("basis", &Dictionary::basis)
      .def("dim", &Dictionary::dim)
      .def("size", &Dictionary::size);

  py::class_<OdlState>(m, "OdlState")
      .def(py::init<>())
      .def_readwrite("code_cov", &OdlState::code_cov)
      .def_readwrite("cross_cov", &OdlState::cross_cov)
      .def_readwrite("rounds", &OdlState::rounds)
      .def_readwrite("batch_size", &OdlState::batch_size);

  m.def("init_dictionary", &init_dictionary, py::arg("method"), py::arg("patches"), py::arg("n"),
        py::arg("epochs"), py::arg("lam"), py::arg("seed"), py::arg("batch_size") = 256);
  m.def("odl_step", &odl_step, py::arg("dict"), py::arg("state"), py::arg("batch"),
        py::arg("lam"));
  m.def("surrogate_objective", &surrogate_objective, py::arg("dict"), py::arg("state"));
  m.def("basis_weights", &basis_weights, py::arg("codes"));

  py::class_<UpdatePolicy>(m, "UpdatePolicy")
      .def(py::init<>())
      .def_readwrite("overlap_threshold", &UpdatePolicy::overlap_threshold)
      .def_readwrite("prev_top", &UpdatePolicy::prev_top);
  m.def("should_update", &should_update, py::arg("policy"), py::arg("weights"));

  m.def("save_dictionary", &save_dictionary, py::arg("file"), py::arg("dict"));
  m.def("load_dictionary", &load_dictionary, py::arg("file"));

  py::enum_<EncoderMethod>(m, "EncoderMethod")
      .value("st", EncoderMethod::kSoftThreshold)
      .value("tk", EncoderMethod::kTriangle)
      .value("sa", EncoderMethod::kSoftAssign)
      .value("lsa", EncoderMethod::kLocalSoftAssign)
      .value("sc", EncoderMethod::kSparseCoding);

  py::class_<EncoderSpec>(m, "EncoderSpec")
      .def(py::init<>())
      .def_readwrite("method", &EncoderSpec::method)
      .def_readwrite("st_fraction", &EncoderSpec::st_fraction)
      .def_readwrite("beta", &EncoderSpec::beta)
      .def_readwrite("knn", &EncoderSpec::knn)
      .def_readwrite("sc_lambda", &EncoderSpec::sc_lambda)
      .def_readwrite("lsa_local_denominator", &EncoderSpec::lsa_local_denominator);

  py::class_<CodeMatrix>(m, "CodeMatrix")
      .def_readwrite("data", &CodeMatrix::data)
      .def_readonly("positions", &CodeMatrix::positions)
      .def("size", &CodeMatrix::size)
      .def("count", &CodeMatrix::count);

  m.def("st_threshold", &st_threshold, py::arg("dict"), py::arg("patches"), py::arg("fraction"));
  m.def("encode", &encode, py::arg("dict"), py::arg("patches"), py::arg("spec"),
        py::arg("st_override") = py::none());

  py::class_<PyramidSpec>(m, "PyramidSpec")
      .def(py::init<>())
      .def_readwrite("levels", &PyramidSpec::levels)
      .def("feature_dim", &PyramidSpec::feature_dim, py::arg("n"));
  m.def("pyramid_max_pool", &pyramid_max_pool, py::arg("codes"), py::arg("region_w"),
        py::arg("region_h"), py::arg("patch_size"), py::arg("spec"));

  py::class_<LinearModel>(m, "LinearModel")
      .def(py::init<>())
      .def_readwrite("w", &LinearModel::w)
      .def_readwrite("b", &LinearModel::b)
      .def_readwrite("gamma", &LinearModel::gamma);

  m.def(
      "lssvm_train",
      [](const Eigen::MatrixXd& features, const std::vector<int>& labels, double gamma,
         bool bias_verbatim) { return lssvm_train(to_samples(features, labels), gamma, bias_verbatim); },
      py::arg("features"), py::arg("labels"), py::arg("gamma"), py::arg("bias_verbatim") = false,
      "features holds one sample per column");
  m.def("lssvm_predict", &lssvm_predict, py::arg("model"), py::arg("feature"));

  py::enum_<DictUpdateMode>(m, "DictUpdateMode")
      .value("off", DictUpdateMode::kOff)
      .value("triggered", DictUpdateMode::kTriggered)
      .value("always", DictUpdateMode::kAlways);

  py::class_<TrackerConfig>(m, "TrackerConfig")
      .def(py::init<>())
      .def_readwrite("search_radius_track", &TrackerConfig::search_radius_track)
      .def_readwrite("search_radius_train", &TrackerConfig::search_radius_train)
      .def_readwrite("candidate_stride", &TrackerConfig::candidate_stride)
      .def_readwrite("retrain_every", &TrackerConfig::retrain_every)
      .def_readwrite("negatives_per_frame", &TrackerConfig::negatives_per_frame)
      .def_readwrite("neg_vor_max", &TrackerConfig::neg_vor_max)
      .def_readwrite("jitter_positives", &TrackerConfig::jitter_positives)
      .def_readwrite("dict_update", &TrackerConfig::dict_update)
      .def_readwrite("dict_method", &TrackerConfig::dict_method)
      .def_readwrite("dict_size", &TrackerConfig::dict_size)
      .def_readwrite("dict_epochs", &TrackerConfig::dict_epochs)
      .def_readwrite("dict_lambda", &TrackerConfig::dict_lambda)
      .def_readwrite("odl_batch", &TrackerConfig::odl_batch)
      .def_readwrite("overlap_threshold", &TrackerConfig::overlap_threshold)
      .def_readwrite("grid", &TrackerConfig::grid)
      .def_readwrite("encoder", &TrackerConfig::encoder)
      .def_readwrite("pyramid", &TrackerConfig::pyramid)
      .def_readwrite("gamma", &TrackerConfig::gamma)
      .def_readwrite("bias_verbatim", &TrackerConfig::bias_verbatim)
      .def_readwrite("use_truth_frame2", &TrackerConfig::use_truth_frame2)
      .def_readwrite("seed", &TrackerConfig::seed);

  py::class_<FrameResult>(m, "FrameResult")
      .def_readonly("box", &FrameResult::box)
      .def_readonly("score", &FrameResult::score);

  m.def("sample_candidates", &sample_candidates, py::arg("center"), py::arg("radius"),
        py::arg("stride"));
  m.def(
      "track_sequence",
      [](const Sequence& seq, const BoundingBox& init, const TrackerConfig& cfg) {
        return track_sequence(seq, init, cfg);
      },
      py::arg("seq"), py::arg("init_box"), py::arg("cfg") = TrackerConfig{});
  m.def("write_trajectory_csv", &write_trajectory_csv, py::arg("file"), py::arg("trajectory"));
  m.def("read_trajectory_csv", &read_trajectory_csv, py::arg("file"));

  py::class_<FrameMetrics>(m, "FrameMetrics")
      .def_readonly("frame", &FrameMetrics::frame)
      .def_readonly("vor", &FrameMetrics::vor)
      .def_readonly("cle", &FrameMetrics::cle);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("per_frame", &EvalReport::per_frame)
      .def_readonly("mean_vor", &EvalReport::mean_vor)
      .def_readonly("mean_cle", &EvalReport::mean_cle);

  m.def("evaluate", &evaluate, py::arg("trajectory"), py::arg("truth"));
  m.def("write_report_csv", &write_report_csv, py::arg("file"), py::arg("report"));
  m.def("read_report_csv", &read_report_csv, py::arg("file"));
}
