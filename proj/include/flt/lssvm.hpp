#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

namespace flt {

struct LinearModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double gamma = 0.0;  // trade-off used at fit time
};

using LabeledFeature = std::pair<Eigen::VectorXd, int>;  // label in {-1, +1}

// Closed-form least-squares SVM:
//   w = (2 N+ N- / N^2) (S + (gamma/N) I)^{-1} (mu+ - mu-)
//   b = (N+ - N-)/N - mu' w
// where S is the covariance about the global mean. `bias_verbatim` swaps in
// b = N+ N- / N - mu' w instead; that form does not satisfy the objective's
// stationarity in b but is kept reproducible behind the flag.
LinearModel lssvm_train(const std::vector<LabeledFeature>& samples, double gamma,
                        bool bias_verbatim = false);

// w'x + b; higher means more target-like.
double lssvm_predict(const LinearModel& model, const Eigen::VectorXd& feature);

// Frame-indexed training store keeping the first `head_keep` and the most
// recent `tail_keep` frames; everything between is dropped from memory.
class Reservoir {
 public:
  Reservoir(int head_keep = 10, int tail_keep = 20)
      : head_keep_(head_keep), tail_keep_(tail_keep) {}

  // frame_index must be strictly increasing across pushes. Returns the
  // samples of the frame evicted by this push, if any.
  std::vector<LabeledFeature> push(int frame_index, std::vector<LabeledFeature> samples);

  // Samples of the selected frames in frame order.
  std::vector<LabeledFeature> training_set() const;

  int frames_seen() const { return frames_seen_; }
  std::vector<int> selected_frames() const;

 private:
  int head_keep_;
  int tail_keep_;
  int frames_seen_ = 0;
  int last_frame_ = -1;
  std::map<int, std::vector<LabeledFeature>> entries_;
};

// Running class sums and the uncentered second moment of a sliding training
// set, so repeated refits only pay for the linear solve instead of rebuilding
// the covariance from scratch. Produces the same model as lssvm_train on the
// same samples, up to accumulation roundoff.
class ClassifierStats {
 public:
  void add(const std::vector<LabeledFeature>& samples);
  void remove(const std::vector<LabeledFeature>& samples);
  LinearModel train(double gamma, bool bias_verbatim = false) const;
  long count() const { return n_pos_ + n_neg_; }

 private:
  void ensure_dim(Eigen::Index dim);
  Eigen::MatrixXd second_moment_;  // lower triangle
  Eigen::VectorXd sum_pos_, sum_neg_;
  long n_pos_ = 0;
  long n_neg_ = 0;
};

}  // namespace flt
