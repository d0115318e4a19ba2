#include <cmath>

#include "doctest.h"
#include "flt/encode.hpp"
#include "flt/lasso.hpp"
#include "flt/rng.hpp"
#include "support/oracles.hpp"

using namespace flt;

namespace {

PatchMatrix wrap(const Eigen::MatrixXd& data) {
  PatchMatrix p;
  p.data = data;
  p.positions.assign(static_cast<std::size_t>(data.cols()), PatchPos{0, 0});
  return p;
}

Dictionary random_dict(Rng& rng, int m, int n) {
  Dictionary d;
  d.basis = oracles::random_unit_dict(rng, m, n);
  return d;
}

}  // namespace

TEST_CASE("soft threshold encodes relative to the batch maximum") {
  SUBCASE("matching unit atom scores 0.75") {
    Dictionary dict;
    dict.basis = Eigen::VectorXd::Unit(4, 0);
    PatchMatrix patches = wrap(Eigen::VectorXd::Unit(4, 0));
    EncoderSpec spec;  // ST, fraction 0.25
    CodeMatrix codes = encode(dict, patches, spec);
    CHECK(codes.data(0, 0) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("threshold at the maximum zeroes the whole batch") {
    Rng rng(30);
    Dictionary dict = random_dict(rng, 6, 8);
    Eigen::MatrixXd x(6, 4);
    for (int c = 0; c < 4; ++c) x.col(c) = oracles::random_vector(rng, 6);
    EncoderSpec spec;
    spec.st_fraction = 1.0;
    CodeMatrix codes = encode(dict, wrap(x), spec);
    CHECK(codes.data.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("positive scaling of the patches scales the codes") {
    Rng rng(31);
    Dictionary dict = random_dict(rng, 6, 8);
    Eigen::MatrixXd x(6, 5);
    for (int c = 0; c < 5; ++c) x.col(c) = oracles::random_vector(rng, 6);
    EncoderSpec spec;
    CodeMatrix a = encode(dict, wrap(x), spec);
    CodeMatrix b = encode(dict, wrap(Eigen::MatrixXd(3.0 * x)), spec);
    CHECK((b.data - 3.0 * a.data).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("an override threshold is honored") {
    Dictionary dict;
    dict.basis = Eigen::VectorXd::Unit(3, 0);
    PatchMatrix patches = wrap(Eigen::VectorXd::Unit(3, 0));
    EncoderSpec spec;
    CodeMatrix codes = encode(dict, patches, spec, 0.9);
    CHECK(codes.data(0, 0) == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("triangle encoding zeroes equidistant patches") {
  Dictionary dict;
  dict.basis = Eigen::MatrixXd::Identity(4, 4);
  PatchMatrix patches = wrap(Eigen::VectorXd::Zero(4));  // distance 1 to every atom
  EncoderSpec spec;
  spec.method = EncoderMethod::kTriangle;
  CodeMatrix codes = encode(dict, patches, spec);
  CHECK(codes.data.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("soft assignment is a probability vector") {
  SUBCASE("two equidistant atoms split evenly") {
    Dictionary dict;
    dict.basis.resize(2, 2);
    dict.basis << 1, 0, 0, 1;
    PatchMatrix patches = wrap(Eigen::VectorXd::Zero(2));
    EncoderSpec spec;
    spec.method = EncoderMethod::kSoftAssign;
    CodeMatrix codes = encode(dict, patches, spec);
    CHECK(codes.data(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(codes.data(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("columns sum to one even with extreme smoothing") {
    Rng rng(32);
    Dictionary dict = random_dict(rng, 5, 7);
    Eigen::MatrixXd x(5, 6);
    for (int c = 0; c < 6; ++c) x.col(c) = 10.0 * oracles::random_vector(rng, 5);
    EncoderSpec spec;
    spec.method = EncoderMethod::kSoftAssign;
    spec.beta = 1e6;  // max-shift keeps this finite
    CodeMatrix codes = encode(dict, wrap(x), spec);
    for (int c = 0; c < 6; ++c) {
      CHECK(codes.data.col(c).allFinite());
      CHECK(codes.data.col(c).sum() == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(codes.data.col(c).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("localized soft assignment keeps k responses") {
  Rng rng(33);
  Dictionary dict = random_dict(rng, 5, 9);
  Eigen::MatrixXd x(5, 4);
  for (int c = 0; c < 4; ++c) x.col(c) = oracles::random_vector(rng, 5);

  EncoderSpec lsa;
  lsa.method = EncoderMethod::kLocalSoftAssign;
  lsa.knn = 3;
  CodeMatrix codes = encode(dict, wrap(x), lsa);
  for (int c = 0; c < 4; ++c) {
    int nnz = 0;
    for (int j = 0; j < 9; ++j) {
      if (codes.data(j, c) != 0.0) ++nnz;
    }
    CHECK(nnz <= 3);
    CHECK(codes.data.col(c).sum() <= 1.0 + 1e-9);
  }

  SUBCASE("k = n collapses to plain soft assignment") {
    lsa.knn = 9;
    EncoderSpec sa;
    sa.method = EncoderMethod::kSoftAssign;
    CodeMatrix full = encode(dict, wrap(x), lsa);
    CodeMatrix plain = encode(dict, wrap(x), sa);
    CHECK((full.data - plain.data).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("local denominator renormalizes over the neighborhood") {
    lsa.knn = 3;
    lsa.lsa_local_denominator = true;
    CodeMatrix local = encode(dict, wrap(x), lsa);
    for (int c = 0; c < 4; ++c) {
      CHECK(local.data.col(c).sum() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("sparse coding equals the rectified lasso solution") {
  Rng rng(34);
  Dictionary dict = random_dict(rng, 6, 10);
  Eigen::MatrixXd x(6, 5);
  for (int c = 0; c < 5; ++c) x.col(c) = oracles::random_vector(rng, 6);
  EncoderSpec spec;
  spec.method = EncoderMethod::kSparseCoding;
  spec.sc_lambda = 0.25;
  CodeMatrix codes = encode(dict, wrap(x), spec);
  for (int c = 0; c < 5; ++c) {
    Eigen::VectorXd alpha = lasso_solve(LassoProblem{dict.basis, x.col(c), 0.25}, 1e-6);
    CHECK(codes.data.col(c) == alpha.cwiseMax(0.0));
    CHECK(codes.data.col(c).minCoeff() >= 0.0);
  }
}

TEST_CASE("nonnegativity across the rectified encoders") {
  Rng rng(35);
  Dictionary dict = random_dict(rng, 6, 8);
  Eigen::MatrixXd x(6, 10);
  for (int c = 0; c < 10; ++c) x.col(c) = oracles::random_vector(rng, 6);
  for (EncoderMethod method : {EncoderMethod::kSoftThreshold, EncoderMethod::kTriangle,
                               EncoderMethod::kSparseCoding}) {
    EncoderSpec spec;
    spec.method = method;
    CodeMatrix codes = encode(dict, wrap(x), spec);
    CHECK(codes.data.minCoeff() >= 0.0);
  }
}

TEST_CASE("duplicated patches encode identically") {
  Rng rng(36);
  Dictionary dict = random_dict(rng, 6, 8);
  Eigen::MatrixXd x(6, 4);
  x.col(0) = oracles::random_vector(rng, 6);
  x.col(1) = oracles::random_vector(rng, 6);
  x.col(2) = x.col(0);
  x.col(3) = x.col(1);
  for (EncoderMethod method :
       {EncoderMethod::kSoftThreshold, EncoderMethod::kTriangle, EncoderMethod::kSoftAssign,
        EncoderMethod::kLocalSoftAssign, EncoderMethod::kSparseCoding}) {
    EncoderSpec spec;
    spec.method = method;
    CodeMatrix codes = encode(dict, wrap(x), spec);
    CHECK(codes.data.col(2) == codes.data.col(0));
    CHECK(codes.data.col(3) == codes.data.col(1));
  }
}

TEST_CASE("dimension mismatches are rejected") {
  Rng rng(37);
  Dictionary dict = random_dict(rng, 6, 8);
  PatchMatrix patches = wrap(Eigen::MatrixXd::Zero(5, 2));
  CHECK_THROWS(encode(dict, patches, EncoderSpec{}));
}
