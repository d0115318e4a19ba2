#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "flt/dictionary.hpp"
#include "flt/lasso.hpp"
#include "flt/rng.hpp"
#include "support/oracles.hpp"

using namespace flt;

namespace {

PatchMatrix random_patches(Rng& rng, int m, int count, double scale = 1.0) {
  PatchMatrix p;
  p.data.resize(m, count);
  for (int c = 0; c < count; ++c) {
    for (int r = 0; r < m; ++r) p.data(r, c) = scale * rng.gaussian();
  }
  p.positions.assign(static_cast<std::size_t>(count), PatchPos{0, 0});
  return p;
}

double max_column_norm(const Eigen::MatrixXd& m) {
  double worst = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) worst = std::max(worst, m.col(j).norm());
  return worst;
}

}  // namespace

TEST_CASE("random sampling picks distinct unit columns deterministically") {
  Rng rng(20);
  PatchMatrix patches = random_patches(rng, 6, 40);
  auto [a, sa] = init_dictionary(DictMethod::kRandomSample, patches, 10, 0, 0.1, 99);
  auto [b, sb] = init_dictionary(DictMethod::kRandomSample, patches, 10, 0, 0.1, 99);
  CHECK(a.basis == b.basis);
  CHECK(sa.rounds == 0);
  CHECK(sa.code_cov.cwiseAbs().maxCoeff() == 0.0);
  for (int j = 0; j < a.size(); ++j) {
    CHECK(a.basis.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = j + 1; k < a.size(); ++k) {
      CHECK(a.basis.col(j) != a.basis.col(k));
    }
  }
}

TEST_CASE("k-means with as many centroids as points returns the points") {
  Rng rng(21);
  PatchMatrix patches = random_patches(rng, 4, 8);
  for (int c = 0; c < patches.count(); ++c) {
    patches.data.col(c) *= 0.8 / patches.data.col(c).norm();  // inside the unit ball
  }
  auto [dict, state] = init_dictionary(DictMethod::kKmeans, patches, 8, 0, 0.1, 7);
  // every point appears as a centroid (up to the unit-ball rescale, inactive here)
  for (int c = 0; c < patches.count(); ++c) {
    bool found = false;
    for (int j = 0; j < dict.size(); ++j) {
      if ((dict.basis.col(j) - patches.data.col(c)).norm() < 1e-9) found = true;
    }
    CHECK(found);
  }
  CHECK(max_column_norm(dict.basis) <= 1.0 + 1e-9);
}

TEST_CASE("offline learning lowers the averaged surrogate across epochs") {
  Rng rng(22);
  PatchMatrix patches = random_patches(rng, 16, 200);
  // mirror the kOdl path with one odl_step per mini-batch, tracking per epoch
  auto [dict, state] = init_dictionary(DictMethod::kRandomSample, patches, 24, 0, 0.15, 5);
  state.batch_size = 50;
  double first = 0, last = 0;
  for (int epoch = 0; epoch < 6; ++epoch) {
    for (int start = 0; start < patches.count(); start += 50) {
      odl_step(dict, state, patches.data.middleCols(start, 50), 0.15);
    }
    double value = surrogate_objective(dict, state);
    if (epoch == 0) first = value;
    last = value;
  }
  CHECK(last < first);
  CHECK(max_column_norm(dict.basis) <= 1.0 + 1e-9);
}

TEST_CASE("odl_step matches the hand-computed single-signal update") {
  // x = (1 + lambda) e1 against an orthonormal dictionary: the code is
  // exactly e1, so A = e1 e1', B = x e1', u1 = x and d1 <- x / ||x||
  const double lambda = 0.2;
  Dictionary dict;
  dict.basis = Eigen::MatrixXd::Identity(3, 3);
  OdlState state;
  state.code_cov = Eigen::MatrixXd::Zero(3, 3);
  state.cross_cov = Eigen::MatrixXd::Zero(3, 3);

  Eigen::MatrixXd batch(3, 1);
  batch << 1.0 + lambda, 0.0, 0.0;
  odl_step(dict, state, batch, lambda);

  CHECK(state.rounds == 1);
  CHECK(state.code_cov(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(state.cross_cov(0, 0) == doctest::Approx(1.0 + lambda).epsilon(1e-12));
  CHECK(dict.basis.col(0)[0] == doctest::Approx(1.0).epsilon(1e-12));  // x / ||x||
  CHECK(dict.basis.col(1) == Eigen::VectorXd::Unit(3, 1));             // untouched
  CHECK(dict.basis.col(2) == Eigen::VectorXd::Unit(3, 2));
}

TEST_CASE("all-zero codes leave everything unchanged") {
  Rng rng(23);
  Dictionary dict;
  dict.basis = oracles::random_unit_dict(rng, 5, 7);
  Eigen::MatrixXd before = dict.basis;
  OdlState state;
  state.code_cov = Eigen::MatrixXd::Zero(7, 7);
  state.cross_cov = Eigen::MatrixXd::Zero(5, 7);

  Eigen::MatrixXd batch(5, 3);
  for (int c = 0; c < 3; ++c) batch.col(c) = oracles::random_vector(rng, 5);
  odl_step(dict, state, batch, 1e6);  // lambda dominates every correlation

  CHECK(dict.basis == before);
  CHECK(state.code_cov.cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.cross_cov.cwiseAbs().maxCoeff() == 0.0);
  CHECK(state.rounds == 1);
}

TEST_CASE("statistics stay symmetric PSD and norms bounded over random runs") {
  Rng rng(24);
  PatchMatrix patches = random_patches(rng, 8, 60);
  auto [dict, state] = init_dictionary(DictMethod::kOdl, patches, 12, 2, 0.2, 3, 20);
  for (int step = 0; step < 5; ++step) {
    int count = rng.uniform_int(1, 20);
    PatchMatrix batch = random_patches(rng, 8, count);
    odl_step(dict, state, batch.data, 0.2);

    CHECK((state.code_cov - state.code_cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.code_cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
    CHECK(max_column_norm(dict.basis) <= 1.0 + 1e-9);
  }
}

TEST_CASE("column refresh never raises the surrogate with fixed statistics") {
  Rng rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    Dictionary dict;
    dict.basis = oracles::random_unit_dict(rng, 6, 9);
    Eigen::MatrixXd half(9, 5);
    for (int c = 0; c < 5; ++c) half.col(c) = oracles::random_vector(rng, 9);
    Eigen::MatrixXd code_cov = half * half.transpose() / 5.0;
    Eigen::MatrixXd cross_cov(6, 9);
    for (int c = 0; c < 9; ++c) cross_cov.col(c) = oracles::random_vector(rng, 6);

    double before = surrogate_value(dict, code_cov, cross_cov);
    update_basis_columns(dict, code_cov, cross_cov);
    double after = surrogate_value(dict, code_cov, cross_cov);
    CHECK(after <= before + 1e-9);
    CHECK(max_column_norm(dict.basis) <= 1.0 + 1e-9);
  }
}

TEST_CASE("basis weights normalize row norms") {
  Eigen::MatrixXd codes(2, 2);
  codes << 3.0, 0.0, 0.0, 1.0;  // row norms 3 and 1
  Eigen::VectorXd w = basis_weights(codes);
  CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-12));

  Eigen::MatrixXd equal = Eigen::MatrixXd::Ones(4, 3);
  Eigen::VectorXd uniform = basis_weights(equal);
  for (int j = 0; j < 4; ++j) CHECK(uniform[j] == doctest::Approx(0.25).epsilon(1e-12));

  Eigen::MatrixXd lone = Eigen::MatrixXd::Zero(3, 2);
  lone(1, 0) = 2.0;
  Eigen::VectorXd mass = basis_weights(lone);
  CHECK(mass[0] == 0.0);
  CHECK(mass[1] == 1.0);
  CHECK(mass[2] == 0.0);

  Eigen::VectorXd fallback = basis_weights(Eigen::MatrixXd::Zero(5, 4));
  for (int j = 0; j < 5; ++j) CHECK(fallback[j] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(basis_weights(codes).sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("update trigger compares consecutive top halves") {
  SUBCASE("identical weights never fire") {
    UpdatePolicy policy;
    Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(10, 1.0, 0.1);
    CHECK_FALSE(should_update(policy, w));  // first observation only records
    CHECK_FALSE(should_update(policy, w));
  }
  SUBCASE("disjoint top sets fire") {
    UpdatePolicy policy;
    Eigen::VectorXd w1 = Eigen::VectorXd::Zero(10);
    Eigen::VectorXd w2 = Eigen::VectorXd::Zero(10);
    for (int i = 0; i < 5; ++i) w1[i] = 1.0;
    for (int i = 5; i < 10; ++i) w2[i] = 1.0;
    should_update(policy, w1);
    CHECK(should_update(policy, w2));
  }
}

TEST_CASE("dictionary serialization round-trips with the fixed header") {
  namespace fs = std::filesystem;
  Rng rng(26);
  Dictionary dict;
  dict.basis = oracles::random_unit_dict(rng, 5, 3);
  fs::path file = fs::temp_directory_path() / "flt_test_dict.bin";
  save_dictionary(file, dict);

  // header: magic, little-endian int32 m and n
  std::ifstream in(file, std::ios::binary);
  char header[16];
  in.read(header, 16);
  CHECK(std::string(header, 8) == "FTDICT01");
  CHECK(static_cast<unsigned char>(header[8]) == 5);
  CHECK(static_cast<unsigned char>(header[12]) == 3);
  CHECK(fs::file_size(file) == 16 + 5 * 3 * 8);

  Dictionary back = load_dictionary(file);
  CHECK(back.basis == dict.basis);

  std::ofstream(file, std::ios::binary) << "NOTADICT";
  CHECK_THROWS(load_dictionary(file));
}

TEST_CASE("initialization validates the patch supply") {
  Rng rng(27);
  PatchMatrix patches = random_patches(rng, 4, 5);
  CHECK_THROWS(init_dictionary(DictMethod::kRandomSample, patches, 6, 0, 0.1, 1));
}

TEST_CASE("odl_step validates batch shape") {
  Rng rng(28);
  Dictionary dict;
  dict.basis = oracles::random_unit_dict(rng, 5, 7);
  OdlState state;
  state.code_cov = Eigen::MatrixXd::Zero(7, 7);
  state.cross_cov = Eigen::MatrixXd::Zero(5, 7);
  Eigen::MatrixXd bad(4, 2);
  bad.setZero();
  CHECK_THROWS(odl_step(dict, state, bad, 0.1));
}
