#include "spsolve/linops.hpp"
#include "spsolve/io.hpp"
#include "spsolve/oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace spsolve;

namespace {

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

MapPtr random_dense(std::mt19937_64& g, Index rows, Index cols) {
  return dense(testutil::random_matrix(g, rows, cols));
}

}  // namespace

TEST_CASE("identity and zero maps") {
  CHECK(identity(3)->apply(vec({1, 2, 3})).isApprox(vec({1, 2, 3})));
  CHECK(zero(2, 3)->apply(vec({4, 5, 6})).norm() == 0.0);
  CHECK(zero(2, 3)->apply_adjoint(vec({1, 1})).norm() == 0.0);
}

TEST_CASE("dense apply and adjoint by hand") {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  auto op = dense(m);
  CHECK(op->apply(vec({1, 1})).isApprox(vec({3, 1})));
  CHECK(op->apply_adjoint(vec({1, 0})).isApprox(vec({1, 2})));
}

TEST_CASE("dimension mismatches are rejected with sizes") {
  auto op = dense(Matrix::Identity(2, 3));
  CHECK_THROWS_AS(op->apply(vec({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(op->apply_adjoint(vec({1, 2, 3})), std::invalid_argument);
  try {
    op->apply(vec({1, 2}));
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
}

TEST_CASE("adjoint identity holds for every map kind") {
  auto g = testutil::rng(42);
  std::vector<MapPtr> ops;
  ops.push_back(random_dense(g, 5, 3));
  ops.push_back(identity(4));
  ops.push_back(zero(3, 5));
  ops.push_back(scaled(-2.5, random_dense(g, 4, 4)));
  ops.push_back(compose(random_dense(g, 3, 5), random_dense(g, 5, 4)));
  ops.push_back(vstack({random_dense(g, 2, 4), random_dense(g, 3, 4)}));
  {
    Matrix m = testutil::random_matrix(g, 4, 6);
    ops.push_back(callback_map(
        4, 6, [m](const Vector& x, Vector& out) { out = m * x; },
        [m](const Vector& y, Vector& out) { out = m.transpose() * y; }));
  }
  for (const auto& op : ops) {
    CAPTURE(op->kind());
    for (int trial = 0; trial < 100; ++trial) {
      Vector u = testutil::random_vector(g, op->cols());
      Vector v = testutil::random_vector(g, op->rows());
      const double lhs = op->apply(u).dot(v);
      const double rhs = u.dot(op->apply_adjoint(v));
      CHECK(std::abs(lhs - rhs) <=
            1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1e-12}));
    }
  }
}

TEST_CASE("composition matches sequential application") {
  auto g = testutil::rng(7);
  auto p = random_dense(g, 3, 5);
  auto q = random_dense(g, 5, 4);
  auto pq = compose(p, q);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x = testutil::random_vector(g, 4);
    CHECK((pq->apply(x) - p->apply(q->apply(x))).norm() < 1e-12);
  }
  CHECK_THROWS_AS(compose(random_dense(g, 3, 4), random_dense(g, 5, 4)),
                  std::invalid_argument);
}

TEST_CASE("callback maps require both directions") {
  CHECK_THROWS_AS(
      callback_map(2, 2, [](const Vector& x, Vector& o) { o = x; }, nullptr),
      std::invalid_argument);
}

TEST_CASE("norm estimate on a diagonal map") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  auto est = estimate_sq_norm(*dense(d));
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(9.0).epsilon(1e-6));
}

TEST_CASE("norm estimate of the identity") {
  auto est = estimate_sq_norm(*identity(17));
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("norm estimate matches the eigen oracle on random maps") {
  auto g = testutil::rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto op = random_dense(g, 6, 4);
    const double exact = oracle::sq_norm_eig(*op);
    auto est = estimate_sq_norm(*op, 1e-12, 20000, 5 + trial);
    CHECK(est.value == doctest::Approx(exact).epsilon(1e-6));
    // Power iteration approaches the top eigenvalue from below.
    CHECK(est.value <= exact * (1.0 + 1e-9));
  }
}

TEST_CASE("norm estimate is deterministic given the seed") {
  auto g = testutil::rng(11);
  auto op = random_dense(g, 8, 8);
  auto a = estimate_sq_norm(*op, 1e-10, 5000, 123);
  auto b = estimate_sq_norm(*op, 1e-10, 5000, 123);
  CHECK(a.value == b.value);
  CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("gram combination: identity and zero") {
  auto est = gram_combination_sq_norm(*identity(2), nullptr, 0.5, 1.0);
  CHECK(est.value == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("gram combination: rank-one constraint map") {
  Matrix b(1, 2);
  b << 1, -1;
  auto bmap = dense(b);
  auto est = gram_combination_sq_norm(*zero(1, 2), bmap.get(), 0.5, 1.0);
  // B^T B eigenvalues are {0, 2}.
  CHECK(est.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("gram combination matches explicit assembly") {
  auto g = testutil::rng(19);
  Matrix km = testutil::random_matrix(g, 4, 6);
  Matrix bm = testutil::random_matrix(g, 3, 6);
  auto kmap = dense(km);
  auto bmap = dense(bm);
  Matrix gram = 0.5 * km.transpose() * km + bm.transpose() * bm;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const double exact = eig.eigenvalues().maxCoeff();
  auto est = gram_combination_sq_norm(*kmap, bmap.get(), 0.5, 1.0, 1e-12, 20000);
  CHECK(est.value == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("dense text format round trip") {
  auto g = testutil::rng(23);
  Matrix m = testutil::random_matrix(g, 3, 4);
  const auto path = std::filesystem::temp_directory_path() / "spsolve_io_test.txt";
  write_dense_matrix(path.string(), m);
  Matrix back = read_dense_matrix(path.string());
  CHECK((back - m).norm() == 0.0);  // 17 significant digits round-trip

  Vector v = testutil::random_vector(g, 5);
  write_dense_vector(path.string(), v);
  CHECK((read_dense_vector(path.string()) - v).norm() == 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("dense text format rejects malformed input") {
  std::istringstream bad("2 x\n1 2\n");
  CHECK_THROWS_AS(read_dense_matrix(bad, "bad"), std::runtime_error);
  std::istringstream truncated("2 2\n1 2\n3\n");
  CHECK_THROWS_AS(read_dense_matrix(truncated, "truncated"), std::runtime_error);
  CHECK_THROWS_AS(read_dense_vector("/nonexistent/file.txt"), std::runtime_error);
}

TEST_CASE("to_dense reproduces stacked and scaled structures") {
  auto g = testutil::rng(31);
  Matrix a = testutil::random_matrix(g, 2, 3);
  Matrix b = testutil::random_matrix(g, 4, 3);
  auto st = vstack({dense(a), scaled(2.0, dense(b))});
  Matrix expect(6, 3);
  expect.topRows(2) = a;
  expect.bottomRows(4) = 2.0 * b;
  CHECK((to_dense(*st) - expect).norm() < 1e-14);
}
