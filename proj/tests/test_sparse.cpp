//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <random>

#include <doctest.h>

#include "brt/errors.hpp"
#include "brt/sparse.hpp"

using brt::DepositionMatrix;
using brt::Triplet;

TEST_CASE("dose product on the identity matrix") {
  DepositionMatrix m(2, 2, {{0, 0, 1.0}, {1, 1, 1.0}});
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> d = brt::dose(m, x);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 2.0);
}

TEST_CASE("zero fluence gives zero dose") {
  DepositionMatrix m(3, 2, {{0, 0, 2.0}, {2, 1, 5.0}});
  const std::vector<double> d = brt::dose(m, std::vector<double>{0.0, 0.0});
  for (double v : d) CHECK(v == 0.0);
}

TEST_CASE("random sparse product matches the dense oracle") {
  std::mt19937_64 engine(42);
  std::uniform_real_distribution<double> value(0.1, 2.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 5, cols = 3;
    std::vector<double> dense(rows * cols, 0.0);
    std::vector<Triplet> entries;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (coin(engine) < 0.6) {
          dense[r * cols + c] = value(engine);
          entries.push_back({r, c, dense[r * cols + c]});
        }
      }
    }
    DepositionMatrix m(rows, cols, entries);
    std::vector<double> x(cols);
    for (double& v : x) v = value(engine);

    const std::vector<double> d = brt::dose(m, x);
    for (int r = 0; r < rows; ++r) {
      double expected = 0.0;
      for (int c = 0; c < cols; ++c) expected += dense[r * cols + c] * x[c];
      CHECK(d[r] == doctest::Approx(expected).epsilon(1e-12));
    }

    // Transpose kernel against the same dense data.
    std::vector<double> w(rows);
    for (double& v : w) v = value(engine);
    std::vector<double> g(cols);
    m.apply_transpose(w, g);
    for (int c = 0; c < cols; ++c) {
      double expected = 0.0;
      for (int r = 0; r < rows; ++r) expected += dense[r * cols + c] * w[r];
      CHECK(g[c] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("dimension mismatch is rejected naming both dimensions") {
  DepositionMatrix m(2, 3, {{0, 0, 1.0}});
  try {
    brt::dose(m, std::vector<double>{1.0, 2.0});
    FAIL("expected config_error");
  } catch (const brt::config_error& e) {
    const std::string message = e.what();
    CHECK(message.find('2') != std::string::npos);
    CHECK(message.find('3') != std::string::npos);
  }
}

TEST_CASE("duplicate triplets are summed, zeros dropped, negatives rejected") {
  DepositionMatrix m(2, 2, {{0, 1, 1.5}, {0, 1, 0.5}, {1, 0, 0.0}});
  CHECK(m.nonzero_count() == 1);
  CHECK(m.row_empty(1));
  CHECK(!m.row_empty(0));
  const std::vector<double> d = brt::dose(m, std::vector<double>{1.0, 1.0});
  CHECK(d[0] == 2.0);

  CHECK_THROWS_AS(DepositionMatrix(2, 2, {{0, 0, -1.0}}), brt::config_error);
  CHECK_THROWS_AS(DepositionMatrix(2, 2, {{5, 0, 1.0}}), brt::config_error);
}

TEST_CASE("matrix 1-norm equals the max dense column sum") {
  DepositionMatrix m(3, 2, {{0, 0, 1.0}, {1, 0, 2.5}, {2, 1, 3.0}});
  CHECK(m.max_column_abs_sum() == doctest::Approx(3.5));
}

TEST_CASE("triplet export round-trips through the constructor") {
  DepositionMatrix m(3, 3, {{2, 1, 0.25}, {0, 0, 1.0}, {1, 2, 0.125}});
  DepositionMatrix copy(3, 3, m.to_triplets());
  CHECK(copy.nonzero_count() == m.nonzero_count());
  const std::vector<double> x{1.0, 2.0, 4.0};
  CHECK(brt::dose(copy, x) == brt::dose(m, x));
}
