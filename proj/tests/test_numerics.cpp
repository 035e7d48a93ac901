// Copyright 2026 The softlimit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "softlimit/error.hpp"
#include "softlimit/numerics.hpp"
#include "softlimit/random.hpp"

using namespace softlimit;

TEST_SUITE("numerics") {
  TEST_CASE("eigenvalues of small matrices") {
    HermEigen e = herm_eigen(CMatrix::Identity(2, 2));
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(1.0));

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = -1.0;
    e = herm_eigen(d);
    CHECK(e.values(0) == doctest::Approx(-1.0));
    CHECK(e.values(1) == doctest::Approx(3.0));

    CMatrix x = CMatrix::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1.0;
    e = herm_eigen(x);
    CHECK(e.values(0) == doctest::Approx(-1.0));
    CHECK(e.values(1) == doctest::Approx(1.0));
  }

  TEST_CASE("eigen errors") {
    CHECK_THROWS_AS(herm_eigen(CMatrix::Zero(2, 3)), Error);
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 1) = 1.0;
    try {
      herm_eigen(a);
      FAIL("expected NotHermitian");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::kNotHermitian);
    }
  }

  TEST_CASE("reconstruction on random Hermitian matrices") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + static_cast<std::size_t>(trial % 64);
      const CMatrix h = random_hermitian(n, rng);
      const HermEigen e = herm_eigen(h);
      const CMatrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
      CHECK((back - h).norm() <= 1e-10 * static_cast<double>(n) * h.norm());
      for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i - 1) <= e.values(i));
    }
  }

  TEST_CASE("eigenvalues agree with the Jacobi reference") {
    oracle::Rng rng(5);
    for (int n = 1; n <= 12; ++n) {
      const oracle::Mat h = oracle::random_hermitian(n, rng);
      const oracle::Eigh ref = oracle::jacobi_eigh(h);
      const RVector got = herm_eigenvalues(h, Tolerance::for_dim(n));
      for (int i = 0; i < n; ++i) CHECK(got(i) == doctest::Approx(ref.values[i]).epsilon(1e-10));
    }
  }

  TEST_CASE("operator norm") {
    CHECK(op_norm(CMatrix::Zero(3, 3)) == 0.0);
    Rng rng(3);
    CHECK(op_norm(random_unitary(3, rng)) == doctest::Approx(1.0).epsilon(1e-12));
    CMatrix j = CMatrix::Zero(2, 2);
    j(0, 0) = j(0, 1) = j(1, 1) = 1.0;
    // Largest root of l^2 - 3l + 1 = 0, square-rooted.
    const double golden = std::sqrt((3.0 + std::sqrt(5.0)) / 2.0);
    CHECK(op_norm(j) == doctest::Approx(golden).epsilon(1e-13));
    CHECK(golden == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-13));
  }

  TEST_CASE("operator norm of Hermitian matrices is the spectral radius") {
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
      const CMatrix h = random_hermitian(1 + t % 7, rng);
      CHECK(op_norm(h) == doctest::Approx(std::max(std::abs(min_eig(h)), std::abs(max_eig(h)))).epsilon(1e-10));
    }
  }

  TEST_CASE("positivity with tolerance") {
    CHECK(min_eig(CMatrix::Identity(3, 3)) == doctest::Approx(1.0));
    CHECK(is_psd(CMatrix::Identity(3, 3)));
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1e-15;
    Tolerance tol;
    tol.abs_eps = 1e-12;
    CHECK(is_psd(d, tol));
    d(1, 1) = -1e-3;
    CHECK_FALSE(is_psd(d, tol));
    CMatrix b(2, 2);
    b << 2.0, 1.0, 1.0, 2.0;
    CHECK(min_eig(b) == doctest::Approx(1.0));
  }

  TEST_CASE("Kronecker products") {
    CHECK((kron(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)) - CMatrix::Identity(4, 4)).norm() == 0.0);
    CHECK((kron(matrix_unit(2, 0, 0), matrix_unit(2, 0, 0)) - matrix_unit(4, 0, 0)).norm() == 0.0);
    Rng rng(21);
    for (int t = 0; t < 40; ++t) {
      const std::size_t p = 2 + t % 3, q = 2 + (t / 3) % 3;
      const CMatrix a = random_ginibre(p, p, rng), b = random_ginibre(q, q, rng);
      const CMatrix c = random_ginibre(p, p, rng), d = random_ginibre(q, q, rng);
      CHECK(op_norm(kron(a, b)) == doctest::Approx(oracle::op_norm(a) * oracle::op_norm(b)).epsilon(1e-10));
      CHECK((kron(a, b) * kron(c, d) - kron(a * c, b * d)).norm() <= 1e-12 * (1.0 + kron(a * c, b * d).norm()));
      const CMatrix e = random_ginibre(2, 2, rng);
      CHECK((kron(kron(a, b), e) - kron(a, kron(b, e))).norm() <= 1e-12);
    }
  }

  TEST_CASE("square roots") {
    Rng rng(4);
    const CMatrix p = random_psd(4, 6, rng);
    const CMatrix s = psd_sqrt(p);
    CHECK((s * s - p).norm() <= 1e-10 * p.norm());
    const CMatrix r = psd_inv_sqrt(p);
    CHECK((r * p * r - CMatrix::Identity(4, 4)).norm() <= 1e-9);
  }
}
