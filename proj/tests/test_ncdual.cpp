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

#include "bridge.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "softlimit/error.hpp"
#include "softlimit/ncdual.hpp"
#include "softlimit/nuclearity.hpp"
#include "softlimit/random.hpp"

using namespace softlimit;

namespace {

const FdVNAlgebra kM2 = FdVNAlgebra::full(2);

// a |-> <v, a v> as a map M_n -> M_1.
CPMap vector_state(const oracle::Mat& v) {
  const FdVNAlgebra n = FdVNAlgebra::full(static_cast<std::size_t>(v.rows()));
  return CPMap::from_linear(n, FdVNAlgebra::full(1), [&](const AlgElement& a) {
    return bridge::full(v.adjoint() * a.block(0) * v);
  });
}

// Positive unital map between diagonal algebras given by a row-stochastic
// matrix: (T f)(i) = sum_k T(i,k) f(k).
CPMap stochastic(const Eigen::MatrixXd& t) {
  const FdVNAlgebra src = FdVNAlgebra::diagonal(static_cast<std::size_t>(t.cols()));
  const FdVNAlgebra dst = FdVNAlgebra::diagonal(static_cast<std::size_t>(t.rows()));
  return CPMap::from_linear(src, dst, [&](const AlgElement& f) {
    std::vector<CMatrix> out;
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      Complex s = 0.0;
      for (Eigen::Index k = 0; k < t.cols(); ++k) s += t(i, k) * f.block(static_cast<std::size_t>(k))(0, 0);
      out.push_back(CMatrix::Constant(1, 1, s));
    }
    return AlgElement(dst, out);
  });
}

Eigen::MatrixXd random_stochastic(int rows, int cols, oracle::Rng& rng) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXd t(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < cols; ++k) t(i, k) = u(rng);
    t.row(i) /= t.row(i).sum();
  }
  return t;
}

}  // namespace

TEST_SUITE("ncdual") {
  TEST_CASE("matrix states") {
    const OperatorSystemSpace whole = OperatorSystemSpace::whole(kM2);
    oracle::Rng rng(1);
    const oracle::Mat u = oracle::random_unitary(2, rng);
    const MatrixState x = restrict_state(whole, vector_state(u.col(0)));
    CHECK(x.level == 1);
    CHECK(x.verified);
    const MatrixState y = make_state(whole, 1, x.values);
    CHECK(y.verified);
    CHECK(y.margin >= -1e-7);

    std::vector<CMatrix> bad = x.values;
    for (CMatrix& v : bad) v *= 2.0;
    try {
      make_state(whole, 1, bad);
      FAIL("expected FlagViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kFlagViolation);
    }
    CHECK_THROWS_AS(restrict_state(whole, 2.0 * vector_state(u.col(0))), Error);
  }

  TEST_CASE("sampled ucp maps") {
    Rng rng(2);
    for (std::size_t k = 1; k <= 3; ++k) {
      const CPMap f = sample_ucp_map(FdVNAlgebra({2, 1}), k, rng);
      CHECK(f.is_ucp());
      CHECK(f.flags().unit_defect <= 1e-12);
    }
  }

  TEST_CASE("kadison evaluation") {
    const OperatorSystemSpace whole = OperatorSystemSpace::whole(kM2);
    Rng rng(3);
    oracle::Rng orng(3);
    for (int t = 0; t < 20; ++t) {
      const std::size_t k = 1 + t % 3;
      const MatrixState x = restrict_state(whole, sample_ucp_map(kM2, k, rng));
      const auto kk = static_cast<Eigen::Index>(k);
      CHECK((kadison_eval(whole, unit(kM2), x) - CMatrix::Identity(kk, kk)).norm() <= 1e-12);
      const oracle::Mat g = oracle::ginibre(2, 2, orng);
      const oracle::Mat p = g * g.adjoint();
      CHECK(oracle::min_eig(kadison_eval(whole, bridge::full(p), x)) >= -1e-12);
      const oracle::Mat a = oracle::ginibre(2, 2, orng);
      const oracle::Mat b = oracle::ginibre(2, 2, orng);
      const CMatrix lin = kadison_eval(whole, bridge::full(a + 2.0 * b), x) -
                          kadison_eval(whole, bridge::full(a), x) - 2.0 * kadison_eval(whole, bridge::full(b), x);
      CHECK(lin.norm() <= 1e-12);
    }

    // Scalar states pair with density matrices.
    const oracle::Mat g = oracle::ginibre(2, 2, orng);
    oracle::Mat rho = g * g.adjoint();
    rho /= rho.trace();
    const CPMap pairing = CPMap::from_linear(kM2, FdVNAlgebra::full(1), [&](const AlgElement& a) {
      return bridge::full(oracle::Mat::Constant(1, 1, (rho * a.block(0)).trace()));
    });
    const MatrixState x = restrict_state(whole, pairing);
    const oracle::Mat a = oracle::ginibre(2, 2, orng);
    CHECK(std::abs(kadison_eval(whole, bridge::full(a), x)(0, 0) - (rho * a).trace()) <= 1e-12);

    const OperatorSystemSpace off(kM2, {unit(kM2), AlgElement::matrix_unit(kM2, 0, 0, 1), AlgElement::matrix_unit(kM2, 0, 1, 0)});
    const MatrixState xo = restrict_state(off, pairing);
    try {
      kadison_eval(off, AlgElement::matrix_unit(kM2, 0, 0, 0), xo);
      FAIL("expected NotInSpan");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNotInSpan);
    }
  }

  TEST_CASE("states bound the order norm") {
    const OperatorSystemSpace whole = OperatorSystemSpace::whole(kM2);
    Rng rng(4);
    oracle::Rng orng(4);
    std::vector<MatrixState> states;
    for (int s = 0; s < 50; ++s) states.push_back(restrict_state(whole, sample_ucp_map(kM2, 1 + s % 2, rng)));
    const MatrixState identity = restrict_state(whole, CPMap::identity(kM2));
    for (int t = 0; t < 100; ++t) {
      const oracle::Mat a = oracle::ginibre(2, 2, orng);
      const double norm = oracle::op_norm(a);
      CHECK(order_norm(bridge::full(a)) == doctest::Approx(norm).epsilon(1e-12));
      double best = 0.0;
      for (const MatrixState& x : states) best = std::max(best, oracle::op_norm(kadison_eval(whole, bridge::full(a), x)));
      CHECK(best <= norm + 1e-12);
      CHECK(oracle::op_norm(kadison_eval(whole, bridge::full(a), identity)) == doctest::Approx(norm).epsilon(1e-9));
      // Hermitian elements are normed by vector states.
      const oracle::Mat h = 0.5 * (a + a.adjoint());
      const oracle::Eigh e = oracle::jacobi_eigh(h);
      const int top = std::abs(e.values.front()) > std::abs(e.values.back()) ? 0 : 1;
      const MatrixState v = restrict_state(whole, vector_state(e.vectors.col(top)));
      CHECK(std::abs(kadison_eval(whole, bridge::full(h), v)(0, 0)) == doctest::Approx(oracle::op_norm(h)).epsilon(1e-9));
    }
  }

  TEST_CASE("pushback") {
    const OperatorSystemSpace whole = OperatorSystemSpace::whole(kM2);
    Rng rng(5);
    const MatrixState x = restrict_state(whole, sample_ucp_map(kM2, 2, rng));
    const MatrixState same = pushback(CPMap::identity(kM2), whole, x);
    for (std::size_t i = 0; i < x.values.size(); ++i) CHECK((same.values[i] - x.values[i]).norm() <= 1e-14);

    // Contravariance on a random ucp pair M_2 -> M_3 -> M_2.
    oracle::Rng orng(5);
    const CPMap phi = bridge::to_cpmap(oracle::random_kraus(2, 3, 2, true, orng));
    const CPMap psi = bridge::to_cpmap(oracle::random_kraus(3, 2, 2, true, orng));
    const OperatorSystemSpace w3 = OperatorSystemSpace::whole(FdVNAlgebra::full(3));
    const MatrixState direct = pushback(compose(psi, phi), whole, x);
    const MatrixState stepwise = pushback(phi, whole, pushback(psi, w3, x));
    for (std::size_t i = 0; i < x.values.size(); ++i) CHECK((direct.values[i] - stepwise.values[i]).norm() <= 1e-10);
    CHECK(direct.verified);

    const DualMap dual{phi, whole, w3};
    const MatrixState via_dual = dual(pushback(psi, w3, x));
    for (std::size_t i = 0; i < x.values.size(); ++i) CHECK((via_dual.values[i] - stepwise.values[i]).norm() <= 1e-14);

    try {
      pushback(phi, w3, x);
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kDimensionMismatch);
    }
  }

  TEST_CASE("classical pullback on diagonal systems") {
    // phi(e1) = (1, 0, 1/2), phi(e2) = (0, 1, 1/2) from C^2 to C^3.
    Eigen::MatrixXd t(3, 2);
    t << 1.0, 0.0, 0.0, 1.0, 0.5, 0.5;
    const CPMap phi = stochastic(t);
    CHECK(phi.is_ucp());
    const FdVNAlgebra c3 = FdVNAlgebra::diagonal(3);
    const OperatorSystemSpace s2 = OperatorSystemSpace::whole(FdVNAlgebra::diagonal(2));
    const OperatorSystemSpace s3 = OperatorSystemSpace::whole(c3);
    const double p[3] = {0.2, 0.3, 0.5};
    const CPMap state = CPMap::from_linear(c3, FdVNAlgebra::full(1), [&](const AlgElement& f) {
      Complex s = 0.0;
      for (std::size_t i = 0; i < 3; ++i) s += p[i] * f.block(i)(0, 0);
      return AlgElement(FdVNAlgebra::full(1), {CMatrix::Constant(1, 1, s)});
    });
    const MatrixState back = pushback(phi, s2, restrict_state(s3, state));
    CHECK(back.values[0](0, 0).real() == doctest::Approx(0.2 + 0.25));
    CHECK(back.values[1](0, 0).real() == doctest::Approx(0.3 + 0.25));
  }

  TEST_CASE("projective defects") {
    const SoftSystem strict = example_unitary_chain(5, 2, 3);
    for (const ProjectiveRow& r : projective_defect(strict)) {
      CHECK(r.dual_defect <= 1e-12);
      CHECK(r.primal_defect <= 1e-12);
    }

    const SoftSystem soft = example_perturbed(example_unitary_chain(6, 2, 3), dyadic_weights(6));
    ProjectiveOptions opts;
    opts.k = 2;
    opts.samples = 3;
    const std::vector<ProjectiveRow> rows = projective_defect(soft, opts);
    CHECK(rows.size() == 3 * 20);
    for (const ProjectiveRow& r : rows) {
      CHECK(r.dual_defect <= r.primal_defect + 1e-12);
      CHECK(r.k == 2);
    }
    opts.max_triples = 4;
    CHECK(projective_defect(soft, opts).size() == 12);
    opts.k = 9;
    CHECK_THROWS_AS(projective_defect(soft, opts), Error);
  }

  TEST_CASE("scalar transport on a commutative system") {
    // Stochastic chain on C^3 mixed with the uniform distribution.
    const std::size_t horizon = 5;
    oracle::Rng orng(6);
    std::vector<Eigen::MatrixXd> steps;
    std::vector<CPMap> maps;
    for (std::size_t n = 0; n + 1 < horizon; ++n) {
      steps.push_back(random_stochastic(3, 3, orng));
      maps.push_back(stochastic(steps.back()));
    }
    const std::vector<double> eps = dyadic_weights(horizon);
    const SoftSystem sys = example_perturbed(
        SoftSystem::from_steps(std::vector<FdVNAlgebra>(horizon, FdVNAlgebra::diagonal(3)), maps), eps);

    auto strict_j = [&](std::size_t n, std::size_t m) {
      Eigen::MatrixXd j = Eigen::MatrixXd::Identity(3, 3);
      for (std::size_t k = m; k < n; ++k) j = steps[k] * j;
      return j;
    };
    auto soft_j = [&](std::size_t n, std::size_t m) -> Eigen::MatrixXd {
      if (n == m) return Eigen::MatrixXd::Identity(3, 3);
      return (1.0 - eps[m]) * strict_j(n, m) + eps[m] * Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
    };

    ProjectiveOptions opts;
    opts.k = 1;
    opts.samples = 2;
    for (const ProjectiveRow& r : projective_defect(sys, opts)) {
      Rng rng(r.seed);
      const CPMap x = sample_ucp_map(sys.level(r.n), 1, rng);
      Eigen::RowVector3d prob;
      for (std::size_t i = 0; i < 3; ++i) prob(i) = x.apply(AlgElement::matrix_unit(sys.level(r.n), i, 0, 0)).block(0)(0, 0).real();
      CHECK(prob.sum() == doctest::Approx(1.0));
      const Eigen::MatrixXd diff = soft_j(r.n, r.l) - soft_j(r.n, r.m) * soft_j(r.m, r.l);
      const Eigen::RowVector3d transported = prob * diff;
      // Probes: the unit and the three point masses.
      double dual = std::abs(transported.sum());
      for (int i = 0; i < 3; ++i) dual = std::max(dual, std::abs(transported(i)));
      CHECK(r.dual_defect == doctest::Approx(dual).epsilon(1e-9).scale(1e-12));
      double primal = diff.rowwise().sum().cwiseAbs().maxCoeff();
      for (int i = 0; i < 3; ++i) primal = std::max(primal, diff.col(i).cwiseAbs().maxCoeff());
      CHECK(r.primal_defect == doctest::Approx(primal).epsilon(1e-9).scale(1e-12));
    }
  }
}
