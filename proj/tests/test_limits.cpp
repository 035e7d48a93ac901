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
#include <memory>

#include "bridge.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "softlimit/error.hpp"
#include "softlimit/limits.hpp"
#include "softlimit/nuclearity.hpp"

using namespace softlimit;

namespace {

using SystemPtr = std::shared_ptr<const SoftSystem>;

SystemPtr strict_chain(std::size_t horizon, std::size_t d = 2) {
  return std::make_shared<const SoftSystem>(example_unitary_chain(horizon, d, 11));
}

SystemPtr perturbed_chain(std::size_t horizon) {
  return std::make_shared<const SoftSystem>(
      example_perturbed(example_unitary_chain(horizon, 2, 11), dyadic_weights(horizon)));
}

BoundedNet from_matrices(const SystemPtr& sys, const std::vector<oracle::Mat>& ms,
                         NetTag tag = NetTag::kCustom) {
  std::vector<AlgElement> entries;
  for (const oracle::Mat& m : ms) entries.push_back(bridge::full(m));
  return BoundedNet(sys, entries, tag);
}

}  // namespace

TEST_SUITE("limits") {
  TEST_CASE("null evidence") {
    CHECK(null_evidence(std::vector<double>(10, 0.0)).is_null);
    CHECK_FALSE(null_evidence(std::vector<double>(10, 1.0)).is_null);
    std::vector<double> harmonic, slow, dyadic;
    for (int n = 0; n < 16; ++n) {
      harmonic.push_back(1.0 / (n + 1));
      slow.push_back(std::pow(n + 1.0, -0.25));
      dyadic.push_back(std::ldexp(1.0, -n));
    }
    const NullEvidence h = null_evidence(harmonic);
    CHECK(h.is_null);
    CHECK(h.loglog_slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(h.window_start == 8);
    CHECK_FALSE(null_evidence(slow).is_null);
    const NullEvidence d = null_evidence(dyadic);
    CHECK(d.is_null);
    CHECK(d.exp_fit.rate == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  TEST_CASE("unit net") {
    const SystemPtr sys = perturbed_chain(6);
    const NetVerdict v = analyze_net(BoundedNet::unit(sys));
    CHECK(v.seminorm_estimate == doctest::Approx(1.0));
    for (double d : v.jconv) CHECK(d <= 1e-14);
    CHECK_FALSE(v.null.is_null);
  }

  TEST_CASE("basic nets") {
    const SystemPtr sys = strict_chain(8);
    oracle::Rng rng(1);
    const oracle::Mat a = oracle::ginibre(2, 2, rng);
    const BoundedNet x = BoundedNet::basic(sys, 3, bridge::full(a));
    CHECK(x.tag() == NetTag::kBasic);
    CHECK(x.basic_level() == 3);
    for (std::size_t n = 0; n < 3; ++n) CHECK(x.at(n).norm() == 0.0);
    CHECK((x.at(3).block(0) - a).norm() == 0.0);
    const NetVerdict v = analyze_net(x);
    for (std::size_t m = 3; m < 8; ++m) CHECK(v.jconv[m] <= 1e-12);
    CHECK(v.jconv[7] == 0.0);
    // Unitary connecting maps preserve the norm along the net.
    CHECK(v.seminorm_estimate == doctest::Approx(oracle::op_norm(a)).epsilon(1e-12));
    CHECK(v.last_norm == doctest::Approx(oracle::op_norm(a)).epsilon(1e-12));
    CHECK_THROWS_AS(BoundedNet(sys, std::vector<AlgElement>(3, unit(FdVNAlgebra::full(2)))), Error);
  }

  TEST_CASE("null net") {
    const std::size_t horizon = 12;
    const SystemPtr sys = strict_chain(horizon);
    oracle::Rng rng(2);
    std::vector<oracle::Mat> ms;
    for (std::size_t n = 0; n < horizon; ++n) {
      oracle::Mat g = oracle::ginibre(2, 2, rng);
      ms.push_back(std::ldexp(1.0, -static_cast<int>(n)) * g / oracle::op_norm(g));
    }
    const NetVerdict v = analyze_net(from_matrices(sys, ms, NetTag::kNull));
    CHECK(v.seminorm_estimate <= std::ldexp(1.0, -static_cast<int>(horizon / 2)) * (1.0 + 1e-12));
    CHECK(v.null.is_null);
    CHECK(v.null.exp_fit.rate == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  TEST_CASE("adjoint closure and products") {
    const SystemPtr sys = perturbed_chain(7);
    oracle::Rng rng(3);
    const BoundedNet x = BoundedNet::basic(sys, 1, bridge::full(oracle::ginibre(2, 2, rng)));
    const NetVerdict a = analyze_net(x);
    const NetVerdict b = analyze_net(x.adjoint());
    for (std::size_t m = 0; m < 7; ++m) CHECK(std::abs(a.jconv[m] - b.jconv[m]) <= 1e-12);

    const auto uhf = std::make_shared<const SoftSystem>(induce(example_uhf(4)).soft);
    const BoundedNet p = BoundedNet::basic(uhf, 1, AlgElement::matrix_unit(uhf->level(1), 0, 0, 1));
    const BoundedNet q = BoundedNet::basic(uhf, 2, AlgElement::matrix_unit(uhf->level(2), 0, 3, 2));
    const NetVerdict pq = analyze_net(p * q);
    for (std::size_t m = 2; m < uhf->horizon(); ++m) CHECK(pq.jconv[m] <= 1e-12);
  }

  TEST_CASE("seminorm agrees with the limit of norms") {
    const SystemPtr sys = perturbed_chain(10);
    oracle::Rng rng(4);
    const BoundedNet x = BoundedNet::basic(sys, 2, bridge::full(oracle::ginibre(2, 2, rng)));
    const NetVerdict v = analyze_net(x);
    CHECK(std::abs(v.seminorm_estimate - v.last_norm) <= v.jconv[v.window_start] + 1e-12);
  }

  TEST_CASE("quotient positivity") {
    const std::size_t horizon = 10;
    const SystemPtr sys = strict_chain(horizon);
    oracle::Rng rng(5);

    std::vector<oracle::Mat> psd;
    for (std::size_t n = 0; n < horizon; ++n) {
      const oracle::Mat g = oracle::ginibre(2, 2, rng);
      psd.push_back(g * g.adjoint());
    }
    const QuotientVerdict v0 = quotient_positive(from_matrices(sys, psd));
    CHECK(v0.positive);
    REQUIRE(v0.lift.has_value());
    for (std::size_t n = 0; n < horizon; ++n) CHECK((v0.lift->at(n).block(0) - psd[n]).norm() == 0.0);

    // b is a rank-one projection, so min_eig(b - t 1) = -t.
    const oracle::Mat u = oracle::random_unitary(2, rng);
    const oracle::Mat b = u.col(0) * u.col(0).adjoint();
    std::vector<oracle::Mat> shifted;
    for (std::size_t n = 0; n < horizon; ++n) {
      shifted.push_back(b - (1.0 / (n + 1.0)) * oracle::Mat::Identity(2, 2));
    }
    const QuotientVerdict v1 = quotient_positive(from_matrices(sys, shifted));
    CHECK(v1.positive);
    REQUIRE(v1.lift.has_value());
    for (std::size_t n = 0; n < horizon; ++n) {
      CHECK(v1.negativity[n] == doctest::Approx(1.0 / (n + 1.0)).epsilon(1e-12));
      CHECK(oracle::min_eig(v1.lift->at(n).block(0)) >= -1e-12);
      CHECK((v1.lift->at(n).block(0) - b).norm() <= 1e-12);
    }
    CHECK(v1.fit_k == doctest::Approx(1.0).epsilon(1e-9));

    oracle::Mat s = oracle::Mat::Identity(2, 2);
    s(1, 1) = -1.0;
    const QuotientVerdict v2 = quotient_positive(from_matrices(sys, std::vector<oracle::Mat>(horizon, s)));
    CHECK_FALSE(v2.positive);
    CHECK_FALSE(v2.lift.has_value());

    try {
      quotient_positive(from_matrices(sys, std::vector<oracle::Mat>(horizon, oracle::ginibre(2, 2, rng))));
      FAIL("expected NotSelfAdjoint");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNotSelfAdjoint);
    }

    // Positive in both directions only for null nets.
    const oracle::Mat h = oracle::random_hermitian(2, rng);
    std::vector<oracle::Mat> small;
    for (std::size_t n = 0; n < horizon; ++n) small.push_back(std::ldexp(1.0, -static_cast<int>(n)) * h);
    const BoundedNet z = from_matrices(sys, small);
    CHECK(quotient_positive(z).positive);
    CHECK(quotient_positive(z.scaled(-1.0)).positive);
    CHECK(analyze_net(z).null.is_null);
    const BoundedNet c = from_matrices(sys, std::vector<oracle::Mat>(horizon, s));
    CHECK_FALSE(quotient_positive(c.scaled(-1.0)).positive);
  }

  TEST_CASE("limit probes") {
    const std::size_t horizon = 7;
    const SystemPtr strict = strict_chain(horizon);
    std::vector<CPMap> top;
    for (std::size_t n = 0; n < horizon; ++n) top.push_back(strict->j(horizon - 1, n));
    oracle::Rng rng(6);
    std::vector<BoundedNet> nets;
    for (std::size_t l = 0; l < 3; ++l) nets.push_back(BoundedNet::basic(strict, l, bridge::full(oracle::ginibre(2, 2, rng))));
    const LimitProbeReport rep = limit_map_probe(*strict, top, nets);
    for (const LimitProbeRow& r : rep.rows) {
      if (r.n >= nets[r.net].basic_level()) CHECK(r.cauchy <= 1e-12);
    }
    for (double c : rep.consistency) CHECK(c <= 1e-12);

    // Trace states composed with the connecting maps of a perturbed chain:
    // every image is the scalar tau(a).
    const SystemPtr soft = perturbed_chain(horizon);
    const FdVNAlgebra one = FdVNAlgebra::full(1);
    std::vector<CPMap> states;
    for (std::size_t n = 0; n < horizon; ++n) states.push_back(compose(trace_state_map(soft->level(horizon - 1), one), soft->j(horizon - 1, n)));
    const oracle::Mat a = oracle::ginibre(2, 2, rng);
    const LimitProbeReport srep = limit_map_probe(*soft, states, {BoundedNet::basic(soft, 0, bridge::full(a))});
    CHECK(std::abs(srep.limit_estimate[0].block(0)(0, 0) - a.trace() / 2.0) <= 1e-12);
    CHECK(srep.consistency[0] <= 1e-12);

    std::vector<oracle::Mat> decaying;
    for (std::size_t n = 0; n < horizon; ++n) decaying.push_back(std::ldexp(1.0, -static_cast<int>(n)) * oracle::random_unitary(2, rng));
    const BoundedNet nul = from_matrices(strict, decaying, NetTag::kNull);
    const LimitProbeReport nrep = limit_map_probe(*strict, top, {nul});
    for (const LimitProbeRow& r : nrep.rows) CHECK(r.image_norm <= nul.at(r.n).norm() + 1e-12);
    CHECK(nrep.limit_estimate[0].norm() <= std::ldexp(1.0, -static_cast<int>(horizon - 1)) + 1e-12);

    std::vector<CPMap> bad(top.begin(), top.end() - 1);
    CHECK_THROWS_AS(limit_map_probe(*strict, bad, nets), Error);
  }

  TEST_CASE("truncation cpa") {
    const std::size_t horizon = 5;
    const SystemPtr sys = strict_chain(horizon);
    oracle::Rng rng(7);
    const BoundedNet x = BoundedNet::basic(sys, 0, bridge::full(oracle::ginibre(2, 2, rng)));
    const AlgElement px = net_to_product(x);
    for (std::size_t m = 1; m <= horizon; ++m) {
      const TruncationCpa t = truncation_cpa(*sys, m);
      CHECK(t.psi.is_cpc());
      CHECK(t.phi.is_cpc());
      CHECK((t.phi.apply(t.psi.apply(px)) - px).norm() <= 1e-12);
      if (m == horizon) {
        CHECK(t.psi.choi_distance(CPMap::identity(t.full)) <= 1e-14);
        CHECK(t.phi.choi_distance(CPMap::identity(t.full)) <= 1e-14);
      }
    }
    const auto parts = product_to_entries(px, *sys, horizon);
    for (std::size_t n = 0; n < horizon; ++n) CHECK((parts[n] - x.at(n)).norm() == 0.0);
    try {
      truncation_cpa(*perturbed_chain(horizon), 2);
      FAIL("expected NotStrict");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNotStrict);
    }
    CHECK_THROWS_AS(truncation_cpa(*sys, 0), Error);
  }
}
