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

#include "softlimit/nuclearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "softlimit/error.hpp"
#include "softlimit/parallel.hpp"
#include "softlimit/random.hpp"
#include "softlimit/sdp.hpp"

namespace softlimit {

CpaSystem::CpaSystem(OperatorSystemSpace s, std::vector<CPMap> down, std::vector<CPMap> up,
                     std::vector<Probe> probes, std::string name)
    : s_(std::move(s)),
      down_(std::move(down)),
      up_(std::move(up)),
      probes_(std::move(probes)),
      name_(std::move(name)) {
  if (down_.size() != up_.size() || down_.empty()) {
    throw Error(ErrorCode::kDimensionMismatch, "need matching nonempty down/up lists");
  }
  for (std::size_t n = 0; n < down_.size(); ++n) {
    const std::string tag = " at level " + std::to_string(n);
    if (!(down_[n].source() == s_.ambient()) || !(up_[n].target() == s_.ambient())) {
      throw Error(ErrorCode::kDimensionMismatch, "down/up must start/end at the ambient" + tag);
    }
    if (down_[n].target().num_blocks() != 1 || !(up_[n].source() == down_[n].target())) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "down must land in a matrix algebra that up starts from" + tag);
    }
    if (!down_[n].is_cpc()) throw Error(ErrorCode::kFlagViolation, "down is not cpc" + tag);
    if (!up_[n].is_cpc()) throw Error(ErrorCode::kFlagViolation, "up is not cpc" + tag);
    if (s_.dim() < s_.ambient().dim()) {
      const FdVNAlgebra& mat = up_[n].source();
      for (std::size_t k = 0; k < mat.dim(); ++k) {
        if (!s_.contains(up_[n].apply(AlgElement::basis_unit(mat, k)), 1e-8)) {
          throw Error(ErrorCode::kNotInSpan, "up leaves the span of S" + tag);
        }
      }
    }
  }
  for (const Probe& p : probes_) {
    if (!(p.element.algebra() == s_.ambient())) {
      throw Error(ErrorCode::kDimensionMismatch, "probe " + p.id + " is not in the ambient");
    }
  }
}

double CpaSystem::reconstruction_defect(std::size_t n, const AlgElement& a) const {
  return (up_.at(n).apply(down_.at(n).apply(a)) - a).norm();
}

CpaSystem CpaSystem::select(const std::vector<std::size_t>& indices) const {
  std::vector<CPMap> d, u;
  for (std::size_t i : indices) {
    d.push_back(down_.at(i));
    u.push_back(up_.at(i));
  }
  return CpaSystem(s_, std::move(d), std::move(u), probes_, name_ + "/sub");
}

InducedSystem induce(const CpaSystem& cpa) {
  for (std::size_t n = 0; n < cpa.size(); ++n) {
    if (!cpa.down()[n].is_ucp() || !cpa.up()[n].is_ucp()) {
      throw Error(ErrorCode::kFlagViolation,
                  "induced system needs ucp maps; level " + std::to_string(n) + " fails");
    }
  }
  const std::size_t horizon = cpa.size();
  std::vector<FdVNAlgebra> levels;
  for (std::size_t n = 0; n < horizon; ++n) levels.push_back(cpa.down()[n].target());
  std::vector<std::vector<CPMap>> maps(horizon);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t n = 1; n < horizon; ++n) {
    maps[n].resize(n);
    for (std::size_t m = 0; m < n; ++m) pairs.emplace_back(n, m);
  }
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto [n, m] = pairs[i];
    maps[n][m] = compose(cpa.down()[n], cpa.up()[m]);
  });

  InducedSystem out;
  out.soft = SoftSystem(levels, std::move(maps), cpa.name() + "/induced", "cpa");
  out.split.source = cpa.ambient();
  out.split.s = cpa.down();
  out.probes = basis_probes(out.soft);
  for (std::size_t l = 0; l < horizon; ++l) {
    for (const Probe& p : cpa.probes()) {
      out.probes[l].push_back({"down(" + p.id + ")", cpa.down()[l].apply(p.element)});
    }
  }

  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> triples;
  for (std::size_t m = 1; m < horizon; ++m) {
    for (std::size_t n = m + 1; n < horizon; ++n) {
      for (std::size_t l = 0; l < m; ++l) triples.emplace_back(m, n, l);
    }
  }
  std::vector<std::vector<InequalityRow>> cells(triples.size());
  parallel_for(triples.size(), [&](std::size_t t) {
    const auto [m, n, l] = triples[t];
    for (const Probe& p : out.probes[l]) {
      const AlgElement lhs = out.soft.push(n, l, p.element) -
                             out.soft.push(n, m, out.soft.push(m, l, p.element));
      const AlgElement upl = cpa.up()[l].apply(p.element);
      const AlgElement rhs = upl - cpa.up()[m].apply(cpa.down()[m].apply(upl));
      cells[t].push_back({m, n, l, p.id, lhs.norm(), rhs.norm()});
    }
  });
  out.worst_violation = -std::numeric_limits<double>::infinity();
  for (auto& c : cells) {
    for (InequalityRow& r : c) {
      out.worst_violation = std::max(out.worst_violation, r.lhs - r.rhs);
      out.inequality.push_back(std::move(r));
    }
  }
  if (out.inequality.empty()) out.worst_violation = 0.0;
  return out;
}

CpaRefinement refine_summable_cpa(const CpaSystem& cpa, double tol) {
  CpaRefinement out;
  const std::size_t count = cpa.size();
  std::vector<std::vector<double>> defects;  // per selected position, per probe
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t pos = out.indices.size();
    const double threshold = std::ldexp(1.0, -static_cast<int>(pos));
    double bound = 0.0;
    for (std::size_t m : out.indices) {
      const CPMap diff = cpa.up()[m] - compose(cpa.up()[c], compose(cpa.down()[c], cpa.up()[m]));
      bound = std::max(bound, cb_norm(diff));
    }
    if (!(bound < threshold)) continue;
    std::vector<double> d;
    for (const Probe& p : cpa.probes()) d.push_back(cpa.reconstruction_defect(c, p.element));
    const double worst = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
    out.rows.push_back({pos, c, bound, threshold, worst});
    out.indices.push_back(c);
    defects.push_back(std::move(d));
  }
  // A stall means every level after the last selection was rejected.
  const bool stalled = out.indices.empty() || out.indices.back() + 1 < count;
  if (stalled || out.indices.size() < 3) {
    throw Error(ErrorCode::kHorizonTooShort,
                "summable CPA refinement selected " + std::to_string(out.indices.size()) +
                    " of " + std::to_string(count) + " levels");
  }
  for (std::size_t i = 0; i < cpa.probes().size(); ++i) {
    const double first = defects.front()[i];
    const double last = defects.back()[i];
    if (last > tol && last > 0.5 * first) {
      throw Error(ErrorCode::kHorizonTooShort,
                  "reconstruction of probe '" + cpa.probes()[i].id + "' does not converge: " +
                      std::to_string(last) + " at the last selected level");
    }
  }
  out.selected = cpa.select(out.indices);
  return out;
}

AlgElement interval_function(const FdVNAlgebra& fine, double (*f)(double)) {
  const std::size_t points = fine.num_blocks();
  std::vector<CMatrix> blocks;
  for (std::size_t q = 0; q < points; ++q) {
    const double t = points == 1 ? 0.0 : static_cast<double>(q) / static_cast<double>(points - 1);
    blocks.push_back(CMatrix::Constant(1, 1, Complex(f(t), 0.0)));
  }
  return AlgElement(fine, std::move(blocks));
}

CpaSystem example_interval(const std::vector<std::size_t>& grids, std::size_t fine_intervals) {
  if (grids.empty() || fine_intervals == 0) {
    throw Error(ErrorCode::kBadGrid, "need at least one grid and a positive fine grid");
  }
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const std::size_t g = grids[i];
    if (g == 0 || fine_intervals % g != 0) {
      throw Error(ErrorCode::kBadGrid, "grid " + std::to_string(g) + " does not divide " +
                                           std::to_string(fine_intervals));
    }
    if (i > 0 && g < grids[i - 1]) {
      throw Error(ErrorCode::kBadGrid, "grids must not decrease");
    }
  }
  const std::size_t points = fine_intervals + 1;
  const FdVNAlgebra fine = FdVNAlgebra::diagonal(points);
  std::vector<CPMap> down, up;
  for (std::size_t g : grids) {
    const std::size_t stride = fine_intervals / g;
    const auto nodes = static_cast<Eigen::Index>(g + 1);
    const FdVNAlgebra mat = FdVNAlgebra::full(g + 1);
    std::vector<CMatrix> dchoi(points);
    for (std::size_t k = 0; k <= g; ++k) {
      CMatrix c = CMatrix::Zero(nodes, nodes);
      c(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;
      dchoi[k * stride] = std::move(c);
    }
    std::vector<CMatrix> uchoi(points);
    for (std::size_t q = 0; q < points; ++q) {
      const double t = static_cast<double>(q) / static_cast<double>(fine_intervals);
      CMatrix c = CMatrix::Zero(nodes, nodes);
      for (Eigen::Index k = 0; k < nodes; ++k) {
        const double h = 1.0 - std::abs(t * static_cast<double>(g) - static_cast<double>(k));
        if (h > 0.0) c(k, k) = h;
      }
      uchoi[q] = std::move(c);
    }
    down.emplace_back(fine, mat, std::move(dchoi));
    up.emplace_back(mat, fine, std::move(uchoi));
  }
  std::vector<Probe> probes{
      {"one", interval_function(fine, [](double) { return 1.0; })},
      {"x", interval_function(fine, [](double t) { return t; })},
      {"x2", interval_function(fine, [](double t) { return t * t; })},
  };
  return CpaSystem(OperatorSystemSpace::whole(fine), std::move(down), std::move(up),
                   std::move(probes), "interval");
}

CpaSystem example_uhf(std::size_t depth) {
  if (depth > 6) throw Error(ErrorCode::kInvalidArgument, "uhf depth must be at most 6");
  const std::size_t big = std::size_t{1} << depth;
  const FdVNAlgebra amb = FdVNAlgebra::full(big);
  std::vector<CPMap> down, up;
  for (std::size_t n = 0; n <= depth; ++n) {
    const std::size_t small = std::size_t{1} << n;
    const std::size_t rest = big / small;
    const FdVNAlgebra mat = FdVNAlgebra::full(small);
    const auto m = static_cast<Eigen::Index>(small);
    // Index i of M_big is (a, b) with a in [small], b in [rest].
    CMatrix dc = CMatrix::Zero(static_cast<Eigen::Index>(big) * m, static_cast<Eigen::Index>(big) * m);
    const double w = 1.0 / static_cast<double>(rest);
    for (std::size_t i = 0; i < big; ++i) {
      for (std::size_t j = 0; j < big; ++j) {
        if (i % rest != j % rest) continue;
        const auto ai = static_cast<Eigen::Index>(i / rest);
        const auto aj = static_cast<Eigen::Index>(j / rest);
        dc(static_cast<Eigen::Index>(i) * m + ai, static_cast<Eigen::Index>(j) * m + aj) = w;
      }
    }
    down.emplace_back(amb, mat, std::vector<CMatrix>{std::move(dc)});
    const CMatrix one = CMatrix::Identity(static_cast<Eigen::Index>(rest),
                                          static_cast<Eigen::Index>(rest));
    up.push_back(CPMap::from_linear(mat, amb, [&](const AlgElement& x) {
      return AlgElement(amb, {kron(x.block(0), one)});
    }));
  }
  std::vector<Probe> probes;
  probes.push_back({"unit", AlgElement::unit(amb)});
  Rng rng(20260101);
  for (std::size_t n = 0; n <= depth; ++n) {
    const std::size_t small = std::size_t{1} << n;
    const CMatrix one = CMatrix::Identity(static_cast<Eigen::Index>(big / small),
                                          static_cast<Eigen::Index>(big / small));
    probes.push_back({"local" + std::to_string(n),
                      AlgElement(amb, {kron(random_hermitian(small, rng), one)})});
  }
  return CpaSystem(OperatorSystemSpace::whole(amb), std::move(down), std::move(up),
                   std::move(probes), "uhf");
}

SoftSystem example_perturbed(const SoftSystem& base, const std::vector<double>& eps) {
  if (eps.size() < base.horizon()) {
    throw Error(ErrorCode::kInvalidArgument, "need a weight per level");
  }
  for (double e : eps) {
    if (!(e >= 0.0 && e < 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "weights must lie in [0, 1)");
    }
  }
  const std::size_t horizon = base.horizon();
  std::vector<std::vector<CPMap>> maps(horizon);
  for (std::size_t n = 1; n < horizon; ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      CPMap f = (1.0 - eps[m]) * base.map(n, m);
      if (eps[m] > 0.0) f += eps[m] * trace_state_map(base.level(m), base.level(n));
      maps[n].push_back(std::move(f));
    }
  }
  return SoftSystem(base.levels(), std::move(maps), base.name() + "/perturbed",
                    "mixing with the trace state");
}

SoftSystem example_unitary_chain(std::size_t horizon, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FdVNAlgebra> levels(horizon, FdVNAlgebra::full(d));
  std::vector<CPMap> steps;
  for (std::size_t n = 1; n < horizon; ++n) steps.push_back(unitary_conjugation(random_unitary(d, rng)));
  return SoftSystem::from_steps(std::move(levels), steps, "unitary-chain", "seed " + std::to_string(seed));
}

std::vector<double> dyadic_weights(std::size_t horizon) {
  std::vector<double> eps(horizon);
  for (std::size_t m = 0; m < horizon; ++m) {
    eps[m] = m == 0 ? 0.5 : std::ldexp(1.0, -static_cast<int>(m));
  }
  return eps;
}

SplitFactorization split_factorization(const CpaSystem& cpa, double eps) {
  SplitFactorization out;
  out.eps = eps;
  const std::size_t count = cpa.size();
  std::size_t level = count;
  for (std::size_t m = 0; m < count && level == count; ++m) {
    bool ok = true;
    for (const Probe& p : cpa.probes()) {
      if (cpa.reconstruction_defect(m, p.element) > eps / 3.0) ok = false;
    }
    if (ok) level = m;
  }
  if (level == count) {
    throw Error(ErrorCode::kHorizonTooShort, "no level reconstructs every probe within eps/3");
  }
  out.level = level;
  const std::size_t top = count - 1;
  const CPMap& down = cpa.down()[level];
  const CPMap& up = cpa.up()[level];
  for (const Probe& p : cpa.probes()) {
    SplitTerms t;
    t.probe_id = p.id;
    t.level = level;
    const AlgElement am = down.apply(p.element);
    // alpha: diagonal pinching; beta: inclusion.
    AlgElement pinched = am;
    pinched.block(0) = CMatrix(am.block(0).diagonal().asDiagonal());
    const AlgElement upped = up.apply(pinched);
    const AlgElement limit = cpa.up()[top].apply(cpa.down()[top].apply(upped));
    t.t1 = (p.element - up.apply(am)).norm();
    t.t2 = (am - pinched).norm();
    t.t3 = (limit - upped).norm();
    t.total = (p.element - limit).norm();
    out.terms.push_back(t);
  }
  return out;
}

std::vector<QdRow> qd_defect(const std::vector<CPMap>& maps, const std::vector<ProbePair>& pairs) {
  std::vector<QdRow> rows;
  for (std::size_t k = 0; k < maps.size(); ++k) {
    if (!(maps[k].source() == maps[0].source())) {
      throw Error(ErrorCode::kDimensionMismatch, "qd maps must share a source");
    }
    for (const ProbePair& pr : pairs) {
      const AlgElement fa = maps[k].apply(pr.a);
      const AlgElement fb = maps[k].apply(pr.b);
      QdRow row;
      row.map = k;
      row.pair_id = pr.id;
      row.mult_defect = (fa * fb - maps[k].apply(pr.a * pr.b)).norm();
      row.isometry_defect = std::abs(fa.norm() - pr.a.norm());
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace softlimit
