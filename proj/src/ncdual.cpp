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

#include "softlimit/ncdual.hpp"

#include <algorithm>
#include <tuple>

#include "softlimit/error.hpp"
#include "softlimit/parallel.hpp"
#include "softlimit/sdp.hpp"

namespace softlimit {

MatrixState make_state(const OperatorSystemSpace& s, std::size_t k, std::vector<CMatrix> values,
                       double tol) {
  const UcpMemberResult r = ucp_member_detail(s, k, values, tol);
  if (!r.member) {
    throw Error(ErrorCode::kFlagViolation,
                "values do not extend to a ucp map (margin " + std::to_string(r.margin) + ")");
  }
  MatrixState x;
  x.space = s;
  x.level = k;
  x.values = std::move(values);
  x.verified = true;
  x.margin = r.margin;
  return x;
}

MatrixState restrict_state(const OperatorSystemSpace& s, const CPMap& f) {
  if (!(f.source() == s.ambient()) || f.target().num_blocks() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "state must map the ambient into one block");
  }
  if (!f.is_ucp()) throw Error(ErrorCode::kFlagViolation, "state map is not ucp");
  MatrixState x;
  x.space = s;
  x.level = f.target().block_size(0);
  for (const AlgElement& b : s.basis()) x.values.push_back(f.apply(b).block(0));
  x.verified = true;
  x.margin = f.flags().min_choi_eig;
  return x;
}

CPMap sample_ucp_map(const FdVNAlgebra& source, std::size_t k, Rng& rng) {
  const auto kk = static_cast<Eigen::Index>(k);
  std::vector<CMatrix> choi;
  CMatrix y = CMatrix::Zero(kk, kk);
  for (std::size_t p = 0; p < source.num_blocks(); ++p) {
    const std::size_t n = source.block_size(p);
    CMatrix c = random_psd(n * k, n * k, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = static_cast<Eigen::Index>(i) * kk;
      y += c.block(o, o, kk, kk);
    }
    choi.push_back(std::move(c));
  }
  const CMatrix yi = psd_inv_sqrt(y);
  for (std::size_t p = 0; p < source.num_blocks(); ++p) {
    const std::size_t n = source.block_size(p);
    const CMatrix w = kron(CMatrix::Identity(static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(n)),
                           yi);
    choi[p] = symmetrize(w * choi[p] * w);
  }
  return CPMap(source, FdVNAlgebra::full(k), std::move(choi));
}

CMatrix kadison_eval(const OperatorSystemSpace& s, const AlgElement& a, const MatrixState& x) {
  if (x.values.size() != s.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "state is defined on another system");
  }
  const CVector c = membership(s, a);
  const auto kk = static_cast<Eigen::Index>(x.level);
  CMatrix out = CMatrix::Zero(kk, kk);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) != Complex(0.0, 0.0)) out += c(i) * x.values[static_cast<std::size_t>(i)];
  }
  return out;
}

MatrixState pushback(const CPMap& phi, const OperatorSystemSpace& s, const MatrixState& x,
                     bool verify) {
  if (!(phi.source() == s.ambient()) || !(phi.target() == x.space.ambient())) {
    throw Error(ErrorCode::kDimensionMismatch, "phi must map S's ambient into T's ambient");
  }
  if (!phi.is_ucp()) throw Error(ErrorCode::kFlagViolation, "pushback needs a ucp map");
  std::vector<CMatrix> values;
  for (const AlgElement& b : s.basis()) values.push_back(kadison_eval(x.space, phi.apply(b), x));
  if (verify) return make_state(s, x.level, std::move(values));
  MatrixState out;
  out.space = s;
  out.level = x.level;
  out.values = std::move(values);
  out.verified = x.verified;
  out.margin = x.margin;
  return out;
}

std::vector<ProjectiveRow> projective_defect(const SoftSystem& sys, const ProjectiveOptions& opts) {
  if (opts.k == 0 || opts.k > 8) {
    throw Error(ErrorCode::kInvalidArgument, "state level must lie in [1, 8]");
  }
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> triples;
  for (std::size_t n = sys.horizon(); n-- > 0;) {
    for (std::size_t m = 1; m < n; ++m) {
      for (std::size_t l = 0; l < m; ++l) triples.emplace_back(m, n, l);
    }
  }
  if (opts.max_triples > 0 && triples.size() > opts.max_triples) triples.resize(opts.max_triples);
  const LevelProbes probes = basis_probes(sys);
  std::vector<std::vector<ProjectiveRow>> cells(triples.size());
  parallel_for(triples.size(), [&](std::size_t t) {
    const auto [m, n, l] = triples[t];
    std::vector<AlgElement> diffs;
    double primal = 0.0;
    for (const Probe& p : probes[l]) {
      const AlgElement d = sys.push(n, l, p.element) - sys.push(n, m, sys.push(m, l, p.element));
      primal = std::max(primal, d.norm());
      diffs.push_back(d);
    }
    for (std::size_t s = 0; s < opts.samples; ++s) {
      const std::uint64_t seed =
          opts.seed + 0x9E3779B97F4A7C15ULL * (1 + ((n * 131 + m) * 131 + l) * 64 + s);
      Rng rng(seed);
      const CPMap x = sample_ucp_map(sys.level(n), opts.k, rng);
      double dual = 0.0;
      for (const AlgElement& d : diffs) dual = std::max(dual, x.apply(d).norm());
      cells[t].push_back({m, n, l, s, seed, opts.k, dual, primal});
    }
  });
  std::vector<ProjectiveRow> rows;
  for (auto& c : cells) {
    for (ProjectiveRow& r : c) rows.push_back(r);
  }
  std::sort(rows.begin(), rows.end(), [](const ProjectiveRow& a, const ProjectiveRow& b) {
    return std::tie(a.m, a.n, a.l, a.sample) < std::tie(b.m, b.n, b.l, b.sample);
  });
  return rows;
}

}  // namespace softlimit
