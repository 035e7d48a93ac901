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

#include "softlimit/softsys.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include "softlimit/error.hpp"
#include "softlimit/parallel.hpp"
#include "softlimit/random.hpp"
#include "softlimit/sdp.hpp"

namespace softlimit {

const char* norm_kind_name(NormKind k) {
  switch (k) {
    case NormKind::kPointwise: return "pointwise";
    case NormKind::kInterval: return "interval";
    case NormKind::kCb: return "cb";
  }
  return "unknown";
}

NormKind parse_norm_kind(const std::string& s) {
  if (s == "pointwise") return NormKind::kPointwise;
  if (s == "interval") return NormKind::kInterval;
  if (s == "cb") return NormKind::kCb;
  throw Error(ErrorCode::kConfigInvalid,
              "norm: expected pointwise, interval or cb, got '" + s + "'");
}

SoftSystem::SoftSystem(std::vector<FdVNAlgebra> levels,
                       std::vector<std::vector<CPMap>> maps, std::string name,
                       std::string provenance)
    : levels_(std::move(levels)),
      maps_(std::move(maps)),
      name_(std::move(name)),
      provenance_(std::move(provenance)) {
  if (levels_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "a soft system needs at least one level");
  }
  if (maps_.size() != levels_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one map row per level");
  }
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    if (maps_[n].size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "map row " + std::to_string(n) + " must hold " +
                      std::to_string(n) + " maps");
    }
    for (std::size_t m = 0; m < n; ++m) {
      const CPMap& f = maps_[n][m];
      if (!(f.source() == levels_[m]) || !(f.target() == levels_[n])) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "j(" + std::to_string(n) + "," + std::to_string(m) +
                        ") does not map level " + std::to_string(m) +
                        " into level " + std::to_string(n));
      }
      if (!f.is_ucp()) {
        throw Error(ErrorCode::kFlagViolation,
                    "j(" + std::to_string(n) + "," + std::to_string(m) +
                        ") is not ucp (min Choi eigenvalue " +
                        std::to_string(f.flags().min_choi_eig) + ", unit defect " +
                        std::to_string(f.flags().unit_defect) + ")");
      }
    }
  }
}

SoftSystem SoftSystem::from_steps(std::vector<FdVNAlgebra> levels,
                                  const std::vector<CPMap>& steps,
                                  std::string name, std::string provenance) {
  if (steps.size() + 1 != levels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "need one step per consecutive pair");
  }
  std::vector<std::vector<CPMap>> maps(levels.size());
  for (std::size_t n = 1; n < levels.size(); ++n) {
    maps[n].resize(n);
    maps[n][n - 1] = steps[n - 1];
    for (std::size_t m = n - 1; m-- > 0;) {
      maps[n][m] = compose(steps[n - 1], maps[n - 1][m]);
    }
  }
  return SoftSystem(std::move(levels), std::move(maps), std::move(name),
                    std::move(provenance));
}

const CPMap& SoftSystem::map(std::size_t n, std::size_t m) const {
  if (n >= levels_.size() || m >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                "no stored map j(" + std::to_string(n) + "," + std::to_string(m) + ")");
  }
  return maps_[n][m];
}

CPMap SoftSystem::j(std::size_t n, std::size_t m) const {
  if (n >= levels_.size() || m >= levels_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "level index beyond horizon");
  }
  if (n == m) return CPMap::identity(levels_[n]);
  if (n < m) return CPMap::zero(levels_[m], levels_[n]);
  return maps_[n][m];
}

AlgElement SoftSystem::push(std::size_t n, std::size_t m, const AlgElement& a) const {
  if (n >= levels_.size() || m >= levels_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "level index beyond horizon");
  }
  if (!(a.algebra() == levels_[m])) {
    throw Error(ErrorCode::kDimensionMismatch, "element does not live in level " +
                                                   std::to_string(m));
  }
  if (n == m) return a;
  if (n < m) return AlgElement::zero(levels_[n]);
  return maps_[n][m].apply(a);
}

LevelProbes basis_probes(const SoftSystem& sys) {
  LevelProbes out(sys.horizon());
  for (std::size_t l = 0; l < sys.horizon(); ++l) {
    const FdVNAlgebra& a = sys.level(l);
    out[l].push_back({"unit", AlgElement::unit(a)});
    for (std::size_t p = 0; p < a.num_blocks(); ++p) {
      const std::size_t n = a.block_size(p);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          out[l].push_back({"E" + std::to_string(p) + "_" + std::to_string(i) +
                                "_" + std::to_string(j),
                            AlgElement::matrix_unit(a, p, i, j)});
        }
      }
    }
  }
  return out;
}

double DefectReport::sup_at(std::size_t m) const {
  for (const auto& [mm, v] : per_m) {
    if (mm == m) return v;
  }
  return 0.0;
}

DecayFit fit_decay(const std::vector<std::pair<std::size_t, double>>& series) {
  DecayFit fit;
  if (series.empty()) return fit;
  const std::size_t start = series.size() / 2;
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < series.size(); ++i) {
    if (series[i].second > 0.0) {
      xs.push_back(static_cast<double>(series[i].first));
      ys.push_back(std::log(series[i].second));
    }
  }
  fit.window_start = series[start].first;
  fit.points = xs.size();
  if (xs.size() < 2) return fit;
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + slope * xs[i]);
    rss += r * r;
  }
  fit.residual = std::sqrt(rss / k);
  return fit;
}

namespace {

CPMap triple_difference(const SoftSystem& sys, std::size_t n, std::size_t m,
                        std::size_t l) {
  return sys.map(n, l) - compose(sys.map(n, m), sys.map(m, l));
}

std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> all_triples(
    std::size_t horizon) {
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> out;
  for (std::size_t m = 1; m < horizon; ++m) {
    for (std::size_t n = m + 1; n < horizon; ++n) {
      for (std::size_t l = 0; l < m; ++l) out.emplace_back(m, n, l);
    }
  }
  return out;
}

void finish_report(DefectReport& rep) {
  std::sort(rep.rows.begin(), rep.rows.end(), [](const DefectRow& a, const DefectRow& b) {
    return std::tie(a.m, a.n, a.l, a.probe_id) < std::tie(b.m, b.n, b.l, b.probe_id);
  });
  std::map<std::size_t, double> sup;
  for (const DefectRow& r : rep.rows) {
    if (r.probe_id == "map_lower") continue;
    double& s = sup[r.m];
    s = std::max(s, r.defect);
  }
  rep.per_m.assign(sup.begin(), sup.end());
  rep.fit = fit_decay(rep.per_m);
}

}  // namespace

double triple_defect(const SoftSystem& sys, std::size_t n, std::size_t m,
                     std::size_t l, NormKind kind, const NormSearchOptions& search) {
  if (!(n > m && m > l && n < sys.horizon())) {
    throw Error(ErrorCode::kInvalidArgument, "triple must satisfy n > m > l");
  }
  switch (kind) {
    case NormKind::kPointwise: {
      const FdVNAlgebra& a = sys.level(l);
      double worst = (sys.push(n, l, AlgElement::unit(a)) -
                      sys.push(n, m, sys.push(m, l, AlgElement::unit(a))))
                         .norm();
      for (std::size_t k = 0; k < a.dim(); ++k) {
        const AlgElement e = AlgElement::basis_unit(a, k);
        worst = std::max(worst, (sys.push(n, l, e) - sys.push(n, m, sys.push(m, l, e))).norm());
      }
      return worst;
    }
    case NormKind::kInterval:
      return map_norm_interval(triple_difference(sys, n, m, l), search).upper;
    case NormKind::kCb:
      return cb_norm(triple_difference(sys, n, m, l));
  }
  return 0.0;
}

DefectReport transitivity_defects(const SoftSystem& sys, const LevelProbes& probes,
                                  const DefectOptions& opts) {
  DefectReport rep;
  rep.kind = opts.kind;
  if (probes.size() != sys.horizon()) {
    throw Error(ErrorCode::kDimensionMismatch, "need a probe list per level");
  }
  const auto triples = all_triples(sys.horizon());
  std::vector<std::vector<DefectRow>> cells(triples.size());
  parallel_for(triples.size(), [&](std::size_t t) {
    const auto [m, n, l] = triples[t];
    std::vector<DefectRow>& out = cells[t];
    if (opts.kind == NormKind::kPointwise) {
      for (const Probe& p : probes[l]) {
        const AlgElement direct = sys.push(n, l, p.element);
        const AlgElement via = sys.push(n, m, sys.push(m, l, p.element));
        out.push_back({m, n, l, p.id, (direct - via).norm(), opts.kind});
      }
    } else if (opts.kind == NormKind::kInterval) {
      const NormInterval iv = map_norm_interval(triple_difference(sys, n, m, l), opts.search);
      out.push_back({m, n, l, "map", iv.upper, opts.kind});
      out.push_back({m, n, l, "map_lower", iv.lower, opts.kind});
    } else {
      out.push_back({m, n, l, "map", cb_norm(triple_difference(sys, n, m, l)), opts.kind});
    }
  });
  for (auto& c : cells) {
    for (DefectRow& r : c) rep.rows.push_back(std::move(r));
  }
  finish_report(rep);
  return rep;
}

DefectReport transitivity_defects(const SoftSystem& sys, const DefectOptions& opts) {
  return transitivity_defects(sys, basis_probes(sys), opts);
}

double SummabilityCertificate::tail(std::size_t m, std::size_t n) const {
  double s = 0.0;
  for (std::size_t k = m + 1; k < n && k < epsilons.size(); ++k) s += epsilons[k];
  return s;
}

SummabilityCertificate refine_to_summable(const SoftSystem& sys,
                                          const std::vector<double>& eps,
                                          NormKind kind) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] < eps[i - 1]))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "epsilons must be positive and strictly decreasing");
    }
  }
  SummabilityCertificate cert;
  cert.kind = kind;
  const std::size_t horizon = sys.horizon();
  std::vector<std::size_t>& chosen = cert.indices;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> cache;
  auto defect = [&](std::size_t n, std::size_t m, std::size_t k) {
    const auto key = std::make_tuple(n, m, k);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double v = triple_defect(sys, n, m, k, kind);
    cache.emplace(key, v);
    return v;
  };

  std::size_t next = 0;
  bool stalled = false;
  while (next < horizon) {
    const std::size_t pos = chosen.size();
    if (pos >= eps.size()) break;
    std::size_t pick = horizon;
    std::vector<CertifiedTriple> closed;
    for (std::size_t c = next; c < horizon && pick == horizon; ++c) {
      closed.clear();
      bool ok = true;
      for (std::size_t pm = 1; pm < pos && ok; ++pm) {
        for (std::size_t pk = 0; pk < pm && ok; ++pk) {
          const double d = defect(c, chosen[pm], chosen[pk]);
          if (!(d < eps[pm])) ok = false;
          closed.push_back({pos, pm, pk, d, eps[pm]});
        }
      }
      if (ok) pick = c;
    }
    if (pick == horizon) {
      stalled = true;
      break;
    }
    chosen.push_back(pick);
    for (const CertifiedTriple& t : closed) cert.triples.push_back(t);
    next = pick + 1;
  }
  cert.epsilons.assign(eps.begin(), eps.begin() + static_cast<std::ptrdiff_t>(chosen.size()));
  if (stalled) {
    throw Error(ErrorCode::kHorizonTooShort,
                "no admissible level for subsequence position " +
                    std::to_string(chosen.size()) + " within horizon " +
                    std::to_string(horizon));
  }
  if (chosen.size() < 3) {
    throw Error(ErrorCode::kHorizonTooShort,
                "subsequence has only " + std::to_string(chosen.size()) + " levels");
  }
  cert.verified = true;
  return cert;
}

SoftSystem subsystem(const SoftSystem& sys, const std::vector<std::size_t>& indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= sys.horizon() || (i > 0 && indices[i] <= indices[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "subsystem indices must be strictly increasing and within horizon");
    }
  }
  std::vector<FdVNAlgebra> levels;
  std::vector<std::vector<CPMap>> maps(indices.size());
  for (std::size_t a = 0; a < indices.size(); ++a) {
    levels.push_back(sys.level(indices[a]));
    for (std::size_t b = 0; b < a; ++b) maps[a].push_back(sys.map(indices[a], indices[b]));
  }
  return SoftSystem(std::move(levels), std::move(maps), sys.name() + "/sub",
                    sys.provenance());
}

SoftSystem strictify(const SoftSystem& sys) {
  std::vector<CPMap> steps;
  for (std::size_t n = 1; n < sys.horizon(); ++n) steps.push_back(sys.map(n, n - 1));
  return SoftSystem::from_steps(sys.levels(), steps, sys.name() + "/strict",
                                sys.provenance());
}

double exact_transitivity_residual(const SoftSystem& sys) {
  const auto triples = all_triples(sys.horizon());
  std::vector<double> vals(triples.size(), 0.0);
  parallel_for(triples.size(), [&](std::size_t t) {
    const auto [k, n, m] = triples[t];
    vals[t] = sys.map(n, m).choi_distance(compose(sys.map(n, k), sys.map(k, m)));
  });
  double worst = 0.0;
  for (double v : vals) worst = std::max(worst, v);
  return worst;
}

namespace {

double isometry_estimate(const CPMap& f, const IsometryOptions& opts,
                         std::uint64_t seed) {
  const FdVNAlgebra& src = f.source();
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  AlgElement best_x = AlgElement::unit(src);
  auto consider = [&](const AlgElement& x) {
    const double nx = x.norm();
    if (nx <= 1e-300) return;
    const AlgElement u = (1.0 / nx) * x;
    const double v = f.apply(u).norm();
    if (v < best) {
      best = v;
      best_x = u;
    }
  };
  // Smallest Hilbert-Schmidt singular directions, with their self-adjoint
  // parts (a kernel of a Hermiticity preserving map is adjoint closed).
  {
    const auto ds = static_cast<Eigen::Index>(src.dim());
    const auto dt = static_cast<Eigen::Index>(f.target().dim());
    CMatrix lin(dt, ds);
    for (std::size_t k = 0; k < src.dim(); ++k) {
      lin.col(static_cast<Eigen::Index>(k)) = f.apply(AlgElement::basis_unit(src, k)).to_vector();
    }
    Eigen::BDCSVD<CMatrix> svd(lin, Eigen::ComputeFullV);
    const CMatrix& v = svd.matrixV();
    const Eigen::Index cols = v.cols();
    for (Eigen::Index c = std::max<Eigen::Index>(0, cols - 3); c < cols; ++c) {
      const AlgElement x = AlgElement::from_vector(src, v.col(c));
      consider(x);
      consider(x + x.adjoint());
      consider(Complex(0.0, 1.0) * (x - x.adjoint()));
    }
  }
  for (int s = 0; s < opts.samples; ++s) {
    AlgElement sym = AlgElement::zero(src);
    AlgElement gin = AlgElement::zero(src);
    for (std::size_t p = 0; p < src.num_blocks(); ++p) {
      const std::size_t n = src.block_size(p);
      const auto k = static_cast<Eigen::Index>(n);
      sym.block(p) = 2.0 * random_projection(n, static_cast<std::size_t>(s) % (n + 1), rng) -
                     CMatrix::Identity(k, k);
      gin.block(p) = random_ginibre(n, n, rng);
    }
    consider(sym);
    consider(gin);
  }
  double step = 0.2;
  for (int it = 0; it < opts.refine_steps; ++it) {
    AlgElement trial = best_x;
    for (std::size_t p = 0; p < src.num_blocks(); ++p) {
      const std::size_t n = src.block_size(p);
      trial.block(p) += step * random_ginibre(n, n, rng);
    }
    const double before = best;
    consider(trial);
    if (!(best < before)) step *= 0.7;
  }
  return best;
}

}  // namespace

std::vector<IsometryRow> asym_isometry_profile(const SoftSystem& sys,
                                               const IsometryOptions& opts) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t m = 0; m < sys.horizon(); ++m) {
    for (std::size_t n = m + 1; n < sys.horizon(); ++n) pairs.emplace_back(n, m);
  }
  std::vector<IsometryRow> rows(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto [n, m] = pairs[i];
    const std::uint64_t seed = opts.seed + 1000003ULL * n + 7919ULL * m;
    rows[i] = IsometryRow{n, m, isometry_estimate(sys.map(n, m), opts, seed), true};
  });
  return rows;
}

std::vector<DefectRow> mult_defect_profile(const SoftSystem& sys,
                                           const LevelPairs& pairs) {
  if (pairs.size() != sys.horizon()) {
    throw Error(ErrorCode::kDimensionMismatch, "need a pair list per level");
  }
  const auto triples = all_triples(sys.horizon());
  std::vector<std::vector<DefectRow>> cells(triples.size());
  parallel_for(triples.size(), [&](std::size_t t) {
    const auto [m, n, l] = triples[t];
    for (const ProbePair& pr : pairs[l]) {
      const AlgElement am = sys.push(m, l, pr.a);
      const AlgElement bm = sys.push(m, l, pr.b);
      const AlgElement lhs = sys.push(n, m, am * bm);
      const AlgElement rhs = sys.push(n, l, pr.a) * sys.push(n, l, pr.b);
      cells[t].push_back({m, n, l, pr.id, (lhs - rhs).norm(), NormKind::kPointwise});
    }
  });
  std::vector<DefectRow> rows;
  for (auto& c : cells) {
    for (DefectRow& r : c) rows.push_back(std::move(r));
  }
  std::sort(rows.begin(), rows.end(), [](const DefectRow& a, const DefectRow& b) {
    return std::tie(a.m, a.n, a.l, a.probe_id) < std::tie(b.m, b.n, b.l, b.probe_id);
  });
  return rows;
}

LevelPairs basis_pairs(const SoftSystem& sys) {
  LevelPairs out(sys.horizon());
  for (std::size_t l = 0; l < sys.horizon(); ++l) {
    const FdVNAlgebra& a = sys.level(l);
    out[l].push_back({"unit*unit", AlgElement::unit(a), AlgElement::unit(a)});
    for (std::size_t p = 0; p < a.num_blocks(); ++p) {
      const std::size_t n = a.block_size(p);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          out[l].push_back({"E" + std::to_string(p) + "_" + std::to_string(i) + "_" +
                                std::to_string(j) + "*E" + std::to_string(p) + "_" +
                                std::to_string(j) + "_" + std::to_string(i),
                            AlgElement::matrix_unit(a, p, i, j),
                            AlgElement::matrix_unit(a, p, j, i)});
        }
      }
    }
  }
  return out;
}

SoftSystem amplify_system(const SoftSystem& sys, std::size_t nu) {
  std::vector<FdVNAlgebra> levels;
  for (const FdVNAlgebra& a : sys.levels()) levels.push_back(Amplification{a, nu}.algebra());
  std::vector<std::vector<CPMap>> maps(sys.horizon());
  for (std::size_t n = 1; n < sys.horizon(); ++n) {
    for (std::size_t m = 0; m < n; ++m) maps[n].push_back(amplify_map(sys.map(n, m), nu));
  }
  return SoftSystem(std::move(levels), std::move(maps),
                    sys.name() + "/M" + std::to_string(nu), sys.provenance());
}

}  // namespace softlimit
