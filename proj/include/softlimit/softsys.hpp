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

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "softlimit/cpmaps.hpp"
#include "softlimit/opsys.hpp"

namespace softlimit {

/// Which norm a defect is measured in.
///   kPointwise: ||(j_nl - j_nm j_ml)(a)|| on probe elements.
///   kInterval:  operator norm of the map difference, as [lower, upper].
///   kCb:        completely bounded norm of the map difference (exact SDP).
enum class NormKind { kPointwise, kInterval, kCb };

const char* norm_kind_name(NormKind k);
/// Accepts "pointwise", "interval", "cb"; throws kConfigInvalid otherwise.
NormKind parse_norm_kind(const std::string& s);

/// Finite-horizon soft inductive system over the index set {0, ..., N-1}.
/// Connecting maps j(n, m) : level m -> level n for n > m are stored and
/// verified ucp at construction; j(n, n) is the identity and j(n, m) for
/// n < m is the zero map.
class SoftSystem {
 public:
  SoftSystem() = default;
  /// maps[n][m] for 0 <= m < n; maps[0] is empty. Throws kDimensionMismatch
  /// on shape errors and kFlagViolation if a map is not ucp.
  SoftSystem(std::vector<FdVNAlgebra> levels,
             std::vector<std::vector<CPMap>> maps, std::string name = "",
             std::string provenance = "");

  /// Strict system generated by consecutive maps steps[n] : n -> n+1.
  static SoftSystem from_steps(std::vector<FdVNAlgebra> levels,
                               const std::vector<CPMap>& steps,
                               std::string name = "",
                               std::string provenance = "");

  std::size_t horizon() const { return levels_.size(); }
  const std::vector<FdVNAlgebra>& levels() const { return levels_; }
  const FdVNAlgebra& level(std::size_t n) const { return levels_.at(n); }
  /// Stored map for n > m.
  const CPMap& map(std::size_t n, std::size_t m) const;
  /// j_nm with the identity / zero conventions.
  CPMap j(std::size_t n, std::size_t m) const;
  /// Applies j_nm to an element of level m, with the same conventions.
  AlgElement push(std::size_t n, std::size_t m, const AlgElement& a) const;

  const std::string& name() const { return name_; }
  const std::string& provenance() const { return provenance_; }
  const std::vector<std::vector<CPMap>>& maps() const { return maps_; }

 private:
  std::vector<FdVNAlgebra> levels_;
  std::vector<std::vector<CPMap>> maps_;
  std::string name_;
  std::string provenance_;
};

struct Probe {
  std::string id;
  AlgElement element;
};
/// Probe elements per level, probes[l] living in level l.
using LevelProbes = std::vector<std::vector<Probe>>;

/// The unit plus every matrix unit of each level ("unit", "E<p>_<i>_<j>").
LevelProbes basis_probes(const SoftSystem& sys);

struct DefectRow {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t l = 0;
  std::string probe_id;
  double defect = 0.0;
  NormKind kind = NormKind::kPointwise;
};

/// Least-squares fit of log(defect) = c - rate * m over a window of m values.
struct DecayFit {
  double rate = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS residual of the log fit
  std::size_t window_start = 0;
  std::size_t points = 0;
};

struct DefectReport {
  NormKind kind = NormKind::kPointwise;
  /// Sorted by (m, n, l, probe_id).
  std::vector<DefectRow> rows;
  /// (m, sup over n > m > l and probes) sorted by m.
  std::vector<std::pair<std::size_t, double>> per_m;
  DecayFit fit;

  double sup_at(std::size_t m) const;
};

/// Fits over the trailing half of the series (points with positive values).
DecayFit fit_decay(const std::vector<std::pair<std::size_t, double>>& series);

struct DefectOptions {
  NormKind kind = NormKind::kPointwise;
  NormSearchOptions search;  // used by kInterval
};

/// Tabulates transitivity defects over all n > m > l. For kPointwise one
/// row per probe; for the map norms one row per triple with probe_id "map"
/// (kInterval adds a "map_lower" row holding the lower bound).
DefectReport transitivity_defects(const SoftSystem& sys, const LevelProbes& probes,
                                  const DefectOptions& opts = {});
DefectReport transitivity_defects(const SoftSystem& sys,
                                  const DefectOptions& opts = {});

/// ||j_nl - j_nm j_ml|| in the given norm; for kPointwise the max over the
/// basis probes of level l.
double triple_defect(const SoftSystem& sys, std::size_t n, std::size_t m,
                     std::size_t l, NormKind kind,
                     const NormSearchOptions& search = {});

struct CertifiedTriple {
  std::size_t n = 0;  // positions in the subsequence
  std::size_t m = 0;
  std::size_t k = 0;
  double defect = 0.0;
  double bound = 0.0;
};

struct SummabilityCertificate {
  std::vector<double> epsilons;  // per subsequence position
  NormKind kind = NormKind::kCb;
  std::vector<std::size_t> indices;  // selected levels of the original system
  std::vector<CertifiedTriple> triples;
  bool verified = false;

  /// sum_{k=m+1}^{n-1} epsilons[k].
  double tail(std::size_t m, std::size_t n) const;
};

/// Greedy refinement: the next selected index is the smallest one for which
/// every triple it closes satisfies defect < eps[position of middle index].
/// Throws kHorizonTooShort if the selection stalls with levels left or has
/// fewer than three entries. Throws kInvalidArgument for a non-decreasing
/// or nonpositive eps.
SummabilityCertificate refine_to_summable(const SoftSystem& sys,
                                          const std::vector<double>& eps,
                                          NormKind kind = NormKind::kCb);

/// Restriction to a strictly increasing list of level indices.
SoftSystem subsystem(const SoftSystem& sys, const std::vector<std::size_t>& indices);

/// Telescoped strict system with maps j_{n,n-1} o ... o j_{m+1,m}.
SoftSystem strictify(const SoftSystem& sys);

/// max over n > k > m of the Choi distance between j_nm and j_nk j_km.
double exact_transitivity_residual(const SoftSystem& sys);

struct IsometryRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double estimate = 0.0;  // upper bound on inf_{||a||=1} ||j_nm a||
  bool heuristic = true;
};

struct IsometryOptions {
  std::uint64_t seed = 20260101;
  int samples = 32;
  int refine_steps = 20;
};

/// One row per pair n > m; the infimum is estimated from kernel directions
/// of the map, symmetries 2P-1 and random unit-norm elements.
std::vector<IsometryRow> asym_isometry_profile(const SoftSystem& sys,
                                               const IsometryOptions& opts = {});

struct ProbePair {
  std::string id;
  AlgElement a;
  AlgElement b;
};
using LevelPairs = std::vector<std::vector<ProbePair>>;

/// ||j_nm((j_ml a)(j_ml b)) - (j_nl a)(j_nl b)|| over n > m > l.
std::vector<DefectRow> mult_defect_profile(const SoftSystem& sys,
                                           const LevelPairs& pairs);
/// Pairs (E_ij, E_ji) of matrix units plus (unit, unit) at every level.
LevelPairs basis_pairs(const SoftSystem& sys);

/// Matrix amplification M_nu(level) with maps j_nm (x) id_nu.
SoftSystem amplify_system(const SoftSystem& sys, std::size_t nu);

/// Right inverse data for the limit projection: s[n] maps a fixed algebra
/// into level n.
struct SplitData {
  FdVNAlgebra source;
  std::vector<CPMap> s;
};

}  // namespace softlimit
