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
#include <cstdint>
#include <string>
#include <vector>

#include "softlimit/cpmaps.hpp"
#include "softlimit/opsys.hpp"
#include "softlimit/softsys.hpp"

namespace softlimit {

/// Completely positive approximation of an operator system S through
/// matrix algebras: down[n] : ambient(S) -> M_{nu_n}, up[n] : M_{nu_n} ->
/// ambient(S). The reconstruction of a is up[n](down[n](a)).
class CpaSystem {
 public:
  CpaSystem() = default;
  /// Throws kFlagViolation if a map is not cpc, kDimensionMismatch on shape
  /// errors and kNotInSpan if an up map leaves the span of S.
  CpaSystem(OperatorSystemSpace s, std::vector<CPMap> down, std::vector<CPMap> up,
            std::vector<Probe> probes = {}, std::string name = "");

  const OperatorSystemSpace& space() const { return s_; }
  const FdVNAlgebra& ambient() const { return s_.ambient(); }
  const std::vector<CPMap>& down() const { return down_; }
  const std::vector<CPMap>& up() const { return up_; }
  std::size_t size() const { return down_.size(); }
  std::size_t level_size(std::size_t n) const { return down_.at(n).target().block_size(0); }
  /// Elements of the ambient used for reconstruction and split checks.
  const std::vector<Probe>& probes() const { return probes_; }
  const std::string& name() const { return name_; }

  /// ||up_n(down_n(a)) - a||.
  double reconstruction_defect(std::size_t n, const AlgElement& a) const;
  /// Keeps the listed positions.
  CpaSystem select(const std::vector<std::size_t>& indices) const;

 private:
  OperatorSystemSpace s_{FdVNAlgebra::full(1), {AlgElement::unit(FdVNAlgebra::full(1))}};
  std::vector<CPMap> down_;
  std::vector<CPMap> up_;
  std::vector<Probe> probes_;
  std::string name_;
};

struct InequalityRow {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t l = 0;
  std::string probe_id;
  double lhs = 0.0;  // ||(j_nl - j_nm j_ml) a_l||
  double rhs = 0.0;  // ||(id - up_m down_m)(up_l a_l)||
};

struct InducedSystem {
  SoftSystem soft;  // levels M_{nu_n}, j_nm = down_n o up_m
  SplitData split;  // s_n = down_n
  /// Probes per level: the basis probes plus down_l of every CPA probe.
  LevelProbes probes;
  std::vector<InequalityRow> inequality;
  double worst_violation = 0.0;  // max(lhs - rhs), may be negative
};

/// Throws kFlagViolation unless every map is ucp.
InducedSystem induce(const CpaSystem& cpa);

struct CpaRefinementRow {
  std::size_t position = 0;
  std::size_t index = 0;
  /// max over earlier selected m of ||up_m - up_c down_c up_m||_cb.
  double map_bound = 0.0;
  double threshold = 0.0;  // 2^{-position}
  double max_reconstruction = 0.0;
};

struct CpaRefinement {
  std::vector<std::size_t> indices;
  std::vector<CpaRefinementRow> rows;
  CpaSystem selected;
};

/// Greedy summable refinement. A candidate is admissible at position p when
/// ||up_m - up_c down_c up_m||_cb < 2^{-p} for every selected m. Throws
/// kHorizonTooShort when the selection stalls, has fewer than three entries,
/// or some probe's reconstruction defect at the last selected level exceeds
/// both tol and half its value at the first.
CpaRefinement refine_summable_cpa(const CpaSystem& cpa, double tol = 1e-10);

/// Commutative example: C[0,1] on a fine grid of fine_intervals + 1 points
/// as a diagonal algebra. down_n evaluates at the nodes k/g_n into the
/// diagonal of M_{g_n + 1}; up_n interpolates the diagonal piecewise
/// linearly. Probes are the functions 1, x and x^2. Throws kBadGrid unless
/// the grids increase (or stay equal) and divide fine_intervals.
CpaSystem example_interval(const std::vector<std::size_t>& grids,
                           std::size_t fine_intervals = 256);
/// Fine-grid nodes t_k = k / fine_intervals as a diagonal element of f(t).
AlgElement interval_function(const FdVNAlgebra& fine, double (*f)(double));

/// UHF example on M_{2^depth}: down_n is the normalized partial trace onto
/// M_{2^n} (x) 1, up_n(x) = x (x) 1, for n = 0..depth. Throws
/// kInvalidArgument for depth > 6.
CpaSystem example_uhf(std::size_t depth);

/// j'_nm = (1 - eps_m) j_nm + eps_m tau_m(.) 1 with the canonical trace
/// tau_m. Throws kInvalidArgument unless every weight lies in [0, 1).
SoftSystem example_perturbed(const SoftSystem& base, const std::vector<double>& eps);

/// Strict chain on M_d with maps Ad(u_n) for seeded Haar unitaries.
SoftSystem example_unitary_chain(std::size_t horizon, std::size_t d, std::uint64_t seed);

/// eps_m = 2^{-m} for m >= 1, eps_0 = 1/2.
std::vector<double> dyadic_weights(std::size_t horizon);

struct SplitTerms {
  std::string probe_id;
  std::size_t level = 0;
  double t1 = 0.0;     // ||a - up_m(down_m a)||
  double t2 = 0.0;     // ||a_m - beta(alpha(a_m))||
  double t3 = 0.0;     // ||(up_top down_top up_m - up_m)(beta alpha a_m)||
  double total = 0.0;  // ||a - theta(gamma(a))|| with theta at the top level
};

struct SplitFactorization {
  double eps = 0.0;
  std::size_t level = 0;  // smallest level with every t1 <= eps/3
  std::vector<SplitTerms> terms;
};

/// Factorization gamma = alpha o down_m, theta = j_{infinity,m} o beta with
/// alpha the diagonal pinching of M_{nu_m} and beta the inclusion, the limit
/// map realized at the deepest level. Throws kHorizonTooShort if no level
/// reaches eps/3.
SplitFactorization split_factorization(const CpaSystem& cpa, double eps);

struct QdRow {
  std::size_t map = 0;
  std::string pair_id;
  double mult_defect = 0.0;      // ||psi(a)psi(b) - psi(ab)||
  double isometry_defect = 0.0;  // | ||psi(a)|| - ||a|| |
};

/// Quasidiagonality-style defects for maps sharing a source.
std::vector<QdRow> qd_defect(const std::vector<CPMap>& maps,
                             const std::vector<ProbePair>& pairs);

}  // namespace softlimit
