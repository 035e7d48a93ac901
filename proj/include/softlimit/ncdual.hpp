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
#include "softlimit/random.hpp"
#include "softlimit/softsys.hpp"

namespace softlimit {

/// A ucp map from an operator system S into M_k, stored by its values on
/// S.basis().
struct MatrixState {
  OperatorSystemSpace space = OperatorSystemSpace::whole(FdVNAlgebra::full(1));
  std::size_t level = 1;
  std::vector<CMatrix> values;
  bool verified = false;
  double margin = 0.0;  // min Choi eigenvalue of the best ucp extension
};

/// Verifies ucp-extendability (sdp::ucp_member_detail) and records it.
/// Throws kFlagViolation if the data is not a matrix state.
MatrixState make_state(const OperatorSystemSpace& s, std::size_t k,
                       std::vector<CMatrix> values, double tol = 1e-7);

/// Restriction of a ucp map on the ambient of S; throws kFlagViolation if
/// the map is not ucp.
MatrixState restrict_state(const OperatorSystemSpace& s, const CPMap& f);

/// Random ucp map ambient -> M_k: Wishart Choi blocks C, rescaled by the
/// congruence Y^{-1/2} . Y^{-1/2} with Y the image of the unit.
CPMap sample_ucp_map(const FdVNAlgebra& source, std::size_t k, Rng& rng);

/// x(a) for a in span(S). Throws kNotInSpan.
CMatrix kadison_eval(const OperatorSystemSpace& s, const AlgElement& a, const MatrixState& x);

/// x o phi for a ucp phi mapping S into T. Throws kDimensionMismatch if phi
/// does not go from S's ambient to T's ambient, kNotInSpan if phi(S) is not
/// inside T, and kFlagViolation if phi is not ucp.
MatrixState pushback(const CPMap& phi, const OperatorSystemSpace& s, const MatrixState& x,
                     bool verify = true);

/// The dual (contravariant) action of a ucp map between operator systems.
struct DualMap {
  CPMap forward;
  OperatorSystemSpace source = OperatorSystemSpace::whole(FdVNAlgebra::full(1));
  OperatorSystemSpace target = OperatorSystemSpace::whole(FdVNAlgebra::full(1));

  MatrixState operator()(const MatrixState& x) const { return pushback(forward, source, x); }
};

struct ProjectiveRow {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t sample = 0;
  std::uint64_t seed = 0;
  std::size_t k = 0;
  double dual_defect = 0.0;    // max_b ||x(j_nl b) - x(j_nm j_ml b)||
  double primal_defect = 0.0;  // max_b ||(j_nl - j_nm j_ml) b||
};

struct ProjectiveOptions {
  std::size_t k = 2;
  std::size_t samples = 4;  // states per triple
  std::uint64_t seed = 20260101;
  /// 0 means every triple; otherwise at most this many triples with the
  /// largest n first.
  std::size_t max_triples = 0;
};

/// Dual image of the transitivity defect on the unit and matrix units of
/// level l, for states sampled at level n. Rows sorted by (m, n, l, sample).
std::vector<ProjectiveRow> projective_defect(const SoftSystem& sys,
                                             const ProjectiveOptions& opts = {});

}  // namespace softlimit
