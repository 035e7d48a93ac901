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
#include <iosfwd>
#include <vector>

#include "softlimit/cpmaps.hpp"
#include "softlimit/numerics.hpp"
#include "softlimit/opsys.hpp"

namespace softlimit {

/// One upper-triangular entry (row <= col) of a Hermitian constraint matrix;
/// the lower entry is the conjugate. On the diagonal only the real part
/// counts.
struct HermTerm {
  std::size_t block = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  Complex value = 0.0;
};

struct SdpConstraint {
  std::vector<HermTerm> terms;  // <A_i, X> = sum over blocks tr(A_ik X_k)
  double rhs = 0.0;
};

enum class SdpSense { kMinimize, kMaximize };
enum class SdpStatus { kOptimal, kInfeasible, kMaxIter };

const char* sdp_status_name(SdpStatus s);

/// optimize <C, X> s.t. <A_i, X> = b_i, X = diag(X_k) PSD, X_k complex
/// Hermitian of size block_dims[k].
struct SdpProblem {
  std::vector<std::size_t> block_dims;
  std::vector<CMatrix> objective;  // Hermitian per block; empty = zero
  std::vector<SdpConstraint> constraints;
  SdpSense sense = SdpSense::kMinimize;

  std::size_t add_block(std::size_t dim);
  /// Dense Hermitian constraint matrices per block (empty = zero block).
  void add_dense_constraint(const std::vector<CMatrix>& a, double rhs);
  /// Throws kNotHermitian / kShapeMismatch / kInvalidArgument.
  void validate() const;
};

/// maximize b^T y s.t. F0 - sum_i y_i F_i PSD (block diagonal, Hermitian).
/// Free variables; this is the dual side of SdpProblem.
struct LmiProblem {
  std::vector<std::size_t> block_dims;
  std::vector<CMatrix> f0;
  std::vector<std::vector<CMatrix>> f;  // f[i][k]
  std::vector<double> b;
};

struct SdpOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
  /// When set, one CSV row per iteration: iter,primal,dual,gap,pinf,dinf.
  std::ostream* trace = nullptr;
};

struct SdpIterate {
  int iter = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kMaxIter;
  double primal_value = 0.0;  // <C, X> in the problem's sense
  double dual_value = 0.0;    // b^T y in the problem's sense
  std::vector<CMatrix> primal_blocks;  // X_k, PSD
  std::vector<CMatrix> slack_blocks;   // Z_k = C_k - sum y_i A_ik (min form)
  RVector y;
  int iterations = 0;
  double gap = 0.0;  // relative duality gap
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  std::vector<SdpIterate> history;
};

/// Primal-dual interior point (HKM direction, Mehrotra predictor-corrector)
/// on the real symmetric embedding of the complex blocks. Linearly dependent
/// constraints are removed up front; inconsistent ones yield kInfeasible.
/// Throws kNumericalFailure if the Schur complement cannot be factored.
SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});
/// Solves an LMI through the same kernel. primal_value/dual_value are b^T y
/// (dual_value) and the value of the associated min problem (primal_value).
SdpSolution solve(const LmiProblem& p, const SdpOptions& opts = {});

/// Completely bounded norm (operator-norm picture) of a Hermiticity
/// preserving map, via the two-block program for the diamond norm of its
/// trace dual. Throws kSolverFailure if the solver does not reach optimal.
double cb_norm(const CPMap& delta, const SdpOptions& opts = {});

struct UcpMemberResult {
  bool member = false;
  double margin = 0.0;  // max over extensions of the min Choi eigenvalue
  std::vector<CMatrix> choi;  // witness extension (source blocks -> M_k)
};

/// Does the map defined on S by `values[i] = phi(S.basis()[i])` in M_k
/// extend to a ucp map on the ambient algebra?
UcpMemberResult ucp_member_detail(const OperatorSystemSpace& s, std::size_t k,
                                  const std::vector<CMatrix>& values,
                                  double tol = 1e-7,
                                  const SdpOptions& opts = {});
bool ucp_member(const OperatorSystemSpace& s, std::size_t k,
                const std::vector<CMatrix>& values, double tol = 1e-7);

}  // namespace softlimit
