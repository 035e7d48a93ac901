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

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "softlimit/numerics.hpp"
#include "softlimit/opsys.hpp"

namespace softlimit {

struct MapFlags {
  bool cp = false;
  bool unital = false;
  bool ucp = false;
  bool cpc = false;
  bool hermitian_preserving = false;
  double min_choi_eig = 0.0;  // smallest eigenvalue over all Choi blocks
  double unit_defect = 0.0;   // ||f(1) - 1||
  double unit_image_norm = 0.0;  // ||f(1)||
};

/// A linear map between FdVNAlgebras carried by its Choi data.
///
/// Convention (used everywhere): for source block p of size n and target
/// block q of size m, the Choi block is
///
///   C_pq = sum_{ij} E_ij (x) f(E^p_ij)_q        (nm x nm, unnormalized)
///
/// so the (i,j) sub-block of size m x m is the q-component of f(E^p_ij).
/// A zero-sized Choi block stands for the zero block.
class CPMap {
 public:
  using LinearFn = std::function<AlgElement(const AlgElement&)>;

  CPMap() = default;
  CPMap(FdVNAlgebra source, FdVNAlgebra target, std::vector<CMatrix> choi);

  static CPMap from_linear(const FdVNAlgebra& source,
                           const FdVNAlgebra& target, const LinearFn& f);
  /// Map determined by its values on a spanning set of the source. Throws
  /// kInconsistentAction if the inputs do not span or the action is not
  /// linear on them within `tol`.
  static CPMap from_action(const FdVNAlgebra& source,
                           const FdVNAlgebra& target,
                           const std::vector<AlgElement>& inputs,
                           const std::vector<AlgElement>& images,
                           double tol = 1e-10);
  static CPMap identity(const FdVNAlgebra& algebra);
  static CPMap zero(const FdVNAlgebra& source, const FdVNAlgebra& target);

  const FdVNAlgebra& source() const { return source_; }
  const FdVNAlgebra& target() const { return target_; }
  /// Choi block for (source block p, target block q); may be 0x0 (zero).
  const CMatrix& choi(std::size_t p, std::size_t q) const;
  /// Dense Choi block (materializes zero blocks).
  CMatrix choi_dense(std::size_t p, std::size_t q) const;
  const std::vector<CMatrix>& choi_blocks() const { return choi_; }

  /// Flags computed at construction with the default tolerance.
  const MapFlags& flags() const { return flags_; }
  bool is_cp() const { return flags_.cp; }
  bool is_unital() const { return flags_.unital; }
  bool is_ucp() const { return flags_.ucp; }
  bool is_cpc() const { return flags_.cpc; }

  AlgElement apply(const AlgElement& x) const;
  AlgElement operator()(const AlgElement& x) const { return apply(x); }

  /// Max over Choi blocks of the Frobenius distance.
  double choi_distance(const CPMap& other) const;

  CPMap& operator+=(const CPMap& other);
  CPMap& operator-=(const CPMap& other);
  CPMap& operator*=(double s);
  friend CPMap operator+(CPMap a, const CPMap& b) { return a += b; }
  friend CPMap operator-(CPMap a, const CPMap& b) { return a -= b; }
  friend CPMap operator*(double s, CPMap a) { return a *= s; }

 private:
  void require_same_shape(const CPMap& other) const;
  void refresh_flags();

  struct ChoiEntry {
    Eigen::Index row;
    Eigen::Index col;
    Complex value;
  };

  FdVNAlgebra source_;
  FdVNAlgebra target_;
  std::vector<CMatrix> choi_;  // index p * target.num_blocks() + q
  // Nonzero entries of Choi blocks with low density; empty for dense blocks.
  std::vector<std::vector<ChoiEntry>> sparse_;
  MapFlags flags_;
};

/// Recompute cp/ucp/cpc with an explicit tolerance.
MapFlags verify(const CPMap& m, const Tolerance& tol);
MapFlags verify(const CPMap& m);

/// f o g. Throws kDimensionMismatch unless g.target() == f.source().
CPMap compose(const CPMap& f, const CPMap& g);
/// f (x) id_nu acting on M_nu(source) -> M_nu(target).
CPMap amplify_map(const CPMap& f, std::size_t nu);

struct NormInterval {
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
  std::uint64_t seed = 0;
};

struct NormSearchOptions {
  std::uint64_t seed = 20260101;
  int restarts = 64;
  int refine_steps = 40;
};

/// Randomized lower bound on the operator norm of a map: max of ||d(x)|| over
/// matrix units, symmetries 2P-1 of every rank and unitaries, with local
/// refinement of the best candidates.
double map_norm_lower(const CPMap& d, const NormSearchOptions& opts = {});
/// lower from map_norm_lower, upper = cb_norm(d).
NormInterval map_norm_interval(const CPMap& d,
                               const NormSearchOptions& opts = {});

/// max over pairs of ||f(ab) - f(a)f(b)||.
double mult_defect(const CPMap& f,
                   const std::vector<std::pair<AlgElement, AlgElement>>& pairs);

/// x |-> tr(x)/n * 1 on a single block algebra of size n, into `target`.
CPMap trace_state_map(const FdVNAlgebra& source, const FdVNAlgebra& target);
/// Normalized-trace state composed with the unit: x |-> tau(x) 1, where tau
/// weighs the blocks proportionally to their size (the canonical trace).
AlgElement trace_state_times_unit(const AlgElement& x,
                                  const FdVNAlgebra& target);
/// x |-> u x u*.
CPMap unitary_conjugation(const CMatrix& u);
/// Transpose map on M_n.
CPMap transpose_map(std::size_t n);

}  // namespace softlimit
