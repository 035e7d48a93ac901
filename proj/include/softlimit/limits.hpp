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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "softlimit/cpmaps.hpp"
#include "softlimit/softsys.hpp"

namespace softlimit {

enum class NetTag { kBasic, kNull, kCustom };
const char* net_tag_name(NetTag t);

/// One element per level of a soft system, the finite stand-in for a
/// bounded net.
class BoundedNet {
 public:
  BoundedNet() = default;
  /// Throws kDimensionMismatch if entries do not match the levels.
  BoundedNet(std::shared_ptr<const SoftSystem> system, std::vector<AlgElement> entries,
             NetTag tag = NetTag::kCustom);

  /// (j_nl a)_n for n >= l and zero below l.
  static BoundedNet basic(std::shared_ptr<const SoftSystem> system, std::size_t l,
                          const AlgElement& a);
  static BoundedNet unit(std::shared_ptr<const SoftSystem> system);

  const SoftSystem& system() const { return *system_; }
  const std::shared_ptr<const SoftSystem>& system_ptr() const { return system_; }
  const std::vector<AlgElement>& entries() const { return entries_; }
  const AlgElement& at(std::size_t n) const { return entries_.at(n); }
  std::size_t size() const { return entries_.size(); }
  NetTag tag() const { return tag_; }
  /// Source level of a basic net.
  std::size_t basic_level() const { return basic_level_; }

  /// max_n ||a_n||.
  double sup_norm() const;
  BoundedNet adjoint() const;
  /// Entrywise product.
  BoundedNet operator*(const BoundedNet& other) const;
  BoundedNet operator+(const BoundedNet& other) const;
  BoundedNet scaled(double s) const;

 private:
  std::shared_ptr<const SoftSystem> system_;
  std::vector<AlgElement> entries_;
  NetTag tag_ = NetTag::kCustom;
  std::size_t basic_level_ = 0;
};

/// Evidence that a nonnegative sequence tends to zero at the horizon.
struct NullEvidence {
  double tail_max = 0.0;
  /// Slope of log(envelope) against log(n+1) on the tail, where the
  /// envelope is the running max from the right.
  double loglog_slope = 0.0;
  DecayFit exp_fit;  // log-linear fit on the tail
  std::size_t window_start = 0;
  bool is_null = false;
};

/// is_null iff tail_max <= tol, or the envelope decays at least like
/// (n+1)^(-1/2) on the tail window (which starts at index (N+1)/2).
NullEvidence null_evidence(const std::vector<double>& values, double tol = 1e-10);

struct NetVerdict {
  std::size_t window_start = 0;
  double seminorm_estimate = 0.0;  // max_{n in window} ||a_n||
  double last_norm = 0.0;          // ||a_{N-1}||
  /// jconv[m] = max_{n > m} ||a_n - j_nm a_m|| (entry N-1 is 0).
  std::vector<double> jconv;
  /// cauchy[m] = max_{m' > m} ||j_{N-1,m} a_m - j_{N-1,m'} a_m'||.
  std::vector<double> cauchy;
  NullEvidence null;
};

NetVerdict analyze_net(const BoundedNet& x, double null_tol = 1e-10);

struct QuotientVerdict {
  bool positive = false;
  std::vector<double> negativity;  // max(0, -min_eig(a_n))
  NullEvidence evidence;
  std::optional<BoundedNet> lift;  // a_n + negativity_n * 1
  /// Least-squares fit negativity_n ~ K/(n+1) on the tail window and its
  /// relative residual.
  double fit_k = 0.0;
  double fit_relative_residual = 0.0;
};

/// Throws kNotSelfAdjoint if an entry is not self-adjoint within 1e-9
/// relative to its norm.
QuotientVerdict quotient_positive(const BoundedNet& x, double tol = 1e-10);

struct LimitProbeRow {
  std::size_t net = 0;
  std::size_t n = 0;
  double image_norm = 0.0;  // ||alpha_n(a_n)||
  double cauchy = 0.0;      // max_{n' > n} ||alpha_n(a_n) - alpha_n'(a_n')||
};

struct LimitProbeReport {
  std::vector<LimitProbeRow> rows;  // sorted by (net, n)
  /// Per net: max over n, n' in the trailing window of the image distance.
  std::vector<double> consistency;
  /// Per net: alpha_{N-1}(a_{N-1}).
  std::vector<AlgElement> limit_estimate;
  std::size_t window_start = 0;
};

/// alphas[n] : level n -> T. Throws kDimensionMismatch on shape errors.
LimitProbeReport limit_map_probe(const SoftSystem& sys, const std::vector<CPMap>& alphas,
                                 const std::vector<BoundedNet>& nets);

/// Direct sum of all levels (blocks concatenated in level order).
FdVNAlgebra product_algebra(const SoftSystem& sys, std::size_t levels);
AlgElement net_to_product(const BoundedNet& x);
std::vector<AlgElement> product_to_entries(const AlgElement& x, const SoftSystem& sys,
                                           std::size_t levels);

struct TruncationCpa {
  std::size_t m = 0;
  FdVNAlgebra full;       // product of all levels
  FdVNAlgebra truncated;  // product of levels 0..m-1
  CPMap psi;              // keeps coordinates 0..m-1
  CPMap phi;              // extends by j_{n,m-1}(x_{m-1}) for n >= m
};

/// Throws kNotStrict if the exact transitivity residual exceeds tol and
/// kInvalidArgument unless 1 <= m <= horizon.
TruncationCpa truncation_cpa(const SoftSystem& sys, std::size_t m, double tol = 1e-10);

}  // namespace softlimit
