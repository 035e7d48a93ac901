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

#include <Eigen/QR>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "softlimit/numerics.hpp"

namespace softlimit {

/// A finite direct sum of full matrix blocks M_{n_1} + ... + M_{n_k}.
class FdVNAlgebra {
 public:
  FdVNAlgebra() = default;
  explicit FdVNAlgebra(std::vector<std::size_t> block_sizes);

  static FdVNAlgebra full(std::size_t n) { return FdVNAlgebra({n}); }
  /// Commutative algebra C^n (n blocks of size one).
  static FdVNAlgebra diagonal(std::size_t n);

  const std::vector<std::size_t>& block_sizes() const { return blocks_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t block_size(std::size_t p) const { return blocks_.at(p); }
  /// Sum of n_j^2, the complex vector-space dimension.
  std::size_t dim() const;
  /// Sum of n_j, the size of the block-diagonal representation.
  std::size_t rep_size() const;

  /// Linear index of the matrix unit E_{ij} of block p within [0, dim()).
  std::size_t unit_index(std::size_t p, std::size_t i, std::size_t j) const;

  bool operator==(const FdVNAlgebra& other) const = default;

 private:
  std::vector<std::size_t> blocks_;
};

/// An element of an FdVNAlgebra, stored block by block.
class AlgElement {
 public:
  AlgElement() = default;
  AlgElement(FdVNAlgebra algebra, std::vector<CMatrix> blocks);

  static AlgElement zero(const FdVNAlgebra& algebra);
  static AlgElement unit(const FdVNAlgebra& algebra);
  /// Matrix unit E_{ij} in block p.
  static AlgElement matrix_unit(const FdVNAlgebra& algebra, std::size_t p,
                                std::size_t i, std::size_t j);
  /// The k-th matrix unit in unit_index order.
  static AlgElement basis_unit(const FdVNAlgebra& algebra, std::size_t k);
  /// Inverse of to_vector().
  static AlgElement from_vector(const FdVNAlgebra& algebra, const CVector& v);
  /// Block-diagonal matrix of size rep_size() -> element (off-block entries
  /// are discarded).
  static AlgElement from_block_diagonal(const FdVNAlgebra& algebra,
                                       const CMatrix& m);

  const FdVNAlgebra& algebra() const { return algebra_; }
  const std::vector<CMatrix>& blocks() const { return blocks_; }
  const CMatrix& block(std::size_t p) const { return blocks_.at(p); }
  CMatrix& block(std::size_t p) { return blocks_.at(p); }

  /// Coordinates in the matrix-unit basis, length algebra().dim().
  CVector to_vector() const;
  CMatrix to_block_diagonal() const;

  AlgElement adjoint() const;
  bool is_self_adjoint(double tol) const;
  /// Spectral norm, max over blocks.
  double norm() const;
  /// Hilbert-Schmidt norm.
  double hs_norm() const;
  /// Smallest eigenvalue over all blocks (element must be self-adjoint).
  double min_eig() const;

  AlgElement& operator+=(const AlgElement& other);
  AlgElement& operator-=(const AlgElement& other);
  AlgElement& operator*=(Complex s);

  friend AlgElement operator+(AlgElement a, const AlgElement& b) {
    return a += b;
  }
  friend AlgElement operator-(AlgElement a, const AlgElement& b) {
    return a -= b;
  }
  friend AlgElement operator*(Complex s, AlgElement a) { return a *= s; }
  friend AlgElement operator*(double s, AlgElement a) {
    return a *= Complex(s, 0.0);
  }
  /// Algebra product, blockwise.
  friend AlgElement operator*(const AlgElement& a, const AlgElement& b);

 private:
  void require_same_algebra(const AlgElement& other) const;

  FdVNAlgebra algebra_;
  std::vector<CMatrix> blocks_;
};

AlgElement unit(const FdVNAlgebra& algebra);
double order_norm(const AlgElement& a);

/// A concrete operator system: a unital self-adjoint subspace of an
/// FdVNAlgebra, given by a linearly independent spanning list.
class OperatorSystemSpace {
 public:
  /// Validates independence (Hilbert-Schmidt Gram-Schmidt with pivoting),
  /// presence of the unit and closure under the adjoint. Throws
  /// kInvalidArgument naming the offending basis index on failure.
  OperatorSystemSpace(FdVNAlgebra ambient, std::vector<AlgElement> basis,
                      double tol = 1e-10);

  /// The whole ambient algebra with its matrix-unit basis.
  static OperatorSystemSpace whole(const FdVNAlgebra& ambient);

  const FdVNAlgebra& ambient() const { return ambient_; }
  const std::vector<AlgElement>& basis() const { return basis_; }
  std::size_t dim() const { return basis_.size(); }
  /// Hilbert-Schmidt orthonormal basis of the same span.
  const std::vector<AlgElement>& orthonormal_basis() const { return onb_; }
  /// True when basis() is the matrix-unit basis of the ambient.
  bool is_standard() const { return standard_; }

  /// Coefficients of `a` in basis(); nullopt if the least-squares residual
  /// exceeds abs_tol + rel_tol*||a||_HS.
  std::optional<CVector> try_coefficients(const AlgElement& a,
                                          double abs_tol = 1e-9,
                                          double rel_tol = 1e-9) const;
  bool contains(const AlgElement& a, double tol = 1e-9) const;

 private:
  OperatorSystemSpace() = default;

  FdVNAlgebra ambient_;
  std::vector<AlgElement> basis_;
  std::vector<AlgElement> onb_;
  CMatrix basis_matrix_;  // columns are basis vectors
  std::shared_ptr<const Eigen::ColPivHouseholderQR<CMatrix>> qr_;
  bool standard_ = false;  // basis is the matrix-unit basis of the ambient
};

/// Coefficient vector of `a` in S.basis(); throws kNotInSpan.
CVector membership(const OperatorSystemSpace& s, const AlgElement& a,
                   double tol = 1e-9);

/// Amplified algebra M_nu(A) = direct sum of M_{nu*n_j}.
struct Amplification {
  FdVNAlgebra base;
  std::size_t level = 1;

  FdVNAlgebra algebra() const;
};

/// [a_ij] = sum_ij a_ij (x) E_ij as an element of M_nu(A). `entries` is a
/// row-major nu x nu array. Throws kShapeMismatch.
AlgElement amplify_element(const std::vector<AlgElement>& entries,
                           std::size_t nu);
/// Inverse of amplify_element: the nu x nu entries of an amplified element.
std::vector<AlgElement> amplified_entries(const AlgElement& x,
                                          const FdVNAlgebra& base,
                                          std::size_t nu);

}  // namespace softlimit
