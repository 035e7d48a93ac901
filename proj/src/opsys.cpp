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

#include "softlimit/opsys.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "softlimit/error.hpp"

namespace softlimit {

// ---------------------------------------------------------------------------
// FdVNAlgebra

FdVNAlgebra::FdVNAlgebra(std::vector<std::size_t> block_sizes)
    : blocks_(std::move(block_sizes)) {
  if (blocks_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "algebra needs at least one block");
  }
  for (std::size_t n : blocks_) {
    if (n == 0) {
      throw Error(ErrorCode::kInvalidArgument, "block sizes must be positive");
    }
  }
}

FdVNAlgebra FdVNAlgebra::diagonal(std::size_t n) {
  return FdVNAlgebra(std::vector<std::size_t>(n, 1));
}

std::size_t FdVNAlgebra::dim() const {
  std::size_t d = 0;
  for (std::size_t n : blocks_) d += n * n;
  return d;
}

std::size_t FdVNAlgebra::rep_size() const {
  return std::accumulate(blocks_.begin(), blocks_.end(), std::size_t{0});
}

std::size_t FdVNAlgebra::unit_index(std::size_t p, std::size_t i,
                                    std::size_t j) const {
  std::size_t offset = 0;
  for (std::size_t q = 0; q < p; ++q) offset += blocks_[q] * blocks_[q];
  return offset + i * blocks_.at(p) + j;
}

// ---------------------------------------------------------------------------
// AlgElement

AlgElement::AlgElement(FdVNAlgebra algebra, std::vector<CMatrix> blocks)
    : algebra_(std::move(algebra)), blocks_(std::move(blocks)) {
  if (blocks_.size() != algebra_.num_blocks()) {
    throw Error(ErrorCode::kShapeMismatch, "block count does not match algebra");
  }
  for (std::size_t p = 0; p < blocks_.size(); ++p) {
    const auto n = static_cast<Eigen::Index>(algebra_.block_size(p));
    if (blocks_[p].rows() != n || blocks_[p].cols() != n) {
      throw Error(ErrorCode::kShapeMismatch,
                  "block " + std::to_string(p) + " has the wrong size");
    }
  }
}

AlgElement AlgElement::zero(const FdVNAlgebra& algebra) {
  std::vector<CMatrix> blocks;
  for (std::size_t n : algebra.block_sizes()) {
    const auto k = static_cast<Eigen::Index>(n);
    blocks.push_back(CMatrix::Zero(k, k));
  }
  return AlgElement(algebra, std::move(blocks));
}

AlgElement AlgElement::unit(const FdVNAlgebra& algebra) {
  std::vector<CMatrix> blocks;
  for (std::size_t n : algebra.block_sizes()) {
    const auto k = static_cast<Eigen::Index>(n);
    blocks.push_back(CMatrix::Identity(k, k));
  }
  return AlgElement(algebra, std::move(blocks));
}

AlgElement AlgElement::matrix_unit(const FdVNAlgebra& algebra, std::size_t p,
                                   std::size_t i, std::size_t j) {
  AlgElement e = zero(algebra);
  e.blocks_.at(p)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
      1.0;
  return e;
}

AlgElement AlgElement::basis_unit(const FdVNAlgebra& algebra, std::size_t k) {
  for (std::size_t p = 0; p < algebra.num_blocks(); ++p) {
    const std::size_t n = algebra.block_size(p);
    if (k < n * n) return matrix_unit(algebra, p, k / n, k % n);
    k -= n * n;
  }
  throw Error(ErrorCode::kInvalidArgument, "basis index out of range");
}

AlgElement AlgElement::from_vector(const FdVNAlgebra& algebra,
                                   const CVector& v) {
  if (static_cast<std::size_t>(v.size()) != algebra.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "coordinate vector has wrong length");
  }
  AlgElement e = zero(algebra);
  Eigen::Index k = 0;
  for (CMatrix& b : e.blocks_) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = v(k++);
    }
  }
  return e;
}

AlgElement AlgElement::from_block_diagonal(const FdVNAlgebra& algebra,
                                           const CMatrix& m) {
  const auto size = static_cast<Eigen::Index>(algebra.rep_size());
  if (m.rows() != size || m.cols() != size) {
    throw Error(ErrorCode::kShapeMismatch, "block-diagonal matrix has wrong size");
  }
  std::vector<CMatrix> blocks;
  Eigen::Index offset = 0;
  for (std::size_t n : algebra.block_sizes()) {
    const auto k = static_cast<Eigen::Index>(n);
    blocks.push_back(m.block(offset, offset, k, k));
    offset += k;
  }
  return AlgElement(algebra, std::move(blocks));
}

CVector AlgElement::to_vector() const {
  CVector v(static_cast<Eigen::Index>(algebra_.dim()));
  Eigen::Index k = 0;
  for (const CMatrix& b : blocks_) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) v(k++) = b(i, j);
    }
  }
  return v;
}

CMatrix AlgElement::to_block_diagonal() const {
  const auto size = static_cast<Eigen::Index>(algebra_.rep_size());
  CMatrix m = CMatrix::Zero(size, size);
  Eigen::Index offset = 0;
  for (const CMatrix& b : blocks_) {
    m.block(offset, offset, b.rows(), b.cols()) = b;
    offset += b.rows();
  }
  return m;
}

AlgElement AlgElement::adjoint() const {
  AlgElement out = *this;
  for (CMatrix& b : out.blocks_) b = b.adjoint().eval();
  return out;
}

bool AlgElement::is_self_adjoint(double tol) const {
  for (const CMatrix& b : blocks_) {
    if (hermitian_defect(b) > tol) return false;
  }
  return true;
}

double AlgElement::norm() const {
  double n = 0.0;
  for (const CMatrix& b : blocks_) n = std::max(n, op_norm(b));
  return n;
}

double AlgElement::hs_norm() const {
  double s = 0.0;
  for (const CMatrix& b : blocks_) s += b.squaredNorm();
  return std::sqrt(s);
}

double AlgElement::min_eig() const {
  double m = 0.0;
  bool first = true;
  for (const CMatrix& b : blocks_) {
    const double e = softlimit::min_eig(b);
    m = first ? e : std::min(m, e);
    first = false;
  }
  return m;
}

void AlgElement::require_same_algebra(const AlgElement& other) const {
  if (!(algebra_ == other.algebra_)) {
    throw Error(ErrorCode::kDimensionMismatch, "elements of different algebras");
  }
}

AlgElement& AlgElement::operator+=(const AlgElement& other) {
  require_same_algebra(other);
  for (std::size_t p = 0; p < blocks_.size(); ++p) blocks_[p] += other.blocks_[p];
  return *this;
}

AlgElement& AlgElement::operator-=(const AlgElement& other) {
  require_same_algebra(other);
  for (std::size_t p = 0; p < blocks_.size(); ++p) blocks_[p] -= other.blocks_[p];
  return *this;
}

AlgElement& AlgElement::operator*=(Complex s) {
  for (CMatrix& b : blocks_) b *= s;
  return *this;
}

AlgElement operator*(const AlgElement& a, const AlgElement& b) {
  a.require_same_algebra(b);
  AlgElement out = a;
  for (std::size_t p = 0; p < out.blocks_.size(); ++p) {
    out.blocks_[p] = a.blocks_[p] * b.blocks_[p];
  }
  return out;
}

AlgElement unit(const FdVNAlgebra& algebra) { return AlgElement::unit(algebra); }

double order_norm(const AlgElement& a) { return a.norm(); }

// ---------------------------------------------------------------------------
// OperatorSystemSpace

namespace {

// Column-pivoted Gram-Schmidt; returns the orthonormal vectors or throws with
// the index of the first input found to be dependent.
std::vector<CVector> pivoted_gram_schmidt(const std::vector<CVector>& input,
                                          double tol) {
  std::vector<CVector> residual = input;
  std::vector<bool> used(input.size(), false);
  std::vector<CVector> onb;
  for (std::size_t step = 0; step < input.size(); ++step) {
    std::size_t best = input.size();
    double best_norm = -1.0;
    for (std::size_t k = 0; k < input.size(); ++k) {
      if (used[k]) continue;
      const double nk = residual[k].norm();
      if (nk > best_norm) {
        best_norm = nk;
        best = k;
      }
    }
    double scale = 0.0;
    for (std::size_t k = 0; k < input.size(); ++k) {
      if (!used[k]) scale = std::max(scale, input[k].norm());
    }
    if (best_norm <= tol * std::max(1.0, scale)) {
      std::size_t offending = input.size();
      for (std::size_t k = 0; k < input.size(); ++k) {
        if (!used[k]) {
          offending = k;
          break;
        }
      }
      throw Error(ErrorCode::kInvalidArgument,
                  "basis element " + std::to_string(offending) +
                      " is linearly dependent on the others");
    }
    used[best] = true;
    CVector q = residual[best] / best_norm;
    for (std::size_t k = 0; k < input.size(); ++k) {
      if (used[k]) continue;
      residual[k] -= q * q.dot(residual[k]);
    }
    onb.push_back(std::move(q));
  }
  return onb;
}

}  // namespace

OperatorSystemSpace::OperatorSystemSpace(FdVNAlgebra ambient,
                                         std::vector<AlgElement> basis,
                                         double tol)
    : ambient_(std::move(ambient)), basis_(std::move(basis)) {
  if (basis_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "operator system needs a basis");
  }
  std::vector<CVector> vecs;
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    if (!(basis_[k].algebra() == ambient_)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "basis element " + std::to_string(k) + " lives elsewhere");
    }
    vecs.push_back(basis_[k].to_vector());
  }
  const std::vector<CVector> onb = pivoted_gram_schmidt(vecs, tol);
  for (const CVector& q : onb) onb_.push_back(AlgElement::from_vector(ambient_, q));

  basis_matrix_.resize(static_cast<Eigen::Index>(ambient_.dim()),
                       static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t k = 0; k < vecs.size(); ++k) {
    basis_matrix_.col(static_cast<Eigen::Index>(k)) = vecs[k];
  }
  qr_ = std::make_shared<const Eigen::ColPivHouseholderQR<CMatrix>>(basis_matrix_);

  if (!contains(AlgElement::unit(ambient_), 1e-8)) {
    throw Error(ErrorCode::kInvalidArgument, "span does not contain the unit");
  }
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    if (!contains(basis_[k].adjoint(), 1e-8)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "span is not closed under adjoint (basis element " +
                      std::to_string(k) + ")");
    }
  }
}

OperatorSystemSpace OperatorSystemSpace::whole(const FdVNAlgebra& ambient) {
  OperatorSystemSpace s;
  s.ambient_ = ambient;
  for (std::size_t k = 0; k < ambient.dim(); ++k) {
    s.basis_.push_back(AlgElement::basis_unit(ambient, k));
  }
  s.onb_ = s.basis_;
  s.standard_ = true;
  return s;
}

std::optional<CVector> OperatorSystemSpace::try_coefficients(
    const AlgElement& a, double abs_tol, double rel_tol) const {
  if (!(a.algebra() == ambient_)) {
    throw Error(ErrorCode::kDimensionMismatch, "element of another algebra");
  }
  const CVector v = a.to_vector();
  if (standard_) return v;
  const CVector c = qr_->solve(v);
  const double residual = (basis_matrix_ * c - v).norm();
  if (residual > abs_tol + rel_tol * v.norm()) return std::nullopt;
  return c;
}

bool OperatorSystemSpace::contains(const AlgElement& a, double tol) const {
  return try_coefficients(a, tol, tol).has_value();
}

CVector membership(const OperatorSystemSpace& s, const AlgElement& a,
                   double tol) {
  auto c = s.try_coefficients(a, tol, tol);
  if (!c) throw Error(ErrorCode::kNotInSpan, "element is not in the span");
  return *c;
}

// ---------------------------------------------------------------------------
// Amplification

FdVNAlgebra Amplification::algebra() const {
  if (level == 0) {
    throw Error(ErrorCode::kInvalidArgument, "amplification level must be >= 1");
  }
  std::vector<std::size_t> blocks;
  for (std::size_t n : base.block_sizes()) blocks.push_back(n * level);
  return FdVNAlgebra(std::move(blocks));
}

AlgElement amplify_element(const std::vector<AlgElement>& entries,
                           std::size_t nu) {
  if (nu == 0 || entries.size() != nu * nu) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected a " + std::to_string(nu) + "x" + std::to_string(nu) +
                    " array of elements");
  }
  const FdVNAlgebra& base = entries.front().algebra();
  for (const AlgElement& e : entries) {
    if (!(e.algebra() == base)) {
      throw Error(ErrorCode::kShapeMismatch, "entries from different algebras");
    }
  }
  const FdVNAlgebra amp = Amplification{base, nu}.algebra();
  AlgElement out = AlgElement::zero(amp);
  for (std::size_t a = 0; a < nu; ++a) {
    for (std::size_t b = 0; b < nu; ++b) {
      const CMatrix e = softlimit::matrix_unit(nu, a, b);
      const AlgElement& x = entries[a * nu + b];
      for (std::size_t p = 0; p < base.num_blocks(); ++p) {
        out.block(p) += kron(x.block(p), e);
      }
    }
  }
  return out;
}

std::vector<AlgElement> amplified_entries(const AlgElement& x,
                                          const FdVNAlgebra& base,
                                          std::size_t nu) {
  if (!(x.algebra() == Amplification{base, nu}.algebra())) {
    throw Error(ErrorCode::kShapeMismatch, "element is not in M_nu(base)");
  }
  std::vector<AlgElement> entries(nu * nu, AlgElement::zero(base));
  const auto v = static_cast<Eigen::Index>(nu);
  for (std::size_t p = 0; p < base.num_blocks(); ++p) {
    const auto n = static_cast<Eigen::Index>(base.block_size(p));
    const CMatrix& xb = x.block(p);
    for (Eigen::Index a = 0; a < v; ++a) {
      for (Eigen::Index b = 0; b < v; ++b) {
        CMatrix& e = entries[static_cast<std::size_t>(a * v + b)].block(p);
        for (Eigen::Index i = 0; i < n; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) e(i, j) = xb(i * v + a, j * v + b);
        }
      }
    }
  }
  return entries;
}

}  // namespace softlimit
