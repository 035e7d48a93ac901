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

#include "softlimit/cpmaps.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "softlimit/error.hpp"
#include "softlimit/random.hpp"
#include "softlimit/sdp.hpp"

namespace softlimit {

namespace {

const CMatrix& empty_matrix() {
  static const CMatrix kEmpty;
  return kEmpty;
}

}  // namespace

CPMap::CPMap(FdVNAlgebra source, FdVNAlgebra target, std::vector<CMatrix> choi)
    : source_(std::move(source)),
      target_(std::move(target)),
      choi_(std::move(choi)) {
  const std::size_t ns = source_.num_blocks();
  const std::size_t nt = target_.num_blocks();
  if (choi_.size() != ns * nt) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(ns * nt) + " Choi blocks");
  }
  for (std::size_t p = 0; p < ns; ++p) {
    for (std::size_t q = 0; q < nt; ++q) {
      CMatrix& c = choi_[p * nt + q];
      if (c.size() == 0) continue;
      const auto d =
          static_cast<Eigen::Index>(source_.block_size(p) * target_.block_size(q));
      if (c.rows() != d || c.cols() != d) {
        throw Error(ErrorCode::kShapeMismatch,
                    "Choi block (" + std::to_string(p) + "," +
                        std::to_string(q) + ") must be " + std::to_string(d) +
                        "x" + std::to_string(d));
      }
      if (!all_finite(c)) {
        throw Error(ErrorCode::kInvalidArgument, "Choi entries must be finite");
      }
      if (c.cwiseAbs().maxCoeff() == 0.0) c.resize(0, 0);
    }
  }
  refresh_flags();
}

CPMap CPMap::from_linear(const FdVNAlgebra& source, const FdVNAlgebra& target,
                         const LinearFn& f) {
  const std::size_t nt = target.num_blocks();
  std::vector<CMatrix> choi(source.num_blocks() * nt);
  for (std::size_t p = 0; p < source.num_blocks(); ++p) {
    const auto n = static_cast<Eigen::Index>(source.block_size(p));
    for (std::size_t q = 0; q < nt; ++q) {
      const auto m = static_cast<Eigen::Index>(target.block_size(q));
      choi[p * nt + q] = CMatrix::Zero(n * m, n * m);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const AlgElement y = f(AlgElement::matrix_unit(
            source, p, static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
        if (!(y.algebra() == target)) {
          throw Error(ErrorCode::kDimensionMismatch,
                      "linear map produced an element of the wrong algebra");
        }
        for (std::size_t q = 0; q < nt; ++q) {
          const auto m = static_cast<Eigen::Index>(target.block_size(q));
          choi[p * nt + q].block(i * m, j * m, m, m) = y.block(q);
        }
      }
    }
  }
  return CPMap(source, target, std::move(choi));
}

CPMap CPMap::from_action(const FdVNAlgebra& source, const FdVNAlgebra& target,
                         const std::vector<AlgElement>& inputs,
                         const std::vector<AlgElement>& images, double tol) {
  if (inputs.size() != images.size() || inputs.empty()) {
    throw Error(ErrorCode::kInconsistentAction,
                "need matching, nonempty input and image lists");
  }
  const auto ds = static_cast<Eigen::Index>(source.dim());
  const auto dt = static_cast<Eigen::Index>(target.dim());
  const auto k = static_cast<Eigen::Index>(inputs.size());
  CMatrix xs(k, ds);
  CMatrix ys(k, dt);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    if (!(inputs[idx].algebra() == source) || !(images[idx].algebra() == target)) {
      throw Error(ErrorCode::kDimensionMismatch, "action sample has wrong algebra");
    }
    xs.row(r) = inputs[idx].to_vector().transpose();
    ys.row(r) = images[idx].to_vector().transpose();
  }
  Eigen::ColPivHouseholderQR<CMatrix> qr(xs);
  qr.setThreshold(1e-12);
  if (qr.rank() < ds) {
    throw Error(ErrorCode::kInconsistentAction,
                "inputs span only " + std::to_string(qr.rank()) + " of " +
                    std::to_string(ds) + " dimensions");
  }
  const CMatrix lt = qr.solve(ys);  // ds x dt, row u = f(E_u)
  const double residual = (xs * lt - ys).norm();
  if (residual > tol * std::max(1.0, ys.norm())) {
    throw Error(ErrorCode::kInconsistentAction,
                "action is not linear on the inputs (residual " +
                    std::to_string(residual) + ")");
  }
  return from_linear(source, target, [&](const AlgElement& e) {
    const CVector coords = e.to_vector();
    const CVector image = lt.transpose() * coords;
    return AlgElement::from_vector(target, image);
  });
}

CPMap CPMap::identity(const FdVNAlgebra& algebra) {
  return from_linear(algebra, algebra, [](const AlgElement& x) { return x; });
}

CPMap CPMap::zero(const FdVNAlgebra& source, const FdVNAlgebra& target) {
  return CPMap(source, target,
               std::vector<CMatrix>(source.num_blocks() * target.num_blocks()));
}

const CMatrix& CPMap::choi(std::size_t p, std::size_t q) const {
  const CMatrix& c = choi_.at(p * target_.num_blocks() + q);
  return c.size() == 0 ? empty_matrix() : c;
}

CMatrix CPMap::choi_dense(std::size_t p, std::size_t q) const {
  const CMatrix& c = choi_.at(p * target_.num_blocks() + q);
  if (c.size() != 0) return c;
  const auto d =
      static_cast<Eigen::Index>(source_.block_size(p) * target_.block_size(q));
  return CMatrix::Zero(d, d);
}

AlgElement CPMap::apply(const AlgElement& x) const {
  if (!(x.algebra() == source_)) {
    throw Error(ErrorCode::kDimensionMismatch, "argument not in the source algebra");
  }
  AlgElement out = AlgElement::zero(target_);
  const std::size_t nt = target_.num_blocks();
  for (std::size_t p = 0; p < source_.num_blocks(); ++p) {
    const CMatrix& xp = x.block(p);
    const Eigen::Index n = xp.rows();
    for (std::size_t q = 0; q < nt; ++q) {
      const CMatrix& c = choi_[p * nt + q];
      if (c.size() == 0) continue;
      const auto m = static_cast<Eigen::Index>(target_.block_size(q));
      CMatrix& yq = out.block(q);
      const std::vector<ChoiEntry>& sp = sparse_[p * nt + q];
      if (!sp.empty()) {
        for (const ChoiEntry& e : sp) {
          yq(e.row % m, e.col % m) += xp(e.row / m, e.col / m) * e.value;
        }
        continue;
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const Complex s = xp(i, j);
          if (s == Complex(0.0, 0.0)) continue;
          yq.noalias() += s * c.block(i * m, j * m, m, m);
        }
      }
    }
  }
  return out;
}

double CPMap::choi_distance(const CPMap& other) const {
  require_same_shape(other);
  double d = 0.0;
  for (std::size_t k = 0; k < choi_.size(); ++k) {
    const std::size_t p = k / target_.num_blocks();
    const std::size_t q = k % target_.num_blocks();
    d = std::max(d, (choi_dense(p, q) - other.choi_dense(p, q)).norm());
  }
  return d;
}

void CPMap::require_same_shape(const CPMap& other) const {
  if (!(source_ == other.source_) || !(target_ == other.target_)) {
    throw Error(ErrorCode::kDimensionMismatch, "maps have different shapes");
  }
}

CPMap& CPMap::operator+=(const CPMap& other) {
  require_same_shape(other);
  for (std::size_t k = 0; k < choi_.size(); ++k) {
    if (other.choi_[k].size() == 0) continue;
    if (choi_[k].size() == 0) {
      choi_[k] = other.choi_[k];
    } else {
      choi_[k] += other.choi_[k];
    }
  }
  refresh_flags();
  return *this;
}

CPMap& CPMap::operator-=(const CPMap& other) {
  CPMap neg = other;
  for (CMatrix& c : neg.choi_) c = -c;
  neg.refresh_flags();
  return *this += neg;
}

CPMap& CPMap::operator*=(double s) {
  for (CMatrix& c : choi_) {
    if (c.size() != 0) c *= s;
  }
  refresh_flags();
  return *this;
}

void CPMap::refresh_flags() {
  sparse_.assign(choi_.size(), {});
  for (std::size_t k = 0; k < choi_.size(); ++k) {
    const CMatrix& c = choi_[k];
    if (c.size() < 64) continue;
    std::vector<ChoiEntry> entries;
    const Eigen::Index limit = c.size() / 10;
    for (Eigen::Index j = 0; j < c.cols() && static_cast<Eigen::Index>(entries.size()) <= limit; ++j) {
      for (Eigen::Index i = 0; i < c.rows(); ++i) {
        if (c(i, j) != Complex(0.0, 0.0)) entries.push_back({i, j, c(i, j)});
      }
    }
    if (static_cast<Eigen::Index>(entries.size()) <= limit) sparse_[k] = std::move(entries);
  }
  flags_ = verify(*this);
}

// ---------------------------------------------------------------------------

namespace {

// Smallest and largest eigenvalue of a Hermitian matrix, computed per
// connected component of its sparsity graph. Choi matrices of maps between
// commutative algebras are diagonal, so this avoids dense solves on them.
std::pair<double, double> extreme_eigenvalues(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<Eigen::Index>> members;
  for (Eigen::Index start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const auto id = static_cast<Eigen::Index>(members.size());
    members.push_back({start});
    comp[start] = id;
    for (std::size_t k = 0; k < members.back().size(); ++k) {
      const Eigen::Index i = members.back()[k];
      for (Eigen::Index j = 0; j < n; ++j) {
        if (comp[j] < 0 && h(i, j) != Complex(0.0, 0.0)) {
          comp[j] = id;
          members.back().push_back(j);
        }
      }
    }
  }
  if (members.size() == 1) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
    return {solver.eigenvalues()(0), solver.eigenvalues()(n - 1)};
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& idx : members) {
    const auto k = static_cast<Eigen::Index>(idx.size());
    if (k == 1) {
      const double v = h(idx[0], idx[0]).real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      continue;
    }
    CMatrix sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = h(idx[a], idx[b]);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sub, Eigen::EigenvaluesOnly);
    lo = std::min(lo, solver.eigenvalues()(0));
    hi = std::max(hi, solver.eigenvalues()(k - 1));
  }
  return {lo, hi};
}

}  // namespace

MapFlags verify(const CPMap& m, const Tolerance& tol) {
  MapFlags f;
  f.cp = true;
  f.hermitian_preserving = true;
  bool first = true;
  const std::size_t nt = m.target().num_blocks();
  for (std::size_t p = 0; p < m.source().num_blocks(); ++p) {
    for (std::size_t q = 0; q < nt; ++q) {
      const CMatrix& c = m.choi(p, q);
      if (c.size() == 0) {
        if (first || f.min_choi_eig > 0.0) f.min_choi_eig = 0.0;
        first = false;
        continue;
      }
      const double scale = c.norm();
      const double herm_tol = tol.bound(scale) * static_cast<double>(c.rows());
      if (hermitian_defect(c) > herm_tol) {
        f.hermitian_preserving = false;
        f.cp = false;
        continue;
      }
      const auto [lo, hi] = extreme_eigenvalues(symmetrize(c));
      const double norm = std::max(std::abs(lo), std::abs(hi));
      f.min_choi_eig = first ? lo : std::min(f.min_choi_eig, lo);
      first = false;
      if (lo < -tol.bound(norm)) f.cp = false;
    }
  }
  const AlgElement one = AlgElement::unit(m.source());
  const AlgElement image = m.apply(one);
  f.unit_defect = (image - AlgElement::unit(m.target())).norm();
  f.unit_image_norm = image.norm();
  const double unit_tol = tol.bound(1.0);
  f.unital = f.unit_defect <= unit_tol;
  f.ucp = f.cp && f.unital;
  f.cpc = f.cp && f.unit_image_norm <= 1.0 + unit_tol;
  return f;
}

MapFlags verify(const CPMap& m) {
  std::size_t dim = 1;
  for (std::size_t n : m.source().block_sizes()) {
    for (std::size_t k : m.target().block_sizes()) dim = std::max(dim, n * k);
  }
  return verify(m, Tolerance::for_dim(dim));
}

CPMap compose(const CPMap& f, const CPMap& g) {
  if (!(g.target() == f.source())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot compose: inner target differs from outer source");
  }
  return CPMap::from_linear(g.source(), f.target(),
                            [&](const AlgElement& x) { return f.apply(g.apply(x)); });
}

CPMap amplify_map(const CPMap& f, std::size_t nu) {
  if (nu == 0) {
    throw Error(ErrorCode::kInvalidArgument, "amplification level must be >= 1");
  }
  if (nu == 1) return f;
  const FdVNAlgebra src = Amplification{f.source(), nu}.algebra();
  const FdVNAlgebra tgt = Amplification{f.target(), nu}.algebra();
  return CPMap::from_linear(src, tgt, [&](const AlgElement& x) {
    std::vector<AlgElement> entries = amplified_entries(x, f.source(), nu);
    for (AlgElement& e : entries) e = f.apply(e);
    return amplify_element(entries, nu);
  });
}

// ---------------------------------------------------------------------------
// Norm estimates

namespace {

CMatrix unitary_exp(const CMatrix& h, double step) {
  const HermEigen eig = herm_eigen(h);
  CVector phases(eig.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::polar(1.0, step * eig.values(k));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

// Unitary polar factor of a square matrix.
CMatrix polar_unitary(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

double map_norm_lower(const CPMap& d, const NormSearchOptions& opts) {
  const FdVNAlgebra& src = d.source();
  Rng rng(opts.seed);
  double best = 0.0;
  AlgElement best_x = AlgElement::unit(src);
  bool best_is_unitary = true;

  auto consider = [&](const AlgElement& x, bool unitary) {
    const double v = d.apply(x).norm();
    if (v > best) {
      best = v;
      best_x = x;
      best_is_unitary = unitary;
    }
    return v;
  };

  consider(AlgElement::unit(src), true);
  for (std::size_t k = 0; k < src.dim(); ++k) {
    consider(AlgElement::basis_unit(src, k), false);
  }

  const auto ds = static_cast<Eigen::Index>(src.dim());
  const auto dt = static_cast<Eigen::Index>(d.target().dim());
  CMatrix lin(dt, ds);
  for (std::size_t k = 0; k < src.dim(); ++k) {
    lin.col(static_cast<Eigen::Index>(k)) =
        d.apply(AlgElement::basis_unit(src, k)).to_vector();
  }

  // Top Hilbert-Schmidt singular direction, pushed to its unitary polar part.
  {
    Eigen::BDCSVD<CMatrix> svd(lin, Eigen::ComputeThinV);
    const Eigen::Index top = std::min<Eigen::Index>(3, svd.matrixV().cols());
    for (Eigen::Index c = 0; c < top; ++c) {
      AlgElement x = AlgElement::from_vector(src, svd.matrixV().col(c));
      const double nx = x.norm();
      if (nx > 0.0) consider((1.0 / nx) * x, false);
      for (std::size_t p = 0; p < src.num_blocks(); ++p) {
        x.block(p) = polar_unitary(x.block(p));
      }
      consider(x, true);
    }
  }

  // For Hermitian-preserving maps, ||d(x)|| over symmetries x is raised
  // monotonically by x <- s * sign(d*(v v*)), where v is an eigenvector of
  // d(x) for the eigenvalue of largest modulus and s is that eigenvalue's
  // sign.
  const bool hermitian = d.flags().hermitian_preserving;
  auto ascend = [&](AlgElement x) {
    double value = d.apply(x).norm();
    for (int it = 0; it < 100; ++it) {
      const AlgElement y = d.apply(x);
      AlgElement proj = AlgElement::zero(d.target());
      double top = -1.0;
      for (std::size_t q = 0; q < y.algebra().num_blocks(); ++q) {
        const HermEigen e = herm_eigen(y.block(q));
        const Eigen::Index last = e.values.size() - 1;
        const bool upper = e.values(last) >= -e.values(0);
        const double mag = upper ? e.values(last) : -e.values(0);
        if (mag > top) {
          top = mag;
          proj = AlgElement::zero(d.target());
          const CVector v = e.vectors.col(upper ? last : 0);
          proj.block(q) = (upper ? 1.0 : -1.0) * (v * v.adjoint());
        }
      }
      AlgElement g = AlgElement::from_vector(src, lin.adjoint() * proj.to_vector());
      AlgElement next = AlgElement::zero(src);
      for (std::size_t p = 0; p < src.num_blocks(); ++p) {
        const HermEigen e = herm_eigen(symmetrize(g.block(p)));
        CVector signs(e.values.size());
        for (Eigen::Index k = 0; k < signs.size(); ++k) signs(k) = e.values(k) >= 0.0 ? 1.0 : -1.0;
        next.block(p) = e.vectors * signs.asDiagonal() * e.vectors.adjoint();
      }
      const double v = consider(next, true);
      if (v <= value * (1.0 + 1e-14)) break;
      x = std::move(next);
      value = v;
    }
  };
  if (hermitian) ascend(AlgElement::unit(src));

  for (int r = 0; r < opts.restarts; ++r) {
    AlgElement sym = AlgElement::zero(src);
    AlgElement uni = AlgElement::zero(src);
    for (std::size_t p = 0; p < src.num_blocks(); ++p) {
      const std::size_t n = src.block_size(p);
      const std::size_t rank = static_cast<std::size_t>(r) % (n + 1);
      const auto k = static_cast<Eigen::Index>(n);
      sym.block(p) =
          2.0 * random_projection(n, rank, rng) - CMatrix::Identity(k, k);
      uni.block(p) = random_unitary(n, rng);
    }
    consider(sym, true);
    consider(uni, true);
    if (hermitian) ascend(sym);
  }

  // Local refinement by unitary rotations of the incumbent.
  if (!best_is_unitary) {
    AlgElement u = best_x;
    for (std::size_t p = 0; p < src.num_blocks(); ++p) {
      u.block(p) = polar_unitary(u.block(p));
    }
    consider(u, true);
  }
  AlgElement current = best_x;
  if (!best_is_unitary) {
    for (std::size_t p = 0; p < src.num_blocks(); ++p) {
      current.block(p) = polar_unitary(current.block(p));
    }
  }
  double current_val = d.apply(current).norm();
  double step = 0.3;
  for (int it = 0; it < opts.refine_steps; ++it) {
    AlgElement trial = current;
    for (std::size_t p = 0; p < src.num_blocks(); ++p) {
      const CMatrix h = random_hermitian(src.block_size(p), rng);
      trial.block(p) = current.block(p) * unitary_exp(h, step);
    }
    const double v = consider(trial, true);
    if (v > current_val) {
      current = trial;
      current_val = v;
    } else {
      step *= 0.85;
    }
  }
  return best;
}

NormInterval map_norm_interval(const CPMap& d, const NormSearchOptions& opts) {
  NormInterval out;
  out.seed = opts.seed;
  out.lower = map_norm_lower(d, opts);
  out.upper = cb_norm(d);
  // The lower bound is an attained value; the SDP bound may undershoot it by
  // solver tolerance only.
  if (out.upper < out.lower) out.upper = out.lower;
  return out;
}

double mult_defect(const CPMap& f,
                   const std::vector<std::pair<AlgElement, AlgElement>>& pairs) {
  double worst = 0.0;
  for (const auto& [a, b] : pairs) {
    const AlgElement lhs = f.apply(a * b);
    const AlgElement rhs = f.apply(a) * f.apply(b);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

AlgElement trace_state_times_unit(const AlgElement& x,
                                  const FdVNAlgebra& target) {
  Complex tr = 0.0;
  for (const CMatrix& b : x.blocks()) tr += b.trace();
  const double n = static_cast<double>(x.algebra().rep_size());
  return (tr / n) * AlgElement::unit(target);
}

CPMap trace_state_map(const FdVNAlgebra& source, const FdVNAlgebra& target) {
  return CPMap::from_linear(source, target, [&](const AlgElement& x) {
    return trace_state_times_unit(x, target);
  });
}

CPMap unitary_conjugation(const CMatrix& u) {
  const FdVNAlgebra a = FdVNAlgebra::full(static_cast<std::size_t>(u.rows()));
  return CPMap::from_linear(a, a, [&](const AlgElement& x) {
    return AlgElement(a, {u * x.block(0) * u.adjoint()});
  });
}

CPMap transpose_map(std::size_t n) {
  const FdVNAlgebra a = FdVNAlgebra::full(n);
  return CPMap::from_linear(a, a, [&](const AlgElement& x) {
    return AlgElement(a, {x.block(0).transpose()});
  });
}

}  // namespace softlimit
