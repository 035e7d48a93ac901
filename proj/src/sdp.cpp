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

#include "softlimit/sdp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "softlimit/error.hpp"

namespace softlimit {

const char* sdp_status_name(SdpStatus s) {
  switch (s) {
    case SdpStatus::kOptimal: return "optimal";
    case SdpStatus::kInfeasible: return "infeasible";
    case SdpStatus::kMaxIter: return "max_iter";
  }
  return "unknown";
}

std::size_t SdpProblem::add_block(std::size_t dim) {
  block_dims.push_back(dim);
  objective.emplace_back();
  return block_dims.size() - 1;
}

namespace {

void append_dense_terms(std::vector<HermTerm>& terms, std::size_t block,
                        const CMatrix& a) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = r; c < a.cols(); ++c) {
      const Complex v = a(r, c);
      if (v == Complex(0.0, 0.0)) continue;
      terms.push_back(HermTerm{block, static_cast<std::size_t>(r),
                               static_cast<std::size_t>(c), v});
    }
  }
}

}  // namespace

void SdpProblem::add_dense_constraint(const std::vector<CMatrix>& a,
                                      double rhs) {
  SdpConstraint con;
  con.rhs = rhs;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].size() == 0) continue;
    append_dense_terms(con.terms, k, a[k]);
  }
  constraints.push_back(std::move(con));
}

void SdpProblem::validate() const {
  if (objective.size() != block_dims.size()) {
    throw Error(ErrorCode::kShapeMismatch, "objective needs one entry per block");
  }
  for (std::size_t k = 0; k < block_dims.size(); ++k) {
    const std::size_t n = block_dims[k];
    if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty SDP block");
    const CMatrix& c = objective[k];
    if (c.size() == 0) continue;
    if (c.rows() != static_cast<Eigen::Index>(n) || c.cols() != c.rows()) {
      throw Error(ErrorCode::kShapeMismatch, "objective block has wrong size");
    }
    if (hermitian_defect(c) > 1e-10 * (1.0 + c.norm())) {
      throw Error(ErrorCode::kNotHermitian, "objective block is not Hermitian");
    }
  }
  for (const SdpConstraint& con : constraints) {
    for (const HermTerm& t : con.terms) {
      if (t.block >= block_dims.size() || t.row > t.col ||
          t.col >= block_dims[t.block]) {
        throw Error(ErrorCode::kShapeMismatch, "constraint term out of range");
      }
    }
  }
}

namespace {

using RMatrix = Eigen::MatrixXd;

struct RealEntry {
  int r;
  int c;
  double v;
};

struct RealBlockPart {
  int block;
  std::vector<RealEntry> entries;
  std::vector<int> cols;  // distinct columns touched
};

struct RealConstraint {
  std::vector<RealBlockPart> parts;
  double b = 0.0;
};

struct RealSdp {
  std::vector<int> n;
  std::vector<RMatrix> c;
  std::vector<RealConstraint> a;
};

// Real symmetric embedding H = A + iB -> [[A, -B], [B, A]]; inner products
// double, so right-hand sides are doubled by the caller.
void embed_term(const HermTerm& t, std::size_t n,
                std::vector<RealEntry>& out) {
  const int r = static_cast<int>(t.row);
  const int c = static_cast<int>(t.col);
  const int m = static_cast<int>(n);
  const double a = t.value.real();
  const double b = t.value.imag();
  if (r == c) {
    if (a != 0.0) {
      out.push_back({r, r, a});
      out.push_back({r + m, r + m, a});
    }
    return;
  }
  if (a != 0.0) {
    out.push_back({r, c, a});
    out.push_back({c, r, a});
    out.push_back({r + m, c + m, a});
    out.push_back({c + m, r + m, a});
  }
  if (b != 0.0) {
    out.push_back({r, c + m, -b});
    out.push_back({c + m, r, -b});
    out.push_back({r + m, c, b});
    out.push_back({c, r + m, b});
  }
}

RMatrix embed_matrix(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  RMatrix out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.bottomRightCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  return out;
}

CMatrix unembed_matrix(const RMatrix& x) {
  const Eigen::Index n = x.rows() / 2;
  CMatrix out(n, n);
  const RMatrix re = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  const RMatrix im = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  out.real() = re;
  out.imag() = im;
  return symmetrize(out);
}

RealConstraint embed_constraint(const SdpConstraint& con,
                                const std::vector<std::size_t>& dims) {
  RealConstraint rc;
  rc.b = 2.0 * con.rhs;
  std::vector<std::vector<RealEntry>> by_block(dims.size());
  for (const HermTerm& t : con.terms) embed_term(t, dims[t.block], by_block[t.block]);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (by_block[k].empty()) continue;
    RealBlockPart part;
    part.block = static_cast<int>(k);
    // Merge duplicate coordinates.
    std::sort(by_block[k].begin(), by_block[k].end(),
              [](const RealEntry& x, const RealEntry& y) {
                return x.r != y.r ? x.r < y.r : x.c < y.c;
              });
    for (const RealEntry& e : by_block[k]) {
      if (!part.entries.empty() && part.entries.back().r == e.r &&
          part.entries.back().c == e.c) {
        part.entries.back().v += e.v;
      } else {
        part.entries.push_back(e);
      }
    }
    std::erase_if(part.entries, [](const RealEntry& e) { return e.v == 0.0; });
    if (part.entries.empty()) continue;
    for (const RealEntry& e : part.entries) part.cols.push_back(e.c);
    std::sort(part.cols.begin(), part.cols.end());
    part.cols.erase(std::unique(part.cols.begin(), part.cols.end()),
                    part.cols.end());
    rc.parts.push_back(std::move(part));
  }
  return rc;
}

double inner(const RealConstraint& a, const std::vector<RMatrix>& x) {
  double s = 0.0;
  for (const RealBlockPart& part : a.parts) {
    const RMatrix& xk = x[static_cast<std::size_t>(part.block)];
    for (const RealEntry& e : part.entries) s += e.v * xk(e.r, e.c);
  }
  return s;
}

double inner(const std::vector<RMatrix>& a, const std::vector<RMatrix>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double frob(const std::vector<RMatrix>& a) {
  double s = 0.0;
  for (const RMatrix& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

// Removes linearly dependent constraints. Returns false if the dropped
// constraints are inconsistent with the kept ones.
bool reduce_constraints(RealSdp& sdp, std::vector<int>& kept_index) {
  const std::size_t m = sdp.a.size();
  kept_index.clear();
  if (m == 0) return true;
  std::vector<Eigen::Index> offset(sdp.n.size());
  Eigen::Index total = 0;
  for (std::size_t k = 0; k < sdp.n.size(); ++k) {
    offset[k] = total;
    total += static_cast<Eigen::Index>(sdp.n[k]) * sdp.n[k];
  }
  RMatrix rows = RMatrix::Zero(total, static_cast<Eigen::Index>(m));
  RVector b(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    b(col) = sdp.a[i].b;
    for (const RealBlockPart& part : sdp.a[i].parts) {
      const int n = sdp.n[static_cast<std::size_t>(part.block)];
      for (const RealEntry& e : part.entries) {
        rows(offset[static_cast<std::size_t>(part.block)] + e.r * n + e.c, col) +=
            e.v;
      }
    }
  }
  Eigen::ColPivHouseholderQR<RMatrix> qr(rows);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  if (rank == static_cast<Eigen::Index>(m)) {
    for (std::size_t i = 0; i < m; ++i) kept_index.push_back(static_cast<int>(i));
    return true;
  }
  std::vector<bool> keep(m, false);
  for (Eigen::Index t = 0; t < rank; ++t) {
    keep[static_cast<std::size_t>(qr.colsPermutation().indices()(t))] = true;
  }
  std::vector<int> kept;
  std::vector<int> dropped;
  for (std::size_t i = 0; i < m; ++i) {
    (keep[i] ? kept : dropped).push_back(static_cast<int>(i));
  }
  RMatrix basis(total, static_cast<Eigen::Index>(kept.size()));
  RVector bk(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t t = 0; t < kept.size(); ++t) {
    basis.col(static_cast<Eigen::Index>(t)) = rows.col(kept[t]);
    bk(static_cast<Eigen::Index>(t)) = b(kept[t]);
  }
  Eigen::ColPivHouseholderQR<RMatrix> bqr(basis);
  bool consistent = true;
  for (int j : dropped) {
    const RVector alpha = bqr.solve(RVector(rows.col(j)));
    const double expect = alpha.dot(bk);
    if (std::abs(expect - b(j)) > 1e-8 * (1.0 + std::abs(b(j)) + bk.norm())) {
      consistent = false;
    }
  }
  std::vector<RealConstraint> reduced;
  for (int i : kept) reduced.push_back(std::move(sdp.a[static_cast<std::size_t>(i)]));
  sdp.a = std::move(reduced);
  kept_index = kept;
  return consistent;
}

double max_step(const RMatrix& x, const RMatrix& dx) {
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  RMatrix w = llt.matrixL().solve(dx);
  w = llt.matrixL().solve(w.transpose()).transpose();
  w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(w, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  if (lo >= 0.0) return std::numeric_limits<double>::infinity();
  return -1.0 / lo;
}

struct CoreResult {
  SdpStatus status = SdpStatus::kMaxIter;
  std::vector<RMatrix> x;
  std::vector<RMatrix> z;
  RVector y;
  double pobj = 0.0;
  double dobj = 0.0;
  double gap = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  int iterations = 0;
  std::vector<SdpIterate> history;
};

// min <C,X> s.t. <A_i,X> = b_i, X PSD; dual max b'y s.t. C - A'y = Z PSD.
CoreResult solve_core(const RealSdp& sdp, const SdpOptions& opts) {
  const std::size_t nb = sdp.n.size();
  const auto m = static_cast<Eigen::Index>(sdp.a.size());
  double total_n = 0.0;
  for (int n : sdp.n) total_n += n;

  RVector b(m);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = sdp.a[static_cast<std::size_t>(i)].b;
  const double norm_b = b.norm();
  const double norm_c = frob(sdp.c);

  // Constraint indices touching each block.
  std::vector<std::vector<std::pair<int, int>>> touching(nb);  // (i, part)
  for (std::size_t i = 0; i < sdp.a.size(); ++i) {
    for (std::size_t t = 0; t < sdp.a[i].parts.size(); ++t) {
      touching[static_cast<std::size_t>(sdp.a[i].parts[t].block)].push_back(
          {static_cast<int>(i), static_cast<int>(t)});
    }
  }

  auto apply_a = [&](const std::vector<RMatrix>& x) {
    RVector out(m);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = inner(sdp.a[static_cast<std::size_t>(i)], x);
    return out;
  };
  auto apply_at = [&](const RVector& y) {
    std::vector<RMatrix> out(nb);
    for (std::size_t k = 0; k < nb; ++k) out[k] = RMatrix::Zero(sdp.n[k], sdp.n[k]);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double yi = y(i);
      if (yi == 0.0) continue;
      for (const RealBlockPart& part : sdp.a[static_cast<std::size_t>(i)].parts) {
        RMatrix& o = out[static_cast<std::size_t>(part.block)];
        for (const RealEntry& e : part.entries) o(e.r, e.c) += yi * e.v;
      }
    }
    return out;
  };

  // Starting point.
  std::vector<RMatrix> x(nb), z(nb);
  RVector y = RVector::Zero(m);
  for (std::size_t k = 0; k < nb; ++k) {
    const double n = sdp.n[k];
    double xi = std::max(10.0, std::sqrt(n));
    double eta = std::max({10.0, std::sqrt(n), sdp.c[k].norm()});
    for (const auto& [i, t] : touching[k]) {
      const RealConstraint& con = sdp.a[static_cast<std::size_t>(i)];
      double an = 0.0;
      for (const RealEntry& e : con.parts[static_cast<std::size_t>(t)].entries) an += e.v * e.v;
      an = std::sqrt(an);
      xi = std::max(xi, n * (1.0 + std::abs(con.b)) / (1.0 + an));
      eta = std::max(eta, an);
    }
    x[k] = xi * RMatrix::Identity(sdp.n[k], sdp.n[k]);
    z[k] = eta * RMatrix::Identity(sdp.n[k], sdp.n[k]);
  }

  CoreResult res;
  int stalls = 0;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const RVector ax = apply_a(x);
    const RVector rp = b - ax;
    std::vector<RMatrix> aty = apply_at(y);
    std::vector<RMatrix> rd(nb);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = sdp.c[k] - aty[k] - z[k];
    const double pobj = inner(sdp.c, x);
    const double dobj = b.dot(y);
    const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    const double pinf = rp.norm() / (1.0 + norm_b);
    const double dinf = frob(rd) / (1.0 + norm_c);

    res.x = x;
    res.z = z;
    res.y = y;
    res.pobj = pobj;
    res.dobj = dobj;
    res.gap = gap;
    res.pinf = pinf;
    res.dinf = dinf;
    res.iterations = iter;
    res.history.push_back(SdpIterate{iter, pobj, dobj, gap, pinf, dinf});
    if (opts.trace != nullptr) {
      *opts.trace << iter << ',' << pobj << ',' << dobj << ',' << gap << ','
                  << pinf << ',' << dinf << '\n';
    }
    if (gap <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol) {
      res.status = SdpStatus::kOptimal;
      return res;
    }
    // Infeasibility certificates along diverging iterates.
    if (dobj > 0.0 && y.norm() > 1e7 * (1.0 + norm_c)) {
      const std::vector<RMatrix> dir = apply_at(y / dobj);
      double worst = -std::numeric_limits<double>::infinity();
      for (const RMatrix& d : dir) {
        Eigen::SelfAdjointEigenSolver<RMatrix> e(0.5 * (d + d.transpose()),
                                                 Eigen::EigenvaluesOnly);
        worst = std::max(worst, e.eigenvalues()(e.eigenvalues().size() - 1));
      }
      if (worst <= 1e-7) {
        res.status = SdpStatus::kInfeasible;
        return res;
      }
    }
    if (pobj < 0.0 && frob(x) > 1e7 * (1.0 + norm_b)) {
      if (ax.norm() / -pobj <= 1e-7) {
        res.status = SdpStatus::kInfeasible;
        return res;
      }
    }
    if (iter == opts.max_iter) break;

    // Schur complement M_ij = <A_i, X A_j Z^-1>.
    std::vector<RMatrix> zinv(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<RMatrix> llt(z[k]);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::kNumericalFailure, "dual slack lost definiteness");
      }
      zinv[k] = llt.solve(RMatrix::Identity(sdp.n[k], sdp.n[k]));
      zinv[k] = 0.5 * (zinv[k] + zinv[k].transpose()).eval();
    }
    RMatrix schur = RMatrix::Zero(m, m);
    for (std::size_t k = 0; k < nb; ++k) {
      const RMatrix& xk = x[k];
      const RMatrix& zk = zinv[k];
      const int n = sdp.n[k];
      for (const auto& [j, tj] : touching[k]) {
        const RealBlockPart& pj = sdp.a[static_cast<std::size_t>(j)].parts[static_cast<std::size_t>(tj)];
        // T = X A_j restricted to the touched columns.
        RMatrix t = RMatrix::Zero(n, static_cast<Eigen::Index>(pj.cols.size()));
        for (const RealEntry& e : pj.entries) {
          const auto pos = std::lower_bound(pj.cols.begin(), pj.cols.end(), e.c) - pj.cols.begin();
          t.col(pos) += e.v * xk.col(e.r);
        }
        RMatrix zrows(static_cast<Eigen::Index>(pj.cols.size()), n);
        for (std::size_t s = 0; s < pj.cols.size(); ++s) {
          zrows.row(static_cast<Eigen::Index>(s)) = zk.row(pj.cols[s]);
        }
        const RMatrix g = t * zrows;  // X A_j Z^-1
        for (const auto& [i, ti] : touching[k]) {
          if (i < j) continue;
          const RealBlockPart& pi = sdp.a[static_cast<std::size_t>(i)].parts[static_cast<std::size_t>(ti)];
          double s = 0.0;
          for (const RealEntry& e : pi.entries) s += e.v * g(e.c, e.r);
          schur(i, j) += s;
        }
      }
    }
    schur.triangularView<Eigen::StrictlyUpper>() = schur.transpose();
    Eigen::LLT<RMatrix> schur_llt(schur);
    Eigen::LDLT<RMatrix> schur_ldlt;
    bool use_ldlt = false;
    if (schur_llt.info() != Eigen::Success) {
      const double reg = 1e-13 * (1.0 + schur.diagonal().cwiseAbs().maxCoeff());
      schur_llt.compute(schur + reg * RMatrix::Identity(m, m));
      if (schur_llt.info() != Eigen::Success) {
        schur_ldlt.compute(schur);
        if (schur_ldlt.info() != Eigen::Success) {
          throw Error(ErrorCode::kNumericalFailure,
                      "Schur complement could not be factored");
        }
        use_ldlt = true;
      }
    }
    auto schur_solve = [&](const RVector& h) -> RVector {
      return use_ldlt ? RVector(schur_ldlt.solve(h)) : RVector(schur_llt.solve(h));
    };

    double mu = inner(x, z) / total_n;
    // Direction for a given complementarity target rc (= sigma mu I - XZ - ...).
    auto direction = [&](const std::vector<RMatrix>& rc, RVector& dy,
                         std::vector<RMatrix>& dx, std::vector<RMatrix>& dz) {
      std::vector<RMatrix> tmp(nb);
      for (std::size_t k = 0; k < nb; ++k) tmp[k] = (x[k] * rd[k] - rc[k]) * zinv[k];
      const RVector h = rp + apply_a(tmp);
      dy = schur_solve(h);
      const std::vector<RMatrix> atdy = apply_at(dy);
      dz.resize(nb);
      dx.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        dz[k] = rd[k] - atdy[k];
        const RMatrix d = (rc[k] - x[k] * dz[k]) * zinv[k];
        dx[k] = 0.5 * (d + d.transpose());
      }
    };
    auto steps = [&](const std::vector<RMatrix>& dx, const std::vector<RMatrix>& dz,
                     double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, max_step(x[k], dx[k]));
        ad = std::min(ad, max_step(z[k], dz[k]));
      }
    };

    // Predictor.
    std::vector<RMatrix> rc(nb);
    for (std::size_t k = 0; k < nb; ++k) rc[k] = -x[k] * z[k];
    RVector dy;
    std::vector<RMatrix> dx, dz;
    direction(rc, dy, dx, dz);
    double ap = 0.0, ad = 0.0;
    steps(dx, dz, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < nb; ++k) {
      mu_aff += ((x[k] + ap * dx[k]).cwiseProduct(z[k] + ad * dz[k])).sum();
    }
    mu_aff /= total_n;
    double sigma = std::pow(std::max(0.0, mu_aff) / std::max(mu, 1e-300), 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    for (std::size_t k = 0; k < nb; ++k) {
      rc[k] = sigma * mu * RMatrix::Identity(sdp.n[k], sdp.n[k]) - x[k] * z[k] -
              dx[k] * dz[k];
    }
    direction(rc, dy, dx, dz);
    steps(dx, dz, ap, ad);
    const double gamma = 0.9 + 0.09 * std::min({1.0, ap, ad});
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    if (ap < 1e-9 && ad < 1e-9) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
    for (std::size_t k = 0; k < nb; ++k) {
      x[k] += ap * dx[k];
      z[k] += ad * dz[k];
      x[k] = 0.5 * (x[k] + x[k].transpose()).eval();
      z[k] = 0.5 * (z[k] + z[k].transpose()).eval();
    }
    y += ad * dy;
  }
  return res;
}

RealSdp embed_problem(const std::vector<std::size_t>& dims,
                      const std::vector<CMatrix>& objective,
                      const std::vector<SdpConstraint>& constraints,
                      double objective_sign) {
  RealSdp sdp;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    sdp.n.push_back(static_cast<int>(2 * dims[k]));
    const auto n = static_cast<Eigen::Index>(dims[k]);
    if (objective[k].size() == 0) {
      sdp.c.push_back(RMatrix::Zero(2 * n, 2 * n));
    } else {
      sdp.c.push_back(objective_sign * embed_matrix(symmetrize(objective[k])));
    }
  }
  for (const SdpConstraint& con : constraints) {
    sdp.a.push_back(embed_constraint(con, dims));
  }
  return sdp;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts) {
  p.validate();
  const double sign = p.sense == SdpSense::kMaximize ? -1.0 : 1.0;
  RealSdp sdp = embed_problem(p.block_dims, p.objective, p.constraints, sign);
  std::vector<int> kept;
  SdpSolution sol;
  if (!reduce_constraints(sdp, kept)) {
    sol.status = SdpStatus::kInfeasible;
    sol.y = RVector::Zero(static_cast<Eigen::Index>(p.constraints.size()));
    return sol;
  }
  const CoreResult core = solve_core(sdp, opts);
  sol.status = core.status;
  sol.primal_value = sign * core.pobj / 2.0;
  sol.dual_value = sign * core.dobj / 2.0;
  for (const RMatrix& x : core.x) sol.primal_blocks.push_back(unembed_matrix(x));
  for (const RMatrix& z : core.z) sol.slack_blocks.push_back(unembed_matrix(z));
  sol.y = RVector::Zero(static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t t = 0; t < kept.size(); ++t) {
    sol.y(kept[t]) = core.y(static_cast<Eigen::Index>(t));
  }
  sol.iterations = core.iterations;
  sol.gap = core.gap;
  sol.primal_infeas = core.pinf;
  sol.dual_infeas = core.dinf;
  sol.history = core.history;
  return sol;
}

SdpSolution solve(const LmiProblem& p, const SdpOptions& opts) {
  SdpProblem prob;
  prob.block_dims = p.block_dims;
  prob.objective = p.f0;
  prob.objective.resize(p.block_dims.size());
  prob.sense = SdpSense::kMinimize;
  if (p.f.size() != p.b.size()) {
    throw Error(ErrorCode::kShapeMismatch, "LMI needs one rhs per matrix");
  }
  for (std::size_t i = 0; i < p.f.size(); ++i) {
    prob.add_dense_constraint(p.f[i], p.b[i]);
  }
  SdpSolution sol = solve(prob, opts);
  // For the LMI, the dual of the kernel problem is the problem itself.
  return sol;
}

// ---------------------------------------------------------------------------
// cb norm

namespace {

// cb norm of a map from the direct sum of the given source blocks into one
// full matrix block of size m, given the Choi blocks per source block.
double cb_norm_into_block(const std::vector<CMatrix>& choi,
                          const std::vector<std::size_t>& source_sizes,
                          std::size_t m, const SdpOptions& opts) {
  std::vector<std::size_t> active;
  for (std::size_t p = 0; p < choi.size(); ++p) {
    if (choi[p].size() != 0 && choi[p].cwiseAbs().maxCoeff() > 0.0) active.push_back(p);
  }
  if (active.empty()) return 0.0;
  if (m == 1) {
    // Functional on a direct sum: l1-sum of trace norms of its densities.
    double s = 0.0;
    for (std::size_t p : active) s += trace_norm(choi[p]);
    return s;
  }
  if (active.size() == 1 && source_sizes[active.front()] == 1) {
    return op_norm(choi[active.front()]);
  }
  // Upper bound sum_p ||C_p||_1 <= sum_p sqrt(dim) ||C_p||_F. Values below
  // solver accuracy are returned directly.
  double crude = 0.0;
  for (std::size_t p : active) {
    crude += std::sqrt(static_cast<double>(choi[p].rows())) * choi[p].norm();
  }
  if (crude <= 1e-12) return crude;

  SdpProblem prob;
  prob.sense = SdpSense::kMaximize;
  struct Blocks {
    std::size_t p0, p1, w, d;
    std::size_t n;
  };
  std::vector<Blocks> blocks;
  for (std::size_t p : active) {
    const std::size_t n = source_sizes[p];
    const std::size_t d = n * m;
    Blocks bl{};
    bl.n = n;
    bl.d = d;
    bl.p0 = prob.add_block(d);
    bl.p1 = prob.add_block(d);
    bl.w = prob.add_block(d);
    prob.objective[bl.p0] = symmetrize(choi[p]);
    prob.objective[bl.p1] = -symmetrize(choi[p]);
    blocks.push_back(bl);
  }
  const std::size_t sigma = prob.add_block(m);

  // P0 + P1 + W - 1_n (x) sigma = 0, entrywise (real and imaginary parts).
  for (const Blocks& bl : blocks) {
    for (std::size_t r = 0; r < bl.d; ++r) {
      for (std::size_t c = r; c < bl.d; ++c) {
        const bool same_outer = (r / m) == (c / m);
        for (int part = 0; part < (r == c ? 1 : 2); ++part) {
          const Complex v = part == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
          SdpConstraint con;
          con.rhs = 0.0;
          con.terms.push_back({bl.p0, r, c, v});
          con.terms.push_back({bl.p1, r, c, v});
          con.terms.push_back({bl.w, r, c, v});
          if (same_outer) con.terms.push_back({sigma, r % m, c % m, -v});
          prob.constraints.push_back(std::move(con));
        }
      }
    }
  }
  SdpConstraint trace;
  trace.rhs = 1.0;
  for (std::size_t s = 0; s < m; ++s) trace.terms.push_back({sigma, s, s, 1.0});
  prob.constraints.push_back(std::move(trace));

  const SdpSolution sol = solve(prob, opts);
  if (sol.status != SdpStatus::kOptimal) {
    throw Error(ErrorCode::kSolverFailure,
                std::string("cb-norm program ended with status ") +
                    sdp_status_name(sol.status));
  }
  return std::max(0.0, sol.dual_value);
}

}  // namespace

double cb_norm(const CPMap& delta, const SdpOptions& opts) {
  if (!delta.flags().hermitian_preserving) {
    throw Error(ErrorCode::kInvalidArgument,
                "cb_norm requires a Hermiticity-preserving map");
  }
  const FdVNAlgebra& src = delta.source();
  const FdVNAlgebra& tgt = delta.target();
  double best = 0.0;
  for (std::size_t q = 0; q < tgt.num_blocks(); ++q) {
    std::vector<CMatrix> choi;
    for (std::size_t p = 0; p < src.num_blocks(); ++p) choi.push_back(delta.choi(p, q));
    best = std::max(best, cb_norm_into_block(choi, src.block_sizes(),
                                             tgt.block_size(q), opts));
  }
  return best;
}

// ---------------------------------------------------------------------------
// ucp membership

UcpMemberResult ucp_member_detail(const OperatorSystemSpace& s, std::size_t k,
                                  const std::vector<CMatrix>& values,
                                  double tol, const SdpOptions& opts) {
  UcpMemberResult out;
  if (values.size() != s.dim()) {
    throw Error(ErrorCode::kShapeMismatch, "need one value per basis element");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  for (const CMatrix& v : values) {
    if (v.rows() != kk || v.cols() != kk) {
      throw Error(ErrorCode::kShapeMismatch, "values must be k x k");
    }
  }
  // Unitality on S.
  const CVector unit_coeffs = membership(s, AlgElement::unit(s.ambient()));
  CMatrix unit_image = CMatrix::Zero(kk, kk);
  for (std::size_t i = 0; i < values.size(); ++i) {
    unit_image += unit_coeffs(static_cast<Eigen::Index>(i)) * values[i];
  }
  if ((unit_image - CMatrix::Identity(kk, kk)).norm() > tol) {
    out.member = false;
    out.margin = -std::numeric_limits<double>::infinity();
    return out;
  }

  const FdVNAlgebra& amb = s.ambient();
  if (s.dim() == amb.dim()) {
    // S is the whole ambient: the extension is unique, read off its Choi.
    for (std::size_t p = 0; p < amb.num_blocks(); ++p) {
      const auto n = static_cast<Eigen::Index>(amb.block_size(p));
      CMatrix c = CMatrix::Zero(n * kk, n * kk);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const CVector coeffs = membership(
              s, AlgElement::matrix_unit(amb, p, static_cast<std::size_t>(i),
                                         static_cast<std::size_t>(j)));
          CMatrix v = CMatrix::Zero(kk, kk);
          for (Eigen::Index t = 0; t < coeffs.size(); ++t) {
            if (coeffs(t) != Complex(0.0, 0.0)) v += coeffs(t) * values[static_cast<std::size_t>(t)];
          }
          c.block(i * kk, j * kk, kk, kk) = v;
        }
      }
      if (hermitian_defect(c) > tol * (1.0 + c.norm())) {
        out.member = false;
        out.margin = -std::numeric_limits<double>::infinity();
        return out;
      }
      const double lo = min_eig(symmetrize(c), Tolerance{1.0, 1.0});
      out.margin = p == 0 ? lo : std::min(out.margin, lo);
      out.choi.push_back(std::move(c));
    }
    out.member = out.margin >= -tol;
    return out;
  }

  // Real coordinates of the Hermitian Choi blocks (one per source block).
  std::vector<std::size_t> dims;
  std::vector<Eigen::Index> offset;
  Eigen::Index nparams = 0;
  for (std::size_t p = 0; p < amb.num_blocks(); ++p) {
    const std::size_t d = amb.block_size(p) * k;
    dims.push_back(d);
    offset.push_back(nparams);
    nparams += static_cast<Eigen::Index>(d * d);
  }
  // Coordinate t of block p -> Hermitian basis matrix.
  auto coord_matrix = [&](std::size_t p, Eigen::Index t) {
    const auto d = static_cast<Eigen::Index>(dims[p]);
    CMatrix h = CMatrix::Zero(d, d);
    // Ordering: diagonal entries, then (re, im) pairs of the upper triangle.
    if (t < d) {
      h(t, t) = 1.0;
      return h;
    }
    Eigen::Index u = t - d;
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = r + 1; c < d; ++c) {
        if (u < 2) {
          const Complex v = u == 0 ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
          h(r, c) = v;
          h(c, r) = std::conj(v);
          return h;
        }
        u -= 2;
      }
    }
    return h;
  };
  // Linear constraints: for basis element s_i and entry (a,b) of M_k,
  // sum_p sum_{uv} s_i[p](u,v) C_p[(u,a),(v,b)] = values[i](a,b).
  const auto ncons = static_cast<Eigen::Index>(2 * s.dim() * k * k);
  Eigen::MatrixXd lin = Eigen::MatrixXd::Zero(ncons, nparams);
  Eigen::VectorXd rhs(ncons);
  std::vector<CMatrix> basis_mats;
  for (std::size_t p = 0; p < amb.num_blocks(); ++p) {
    for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(dims[p] * dims[p]); ++t) {
      basis_mats.push_back(coord_matrix(p, t));
    }
  }
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const AlgElement& si = s.basis()[i];
    for (Eigen::Index a = 0; a < kk; ++a) {
      for (Eigen::Index b = 0; b < kk; ++b) {
        Eigen::Index col = 0;
        for (std::size_t p = 0; p < amb.num_blocks(); ++p) {
          const CMatrix& sp = si.block(p);
          const Eigen::Index n = sp.rows();
          for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(dims[p] * dims[p]); ++t, ++col) {
            const CMatrix& h = basis_mats[static_cast<std::size_t>(col)];
            Complex acc = 0.0;
            for (Eigen::Index u = 0; u < n; ++u) {
              for (Eigen::Index v = 0; v < n; ++v) {
                if (sp(u, v) == Complex(0.0, 0.0)) continue;
                acc += sp(u, v) * h(u * kk + a, v * kk + b);
              }
            }
            lin(row, col) = acc.real();
            lin(row + 1, col) = acc.imag();
          }
        }
        rhs(row) = values[i](a, b).real();
        rhs(row + 1) = values[i](a, b).imag();
        row += 2;
      }
    }
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(lin, Eigen::ComputeFullV | Eigen::ComputeThinU);
  svd.setThreshold(1e-10);
  const Eigen::VectorXd x0 = svd.solve(rhs);
  if ((lin * x0 - rhs).norm() > tol * (1.0 + rhs.norm())) {
    out.member = false;
    out.margin = -std::numeric_limits<double>::infinity();
    return out;
  }
  const Eigen::Index rank = svd.rank();
  const Eigen::MatrixXd null = svd.matrixV().rightCols(nparams - rank);

  auto assemble = [&](const Eigen::VectorXd& coords) {
    std::vector<CMatrix> blocks;
    Eigen::Index col = 0;
    for (std::size_t p = 0; p < amb.num_blocks(); ++p) {
      const auto d = static_cast<Eigen::Index>(dims[p]);
      CMatrix c = CMatrix::Zero(d, d);
      for (Eigen::Index t = 0; t < d * d; ++t, ++col) {
        if (coords(col) != 0.0) c += coords(col) * basis_mats[static_cast<std::size_t>(col)];
      }
      blocks.push_back(c);
    }
    return blocks;
  };

  // maximize t s.t. C0 + sum z_k N_k - t I PSD.
  LmiProblem lmi;
  lmi.block_dims = dims;
  lmi.f0 = assemble(x0);
  for (Eigen::Index j = 0; j < null.cols(); ++j) {
    std::vector<CMatrix> nj = assemble(null.col(j));
    for (CMatrix& m : nj) m = -m;
    lmi.f.push_back(std::move(nj));
    lmi.b.push_back(0.0);
  }
  std::vector<CMatrix> ident;
  for (std::size_t d : dims) {
    ident.push_back(CMatrix::Identity(static_cast<Eigen::Index>(d),
                                      static_cast<Eigen::Index>(d)));
  }
  lmi.f.push_back(ident);
  lmi.b.push_back(1.0);
  const SdpSolution sol = solve(lmi, opts);
  if (sol.status != SdpStatus::kOptimal) {
    throw Error(ErrorCode::kSolverFailure,
                std::string("ucp membership program ended with status ") +
                    sdp_status_name(sol.status));
  }
  out.margin = sol.dual_value;
  Eigen::VectorXd coords = x0;
  for (Eigen::Index j = 0; j < null.cols(); ++j) coords += sol.y(j) * null.col(j);
  out.choi = assemble(coords);
  out.member = out.margin >= -tol;
  return out;
}

bool ucp_member(const OperatorSystemSpace& s, std::size_t k,
                const std::vector<CMatrix>& values, double tol) {
  return ucp_member_detail(s, k, values, tol).member;
}

}  // namespace softlimit
