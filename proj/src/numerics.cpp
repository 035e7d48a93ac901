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

#include "softlimit/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "softlimit/error.hpp"

namespace softlimit {

Tolerance Tolerance::for_dim(std::size_t dim) {
  return Tolerance{1e-9 * static_cast<double>(std::max<std::size_t>(dim, 1)),
                   1e-9};
}

double hermitian_defect(const CMatrix& a) {
  return (a - a.adjoint()).norm();
}

CMatrix symmetrize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

namespace {

void require_hermitian(const CMatrix& a, const Tolerance& tol, double defect) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::kNotSquare,
                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  const double dim = static_cast<double>(std::max<Eigen::Index>(a.rows(), 1));
  const double limit = tol.bound(a.norm()) * dim;
  if (!(defect <= limit)) {
    throw Error(ErrorCode::kNotHermitian,
                "symmetrization defect " + std::to_string(defect) +
                    " exceeds " + std::to_string(limit));
  }
}

}  // namespace

HermEigen herm_eigen(const CMatrix& a, const Tolerance& tol) {
  const double defect = a.rows() == a.cols() ? hermitian_defect(a) : 0.0;
  require_hermitian(a, tol, defect);
  HermEigen out;
  out.symmetrization_defect = defect;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(symmetrize(a));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigensolver did not converge");
  }
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  return out;
}

HermEigen herm_eigen(const CMatrix& a) {
  return herm_eigen(a, Tolerance::for_dim(static_cast<std::size_t>(a.rows())));
}

RVector herm_eigenvalues(const CMatrix& a, const Tolerance& tol) {
  const double defect = a.rows() == a.cols() ? hermitian_defect(a) : 0.0;
  require_hermitian(a, tol, defect);
  if (a.rows() == 0) return RVector();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(symmetrize(a),
                                                Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigensolver did not converge");
  }
  return solver.eigenvalues();
}

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  if (a.rows() == a.cols() &&
      hermitian_defect(a) <= 1e-14 * (1.0 + a.norm())) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(symmetrize(a),
                                                  Eigen::EigenvaluesOnly);
    const RVector& ev = solver.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double trace_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues().sum();
}

double min_eig(const CMatrix& a, const Tolerance& tol) {
  if (a.rows() == 0) return 0.0;
  return herm_eigenvalues(a, tol)(0);
}

double min_eig(const CMatrix& a) {
  return min_eig(a, Tolerance::for_dim(static_cast<std::size_t>(a.rows())));
}

double max_eig(const CMatrix& a) {
  if (a.rows() == 0) return 0.0;
  const RVector ev =
      herm_eigenvalues(a, Tolerance::for_dim(static_cast<std::size_t>(a.rows())));
  return ev(ev.size() - 1);
}

bool is_psd(const CMatrix& a, const Tolerance& tol) {
  if (a.rows() == 0) return true;
  const RVector ev = herm_eigenvalues(a, tol);
  const double norm =
      std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(0) >= -tol.bound(norm);
}

bool is_psd(const CMatrix& a) {
  return is_psd(a, Tolerance::for_dim(static_cast<std::size_t>(a.rows())));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix matrix_unit(std::size_t n, std::size_t i, std::size_t j) {
  CMatrix e = CMatrix::Zero(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
  return e;
}

Complex hs_inner(const CMatrix& a, const CMatrix& b) {
  return (a.adjoint() * b).trace();
}

CMatrix psd_sqrt(const CMatrix& a) {
  const HermEigen eig = herm_eigen(a);
  RVector s = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * s.asDiagonal() * eig.vectors.adjoint();
}

CMatrix psd_inv_sqrt(const CMatrix& a) {
  const HermEigen eig = herm_eigen(a);
  if (eig.values.size() > 0 && eig.values(0) <= 0.0) {
    throw Error(ErrorCode::kNumericalFailure,
                "inverse square root of a singular matrix");
  }
  RVector s = eig.values.cwiseSqrt().cwiseInverse();
  return eig.vectors * s.asDiagonal() * eig.vectors.adjoint();
}

bool all_finite(const CMatrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const Complex z = a.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotSquare: return "NotSquare";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNotInSpan: return "NotInSpan";
    case ErrorCode::kInconsistentAction: return "InconsistentAction";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kFlagViolation: return "FlagViolation";
    case ErrorCode::kHorizonTooShort: return "HorizonTooShort";
    case ErrorCode::kNotStrict: return "NotStrict";
    case ErrorCode::kNotSelfAdjoint: return "NotSelfAdjoint";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kBadGrid: return "BadGrid";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace softlimit
