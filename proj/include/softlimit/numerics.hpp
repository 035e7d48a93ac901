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

#include <Eigen/Dense>
#include <complex>
#include <cstddef>

namespace softlimit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Absolute/relative slack used by every positivity and Hermiticity test.
struct Tolerance {
  double abs_eps = 1e-9;
  double rel_eps = 1e-9;

  /// Default for a matrix of dimension `dim`: abs 1e-9*dim, rel 1e-9.
  static Tolerance for_dim(std::size_t dim);
  /// Threshold abs_eps + rel_eps * scale.
  double bound(double scale) const { return abs_eps + rel_eps * scale; }
};

struct HermEigen {
  RVector values;  // ascending
  CMatrix vectors;  // columns are eigenvectors, unitary
  double symmetrization_defect = 0.0;  // ||a - a*||_F before symmetrizing
};

double hermitian_defect(const CMatrix& a);
CMatrix symmetrize(const CMatrix& a);

/// Throws kNotSquare / kNotHermitian. The input is symmetrized before solving.
HermEigen herm_eigen(const CMatrix& a, const Tolerance& tol);
HermEigen herm_eigen(const CMatrix& a);
RVector herm_eigenvalues(const CMatrix& a, const Tolerance& tol);

/// Largest singular value.
double op_norm(const CMatrix& a);
/// Sum of singular values.
double trace_norm(const CMatrix& a);

double min_eig(const CMatrix& a, const Tolerance& tol);
double min_eig(const CMatrix& a);
double max_eig(const CMatrix& a);
bool is_psd(const CMatrix& a, const Tolerance& tol);
bool is_psd(const CMatrix& a);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix matrix_unit(std::size_t n, std::size_t i, std::size_t j);
/// Hilbert-Schmidt inner product tr(a* b).
Complex hs_inner(const CMatrix& a, const CMatrix& b);
/// Positive square root and inverse square root of a PSD matrix.
CMatrix psd_sqrt(const CMatrix& a);
CMatrix psd_inv_sqrt(const CMatrix& a);

bool all_finite(const CMatrix& a);

}  // namespace softlimit
