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

#include "softlimit/random.hpp"

#include <Eigen/QR>
#include <cmath>

namespace softlimit {

CMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im) / std::sqrt(2.0);
    }
  }
  return g;
}

CMatrix random_hermitian(std::size_t n, Rng& rng) {
  const CMatrix g = random_ginibre(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

CMatrix random_unitary(std::size_t n, Rng& rng) {
  const CMatrix g = random_ginibre(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return q;
}

CMatrix random_projection(std::size_t n, std::size_t rank, Rng& rng) {
  const CMatrix u = random_unitary(n, rng);
  const auto r = static_cast<Eigen::Index>(rank);
  return u.leftCols(r) * u.leftCols(r).adjoint();
}

CMatrix random_psd(std::size_t n, std::size_t rank, Rng& rng) {
  const CMatrix g = random_ginibre(n, rank, rng);
  return g * g.adjoint();
}

double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace softlimit
