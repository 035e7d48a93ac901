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

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

namespace {

// Cyclic Jacobi sweeps on a real symmetric matrix; returns eigenvalues and
// accumulates rotations into v.
void jacobi_real(Eigen::MatrixXd& a, Eigen::MatrixXd& v) {
  const int n = static_cast<int>(a.rows());
  v = Eigen::MatrixXd::Identity(n, n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30 * std::max(1.0, a.squaredNorm())) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
}

}  // namespace

Eigh jacobi_eigh(const Mat& h) {
  const int n = static_cast<int>(h.rows());
  const Mat sym = 0.5 * (h + h.adjoint());
  Eigen::MatrixXd e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = sym.real();
  e.topRightCorner(n, n) = -sym.imag();
  e.bottomLeftCorner(n, n) = sym.imag();
  e.bottomRightCorner(n, n) = sym.real();
  Eigen::MatrixXd v;
  jacobi_real(e, v);
  std::vector<int> order(2 * n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return e(a, a) < e(b, b); });
  // Each eigenvalue of the embedding appears twice.
  Eigh out;
  out.vectors = Mat::Zero(n, n);
  std::vector<Eigen::VectorXcd> chosen;
  for (int i = 0; i < 2 * n; i += 2) {
    out.values.push_back(0.5 * (e(order[i], order[i]) + e(order[i + 1], order[i + 1])));
  }
  // Complex eigenvectors: Gram-Schmidt over the 2n candidates x + iy.
  for (int i = 0; i < 2 * n && static_cast<int>(chosen.size()) < n; ++i) {
    const int c = order[i];
    Eigen::VectorXcd u(n);
    for (int k = 0; k < n; ++k) u(k) = cd(v(k, c), v(k + n, c));
    for (const auto& w : chosen) u -= w.dot(u) * w;
    const double nu = u.norm();
    if (nu > 1e-6) chosen.push_back(u / nu);
  }
  for (int i = 0; i < static_cast<int>(chosen.size()); ++i) out.vectors.col(i) = chosen[i];
  return out;
}

double min_eig(const Mat& h) { return jacobi_eigh(h).values.front(); }
double max_eig(const Mat& h) { return jacobi_eigh(h).values.back(); }

double op_norm(const Mat& a) {
  const Mat g = a.adjoint() * a;
  return std::sqrt(std::max(0.0, max_eig(g)));
}

double trace_norm_herm(const Mat& h) {
  double s = 0.0;
  for (double l : jacobi_eigh(h).values) s += std::abs(l);
  return s;
}

Mat inv_sqrt(const Mat& h) {
  const Eigh e = jacobi_eigh(h);
  Mat d = Mat::Zero(h.rows(), h.cols());
  for (int i = 0; i < static_cast<int>(e.values.size()); ++i) d(i, i) = 1.0 / std::sqrt(e.values[i]);
  return e.vectors * d * e.vectors.adjoint();
}

Mat ginibre(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = cd(g(rng), g(rng));
  }
  return m;
}

Mat random_hermitian(int n, Rng& rng) {
  const Mat g = ginibre(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

Mat random_unitary(int n, Rng& rng) {
  const Mat g = ginibre(n, n, rng);
  return g * inv_sqrt(g.adjoint() * g);
}

Mat KrausMap::apply(const Mat& x) const {
  Mat out = Mat::Zero(m, m);
  for (const Mat& ki : k) out += ki.adjoint() * x * ki;
  return out;
}

namespace {

Mat lift(const Mat& ki, int level) {
  const Mat id = Mat::Identity(level, level);
  Mat big = Mat::Zero(ki.rows() * level, ki.cols() * level);
  for (int r = 0; r < ki.rows(); ++r) {
    for (int c = 0; c < ki.cols(); ++c) big.block(r * level, c * level, level, level) = ki(r, c) * id;
  }
  return big;
}

}  // namespace

Mat KrausMap::apply_amplified(const Mat& x, int level) const {
  Mat out = Mat::Zero(m * level, m * level);
  for (const Mat& ki : k) {
    const Mat big = lift(ki, level);
    out += big.adjoint() * x * big;
  }
  return out;
}

Mat KrausMap::apply_adjoint_amplified(const Mat& y, int level) const {
  Mat out = Mat::Zero(n * level, n * level);
  for (const Mat& ki : k) {
    const Mat big = lift(ki, level);
    out += big * y * big.adjoint();
  }
  return out;
}

KrausMap random_kraus(int n, int m, int r, bool unital, Rng& rng) {
  KrausMap f;
  f.n = n;
  f.m = m;
  // Unitality needs sum K_i^* K_i = 1_m, which requires r * n >= m.
  if (unital) r = std::max(r, (m + n - 1) / n);
  Mat g = ginibre(r * n, m, rng);
  if (unital) {
    g = g * inv_sqrt(g.adjoint() * g);
  } else {
    std::uniform_real_distribution<double> u(0.2, 1.5);
    g *= u(rng) / std::sqrt(static_cast<double>(r * n));
  }
  for (int i = 0; i < r; ++i) f.k.push_back(g.block(i * n, 0, n, m));
  return f;
}

double cb_lower_alternating(const std::function<Mat(const Mat&)>& amplified,
                            const std::function<Mat(const Mat&)>& amplified_adjoint, int n,
                            Rng& rng, int restarts, int iters) {
  const int d_in = n * n;
  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXcd u = ginibre(amplified(Mat::Identity(d_in, d_in)).rows(), 1, rng).col(0);
    u.normalize();
    double value = 0.0;
    for (int it = 0; it < iters; ++it) {
      const Mat x = amplified_adjoint(u * u.adjoint());
      const Eigh ex = jacobi_eigh(x);
      Mat s = Mat::Zero(x.rows(), x.cols());
      for (int i = 0; i < static_cast<int>(ex.values.size()); ++i) {
        const double sg = ex.values[i] >= 0 ? 1.0 : -1.0;
        s += sg * ex.vectors.col(i) * ex.vectors.col(i).adjoint();
      }
      const Mat y = amplified(s);
      const Eigh ey = jacobi_eigh(y);
      const double top = ey.values.back();
      const double bottom = -ey.values.front();
      const double next = std::max(top, bottom);
      u = top >= bottom ? Eigen::VectorXcd(ey.vectors.col(ey.values.size() - 1))
                        : Eigen::VectorXcd(ey.vectors.col(0));
      if (next <= value + 1e-13) {
        value = std::max(value, next);
        break;
      }
      value = next;
    }
    best = std::max(best, value);
  }
  return best;
}

std::vector<double> IntervalModel::sample(double (*f)(double)) const {
  std::vector<double> v(fine + 1);
  for (int k = 0; k <= fine; ++k) v[k] = f(static_cast<double>(k) / fine);
  return v;
}

std::vector<double> IntervalModel::down(int g, const std::vector<double>& fvals) const {
  std::vector<double> v(g + 1);
  const int step = fine / g;
  for (int k = 0; k <= g; ++k) v[k] = fvals[k * step];
  return v;
}

std::vector<double> IntervalModel::up(int g, const std::vector<double>& nodes) const {
  std::vector<double> v(fine + 1);
  for (int k = 0; k <= fine; ++k) {
    const double t = static_cast<double>(k) * g / fine;
    const int i = std::min(static_cast<int>(std::floor(t)), g - 1);
    const double w = t - i;
    v[k] = (1.0 - w) * nodes[i] + w * nodes[i + 1];
  }
  return v;
}

double IntervalModel::sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace oracle
