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

#include "softlimit/limits.hpp"

#include <algorithm>
#include <cmath>

#include "softlimit/error.hpp"

namespace softlimit {

const char* net_tag_name(NetTag t) {
  switch (t) {
    case NetTag::kBasic: return "basic";
    case NetTag::kNull: return "null";
    case NetTag::kCustom: return "custom";
  }
  return "unknown";
}

BoundedNet::BoundedNet(std::shared_ptr<const SoftSystem> system,
                       std::vector<AlgElement> entries, NetTag tag)
    : system_(std::move(system)), entries_(std::move(entries)), tag_(tag) {
  if (!system_) throw Error(ErrorCode::kInvalidArgument, "net without a system");
  if (entries_.size() != system_->horizon()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "net has " + std::to_string(entries_.size()) + " entries, horizon is " +
                    std::to_string(system_->horizon()));
  }
  for (std::size_t n = 0; n < entries_.size(); ++n) {
    if (!(entries_[n].algebra() == system_->level(n))) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "net entry " + std::to_string(n) + " is not in level " + std::to_string(n));
    }
  }
}

BoundedNet BoundedNet::basic(std::shared_ptr<const SoftSystem> system, std::size_t l,
                             const AlgElement& a) {
  std::vector<AlgElement> entries;
  for (std::size_t n = 0; n < system->horizon(); ++n) entries.push_back(system->push(n, l, a));
  BoundedNet net(std::move(system), std::move(entries), NetTag::kBasic);
  net.basic_level_ = l;
  return net;
}

BoundedNet BoundedNet::unit(std::shared_ptr<const SoftSystem> system) {
  std::vector<AlgElement> entries;
  for (const FdVNAlgebra& a : system->levels()) entries.push_back(AlgElement::unit(a));
  return BoundedNet(std::move(system), std::move(entries), NetTag::kCustom);
}

double BoundedNet::sup_norm() const {
  double s = 0.0;
  for (const AlgElement& e : entries_) s = std::max(s, e.norm());
  return s;
}

BoundedNet BoundedNet::adjoint() const {
  std::vector<AlgElement> out;
  for (const AlgElement& e : entries_) out.push_back(e.adjoint());
  return BoundedNet(system_, std::move(out), tag_ == NetTag::kNull ? NetTag::kNull : NetTag::kCustom);
}

BoundedNet BoundedNet::operator*(const BoundedNet& other) const {
  if (other.entries_.size() != entries_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "nets over different horizons");
  }
  std::vector<AlgElement> out;
  for (std::size_t n = 0; n < entries_.size(); ++n) out.push_back(entries_[n] * other.entries_[n]);
  return BoundedNet(system_, std::move(out), NetTag::kCustom);
}

BoundedNet BoundedNet::operator+(const BoundedNet& other) const {
  if (other.entries_.size() != entries_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "nets over different horizons");
  }
  std::vector<AlgElement> out;
  for (std::size_t n = 0; n < entries_.size(); ++n) out.push_back(entries_[n] + other.entries_[n]);
  return BoundedNet(system_, std::move(out), NetTag::kCustom);
}

BoundedNet BoundedNet::scaled(double s) const {
  std::vector<AlgElement> out;
  for (const AlgElement& e : entries_) out.push_back(s * e);
  return BoundedNet(system_, std::move(out), tag_);
}

NullEvidence null_evidence(const std::vector<double>& values, double tol) {
  NullEvidence ev;
  const std::size_t n = values.size();
  if (n == 0) {
    ev.is_null = true;
    return ev;
  }
  ev.window_start = std::min((n + 1) / 2, n - 1);
  std::vector<std::pair<std::size_t, double>> tail;
  for (std::size_t i = ev.window_start; i < n; ++i) {
    ev.tail_max = std::max(ev.tail_max, values[i]);
    tail.emplace_back(i, values[i]);
  }
  std::vector<std::pair<std::size_t, double>> padded(ev.window_start, {0, 0.0});
  for (std::size_t i = 0; i < ev.window_start; ++i) padded[i] = {i, 0.0};
  padded.insert(padded.end(), tail.begin(), tail.end());
  ev.exp_fit = fit_decay(padded);

  std::vector<double> env(n);
  double run = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    run = std::max(run, values[i]);
    env[i] = run;
  }
  const double floor = 1e-300;
  const std::size_t k = n - ev.window_start;
  if (k >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = ev.window_start; i < n; ++i) {
      mx += std::log(static_cast<double>(i + 1));
      my += std::log(std::max(env[i], floor));
    }
    mx /= static_cast<double>(k);
    my /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = ev.window_start; i < n; ++i) {
      const double dx = std::log(static_cast<double>(i + 1)) - mx;
      sxx += dx * dx;
      sxy += dx * (std::log(std::max(env[i], floor)) - my);
    }
    ev.loglog_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  ev.is_null = ev.tail_max <= tol || (k >= 2 && ev.loglog_slope <= -0.5);
  return ev;
}

NetVerdict analyze_net(const BoundedNet& x, double null_tol) {
  const SoftSystem& sys = x.system();
  const std::size_t horizon = x.size();
  NetVerdict v;
  std::vector<double> norms(horizon);
  for (std::size_t n = 0; n < horizon; ++n) norms[n] = x.at(n).norm();
  v.null = null_evidence(norms, null_tol);
  v.window_start = v.null.window_start;
  for (std::size_t n = v.window_start; n < horizon; ++n) {
    v.seminorm_estimate = std::max(v.seminorm_estimate, norms[n]);
  }
  v.last_norm = horizon > 0 ? norms[horizon - 1] : 0.0;

  v.jconv.assign(horizon, 0.0);
  for (std::size_t m = 0; m < horizon; ++m) {
    for (std::size_t n = m + 1; n < horizon; ++n) {
      v.jconv[m] = std::max(v.jconv[m], (x.at(n) - sys.push(n, m, x.at(m))).norm());
    }
  }
  v.cauchy.assign(horizon, 0.0);
  if (horizon > 0) {
    const std::size_t top = horizon - 1;
    std::vector<AlgElement> pushed;
    for (std::size_t m = 0; m < horizon; ++m) pushed.push_back(sys.push(top, m, x.at(m)));
    for (std::size_t m = 0; m < horizon; ++m) {
      for (std::size_t mp = m + 1; mp < horizon; ++mp) {
        v.cauchy[m] = std::max(v.cauchy[m], (pushed[m] - pushed[mp]).norm());
      }
    }
  }
  return v;
}

QuotientVerdict quotient_positive(const BoundedNet& x, double tol) {
  QuotientVerdict q;
  const std::size_t horizon = x.size();
  q.negativity.resize(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    const AlgElement& a = x.at(n);
    if (!a.is_self_adjoint(1e-9 * (1.0 + a.norm()))) {
      throw Error(ErrorCode::kNotSelfAdjoint,
                  "net entry " + std::to_string(n) + " is not self-adjoint");
    }
    q.negativity[n] = std::max(0.0, -a.min_eig());
  }
  q.evidence = null_evidence(q.negativity, tol);
  q.positive = q.evidence.is_null;

  double num = 0.0, den = 0.0;
  for (std::size_t n = q.evidence.window_start; n < horizon; ++n) {
    const double b = 1.0 / static_cast<double>(n + 1);
    num += q.negativity[n] * b;
    den += b * b;
  }
  q.fit_k = den > 0.0 ? num / den : 0.0;
  double rr = 0.0, nn = 0.0;
  for (std::size_t n = q.evidence.window_start; n < horizon; ++n) {
    const double r = q.negativity[n] - q.fit_k / static_cast<double>(n + 1);
    rr += r * r;
    nn += q.negativity[n] * q.negativity[n];
  }
  q.fit_relative_residual = nn > 0.0 ? std::sqrt(rr / nn) : 0.0;

  if (q.positive) {
    std::vector<AlgElement> lifted;
    for (std::size_t n = 0; n < horizon; ++n) {
      lifted.push_back(x.at(n) + q.negativity[n] * AlgElement::unit(x.at(n).algebra()));
    }
    q.lift = BoundedNet(x.system_ptr(), std::move(lifted), NetTag::kCustom);
  }
  return q;
}

LimitProbeReport limit_map_probe(const SoftSystem& sys, const std::vector<CPMap>& alphas,
                                 const std::vector<BoundedNet>& nets) {
  const std::size_t horizon = sys.horizon();
  if (alphas.size() != horizon) {
    throw Error(ErrorCode::kDimensionMismatch, "need one alpha per level");
  }
  for (std::size_t n = 0; n < horizon; ++n) {
    if (!(alphas[n].source() == sys.level(n)) || !(alphas[n].target() == alphas[0].target())) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "alpha " + std::to_string(n) + " must map level " + std::to_string(n) +
                      " into the common target");
    }
  }
  LimitProbeReport rep;
  rep.window_start = std::min((horizon + 1) / 2, horizon - 1);
  for (std::size_t k = 0; k < nets.size(); ++k) {
    const BoundedNet& x = nets[k];
    if (x.size() != horizon) {
      throw Error(ErrorCode::kDimensionMismatch, "probe net has the wrong horizon");
    }
    std::vector<AlgElement> images;
    for (std::size_t n = 0; n < horizon; ++n) images.push_back(alphas[n].apply(x.at(n)));
    for (std::size_t n = 0; n < horizon; ++n) {
      LimitProbeRow row{k, n, images[n].norm(), 0.0};
      for (std::size_t np = n + 1; np < horizon; ++np) {
        row.cauchy = std::max(row.cauchy, (images[n] - images[np]).norm());
      }
      rep.rows.push_back(row);
    }
    double cons = 0.0;
    for (std::size_t n = rep.window_start; n < horizon; ++n) {
      for (std::size_t np = n + 1; np < horizon; ++np) {
        cons = std::max(cons, (images[n] - images[np]).norm());
      }
    }
    rep.consistency.push_back(cons);
    rep.limit_estimate.push_back(images.back());
  }
  return rep;
}

FdVNAlgebra product_algebra(const SoftSystem& sys, std::size_t levels) {
  std::vector<std::size_t> blocks;
  for (std::size_t n = 0; n < levels; ++n) {
    for (std::size_t b : sys.level(n).block_sizes()) blocks.push_back(b);
  }
  return FdVNAlgebra(std::move(blocks));
}

AlgElement net_to_product(const BoundedNet& x) {
  const FdVNAlgebra alg = product_algebra(x.system(), x.size());
  std::vector<CMatrix> blocks;
  for (const AlgElement& e : x.entries()) {
    for (const CMatrix& b : e.blocks()) blocks.push_back(b);
  }
  return AlgElement(alg, std::move(blocks));
}

std::vector<AlgElement> product_to_entries(const AlgElement& x, const SoftSystem& sys,
                                           std::size_t levels) {
  if (!(x.algebra() == product_algebra(sys, levels))) {
    throw Error(ErrorCode::kDimensionMismatch, "element is not in the product algebra");
  }
  std::vector<AlgElement> out;
  std::size_t p = 0;
  for (std::size_t n = 0; n < levels; ++n) {
    std::vector<CMatrix> blocks;
    for (std::size_t b = 0; b < sys.level(n).num_blocks(); ++b) blocks.push_back(x.block(p++));
    out.emplace_back(sys.level(n), std::move(blocks));
  }
  return out;
}

TruncationCpa truncation_cpa(const SoftSystem& sys, std::size_t m, double tol) {
  const std::size_t horizon = sys.horizon();
  if (m < 1 || m > horizon) {
    throw Error(ErrorCode::kInvalidArgument, "truncation index must lie in [1, horizon]");
  }
  const double residual = exact_transitivity_residual(sys);
  if (residual > tol) {
    throw Error(ErrorCode::kNotStrict,
                "transitivity residual " + std::to_string(residual) + " exceeds " +
                    std::to_string(tol));
  }
  TruncationCpa t;
  t.m = m;
  t.full = product_algebra(sys, horizon);
  t.truncated = product_algebra(sys, m);
  t.psi = CPMap::from_linear(t.full, t.truncated, [&](const AlgElement& x) {
    const std::vector<AlgElement> e = product_to_entries(x, sys, horizon);
    std::vector<CMatrix> blocks;
    for (std::size_t n = 0; n < m; ++n) {
      for (const CMatrix& b : e[n].blocks()) blocks.push_back(b);
    }
    return AlgElement(t.truncated, std::move(blocks));
  });
  t.phi = CPMap::from_linear(t.truncated, t.full, [&](const AlgElement& x) {
    const std::vector<AlgElement> e = product_to_entries(x, sys, m);
    std::vector<CMatrix> blocks;
    for (std::size_t n = 0; n < horizon; ++n) {
      const AlgElement v = n < m ? e[n] : sys.push(n, m - 1, e[m - 1]);
      for (const CMatrix& b : v.blocks()) blocks.push_back(b);
    }
    return AlgElement(t.full, std::move(blocks));
  });
  return t;
}

}  // namespace softlimit
