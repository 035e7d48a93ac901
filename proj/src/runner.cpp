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

#include "softlimit/runner.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "softlimit/limits.hpp"
#include "softlimit/ncdual.hpp"
#include "softlimit/parallel.hpp"
#include "softlimit/sdp.hpp"

namespace softlimit {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_config(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, "config field '" + field + "': " + what);
}

std::size_t get_count(const Json& j, const std::string& field, std::size_t lo, std::size_t hi) {
  if (!j.is_number_integer()) bad_config(field, "must be an integer");
  const long long v = j.get<long long>();
  if (v < static_cast<long long>(lo) || v > static_cast<long long>(hi)) {
    bad_config(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<std::size_t>(v);
}

double get_positive(const Json& j, const std::string& field) {
  if (!j.is_number()) bad_config(field, "must be a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) bad_config(field, "must be positive and finite");
  return v;
}

void reject_unknown(const Json& j, const std::string& where, const std::set<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      bad_config(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
  }
}

const std::set<std::string> kExperiments{"verify", "defects", "strictify", "cpa",
                                         "limit-probe", "ncdual", "qd"};

Json normalize_system(const Json& s, std::uint64_t seed) {
  if (!s.is_object()) bad_config("system", "must be an object");
  if (s.contains("path")) {
    reject_unknown(s, "system", {"path"});
    if (!s["path"].is_string()) bad_config("system.path", "must be a string");
    return s;
  }
  if (!s.contains("builtin")) bad_config("system", "needs 'builtin' or 'path'");
  if (!s["builtin"].is_string()) bad_config("system.builtin", "must be a string");
  const std::string name = s["builtin"].get<std::string>();
  Json out{{"builtin", name}};
  if (name == "uhf") {
    reject_unknown(s, "system", {"builtin", "depth"});
    out["depth"] = s.contains("depth") ? get_count(s["depth"], "system.depth", 1, 6) : 5;
  } else if (name == "perturbed") {
    reject_unknown(s, "system", {"builtin", "horizon", "dim", "weights", "chain_seed"});
    out["horizon"] = s.contains("horizon") ? get_count(s["horizon"], "system.horizon", 2, 64) : 10;
    out["dim"] = s.contains("dim") ? get_count(s["dim"], "system.dim", 1, 8) : 2;
    if (!s.contains("weights")) {
      out["weights"] = "dyadic";
    } else if (s["weights"].is_string()) {
      if (s["weights"] != "dyadic") bad_config("system.weights", "must be \"dyadic\" or a number");
      out["weights"] = "dyadic";
    } else if (s["weights"].is_number()) {
      const double w = s["weights"].get<double>();
      if (!(w >= 0.0 && w < 1.0)) bad_config("system.weights", "constant weight must lie in [0, 1)");
      out["weights"] = w;
    } else {
      bad_config("system.weights", "must be \"dyadic\" or a number");
    }
    if (s.contains("chain_seed")) {
      if (!s["chain_seed"].is_number_unsigned()) bad_config("system.chain_seed", "must be a nonnegative integer");
      out["chain_seed"] = s["chain_seed"];
    } else {
      out["chain_seed"] = seed;
    }
  } else if (name == "interval") {
    reject_unknown(s, "system", {"builtin", "grids", "fine"});
    Json grids = Json::array({4, 8, 16, 32});
    if (s.contains("grids")) {
      if (!s["grids"].is_array() || s["grids"].empty()) bad_config("system.grids", "must be a nonempty array");
      grids = Json::array();
      for (const Json& g : s["grids"]) grids.push_back(get_count(g, "system.grids", 1, 4096));
    }
    out["grids"] = grids;
    out["fine"] = s.contains("fine") ? get_count(s["fine"], "system.fine", 1, 4096) : 256;
  } else {
    bad_config("system.builtin", "unknown builtin '" + name + "' (uhf, perturbed, interval)");
  }
  return out;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------------------
// CSV output

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string cell(std::size_t v) { return std::to_string(v); }
std::string cell(std::uint64_t v, int) { return std::to_string(v); }
std::string cell(bool v) { return v ? "true" : "false"; }
std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}
std::string cell(const char* s) { return cell(std::string(s)); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  template <class... T>
  void row(const T&... v) {
    rows_.push_back({cell(v)...});
  }

  void write(const fs::path& path, const std::string& preamble) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kConfigInvalid, "cannot write '" + path.string() + "'");
    out << preamble << "\r\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << "\r\n";
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
      out << "\r\n";
    }
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

class Artifacts {
 public:
  Artifacts(const ExperimentConfig& cfg, RunResult& result)
      : dir_(cfg.out_dir), preamble_(csv_preamble(cfg)), result_(result) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::kConfigInvalid, "cannot create output directory '" + dir_.string() + "'");
  }

  void emit(const std::string& name, const Csv& csv) {
    const fs::path p = dir_ / name;
    csv.write(p, preamble_);
    result_.artifacts.push_back(p.string());
  }

 private:
  fs::path dir_;
  std::string preamble_;
  RunResult& result_;
};

// ---------------------------------------------------------------------------
// Experiments

double map_difference(const CPMap& d, NormKind kind, const std::vector<Probe>& probes,
                      std::uint64_t seed) {
  switch (kind) {
    case NormKind::kCb:
      return cb_norm(d);
    case NormKind::kInterval: {
      NormSearchOptions o;
      o.seed = seed;
      return map_norm_interval(d, o).upper;
    }
    case NormKind::kPointwise:
      break;
  }
  double worst = 0.0;
  for (const Probe& p : probes) worst = std::max(worst, d.apply(p.element).norm());
  return worst;
}

void run_verify(const ExperimentConfig&, const LoadedSystem& ls, Artifacts& out) {
  const SoftSystem& sys = ls.soft;
  Csv maps({"n", "m", "cp", "unital", "ucp", "min_choi_eig", "unit_defect"});
  bool all = true;
  for (std::size_t n = 1; n < sys.horizon(); ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      const MapFlags& f = sys.map(n, m).flags();
      all = all && f.ucp;
      maps.row(n, m, f.cp, f.unital, f.ucp, f.min_choi_eig, f.unit_defect);
    }
  }
  out.emit("maps.csv", maps);
  if (ls.cpa) {
    Csv cpa({"role", "index", "cp", "cpc", "unital", "min_choi_eig", "unit_image_norm"});
    for (std::size_t i = 0; i < ls.cpa->size(); ++i) {
      const MapFlags& d = ls.cpa->down()[i].flags();
      cpa.row("down", i, d.cp, d.cpc, d.unital, d.min_choi_eig, d.unit_image_norm);
      const MapFlags& u = ls.cpa->up()[i].flags();
      cpa.row("up", i, u.cp, u.cpc, u.unital, u.min_choi_eig, u.unit_image_norm);
      all = all && d.cpc && u.cpc;
    }
    out.emit("cpa_maps.csv", cpa);
  }
  Csv summary({"key", "value"});
  summary.row("levels", sys.horizon());
  summary.row("all_maps_valid", all);
  out.emit("summary.csv", summary);
}

void run_defects(const ExperimentConfig& cfg, const LoadedSystem& ls, Artifacts& out) {
  DefectOptions opts;
  opts.kind = cfg.norm;
  opts.search.seed = cfg.seed;
  const DefectReport rep = cfg.norm == NormKind::kPointwise
                               ? transitivity_defects(ls.soft, ls.probes, opts)
                               : transitivity_defects(ls.soft, opts);
  Csv rows({"m", "n", "l", "probe_id", "defect", "norm_kind"});
  double worst = 0.0;
  for (const DefectRow& r : rep.rows) {
    rows.row(r.m, r.n, r.l, r.probe_id, r.defect, norm_kind_name(r.kind));
    if (r.probe_id != "map_lower") worst = std::max(worst, r.defect);
  }
  out.emit("defects.csv", rows);

  Csv decay({"m", "sup_defect"});
  for (const auto& [m, d] : rep.per_m) decay.row(m, d);
  out.emit("decay.csv", decay);

  const std::vector<DefectRow> mult = mult_defect_profile(ls.soft, basis_pairs(ls.soft));
  Csv mrows({"m", "n", "l", "pair_id", "defect"});
  double worst_mult = 0.0;
  for (const DefectRow& r : mult) {
    mrows.row(r.m, r.n, r.l, r.probe_id, r.defect);
    worst_mult = std::max(worst_mult, r.defect);
  }
  out.emit("mult.csv", mrows);

  Csv summary({"key", "value"});
  summary.row("norm_kind", norm_kind_name(cfg.norm));
  summary.row("max_defect", worst);
  summary.row("max_mult_defect", worst_mult);
  summary.row("fit_rate", rep.fit.rate);
  summary.row("fit_intercept", rep.fit.intercept);
  summary.row("fit_residual", rep.fit.residual);
  summary.row("fit_window_start", rep.fit.window_start);
  summary.row("fit_points", rep.fit.points);
  out.emit("summary.csv", summary);
}

void run_strictify(const ExperimentConfig& cfg, const LoadedSystem& ls, Artifacts& out) {
  const SoftSystem& sys = ls.soft;
  std::vector<double> eps(sys.horizon());
  for (std::size_t m = 0; m < eps.size(); ++m) {
    eps[m] = std::ldexp(cfg.certificate_scale, -static_cast<int>(m));
  }
  const SummabilityCertificate cert = refine_to_summable(sys, eps, cfg.norm);
  Csv c({"position", "index", "epsilon"});
  for (std::size_t k = 0; k < cert.indices.size(); ++k) c.row(k, cert.indices[k], cert.epsilons[k]);
  out.emit("certificate.csv", c);

  Csv triples({"n", "m", "k", "defect", "bound"});
  for (const CertifiedTriple& t : cert.triples) triples.row(t.n, t.m, t.k, t.defect, t.bound);
  out.emit("certificate_triples.csv", triples);

  const SoftSystem sub = subsystem(sys, cert.indices);
  const SoftSystem strict = strictify(sub);
  struct Pair {
    std::size_t n, m;
    double diff = 0.0;
  };
  std::vector<Pair> pairs;
  for (std::size_t n = 1; n < sub.horizon(); ++n) {
    for (std::size_t m = 0; m < n; ++m) pairs.push_back({n, m});
  }
  parallel_for(pairs.size(), [&](std::size_t i) {
    Pair& p = pairs[i];
    const CPMap d = strict.map(p.n, p.m) - sub.map(p.n, p.m);
    p.diff = map_difference(d, cfg.norm, ls.probes[cert.indices[p.m]], cfg.seed);
  });
  Csv rows({"m", "n", "level_m", "level_n", "difference", "tail_bound", "within_bound"});
  double slack = -std::numeric_limits<double>::infinity();
  bool all = true;
  for (const Pair& p : pairs) {
    const double tail = cert.tail(p.m, p.n);
    const bool ok = p.diff <= tail + cfg.tolerance;
    all = all && ok;
    slack = std::max(slack, p.diff - tail);
    rows.row(p.m, p.n, cert.indices[p.m], cert.indices[p.n], p.diff, tail, ok);
  }
  out.emit("strictify.csv", rows);

  Csv summary({"key", "value"});
  summary.row("norm_kind", norm_kind_name(cfg.norm));
  summary.row("selected_levels", cert.indices.size());
  summary.row("certificate_verified", cert.verified);
  summary.row("all_within_bound", all);
  summary.row("max_excess", pairs.empty() ? 0.0 : slack);
  summary.row("strict_residual", exact_transitivity_residual(strict));
  out.emit("summary.csv", summary);
}

void run_cpa(const ExperimentConfig& cfg, const LoadedSystem& ls, Artifacts& out) {
  if (!ls.cpa) bad_config("system", "the cpa experiment needs a CPA source (uhf, interval or a cpa bundle)");
  const CpaSystem& cpa = *ls.cpa;

  Csv rec({"n", "level_size", "probe_id", "defect"});
  for (std::size_t n = 0; n < cpa.size(); ++n) {
    for (const Probe& p : cpa.probes()) {
      rec.row(n, cpa.level_size(n), p.id, cpa.reconstruction_defect(n, p.element));
    }
  }
  out.emit("reconstruction.csv", rec);

  Csv ineq({"m", "n", "l", "probe_id", "lhs", "rhs", "within_bound"});
  bool all = true;
  for (const InequalityRow& r : ls.inequality) {
    const bool ok = r.lhs <= r.rhs + cfg.tolerance;
    all = all && ok;
    ineq.row(r.m, r.n, r.l, r.probe_id, r.lhs, r.rhs, ok);
  }
  out.emit("inequality.csv", ineq);

  const SplitFactorization split = split_factorization(cpa, cfg.split_eps);
  Csv sp({"probe_id", "level", "t1", "t2", "t3", "total", "third", "eps"});
  bool split_ok = true;
  for (const SplitTerms& t : split.terms) {
    const double third = cfg.split_eps / 3.0;
    split_ok = split_ok && t.t1 <= third + cfg.tolerance && t.t2 <= third + cfg.tolerance &&
               t.t3 <= third + cfg.tolerance && t.total <= cfg.split_eps + cfg.tolerance;
    sp.row(t.probe_id, t.level, t.t1, t.t2, t.t3, t.total, third, cfg.split_eps);
  }
  out.emit("split.csv", sp);

  Csv summary({"key", "value"});
  summary.row("levels", cpa.size());
  summary.row("inequality_holds", all);
  summary.row("worst_violation", ls.worst_violation);
  summary.row("split_level", split.level);
  summary.row("split_within_eps", split_ok);

  const CpaRefinement refined = refine_summable_cpa(cpa, cfg.tolerance);
  Csv ref({"position", "index", "map_bound", "threshold", "max_reconstruction"});
  for (const CpaRefinementRow& r : refined.rows) {
    ref.row(r.position, r.index, r.map_bound, r.threshold, r.max_reconstruction);
  }
  out.emit("refinement.csv", ref);
  summary.row("refined_levels", refined.indices.size());
  out.emit("summary.csv", summary);
}

void run_limit_probe(const ExperimentConfig& cfg, const LoadedSystem& ls, Artifacts& out) {
  auto sys = std::make_shared<const SoftSystem>(ls.soft);
  const std::size_t top = sys->horizon() - 1;
  std::vector<BoundedNet> nets;
  std::vector<std::string> ids;
  for (std::size_t l : cfg.net_levels) {
    if (l >= sys->horizon()) bad_config("net_levels", "level " + std::to_string(l) + " is beyond the horizon");
    for (const Probe& p : ls.probes[l]) {
      nets.push_back(BoundedNet::basic(sys, l, p.element));
      ids.push_back(std::to_string(l) + ":" + p.id);
    }
  }
  std::vector<CPMap> alphas;
  for (std::size_t n = 0; n < sys->horizon(); ++n) {
    alphas.push_back(ls.cpa ? ls.cpa->up()[n] : sys->j(top, n));
  }
  std::vector<NetVerdict> verdicts(nets.size());
  std::vector<std::optional<QuotientVerdict>> quotients(nets.size());
  parallel_for(nets.size(), [&](std::size_t i) {
    verdicts[i] = analyze_net(nets[i], cfg.tolerance);
    bool sa = true;
    for (const AlgElement& e : nets[i].entries()) sa = sa && e.is_self_adjoint(1e-9 * (1.0 + e.norm()));
    if (sa) quotients[i] = quotient_positive(nets[i], cfg.tolerance);
  });

  Csv nrows({"net", "net_id", "n", "norm", "jconv", "cauchy"});
  Csv vrows({"net", "net_id", "window_start", "seminorm", "last_norm", "tail_max", "loglog_slope",
             "is_null", "self_adjoint", "quotient_positive", "max_negativity"});
  for (std::size_t i = 0; i < nets.size(); ++i) {
    const NetVerdict& v = verdicts[i];
    for (std::size_t n = 0; n < nets[i].size(); ++n) {
      nrows.row(i, ids[i], n, nets[i].at(n).norm(), v.jconv[n], v.cauchy[n]);
    }
    const auto& q = quotients[i];
    const double neg = q ? *std::max_element(q->negativity.begin(), q->negativity.end()) : 0.0;
    vrows.row(i, ids[i], v.window_start, v.seminorm_estimate, v.last_norm, v.null.tail_max,
              v.null.loglog_slope, v.null.is_null, q.has_value(), q && q->positive, neg);
  }
  out.emit("nets.csv", nrows);
  out.emit("net_verdicts.csv", vrows);

  const LimitProbeReport rep = limit_map_probe(*sys, alphas, nets);
  Csv lrows({"net", "net_id", "n", "image_norm", "cauchy"});
  for (const LimitProbeRow& r : rep.rows) lrows.row(r.net, ids[r.net], r.n, r.image_norm, r.cauchy);
  out.emit("limit.csv", lrows);

  Csv summary({"key", "value"});
  summary.row("nets", nets.size());
  summary.row("window_start", rep.window_start);
  summary.row("limit_target", ls.cpa ? "cpa ambient" : "top level");
  summary.row("max_consistency", rep.consistency.empty()
                                     ? 0.0
                                     : *std::max_element(rep.consistency.begin(), rep.consistency.end()));
  out.emit("summary.csv", summary);
}

void run_ncdual(const ExperimentConfig& cfg, const LoadedSystem& ls, Artifacts& out) {
  ProjectiveOptions o;
  o.k = cfg.state_level;
  o.samples = cfg.state_samples;
  o.seed = cfg.seed;
  o.max_triples = cfg.max_triples;
  const std::vector<ProjectiveRow> rows = projective_defect(ls.soft, o);
  Csv csv({"m", "n", "l", "sample", "seed", "k", "dual_defect", "primal_defect", "contracted"});
  bool all = true;
  for (const ProjectiveRow& r : rows) {
    const bool ok = r.dual_defect <= r.primal_defect + cfg.tolerance;
    all = all && ok;
    csv.row(r.m, r.n, r.l, r.sample, cell(r.seed, 0), r.k, r.dual_defect, r.primal_defect, ok);
  }
  out.emit("projective.csv", csv);
  Csv summary({"key", "value"});
  summary.row("rows", rows.size());
  summary.row("all_contracted", all);
  out.emit("summary.csv", summary);
}

void run_qd(const ExperimentConfig& cfg, const LoadedSystem& ls, Artifacts& out) {
  std::vector<CPMap> maps;
  std::vector<ProbePair> pairs;
  if (ls.cpa) {
    maps = ls.cpa->down();
    const auto& pr = ls.cpa->probes();
    for (const Probe& a : pr) {
      for (const Probe& b : pr) pairs.push_back({a.id + "*" + b.id, a.element, b.element});
    }
  } else {
    for (std::size_t n = 1; n < ls.soft.horizon(); ++n) maps.push_back(ls.soft.j(n, 0));
    pairs = basis_pairs(ls.soft)[0];
  }
  Csv q({"map", "pair_id", "mult_defect", "isometry_defect"});
  for (const QdRow& r : qd_defect(maps, pairs)) q.row(r.map, r.pair_id, r.mult_defect, r.isometry_defect);
  out.emit("qd.csv", q);

  IsometryOptions io;
  io.seed = cfg.seed;
  Csv iso({"n", "m", "estimate", "heuristic"});
  for (const IsometryRow& r : asym_isometry_profile(ls.soft, io)) iso.row(r.n, r.m, r.estimate, r.heuristic);
  out.emit("isometry.csv", iso);
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) bad_config("<root>", "config must be a JSON object");
  reject_unknown(j, "", {"experiment", "system", "horizon", "norm", "tolerance", "split_eps",
                         "certificate_scale", "state_level", "state_samples", "max_triples",
                         "net_levels", "seed", "out"});
  ExperimentConfig c;
  if (!j.contains("experiment")) bad_config("experiment", "missing");
  if (!j["experiment"].is_string() || !kExperiments.count(j["experiment"].get<std::string>())) {
    bad_config("experiment", "must be one of verify, defects, strictify, cpa, limit-probe, ncdual, qd");
  }
  c.experiment = j["experiment"].get<std::string>();
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad_config("seed", "must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (!j.contains("system")) bad_config("system", "missing");
  c.system = normalize_system(j["system"], c.seed);
  if (j.contains("horizon")) c.horizon = get_count(j["horizon"], "horizon", 2, 64);
  c.norm = c.experiment == "strictify" ? NormKind::kCb : NormKind::kPointwise;
  if (j.contains("norm")) {
    if (!j["norm"].is_string()) bad_config("norm", "must be a string");
    try {
      c.norm = parse_norm_kind(j["norm"].get<std::string>());
    } catch (const Error& e) {
      bad_config("norm", e.what());
    }
  }
  if (j.contains("tolerance")) c.tolerance = get_positive(j["tolerance"], "tolerance");
  if (j.contains("split_eps")) c.split_eps = get_positive(j["split_eps"], "split_eps");
  if (j.contains("certificate_scale")) {
    c.certificate_scale = get_positive(j["certificate_scale"], "certificate_scale");
  }
  if (j.contains("state_level")) c.state_level = get_count(j["state_level"], "state_level", 1, 8);
  if (j.contains("state_samples")) c.state_samples = get_count(j["state_samples"], "state_samples", 1, 1000);
  if (j.contains("max_triples")) c.max_triples = get_count(j["max_triples"], "max_triples", 0, 1000000);
  if (j.contains("net_levels")) {
    if (!j["net_levels"].is_array()) bad_config("net_levels", "must be an array");
    c.net_levels.clear();
    for (const Json& l : j["net_levels"]) c.net_levels.push_back(get_count(l, "net_levels", 0, 63));
  }
  if (j.contains("out")) {
    if (!j["out"].is_string() || j["out"].get<std::string>().empty()) bad_config("out", "must be a nonempty string");
    c.out_dir = j["out"].get<std::string>();
  }

  // The output directory does not affect results and stays out of the hash.
  Json canon{{"experiment", c.experiment},
             {"system", c.system},
             {"norm", norm_kind_name(c.norm)},
             {"tolerance", c.tolerance},
             {"split_eps", c.split_eps},
             {"certificate_scale", c.certificate_scale},
             {"state_level", c.state_level},
             {"state_samples", c.state_samples},
             {"max_triples", c.max_triples},
             {"net_levels", c.net_levels},
             {"seed", c.seed}};
  if (c.horizon) canon["horizon"] = *c.horizon;
  c.canonical = std::move(canon);
  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string csv_preamble(const ExperimentConfig& cfg) {
  return std::string("#softlimit-version=") + kVersion + ",seed=" + std::to_string(cfg.seed) +
         ",config_hash=" + hex64(fnv1a(cfg.canonical.dump()));
}

LoadedSystem load_system(const ExperimentConfig& cfg) {
  LoadedSystem ls;
  const Json& s = cfg.system;
  std::optional<CpaSystem> cpa;
  if (s.contains("path")) {
    const Json bundle = parse_json(read_file(s["path"].get<std::string>()));
    const std::string kind = bundle.value("kind", "");
    if (kind == "system") {
      ls.soft = system_from_json(bundle);
    } else if (kind == "cpa") {
      cpa = cpa_from_json(bundle);
    } else {
      bad_config("system.path", "bundle kind must be 'system' or 'cpa'");
    }
  } else {
    const std::string name = s["builtin"].get<std::string>();
    if (name == "uhf") {
      cpa = example_uhf(s["depth"].get<std::size_t>());
    } else if (name == "interval") {
      cpa = example_interval(s["grids"].get<std::vector<std::size_t>>(), s["fine"].get<std::size_t>());
    } else {
      const std::size_t h = cfg.horizon.value_or(s["horizon"].get<std::size_t>());
      const SoftSystem base =
          example_unitary_chain(h, s["dim"].get<std::size_t>(), s["chain_seed"].get<std::uint64_t>());
      const std::vector<double> w = s["weights"].is_string()
                                        ? dyadic_weights(h)
                                        : std::vector<double>(h, s["weights"].get<double>());
      ls.soft = example_perturbed(base, w);
    }
  }

  if (cfg.horizon) {
    const std::size_t h = *cfg.horizon;
    const std::size_t have = cpa ? cpa->size() : ls.soft.horizon();
    if (h > have) {
      bad_config("horizon", std::to_string(h) + " exceeds the " + std::to_string(have) + " available levels");
    }
    std::vector<std::size_t> keep(h);
    for (std::size_t i = 0; i < h; ++i) keep[i] = i;
    if (cpa) {
      cpa = cpa->select(keep);
    } else if (h < have) {
      ls.soft = subsystem(ls.soft, keep);
    }
  }

  if (cpa) {
    InducedSystem ind = induce(*cpa);
    ls.soft = std::move(ind.soft);
    ls.probes = std::move(ind.probes);
    ls.inequality = std::move(ind.inequality);
    ls.worst_violation = ind.worst_violation;
    ls.cpa = std::move(cpa);
  } else {
    ls.probes = basis_probes(ls.soft);
  }
  if (ls.soft.horizon() < 2) bad_config("horizon", "the system needs at least two levels");
  return ls;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kHorizonTooShort:
      return 4;
    case ErrorCode::kSolverFailure:
    case ErrorCode::kNumericalFailure:
      return 3;
    default:
      return 2;
  }
}

RunResult run(const ExperimentConfig& cfg) {
  RunResult result;
  try {
    const LoadedSystem ls = load_system(cfg);
    Artifacts out(cfg, result);
    if (cfg.experiment == "verify") {
      run_verify(cfg, ls, out);
    } else if (cfg.experiment == "defects") {
      run_defects(cfg, ls, out);
    } else if (cfg.experiment == "strictify") {
      run_strictify(cfg, ls, out);
    } else if (cfg.experiment == "cpa") {
      run_cpa(cfg, ls, out);
    } else if (cfg.experiment == "limit-probe") {
      run_limit_probe(cfg, ls, out);
    } else if (cfg.experiment == "ncdual") {
      run_ncdual(cfg, ls, out);
    } else {
      run_qd(cfg, ls, out);
    }
    result.message = "ok";
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.message = e.what();
  }
  return result;
}

}  // namespace softlimit
