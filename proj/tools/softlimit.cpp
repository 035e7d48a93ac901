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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "softlimit/softlimit.h"

namespace {

using nlohmann::json;

// Builtin system used when no --config is given.
const std::map<std::string, json>& default_systems() {
  static const std::map<std::string, json> d{
      {"verify", {{"builtin", "perturbed"}}},      {"defects", {{"builtin", "uhf"}, {"depth", 5}}},
      {"strictify", {{"builtin", "perturbed"}}},   {"cpa", {{"builtin", "interval"}}},
      {"limit-probe", {{"builtin", "perturbed"}}}, {"ncdual", {{"builtin", "perturbed"}}},
      {"qd", {{"builtin", "interval"}}}};
  return d;
}

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> norm;
  std::optional<std::size_t> horizon;
};

int run_experiment(const std::string& experiment, const Flags& f) {
  json cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) {
      std::cerr << "error: cannot open config '" << f.config << "'\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = json::parse(ss.str(), nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object()) {
      std::cerr << "error: config '" << f.config << "' is not a JSON object\n";
      return 2;
    }
  } else {
    cfg["system"] = default_systems().at(experiment);
  }
  cfg["experiment"] = experiment;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.norm) cfg["norm"] = *f.norm;
  if (f.horizon) cfg["horizon"] = *f.horizon;

  const int code = sl_run_experiment(cfg.dump().c_str(), f.out.c_str());
  if (code != 0) {
    std::cerr << "error: " << sl_last_error() << "\n";
  } else {
    std::cout << experiment << ": wrote CSVs to " << f.out << "\n";
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft inductive limits of operator systems: experiment runner"};
  app.set_version_flag("--version", std::string(sl_version()));
  app.require_subcommand(1);

  Flags flags;
  std::string experiment;
  for (const auto& [name, sys] : default_systems()) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", flags.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "Output directory for CSVs")->capture_default_str();
    sub->add_option("--seed", flags.seed, "RNG seed");
    sub->add_option("--norm", flags.norm, "Defect norm")
        ->check(CLI::IsMember({"pointwise", "interval", "cb"}));
    sub->add_option("--horizon", flags.horizon, "Number of levels")->check(CLI::Range(2, 64));
    sub->callback([&experiment, name = name] { experiment = name; });
  }

  std::string bundle;
  CLI::App* rt = app.add_subcommand("roundtrip", "Check a JSON bundle for a serialization fixed point");
  rt->add_option("path", bundle, "Bundle file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (rt->parsed()) {
    int fixed = 0;
    if (sl_roundtrip_file(bundle.c_str(), &fixed) != SL_OK) {
      std::cerr << "error: " << sl_last_error() << "\n";
      return 2;
    }
    std::cout << (fixed ? "true" : "false") << "\n";
    return fixed ? 0 : 1;
  }
  return run_experiment(experiment, flags);
}
