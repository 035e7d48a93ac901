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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softlimit/error.hpp"
#include "softlimit/nuclearity.hpp"
#include "softlimit/serialize.hpp"
#include "softlimit/softsys.hpp"

namespace softlimit {

inline constexpr const char* kVersion = "0.1.0";

/// Validated experiment configuration. `canonical` is the normalized JSON
/// (defaults filled in) whose hash goes into every CSV header.
struct ExperimentConfig {
  std::string experiment;  // verify|defects|strictify|cpa|limit-probe|ncdual|qd
  Json system;             // {"builtin": name, ...} or {"path": file}
  std::optional<std::size_t> horizon;
  NormKind norm = NormKind::kPointwise;
  double tolerance = 1e-10;
  double split_eps = 0.05;
  double certificate_scale = 8.0;  // eps'_m = scale * 2^{-m}
  std::size_t state_level = 2;
  std::size_t state_samples = 4;
  std::size_t max_triples = 0;
  std::vector<std::size_t> net_levels{0, 1};
  std::uint64_t seed = 20260101;
  std::string out_dir = "out";
  Json canonical;
};

/// Throws kConfigInvalid with a message naming the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig parse_config_text(const std::string& text);

/// A loaded system: always a soft system, plus the CPA when the source was
/// one (the soft system is then the induced one).
struct LoadedSystem {
  SoftSystem soft;
  std::optional<CpaSystem> cpa;
  LevelProbes probes;
  std::vector<InequalityRow> inequality;  // filled for CPA sources
  double worst_violation = 0.0;
};

LoadedSystem load_system(const ExperimentConfig& cfg);

/// "#softlimit-version=...,seed=...,config_hash=<16 hex digits>"
std::string csv_preamble(const ExperimentConfig& cfg);

struct RunResult {
  int exit_code = 0;
  std::string message;
  std::vector<std::string> artifacts;  // paths written, in order
};

/// 0 success, 2 invalid input, 3 numerical failure, 4 horizon too short.
int exit_code_for(ErrorCode code);

/// Runs the experiment and writes its CSVs under cfg.out_dir. Library
/// errors are mapped to exit codes; the message carries the diagnostic.
RunResult run(const ExperimentConfig& cfg);

}  // namespace softlimit
