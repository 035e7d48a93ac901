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

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "softlimit/runner.hpp"

using namespace softlimit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("softlimit_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits on CRLF; a bare LF anywhere fails the check.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find("\r\n", start);
    REQUIRE(end != std::string::npos);
    const std::string line = text.substr(start, end - start);
    CHECK(line.find('\n') == std::string::npos);
    out.push_back(line);
    start = end + 2;
  }
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, ',')) out.push_back(c);
  return out;
}

/// Column `name` of a CSV artifact, preamble and header stripped.
std::vector<std::string> column(const fs::path& p, const std::string& name) {
  const auto lines = lines_of(slurp(p));
  REQUIRE(lines.size() >= 2);
  const auto header = split(lines[1]);
  const auto it = std::find(header.begin(), header.end(), name);
  REQUIRE(it != header.end());
  const std::size_t k = static_cast<std::size_t>(it - header.begin());
  std::vector<std::string> out;
  for (std::size_t i = 2; i < lines.size(); ++i) out.push_back(split(lines[i]).at(k));
  return out;
}

ExperimentConfig config(const std::string& text, const fs::path& out) {
  ExperimentConfig cfg = parse_config_text(text);
  cfg.out_dir = out.string();
  return cfg;
}

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfigInvalid);
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

}  // namespace

TEST_SUITE("runner") {
  TEST_CASE("uhf defects vanish") {
    TempDir dir("uhf");
    const RunResult r = run(config(R"({"experiment":"defects","system":{"builtin":"uhf","depth":5}})", dir.path));
    REQUIRE(r.exit_code == 0);
    const auto defects = column(dir.path / "defects.csv", "defect");
    CHECK(defects.size() > 10);
    for (const auto& d : defects) CHECK(std::stod(d) <= 1e-12);
  }

  TEST_CASE("strictified perturbed chain stays within its tail bound") {
    TempDir dir("strictify");
    const RunResult r = run(config(R"({"experiment":"strictify","system":{"builtin":"perturbed"}})", dir.path));
    REQUIRE(r.exit_code == 0);
    const fs::path csv = dir.path / "strictify.csv";
    const auto diff = column(csv, "difference");
    const auto bound = column(csv, "tail_bound");
    const auto ok = column(csv, "within_bound");
    REQUIRE(diff.size() == bound.size());
    CHECK(diff.size() > 5);
    for (std::size_t i = 0; i < diff.size(); ++i) {
      CHECK(std::stod(diff[i]) <= std::stod(bound[i]) + 1e-9);
      CHECK(ok[i] == "true");
    }
  }

  TEST_CASE("every experiment writes CRLF CSVs under one preamble") {
    for (const std::string e : {"verify", "defects", "strictify", "cpa", "limit-probe", "ncdual", "qd"}) {
      CAPTURE(e);
      TempDir dir("all_" + e);
      const char* sys = (e == "cpa" || e == "qd") ? "interval" : (e == "defects" ? "uhf" : "perturbed");
      const RunResult r = run(config(std::string(R"({"experiment":")") + e + R"(","system":{"builtin":")" + sys + "\"}}",
                                     dir.path));
      REQUIRE_MESSAGE(r.exit_code == 0, r.message);
      CHECK_FALSE(r.artifacts.empty());
      std::string first;
      for (const auto& a : r.artifacts) {
        const auto lines = lines_of(slurp(a));
        REQUIRE(lines.size() >= 2);
        if (first.empty()) first = lines[0];
        CHECK(lines[0] == first);
      }
    }
  }

  TEST_CASE("runs are deterministic") {
    const std::string text = R"({"experiment":"ncdual","system":{"builtin":"perturbed","horizon":6},"seed":99})";
    TempDir a("det_a"), b("det_b");
    const RunResult ra = run(config(text, a.path));
    const RunResult rb = run(config(text, b.path));
    REQUIRE(ra.exit_code == 0);
    REQUIRE(ra.artifacts.size() == rb.artifacts.size());
    for (std::size_t i = 0; i < ra.artifacts.size(); ++i) {
      CHECK(fs::path(ra.artifacts[i]).filename() == fs::path(rb.artifacts[i]).filename());
      CHECK(slurp(ra.artifacts[i]) == slurp(rb.artifacts[i]));
    }
  }

  TEST_CASE("preamble") {
    const ExperimentConfig c1 = parse_config_text(R"({"experiment":"verify","system":{"builtin":"uhf"},"seed":7})");
    const std::string p = csv_preamble(c1);
    CHECK(std::regex_match(p, std::regex(R"(#softlimit-version=0\.1\.0,seed=7,config_hash=[0-9a-f]{16})")));

    // Defaults are filled in before hashing, so spelling them out changes nothing.
    const ExperimentConfig c2 =
        parse_config_text(R"({"experiment":"verify","system":{"builtin":"uhf","depth":5},"seed":7})");
    CHECK(csv_preamble(c2) == p);
    const ExperimentConfig c3 =
        parse_config_text(R"({"experiment":"verify","system":{"builtin":"uhf","depth":4},"seed":7})");
    CHECK(csv_preamble(c3) != p);
  }

  TEST_CASE("malformed configs name the field") {
    CHECK(config_error("[1,2]").find("config") != std::string::npos);
    CHECK(config_error(R"({"experiment":"dance","system":{"builtin":"uhf"}})").find("experiment") != std::string::npos);
    CHECK(config_error(R"({"experiment":"verify"})").find("system") != std::string::npos);
    CHECK(config_error(R"({"experiment":"verify","system":{"builtin":"uhf","depth":"x"}})").find("system.depth") !=
          std::string::npos);
    CHECK(config_error(R"({"experiment":"verify","system":{"builtin":"uhf","depht":3}})").find("system.depht") !=
          std::string::npos);
    CHECK(config_error(R"({"experiment":"verify","system":{"builtin":"torus"}})").find("system.builtin") !=
          std::string::npos);
    CHECK(config_error(R"({"experiment":"verify","system":{"builtin":"uhf"},"tolerance":-1})").find("tolerance") !=
          std::string::npos);
    CHECK(config_error(R"({"experiment":"verify","system":{"builtin":"uhf"},"norm":"frobenius"})").find("norm") !=
          std::string::npos);
    CHECK(config_error(R"({"experiment":"verify","system":{"builtin":"perturbed","weights":1.5}})")
              .find("system.weights") != std::string::npos);
  }

  TEST_CASE("exit codes") {
    CHECK(exit_code_for(ErrorCode::kHorizonTooShort) == 4);
    CHECK(exit_code_for(ErrorCode::kSolverFailure) == 3);
    CHECK(exit_code_for(ErrorCode::kNumericalFailure) == 3);
    CHECK(exit_code_for(ErrorCode::kConfigInvalid) == 2);
    CHECK(exit_code_for(ErrorCode::kParseError) == 2);

    TempDir dir("short");
    const RunResult r = run(config(
        R"({"experiment":"strictify","system":{"builtin":"perturbed","weights":0.3,"horizon":8}})", dir.path));
    CHECK(r.exit_code == 4);
    CHECK(r.message.find("HorizonTooShort") != std::string::npos);
    const RunResult missing = run(config(R"({"experiment":"verify","system":{"path":"/nonexistent.json"}})", dir.path));
    CHECK(missing.exit_code == 2);
  }
}
