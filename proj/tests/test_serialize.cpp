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

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>

#include "bridge.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "softlimit/error.hpp"
#include "softlimit/limits.hpp"
#include "softlimit/ncdual.hpp"
#include "softlimit/nuclearity.hpp"
#include "softlimit/serialize.hpp"

using namespace softlimit;
namespace fs = std::filesystem;

namespace {

const fs::path kBundles = fs::path(SOFTLIMIT_SOURCE_DIR) / "data" / "bundles";

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    if (!same_bits(a(k).real(), b(k).real()) || !same_bits(a(k).imag(), b(k).imag())) return false;
  }
  return true;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

std::string bundle_text(const std::string& name) { return read_file((kBundles / name).string()); }

}  // namespace

TEST_SUITE("serialize") {
  TEST_CASE("doubles survive bit for bit") {
    oracle::Rng rng(1);
    CMatrix m = oracle::ginibre(3, 4, rng);
    m(0, 0) = {0.1 + 0.2, 1.0 / 3.0};
    m(1, 1) = {std::numeric_limits<double>::denorm_min(), -0.0};
    m(2, 2) = {std::numeric_limits<double>::max(), std::numeric_limits<double>::min()};
    const CMatrix back = matrix_from_json(parse_json(matrix_to_json(m).dump()));
    CHECK(same_bits(m, back));
  }

  TEST_CASE("objects round trip") {
    oracle::Rng rng(2);
    const FdVNAlgebra alg({2, 1, 3});
    CHECK(algebra_from_json(algebra_to_json(alg)) == alg);

    const AlgElement e(alg, {oracle::ginibre(2, 2, rng), oracle::ginibre(1, 1, rng), oracle::ginibre(3, 3, rng)});
    const AlgElement eb = element_from_json(parse_json(element_to_json(e).dump()));
    for (std::size_t p = 0; p < 3; ++p) CHECK(same_bits(e.block(p), eb.block(p)));

    const OperatorSystemSpace whole = OperatorSystemSpace::whole(alg);
    CHECK(space_from_json(space_to_json(whole)).is_standard());
    const FdVNAlgebra m2 = FdVNAlgebra::full(2);
    const OperatorSystemSpace off(m2, {unit(m2), AlgElement::matrix_unit(m2, 0, 0, 1), AlgElement::matrix_unit(m2, 0, 1, 0)});
    const OperatorSystemSpace offb = space_from_json(space_to_json(off));
    CHECK(offb.dim() == 3);
    CHECK_FALSE(offb.is_standard());

    const CPMap f = bridge::to_cpmap(oracle::random_kraus(2, 3, 2, true, rng));
    const CPMap fb = map_from_json(parse_json(map_to_json(f).dump()));
    CHECK(fb.choi_distance(f) == 0.0);
    CHECK(fb.is_ucp());

    const SoftSystem sys = example_perturbed(example_unitary_chain(4, 2, 5), dyadic_weights(4));
    const SoftSystem sb = system_from_json(parse_json(system_to_json(sys).dump()));
    for (std::size_t n = 1; n < 4; ++n) {
      for (std::size_t m = 0; m < n; ++m) CHECK(sb.map(n, m).choi_distance(sys.map(n, m)) == 0.0);
    }

    const CpaSystem cpa = example_uhf(2);
    const CpaSystem cb = cpa_from_json(parse_json(cpa_to_json(cpa).dump()));
    CHECK(cb.size() == cpa.size());
    CHECK(cb.probes().size() == cpa.probes().size());
    CHECK(cb.down()[1].choi_distance(cpa.down()[1]) == 0.0);

    auto ptr = std::make_shared<const SoftSystem>(sys);
    const BoundedNet net = BoundedNet::basic(ptr, 1, bridge::full(oracle::ginibre(2, 2, rng)));
    const BoundedNet nb = net_from_json(parse_json(net_to_json(net).dump()));
    CHECK(nb.tag() == NetTag::kBasic);
    CHECK(nb.basic_level() == 1);
    for (std::size_t n = 0; n < 4; ++n) CHECK(same_bits(nb.at(n).block(0), net.at(n).block(0)));
  }

  TEST_CASE("shipped bundles are fixed points") {
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(kBundles)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      CHECK(roundtrip(entry.path().string()));
      ++seen;
    }
    CHECK(seen >= 6);
  }

  TEST_CASE("malformed bundles") {
    const std::string text = bundle_text("map.json");
    CHECK(code_of([&] { roundtrip_text(text.substr(0, text.size() / 2)); }) == ErrorCode::kParseError);

    const fs::path tmp = fs::temp_directory_path() / "softlimit_truncated.json";
    {
      std::ofstream out(tmp);
      out << text.substr(0, text.size() - 5);
    }
    CHECK(code_of([&] { roundtrip(tmp.string()); }) == ErrorCode::kParseError);
    fs::remove(tmp);
    CHECK(code_of([&] { roundtrip("/nonexistent/bundle.json"); }) == ErrorCode::kParseError);

    // NaN has no JSON spelling; both the bare token and an overflowing
    // literal are rejected.
    Json j = parse_json(text);
    std::string with_nan = j.dump();
    const std::size_t pos = with_nan.find("[[");
    REQUIRE(pos != std::string::npos);
    with_nan.insert(pos + 2, "NaN,");
    CHECK(code_of([&] { roundtrip_text(with_nan); }) == ErrorCode::kParseError);
    j["choi"][0]["data"][0][0] = 1.0;
    std::string huge = j.dump();
    const std::size_t one = huge.find("[[1.0,");
    REQUIRE(one != std::string::npos);
    huge.replace(one + 2, 3, "1e999");
    CHECK(code_of([&] { roundtrip_text(huge); }) == ErrorCode::kParseError);
    j["choi"][0]["data"][0][0] = nullptr;
    CHECK(code_of([&] { roundtrip_text(j.dump()); }) == ErrorCode::kParseError);

    Json k = parse_json(text);
    k["kind"] = "teapot";
    CHECK(code_of([&] { roundtrip_text(k.dump()); }) == ErrorCode::kParseError);
    k = parse_json(text);
    k.erase("target");
    try {
      roundtrip_text(k.dump());
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kParseError);
      CHECK(std::string(e.what()).find("target") != std::string::npos);
    }
  }

  TEST_CASE("decoders re-verify") {
    // A Choi matrix with a negative eigenvalue cannot form a system map.
    Json sys = parse_json(bundle_text("perturbed_system.json"));
    Json& choi = sys["maps"][0]["map"]["choi"][0]["data"];
    choi[0][0] = -5.0;
    CHECK_THROWS_AS(system_from_json(sys), Error);
    CHECK(code_of([&] { system_from_json(sys); }) == ErrorCode::kParseError);

    Json state = parse_json(bundle_text("state.json"));
    state["values"][0]["data"][0][0] = 3.0;
    CHECK(code_of([&] { state_from_json(state); }) == ErrorCode::kParseError);
  }

  TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ULL);
  }
}
