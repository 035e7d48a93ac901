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

#include "softlimit/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "softlimit/error.hpp"

namespace softlimit {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) parse_fail(std::string("expected an object holding '") + name + "'");
  auto it = j.find(name);
  if (it == j.end()) parse_fail(std::string("missing field '") + name + "'");
  return *it;
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail(std::string(what) + " must be finite");
  return v;
}

std::size_t count(const Json& j, const char* what) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    parse_fail(std::string(what) + " must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

std::string text(const Json& j, const char* what) {
  if (!j.is_string()) parse_fail(std::string(what) + " must be a string");
  return j.get<std::string>();
}

const Json& array(const Json& j, const char* what) {
  if (!j.is_array()) parse_fail(std::string(what) + " must be an array");
  return j;
}

// Domain errors raised while rebuilding objects surface as parse errors.
template <class F>
auto rebuild(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    parse_fail(std::string(what) + ": " + e.what());
  }
}

}  // namespace

Json matrix_to_json(const CMatrix& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    }
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const Json& j) {
  const std::size_t rows = count(field(j, "rows"), "rows");
  const std::size_t cols = count(field(j, "cols"), "cols");
  const Json& data = array(field(j, "data"), "data");
  if (data.size() != rows * cols) {
    parse_fail("matrix data holds " + std::to_string(data.size()) + " entries, expected " +
               std::to_string(rows * cols));
  }
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c, ++k) {
      const Json& e = data[k];
      if (!e.is_array() || e.size() != 2) parse_fail("matrix entry must be [re, im]");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          Complex(number(e[0], "matrix entry"), number(e[1], "matrix entry"));
    }
  }
  return m;
}

Json algebra_to_json(const FdVNAlgebra& a) { return Json{{"blocks", a.block_sizes()}}; }

FdVNAlgebra algebra_from_json(const Json& j) {
  std::vector<std::size_t> blocks;
  for (const Json& b : array(field(j, "blocks"), "blocks")) blocks.push_back(count(b, "block size"));
  return rebuild("algebra", [&] { return FdVNAlgebra(blocks); });
}

Json element_to_json(const AlgElement& e) {
  Json blocks = Json::array();
  for (const CMatrix& b : e.blocks()) blocks.push_back(matrix_to_json(b));
  return Json{{"algebra", algebra_to_json(e.algebra())}, {"blocks", std::move(blocks)}};
}

AlgElement element_from_json(const Json& j) {
  const FdVNAlgebra a = algebra_from_json(field(j, "algebra"));
  std::vector<CMatrix> blocks;
  for (const Json& b : array(field(j, "blocks"), "blocks")) blocks.push_back(matrix_from_json(b));
  return rebuild("element", [&] { return AlgElement(a, blocks); });
}

Json space_to_json(const OperatorSystemSpace& s) {
  if (s.is_standard()) return Json{{"ambient", algebra_to_json(s.ambient())}, {"basis", "whole"}};
  Json basis = Json::array();
  for (const AlgElement& b : s.basis()) basis.push_back(element_to_json(b));
  return Json{{"ambient", algebra_to_json(s.ambient())}, {"basis", std::move(basis)}};
}

OperatorSystemSpace space_from_json(const Json& j) {
  const FdVNAlgebra a = algebra_from_json(field(j, "ambient"));
  const Json& basis_json = field(j, "basis");
  if (basis_json.is_string() && basis_json.get<std::string>() == "whole") {
    return OperatorSystemSpace::whole(a);
  }
  std::vector<AlgElement> basis;
  for (const Json& b : array(basis_json, "basis")) basis.push_back(element_from_json(b));
  bool standard = basis.size() == a.dim();
  for (std::size_t k = 0; standard && k < basis.size(); ++k) {
    standard = (basis[k] - AlgElement::basis_unit(a, k)).hs_norm() == 0.0;
  }
  if (standard) return OperatorSystemSpace::whole(a);
  return rebuild("operator system", [&] { return OperatorSystemSpace(a, basis); });
}

Json map_to_json(const CPMap& f) {
  Json choi = Json::array();
  for (const CMatrix& c : f.choi_blocks()) choi.push_back(matrix_to_json(c));
  return Json{{"source", algebra_to_json(f.source())},
              {"target", algebra_to_json(f.target())},
              {"choi", std::move(choi)}};
}

CPMap map_from_json(const Json& j) {
  const FdVNAlgebra s = algebra_from_json(field(j, "source"));
  const FdVNAlgebra t = algebra_from_json(field(j, "target"));
  std::vector<CMatrix> choi;
  for (const Json& c : array(field(j, "choi"), "choi")) choi.push_back(matrix_from_json(c));
  return rebuild("map", [&] { return CPMap(s, t, choi); });
}

Json system_to_json(const SoftSystem& s) {
  Json levels = Json::array();
  for (const FdVNAlgebra& a : s.levels()) levels.push_back(algebra_to_json(a));
  Json maps = Json::array();
  for (std::size_t n = 1; n < s.horizon(); ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      maps.push_back(Json{{"n", n}, {"m", m}, {"map", map_to_json(s.map(n, m))}});
    }
  }
  return Json{{"kind", "system"},
              {"name", s.name()},
              {"provenance", s.provenance()},
              {"levels", std::move(levels)},
              {"maps", std::move(maps)}};
}

SoftSystem system_from_json(const Json& j) {
  std::vector<FdVNAlgebra> levels;
  for (const Json& a : array(field(j, "levels"), "levels")) levels.push_back(algebra_from_json(a));
  std::vector<std::vector<CPMap>> maps(levels.size());
  std::vector<std::vector<bool>> seen(levels.size());
  for (std::size_t n = 0; n < levels.size(); ++n) {
    maps[n].resize(n);
    seen[n].assign(n, false);
  }
  for (const Json& e : array(field(j, "maps"), "maps")) {
    const std::size_t n = count(field(e, "n"), "n");
    const std::size_t m = count(field(e, "m"), "m");
    if (n >= levels.size() || m >= n) parse_fail("map index out of range");
    if (seen[n][m]) parse_fail("duplicate map entry");
    maps[n][m] = map_from_json(field(e, "map"));
    seen[n][m] = true;
  }
  for (std::size_t n = 0; n < levels.size(); ++n) {
    for (std::size_t m = 0; m < n; ++m) {
      if (!seen[n][m]) parse_fail("missing map j(" + std::to_string(n) + "," + std::to_string(m) + ")");
    }
  }
  const std::string name = j.contains("name") ? text(j["name"], "name") : "";
  const std::string prov = j.contains("provenance") ? text(j["provenance"], "provenance") : "";
  return rebuild("system", [&] { return SoftSystem(levels, maps, name, prov); });
}

Json net_to_json(const BoundedNet& x) {
  Json entries = Json::array();
  for (const AlgElement& e : x.entries()) entries.push_back(element_to_json(e));
  Json out{{"kind", "net"},
           {"system", system_to_json(x.system())},
           {"entries", std::move(entries)},
           {"tag", net_tag_name(x.tag())}};
  if (x.tag() == NetTag::kBasic) out["basic_level"] = x.basic_level();
  return out;
}

BoundedNet net_from_json(const Json& j) {
  auto sys = std::make_shared<const SoftSystem>(system_from_json(field(j, "system")));
  std::vector<AlgElement> entries;
  for (const Json& e : array(field(j, "entries"), "entries")) entries.push_back(element_from_json(e));
  const std::string tag = text(field(j, "tag"), "tag");
  if (tag == "basic") {
    const std::size_t l = count(field(j, "basic_level"), "basic_level");
    if (l >= sys->horizon() || entries.size() != sys->horizon()) parse_fail("bad basic net");
    BoundedNet net = rebuild("net", [&] { return BoundedNet::basic(sys, l, entries[l]); });
    for (std::size_t n = 0; n < entries.size(); ++n) {
      if ((net.at(n) - entries[n]).norm() > 1e-12 * (1.0 + entries[n].norm())) {
        parse_fail("basic net entry " + std::to_string(n) + " is not j_nl(a)");
      }
    }
    return net;
  }
  NetTag t;
  if (tag == "null") {
    t = NetTag::kNull;
  } else if (tag == "custom") {
    t = NetTag::kCustom;
  } else {
    parse_fail("unknown net tag '" + tag + "'");
  }
  return rebuild("net", [&] { return BoundedNet(sys, entries, t); });
}

Json cpa_to_json(const CpaSystem& c) {
  Json down = Json::array(), up = Json::array(), probes = Json::array();
  for (const CPMap& f : c.down()) down.push_back(map_to_json(f));
  for (const CPMap& f : c.up()) up.push_back(map_to_json(f));
  for (const Probe& p : c.probes()) probes.push_back(Json{{"id", p.id}, {"element", element_to_json(p.element)}});
  return Json{{"kind", "cpa"},   {"name", c.name()}, {"space", space_to_json(c.space())},
              {"down", std::move(down)}, {"up", std::move(up)}, {"probes", std::move(probes)}};
}

CpaSystem cpa_from_json(const Json& j) {
  OperatorSystemSpace s = space_from_json(field(j, "space"));
  std::vector<CPMap> down, up;
  for (const Json& f : array(field(j, "down"), "down")) down.push_back(map_from_json(f));
  for (const Json& f : array(field(j, "up"), "up")) up.push_back(map_from_json(f));
  std::vector<Probe> probes;
  if (j.contains("probes")) {
    for (const Json& p : array(j["probes"], "probes")) {
      probes.push_back({text(field(p, "id"), "probe id"), element_from_json(field(p, "element"))});
    }
  }
  const std::string name = j.contains("name") ? text(j["name"], "name") : "";
  return rebuild("cpa", [&] { return CpaSystem(s, down, up, probes, name); });
}

Json state_to_json(const MatrixState& x) {
  Json values = Json::array();
  for (const CMatrix& v : x.values) values.push_back(matrix_to_json(v));
  return Json{{"kind", "state"}, {"space", space_to_json(x.space)}, {"level", x.level}, {"values", std::move(values)}};
}

MatrixState state_from_json(const Json& j) {
  OperatorSystemSpace s = space_from_json(field(j, "space"));
  const std::size_t k = count(field(j, "level"), "level");
  std::vector<CMatrix> values;
  for (const Json& v : array(field(j, "values"), "values")) values.push_back(matrix_from_json(v));
  return rebuild("state", [&] { return make_state(s, k, values); });
}

Json parse_json(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    parse_fail(std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

Json reencode(const Json& j) {
  const std::string kind = text(field(j, "kind"), "kind");
  if (kind == "system") return system_to_json(system_from_json(j));
  if (kind == "net") return net_to_json(net_from_json(j));
  if (kind == "cpa") return cpa_to_json(cpa_from_json(j));
  if (kind == "state") return state_to_json(state_from_json(j));
  if (kind == "map") {
    Json out = map_to_json(map_from_json(j));
    out["kind"] = "map";
    return out;
  }
  parse_fail("unknown bundle kind '" + kind + "'");
}

}  // namespace

bool roundtrip_text(const std::string& body) {
  const Json first = reencode(parse_json(body));
  const Json second = reencode(parse_json(first.dump()));
  return first.dump() == second.dump();
}

bool roundtrip(const std::string& path) { return roundtrip_text(read_file(path)); }

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace softlimit
