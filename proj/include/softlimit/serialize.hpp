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

#include <memory>
#include <string>

#include "json.hpp"
#include "softlimit/cpmaps.hpp"
#include "softlimit/limits.hpp"
#include "softlimit/ncdual.hpp"
#include "softlimit/nuclearity.hpp"
#include "softlimit/opsys.hpp"
#include "softlimit/softsys.hpp"

namespace softlimit {

using Json = nlohmann::json;

// Encoders write doubles at full precision; decoders throw kParseError on
// missing fields, wrong types, shape errors and non-finite numbers.

Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);

Json algebra_to_json(const FdVNAlgebra& a);
FdVNAlgebra algebra_from_json(const Json& j);

Json element_to_json(const AlgElement& e);
AlgElement element_from_json(const Json& j);

Json space_to_json(const OperatorSystemSpace& s);
OperatorSystemSpace space_from_json(const Json& j);

/// {"source","target","choi":[...]}; zero Choi blocks are written as
/// 0x0 matrices.
Json map_to_json(const CPMap& f);
CPMap map_from_json(const Json& j);

/// {"kind":"system","name","provenance","levels":[...],"maps":[{"n","m","map"}]}
Json system_to_json(const SoftSystem& s);
SoftSystem system_from_json(const Json& j);

/// {"kind":"net","system":{...},"entries":[...],"tag":"basic|null|custom"}
Json net_to_json(const BoundedNet& x);
BoundedNet net_from_json(const Json& j);

/// {"kind":"cpa","name","space","down":[...],"up":[...],"probes":[{"id","element"}]}
Json cpa_to_json(const CpaSystem& c);
CpaSystem cpa_from_json(const Json& j);

/// {"kind":"state","space","level","values":[...]}; decoding re-verifies.
Json state_to_json(const MatrixState& x);
MatrixState state_from_json(const Json& j);

/// Parses text, rejecting malformed JSON with kParseError.
Json parse_json(const std::string& text);
std::string read_file(const std::string& path);

/// Parses, decodes by "kind" and encodes; then decodes and encodes that
/// result once more. True if the two encodings are byte-identical.
bool roundtrip_text(const std::string& text);
bool roundtrip(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace softlimit
