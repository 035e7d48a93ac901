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

// Writes the example JSON bundles shipped under data/bundles.
//
//   make_bundles <output dir>

#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "softlimit/limits.hpp"
#include "softlimit/ncdual.hpp"
#include "softlimit/nuclearity.hpp"
#include "softlimit/random.hpp"
#include "softlimit/serialize.hpp"

namespace {

void write(const std::string& dir, const std::string& name, const softlimit::Json& j) {
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  out << j.dump(1) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path);
  std::cout << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace softlimit;
  if (argc != 2) {
    std::cerr << "usage: make_bundles <output dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  try {
    const SoftSystem perturbed =
        example_perturbed(example_unitary_chain(6, 2, 20260101), dyadic_weights(6));
    write(dir, "perturbed_system.json", system_to_json(perturbed));
    write(dir, "uhf_cpa.json", cpa_to_json(example_uhf(3)));
    write(dir, "interval_cpa.json", cpa_to_json(example_interval({2, 4, 8}, 16)));

    auto sys = std::make_shared<const SoftSystem>(perturbed);
    Rng rng(7);
    const AlgElement a(sys->level(1), {random_ginibre(2, 2, rng)});
    write(dir, "basic_net.json", net_to_json(BoundedNet::basic(sys, 1, a)));

    const FdVNAlgebra m2 = FdVNAlgebra::full(2);
    const OperatorSystemSpace off(m2, {AlgElement::unit(m2), AlgElement::matrix_unit(m2, 0, 0, 1),
                                       AlgElement::matrix_unit(m2, 0, 1, 0)});
    write(dir, "state.json", state_to_json(restrict_state(off, sample_ucp_map(m2, 2, rng))));

    Json map = map_to_json(perturbed.map(3, 1));
    map["kind"] = "map";
    write(dir, "map.json", map);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
