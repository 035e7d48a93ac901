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
#include <random>

#include "softlimit/numerics.hpp"

namespace softlimit {

using Rng = std::mt19937_64;

/// Entries i.i.d. standard complex Gaussian.
CMatrix random_ginibre(std::size_t rows, std::size_t cols, Rng& rng);
CMatrix random_hermitian(std::size_t n, Rng& rng);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
CMatrix random_unitary(std::size_t n, Rng& rng);
/// Orthogonal projection onto a Haar-random subspace of the given rank.
CMatrix random_projection(std::size_t n, std::size_t rank, Rng& rng);
/// Wishart-type PSD matrix G G* with G n x rank.
CMatrix random_psd(std::size_t n, std::size_t rank, Rng& rng);
double uniform01(Rng& rng);

}  // namespace softlimit
