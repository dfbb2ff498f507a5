// Copyright 2026 The kgact Authors.
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

#ifndef KGACT_HASHING_HPP_
#define KGACT_HASHING_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace kgact {

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t stable_hash(std::string_view data);

}  // namespace kgact

#endif  // KGACT_HASHING_HPP_
