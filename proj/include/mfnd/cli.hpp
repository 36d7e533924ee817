/* Copyright 2026 The mfnd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mfnd/corpus.hpp"

namespace mfnd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// "weibo21", "synthetic:<K>" or "list:<name>,<name>,...".
DomainRegistry parse_registry_spec(std::string_view spec);

// One domain name per line; the nine Weibo21 names restore that registry
// with its aliases.
DomainRegistry read_registry_file(const std::filesystem::path& path);
void write_registry_file(const std::filesystem::path& path, const DomainRegistry& registry);

// Runs one command line (without the program name). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfnd
