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

#include <string>
#include <string_view>

namespace mfnd::utf8 {

// Decodes UTF-8 into code points. Invalid or truncated sequences decode to
// U+FFFD, one replacement per offending byte.
std::u32string decode(std::string_view text);

void append(std::string& out, char32_t cp);

std::string encode(std::u32string_view text);

}  // namespace mfnd::utf8
