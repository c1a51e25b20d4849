// Copyright 2026 The tumorpic Authors
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

#include <filesystem>
#include <string>

namespace tumorpic {

// Creates parent directories as needed and writes `text` verbatim.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// "prefix_0007.csv"-style names padded to the width of `count - 1`.
std::string indexed_name(const std::string& prefix, std::size_t index, std::size_t count,
                         const std::string& extension);

}  // namespace tumorpic
