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

#include "tumorpic/io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "tumorpic/errors.hpp"

namespace tumorpic {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string indexed_name(const std::string& prefix, std::size_t index, std::size_t count,
                         const std::string& extension) {
  const std::size_t width = count > 1 ? fmt::format("{}", count - 1).size() : 1;
  return fmt::format("{}_{:0{}}.{}", prefix, index, width, extension);
}

}  // namespace tumorpic
