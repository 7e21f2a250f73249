// Copyright 2026 The textasv Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEXTASV_IO_HPP_
#define TEXTASV_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace textasv {

std::string ReadFile(const std::filesystem::path& path);  // throws Error{kIo}
void WriteFile(const std::filesystem::path& path, std::string_view content);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

// Non-blank lines with any trailing '\r' removed, paired with 1-based line
// numbers.
std::vector<std::pair<size_t, std::string_view>> Lines(std::string_view content);

std::vector<std::string> SplitCsvLine(std::string_view line);
// Quotes a CSV field when it contains a comma, quote or newline.
std::string CsvField(std::string_view field);

}  // namespace textasv

#endif  // TEXTASV_IO_HPP_
