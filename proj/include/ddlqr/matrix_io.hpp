/*
 Copyright 2026 The ddlqr Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DDLQR_MATRIX_IO_HPP
#define DDLQR_MATRIX_IO_HPP

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

// Plain-text matrix files: one matrix per CSV file, row-major, one row per
// line, values printed as shortest round-trip decimals. Metadata records
// next to them are JSON objects.
namespace ddlqr::io {

std::string format_double(double v);

std::string to_csv(const Eigen::MatrixXd& M);
Eigen::MatrixXd parse_csv(const std::string& text, const std::string& origin = "<string>");

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// FNV-1a 64 over the CSV text of each matrix; stable across runs.
std::uint64_t content_hash(std::initializer_list<const Eigen::MatrixXd*> matrices);
std::string hex64(std::uint64_t h);

/// Writes `text` atomically enough for our purposes (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace ddlqr::io

#endif  // DDLQR_MATRIX_IO_HPP
