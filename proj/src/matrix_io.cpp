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
#include "ddlqr/matrix_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "ddlqr/errors.hpp"

namespace ddlqr::io {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::string to_csv(const Eigen::MatrixXd& M) {
    std::string out;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) {
                out += ',';
            }
            out += format_double(M(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

double parse_value(std::string token, const std::string& origin, int line) {
    const auto first = token.find_first_not_of(" \t\r");
    const auto last = token.find_last_not_of(" \t\r");
    if (first == std::string::npos) {
        throw InvalidInput(origin + ":" + std::to_string(line) + ": empty field");
    }
    token = token.substr(first, last - first + 1);
    if (token == "nan") {
        return std::nan("");
    }
    if (token == "inf") {
        return INFINITY;
    }
    if (token == "-inf") {
        return -INFINITY;
    }
    double v = 0.0;
    const char* begin = token.data();
    if (*begin == '+') {
        ++begin;
    }
    auto [ptr, ec] = std::from_chars(begin, token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw InvalidInput(origin + ":" + std::to_string(line) + ": not a number: '" + token + "'");
    }
    return v;
}

}  // namespace

Eigen::MatrixXd parse_csv(const std::string& text, const std::string& origin) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::vector<double> row;
        std::string token;
        std::istringstream ls(line);
        while (std::getline(ls, token, ',')) {
            row.push_back(parse_value(token, origin, line_no));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InvalidInput(origin + ":" + std::to_string(line_no) + ": ragged row (" +
                               std::to_string(row.size()) + " vs " +
                               std::to_string(rows.front().size()) + " columns)");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        return Eigen::MatrixXd(0, 0);
    }
    Eigen::MatrixXd M(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return M;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InvalidInput("cannot write " + path.string());
    }
    out << text;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
    write_text(path, to_csv(M));
}

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
    return parse_csv(read_text(path), path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

std::uint64_t content_hash(std::initializer_list<const Eigen::MatrixXd*> matrices) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Eigen::MatrixXd* M : matrices) {
        const std::string text =
            std::to_string(M->rows()) + "x" + std::to_string(M->cols()) + "\n" + to_csv(*M);
        for (unsigned char c : text) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return s;
}

}  // namespace ddlqr::io
