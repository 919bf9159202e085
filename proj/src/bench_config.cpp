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
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ddlqr/bench.hpp"
#include "ddlqr/errors.hpp"
#include "ddlqr/matrix_io.hpp"

namespace ddlqr {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class ValueReader {
public:
    ValueReader(std::string key, std::string value, std::string where)
        : key_(std::move(key)), value_(std::move(value)), where_(std::move(where)) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidInput(where_ + ": key '" + key_ + "': " + why + " (got '" + value_ + "')");
    }

    double real() const {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(value_, &used);
        } catch (const std::exception&) {
            fail("expected a number");
        }
        if (used != value_.size()) fail("expected a number");
        return v;
    }

    long long integer() const {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(value_, &used);
        } catch (const std::exception&) {
            fail("expected an integer");
        }
        if (used != value_.size()) fail("expected an integer");
        return v;
    }

    int count() const {
        const long long v = integer();
        if (v < 1 || v > 100000000) fail("expected a positive integer");
        return static_cast<int>(v);
    }

    std::uint64_t seed() const {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            if (!value_.empty() && value_[0] == '-') throw std::invalid_argument("negative");
            v = std::stoull(value_, &used, 0);
        } catch (const std::exception&) {
            fail("expected a non-negative 64-bit integer");
        }
        if (used != value_.size()) fail("expected a non-negative 64-bit integer");
        return v;
    }

    std::vector<std::string> items() const {
        std::vector<std::string> out;
        std::stringstream ss(value_);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail("empty list entry");
            out.push_back(item);
        }
        if (out.empty()) fail("expected a comma-separated list");
        return out;
    }

    std::vector<double> reals() const {
        std::vector<double> out;
        for (const std::string& item : items()) {
            out.push_back(ValueReader(key_, item, where_).real());
        }
        return out;
    }

    bool flag() const {
        if (value_ == "on" || value_ == "true" || value_ == "1") return true;
        if (value_ == "off" || value_ == "false" || value_ == "0") return false;
        fail("expected on/off");
    }

    const std::string& text() const { return value_; }

private:
    std::string key_;
    std::string value_;
    std::string where_;
};

MatrixXd diagonal_from(const std::vector<double>& d) {
    VectorXd v(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) v(static_cast<Eigen::Index>(i)) = d[i];
    return v.asDiagonal();
}

}  // namespace

DesignNoise parse_design_noise(const std::string& name) {
    if (name == "truth" || name == "true") return DesignNoise::truth;
    if (name == "estimated") return DesignNoise::estimated;
    throw InvalidInput("unknown design_noise '" + name + "' (expected truth or estimated)");
}

std::string to_string(DesignNoise mode) {
    return mode == DesignNoise::truth ? "truth" : "estimated";
}

BenchConfig::BenchConfig() {
    spec.Q = MatrixXd::Identity(4, 4);
    spec.R = MatrixXd::Identity(1, 1);
    spec.gamma = 0.9999;
    x0_dist.mean = (VectorXd(4) << 0.3, -4.0, 0.1, -1.0).finished();
    x0_dist.cov = 0.0006 * MatrixXd::Identity(4, 4);
    snr_targets_db = {50.0};
    methods = {{Method::model, 0.0}, {Method::robust_direct, 0.0}};
}

int BenchConfig::levels() const {
    return static_cast<int>(r_values.empty() ? snr_targets_db.size() : r_values.size());
}

void BenchConfig::validate() const {
    if (methods.empty()) throw InvalidInput("bench config: methods must not be empty");
    if (N < 1 || N_K < 1 || N_S < 1 || N_P < 1) {
        throw InvalidInput("bench config: N, N_K, N_S and N_P must be >= 1");
    }
    if (calibration_seeds < 1) throw InvalidInput("bench config: calibration_seeds must be >= 1");
    if (!(Ts > 0.0)) throw InvalidInput("bench config: Ts must be positive");
    if (!(input_scale > 0.0) || !std::isfinite(input_scale)) {
        throw InvalidInput("bench config: input_scale must be positive and finite");
    }
    spec.validate_for(4, 1);
    x0_dist.validate();
    if (x0_dist.mean.size() != 4) throw InvalidInput("bench config: x0_mean needs 4 entries");
    if (!r_values.empty() && !snr_targets_db.empty()) {
        throw InvalidInput("bench config: give either snr_targets_db or r_values, not both");
    }
    if (levels() == 0) throw InvalidInput("bench config: no noise levels (snr_targets_db or r_values)");
    for (double t : snr_targets_db) {
        if (!std::isfinite(t)) {
            throw InvalidInput("bench config: SNR targets must be finite; a noise-free target has no r");
        }
    }
    for (double r : r_values) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw InvalidInput("bench config: r values must be positive (W = 0 leaves Tr(W^-1 Y) undefined)");
        }
    }
    for (const BenchMethod& m : methods) {
        if (m.reg_weight < 0.0) throw InvalidInput("bench config: reg_weight must be >= 0");
    }
}

BenchConfig parse_bench_config(const std::string& text, const std::string& origin) {
    BenchConfig cfg;
    std::set<std::string> seen;
    std::vector<std::string> method_names;
    double reg_weight = 0.01;
    bool have_targets = false;
    bool have_r = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InvalidInput(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const ValueReader v(key, trim(line.substr(eq + 1)), where);
        if (!seen.insert(key).second) throw InvalidInput(where + ": key '" + key + "' given twice");

        if (key == "sprung_mass") cfg.car.sprung_mass = v.real();
        else if (key == "unsprung_mass") cfg.car.unsprung_mass = v.real();
        else if (key == "damping") cfg.car.damping = v.real();
        else if (key == "spring") cfg.car.spring = v.real();
        else if (key == "tire_stiffness") cfg.car.tire_stiffness = v.real();
        else if (key == "Ts") cfg.Ts = v.real();
        else if (key == "discretization") cfg.discretization = parse_discretization(v.text());
        else if (key == "noise_model") cfg.noise_model = parse_quarter_car_noise(v.text());
        else if (key == "Q") {
            const auto d = v.reals();
            if (d.size() != 4) v.fail("Q needs 4 diagonal entries");
            cfg.spec.Q = diagonal_from(d);
        } else if (key == "R") {
            const auto d = v.reals();
            if (d.size() != 1) v.fail("R needs 1 diagonal entry");
            cfg.spec.R = diagonal_from(d);
        } else if (key == "gamma") cfg.spec.gamma = v.real();
        else if (key == "N") cfg.N = v.count();
        else if (key == "N_K") cfg.N_K = v.count();
        else if (key == "N_S") cfg.N_S = v.count();
        else if (key == "N_P") cfg.N_P = v.count();
        else if (key == "input_scale") cfg.input_scale = v.real();
        else if (key == "x0_mean") {
            const auto d = v.reals();
            if (d.size() != 4) v.fail("x0_mean needs 4 entries");
            cfg.x0_dist.mean = Eigen::Map<const VectorXd>(d.data(), 4);
        } else if (key == "x0_cov") {
            const auto d = v.reals();
            if (d.size() == 1) cfg.x0_dist.cov = d[0] * MatrixXd::Identity(4, 4);
            else if (d.size() == 4) cfg.x0_dist.cov = diagonal_from(d);
            else v.fail("x0_cov takes one scalar or 4 diagonal entries");
        } else if (key == "snr_targets_db") {
            cfg.snr_targets_db = v.reals();
            have_targets = true;
        } else if (key == "r_values") {
            cfg.r_values = v.reals();
            have_r = true;
        } else if (key == "methods") method_names = v.items();
        else if (key == "reg_weight") reg_weight = v.real();
        else if (key == "design_noise") cfg.design_noise = parse_design_noise(v.text());
        else if (key == "seed") cfg.seed = v.seed();
        else if (key == "tol_feas") cfg.solver.tol_feas = v.real();
        else if (key == "tol_gap") cfg.solver.tol_gap = v.real();
        else if (key == "max_iter") cfg.solver.max_iter = v.count();
        else if (key == "calibration_seeds") cfg.calibration_seeds = v.count();
        else if (key == "timing") cfg.timing = v.flag();
        else throw InvalidInput(where + ": unknown key '" + key + "'");
    }
    if (have_r && !have_targets) cfg.snr_targets_db.clear();
    if (!method_names.empty()) {
        cfg.methods.clear();
        for (const std::string& name : method_names) {
            const Method m = parse_method(name);
            cfg.methods.push_back({m, m == Method::direct_ce_reg ? reg_weight : 0.0});
        }
    } else if (seen.count("reg_weight") != 0) {
        for (BenchMethod& m : cfg.methods) {
            if (m.method == Method::direct_ce_reg) m.reg_weight = reg_weight;
        }
    }
    cfg.validate();
    return cfg;
}

BenchConfig load_bench_config(const std::filesystem::path& path) {
    return parse_bench_config(io::read_text(path), path.string());
}

}  // namespace ddlqr
