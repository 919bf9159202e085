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
#ifndef DDLQR_RNG_HPP
#define DDLQR_RNG_HPP

#include <cstdint>

#include <Eigen/Dense>

namespace ddlqr {

/// SplitMix64 output function. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child seed for `index` under `parent`. This is the seed-tree mixing
/// function: child = mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019)).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix64(mix64(parent) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/**
 * Counter-based random stream.
 *
 * The i-th 64-bit draw is a pure function of (key, i), so a stream can be
 * split into independent substreams (one per trajectory, one per step)
 * and the results never depend on scheduling. Normals come from the
 * Box-Muller transform of two consecutive uniforms.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    /// Independent stream keyed by (key, index); counter starts at zero.
    CounterRng substream(std::uint64_t index) const { return CounterRng(derive_seed(key_, index)); }

    std::uint64_t next_u64() { return mix64(key_ ^ mix64(counter_++)); }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double normal();

    Eigen::VectorXd normal_vector(int n);

    /// Draws from N(0, S S^T) given a square-root factor S.
    Eigen::VectorXd gaussian(const Eigen::MatrixXd& sqrt_cov) {
        return sqrt_cov * normal_vector(static_cast<int>(sqrt_cov.cols()));
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ddlqr

#endif  // DDLQR_RNG_HPP
