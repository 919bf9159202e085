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
#ifndef DDLQR_ERRORS_HPP
#define DDLQR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ddlqr {

/// Bad shapes, non-finite entries, out-of-range parameters.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A gain parameterization G violates X0 G = I.
class InvalidParameterization : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// Data matrix D0 = [U0; X0] lacks full row rank.
class RankDeficiency : public std::runtime_error {
public:
    RankDeficiency(int rank, int required)
        : std::runtime_error("data matrix D0 has numerical rank " + std::to_string(rank) +
                             ", need " + std::to_string(required) + " (short by " +
                             std::to_string(required - rank) + ")"),
          rank_(rank),
          required_(required) {}
    int rank() const { return rank_; }
    int required() const { return required_; }

private:
    int rank_;
    int required_;
};

/// Fixed-point or bisection iteration did not converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gain extraction hit a near-singular Y.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

}  // namespace ddlqr

#endif  // DDLQR_ERRORS_HPP
