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
#ifndef DDLQR_TESTS_SUPPORT_HPP
#define DDLQR_TESTS_SUPPORT_HPP

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace ddlqr::testing {

inline std::filesystem::path fixture(const std::string& rel) {
    return std::filesystem::path(DDLQR_FIXTURE_DIR) / rel;
}

inline std::filesystem::path config(const std::string& rel) {
    return std::filesystem::path(DDLQR_CONFIG_DIR) / rel;
}

/// Fresh empty directory under the system temp dir, unique per process and call.
inline std::filesystem::path scratch_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("ddlqr_" + name + "_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace ddlqr::testing

#endif  // DDLQR_TESTS_SUPPORT_HPP
