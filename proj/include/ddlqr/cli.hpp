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
#ifndef DDLQR_CLI_HPP
#define DDLQR_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ddlqr::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kUserError = 1, kMethodFailure = 2, kInternalError = 3 };

/// One documented flag. The parser is built from this table, so the table is
/// the single source of truth for what each subcommand accepts.
struct FlagDoc {
    std::string command;
    std::string flag;  ///< long form including the dashes, e.g. "--out"
    std::string help;
    bool required = false;
};

const std::vector<FlagDoc>& flag_registry();

/// Subcommand names in registry order.
std::vector<std::string> commands();

/// Long flags the constructed parser accepts for `command` (help excluded).
std::vector<std::string> parser_flags(const std::string& command);

/**
 * Runs the tool with argv-style arguments (args[0] is the program name).
 * Human-readable progress goes to `out` followed by one summary line of
 * space-separated key=value pairs starting with "ddlqr"; diagnostics go to `err`.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddlqr::cli

#endif  // DDLQR_CLI_HPP
