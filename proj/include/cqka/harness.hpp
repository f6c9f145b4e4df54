// Copyright 2026 The CQKA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CQKA_HARNESS_HPP
#define CQKA_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqka/adversary.hpp"
#include "cqka/analysis.hpp"

namespace cqka {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline constexpr std::uint64_t kDefaultSeed = 20260101;

/// Bad flag, key, or value syntax.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int protocol = 1;
    std::size_t n = 16;
    std::optional<std::size_t> p;  // defaults to n
    double tolerance = 0.10;
    std::uint64_t seed = kDefaultSeed;
    std::string attack = "none";
    std::size_t sessions = 10000;
    std::string out = "cqka_out";
    std::optional<double> max_abort_rate;
    std::string exec = "parallel";
    std::string grid;

    CollectiveParams collective;
    ImpersonationParams impersonation;

    /// Keys set explicitly, by file or flag.
    std::set<std::string> explicit_keys;

    AttackStrategy attack_strategy() const;
    Execution execution() const;
    /// Throws QcoreError for out-of-range values.
    void validate() const;
};

/// Keys accepted in a config file and as --<key> flags.
const std::vector<std::string> &config_keys();

/// Applies one key=value setting. Throws UsageError for unknown keys or
/// unparsable values.
void apply_setting(RunConfig &cfg, const std::string &key, const std::string &value);

/// Reads a flat key = value file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string &path);

/// Fills in B from A where only A was given.
void finish_config(RunConfig &cfg);

/// Grid syntax: "start:stop:count" (inclusive, evenly spaced) or "v1,v2,...".
std::vector<double> parse_grid(const std::string &spec);

/// Named output files and their contents; written only after everything is computed.
using OutputSet = std::map<std::string, std::string>;

struct CommandResult {
    OutputSet files;
    std::string message;
    int exit_code = kExitOk;
};

CommandResult cmd_run(const RunConfig &cfg);
CommandResult cmd_curves(const RunConfig &cfg, const std::string &figure);
CommandResult cmd_sweep(const RunConfig &cfg, const std::string &parameter);
CommandResult cmd_compare();

/// Writes every file under `dir` (created if needed) via temporary names.
void write_outputs(const std::string &dir, const OutputSet &files);

/// Full command line entry point; returns the process exit code.
int main_cli(int argc, char **argv, std::ostream &out, std::ostream &err);

}  // namespace cqka

#endif  // CQKA_HARNESS_HPP
