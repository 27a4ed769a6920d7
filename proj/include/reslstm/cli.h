// reslstm/cli.h

// Copyright 2026  The reslstm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RESLSTM_CLI_H_
#define RESLSTM_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace reslstm::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kBadFlags = 2,
  kIoFailure = 3,
  kNumericFailure = 4,
  kToleranceExceeded = 5,
};

/// Entry point shared by the `reslstm` binary and the tests. `args` excludes
/// the program name. Subcommands: gen-data, train, eval, grad-check,
/// count-params.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

/// Expands `--config <file>` (plain key=value lines, '#' comments) into flags
/// placed before the user's own, skipping keys the user already passed.
/// Throws IoError if the file cannot be read.
std::vector<std::string> expand_config(const std::vector<std::string> &args);

/// "12.5M": n rounded to the nearest 0.1 million.
std::string format_millions(std::uint64_t n);

}  // namespace reslstm::cli

#endif  // RESLSTM_CLI_H_
