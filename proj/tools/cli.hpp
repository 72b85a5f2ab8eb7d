// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qpat::cli {

/// Process exit codes.
enum Exit : int {
    kOk = 0,
    kInternal = 1,
    kValidation = 2,
    kMissingInput = 3,
    kEmptySupport = 4,
    kDegenerate = 5,
};

/// Runs the `qpat` command line on `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qpat::cli
