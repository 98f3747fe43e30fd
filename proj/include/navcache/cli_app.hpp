// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

namespace navcache::cli {

/// Entry point behind the navcache binary. Exit codes: 0 success, 2 config
/// or usage error, 3 runtime invariant violation.
int run_main(const std::vector<std::string>& args);

}  // namespace navcache::cli
