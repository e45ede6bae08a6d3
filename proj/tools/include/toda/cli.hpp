#pragma once

// Entry points of the `toda` command-line tool.
//
// Exit codes: 0 success, 2 validation error (bad flags, config, inputs),
// 3 numeric failure (no convergence, accuracy loss, failed self-test).

#include <ostream>
#include <string>
#include <vector>

namespace toda::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

struct SelftestCase {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// The quick algebraic and trivial-field checks behind `toda selftest`.
std::vector<SelftestCase> selftest();

}  // namespace toda::cli
