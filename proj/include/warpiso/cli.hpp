#pragma once

namespace warpiso::cli {

// Exit-status contract of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConditionViolated = 10;  // analyze: VIOLATED; verify/selfcheck: failed checks
inline constexpr int kExitRefused = 20;            // certify: Phi(r) >= 0
inline constexpr int kExitError = 30;              // parse/evaluation/config errors

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv);

}  // namespace warpiso::cli
