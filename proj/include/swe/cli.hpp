#pragma once

namespace swe::cli {

// Exit code classes: 0 success, 1 runtime failure, then one class per
// configuration-error kind.
inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime = 1;
inline constexpr int exit_unknown_key = 2;
inline constexpr int exit_bad_value = 3;
inline constexpr int exit_constraint = 4;

int run(int argc, const char* const* argv);

}  // namespace swe::cli
