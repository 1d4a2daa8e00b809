#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fpa::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_input = 2;
inline constexpr int exit_numerical = 3;

//! Runs one command line. `args` excludes the program name. Data summaries
//! go to `out`, progress and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

//! "0,0.05,...,0.25" expands to an arithmetic grid; plain lists pass through.
std::vector<double> parse_grid(const std::string& text);

} // namespace fpa::cli
