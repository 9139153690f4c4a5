#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace mfg::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUnexpected = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;
inline constexpr int kIoError = 4;

/// Runs `mfg <args...>` (args excludes the program name) and returns the
/// exit code. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Flat "key = value" file; '#' starts a comment. Throws ConfigError on
/// malformed lines or a repeated key (except `output`, which manifests repeat).
std::multimap<std::string, std::string> parse_key_values(const std::string& text);

}  // namespace mfg::cli
