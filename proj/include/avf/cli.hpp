#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace avf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. Results go to `out`, diagnostics to `err`.
/// Returns 0 on success, 1 on runtime failure, 2 on usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses a noise level: "clean" (no noise), "<n>dB" or a plain number of
/// dB. Returns false for clean.
bool parse_snr(const std::string& text, double& snr_db);

}  // namespace avf::cli
