#pragma once

#include <string>
#include <vector>

namespace hilfer::cli {

/// Version stamped into every run manifest. Bump on any change that can
/// alter emitted bytes, because manifests promise: identical (command,
/// config, seed, version) implies byte-identical outputs.
inline constexpr const char* tool_version = "hilferkit 0.1.0";

/// Exit codes returned by run(). Mapped from the library error taxonomy at
/// this boundary so scripts can branch without parsing messages.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;          // unknown command/flag, bad syntax
inline constexpr int exit_validation = 2;     // rejected input or config
inline constexpr int exit_nonconvergence = 3; // an iteration failed to settle
inline constexpr int exit_certificate = 4;    // a verdict came back negative

/// Executes one subcommand (specfun / ops / bound / solve / stability) given
/// argv-style arguments without the program name. CSV goes to --out when
/// given (with a sibling <out>.manifest.json run manifest), else to stdout.
/// Diagnostics go to stderr. Never throws; every failure is an exit code.
///
/// All numeric CSV fields carry 17 significant digits, so doubles round-trip
/// exactly and reruns with the same manifest key are byte-identical. Randomized
/// subcommands require an explicit --seed; there are no wall-clock defaults.
/// Batch verification spreads instances over a worker pool capped by the
/// HILFER_KIT_THREADS environment variable; rows are still emitted in
/// instance order.
int run(const std::vector<std::string>& args);

} // namespace hilfer::cli
