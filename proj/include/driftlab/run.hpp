#pragma once

#include <cstdint>
#include <iosfwd>

#include "driftlab/config.hpp"

namespace driftlab {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInconclusiveStrict = 1;
inline constexpr int kUsage = 2;
inline constexpr int kIo = 3;
}  // namespace exit_code

inline constexpr std::uint64_t kDefaultSeed = 1;

/// Config seed, else DRIFTLAB_SEED, else kDefaultSeed. Throws ConfigError on
/// a malformed environment value.
std::uint64_t resolve_seed(const RunConfig& config);

/// Executes one command. Writes the one-line summary to `out`, diagnostics to
/// `err`, and artifact files atomically. Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace driftlab
