#ifndef TWOSTEP_CLI_HPP
#define TWOSTEP_CLI_HPP

#include <iosfwd>

namespace twostep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `twostep` tool. Results go to `out` (or the --out
/// file), diagnostics and usage text to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twostep

#endif  // TWOSTEP_CLI_HPP
