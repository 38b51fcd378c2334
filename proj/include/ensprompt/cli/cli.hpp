#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ensprompt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;   // bad config, flags or input files
inline constexpr int kExitRuntime = 3;  // model/transport/run failure

// Entry point behind the `ensprompt` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ensprompt
