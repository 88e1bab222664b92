#ifndef LWS_CLI_HPP
#define LWS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace lws::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kIoFailure = 1,
    kBadInput = 2,
    kEstimationFailure = 3,
};

// Runs the command line given without the program name, e.g.
// {"simulate", "vehicle", "--config", "c.json", "--out", "run1"}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lws::cli

#endif  // LWS_CLI_HPP
