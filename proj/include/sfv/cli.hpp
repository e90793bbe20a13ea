#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "sfv/config.hpp"
#include "sfv/grid.hpp"

namespace sfv {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitCheckFailed = 4,
};

struct CommandOptions {
    std::size_t threads = 0;  ///< 0 = all cores
    std::optional<std::string> resume;          ///< simulate: start from this checkpoint
    std::optional<std::string> checkpoint_out;  ///< simulate: write the final state here
    SignConvention sign = SignConvention::standard;  ///< selfcheck mutation switch
    std::size_t check_instances = 1000;
};

/// Each command writes a commented config echo followed by CSV to `out` and
/// returns an exit code. Errors propagate as exceptions; see exit_code_for().
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_ergodic(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_weak_error(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_space_rate(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_analytic(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);
int cmd_selfcheck(const RunConfig& cfg, const CommandOptions& opt, std::ostream& out);

/// Gnuplot script plotting the CSV written by `command` to `csv_path`.
std::string gnuplot_script(const std::string& command, const std::string& csv_path, const RunConfig& cfg);

/// Maps a caught exception to the documented exit code (2 config, 3 numerical).
int exit_code_for(const std::exception& e);

}  // namespace sfv
