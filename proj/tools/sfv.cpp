// sfv: command-line driver for the stochastic finite-volume experiments.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfv/cli.hpp"
#include "sfv/config.hpp"
#include "sfv/error.hpp"

namespace {

struct Args {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::size_t threads = 0;
    bool plot = false;
    std::string mutate = "none";
    std::size_t instances = 1000;
    std::string resume;
    std::string checkpoint;
};

sfv::RunConfig load(const Args& a) {
    sfv::RunConfig cfg;
    if (!a.config_path.empty()) {
        std::ifstream in(a.config_path);
        if (!in) throw sfv::ConfigError("cannot open config file " + a.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        sfv::apply_config(cfg, sfv::parse_config(buf.str()));
    }
    for (const auto& o : a.overrides) sfv::apply_override(cfg, o);
    if (a.seed) cfg.seed = *a.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Split-step finite-volume simulator for viscous stochastic conservation laws"};
    app.require_subcommand(1);
    Args a;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config,-c", a.config_path, "TOML-like config file")->check(CLI::ExistingFile);
        sub->add_option("--set", a.overrides, "override, e.g. --set nu=0.2 (repeatable)");
        sub->add_option("--seed", a.seed, "random seed");
        sub->add_option("--out,-o", a.out_path, "output CSV path (default stdout)");
        sub->add_option("--threads", a.threads, "worker threads (0 = all cores)");
        sub->add_flag("--plot", a.plot, "also write <out>.gp, a gnuplot script");
    };

    auto* simulate = app.add_subcommand("simulate", "run one trajectory, CSV of t,energy,h1_seminorm,phi,linf");
    common(simulate);
    simulate->add_option("--resume", a.resume, "start from a checkpoint file");
    simulate->add_option("--checkpoint", a.checkpoint, "write the final state to this file");
    auto* ergodic = app.add_subcommand("ergodic", "running ergodic averages of Phi per flux regime");
    common(ergodic);
    auto* weak = app.add_subcommand("weak-error", "weak error against dt_ref over a dt grid");
    common(weak);
    auto* space = app.add_subcommand("space-rate", "W2 and strong error against N");
    common(space);
    auto* analytic = app.add_subcommand("analytic", "closed-form quantities of the linear case");
    common(analytic);
    auto* selfcheck = app.add_subcommand("selfcheck", "run the invariant suites");
    common(selfcheck);
    selfcheck->add_option("--mutate-sign", a.mutate, "inject a sign convention mutation")
        ->check(CLI::IsMember({"none", "zero_negative", "reversed"}));
    selfcheck->add_option("--instances", a.instances, "random instances per suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sfv::kExitConfig;
    }

    try {
        const sfv::RunConfig cfg = load(a);
        sfv::CommandOptions opt;
        opt.threads = a.threads;
        opt.check_instances = a.instances;
        if (!a.resume.empty()) opt.resume = a.resume;
        if (!a.checkpoint.empty()) opt.checkpoint_out = a.checkpoint;
        if (a.mutate == "zero_negative") opt.sign = sfv::SignConvention::zero_negative;
        if (a.mutate == "reversed") opt.sign = sfv::SignConvention::reversed;

        std::string command;
        int (*run)(const sfv::RunConfig&, const sfv::CommandOptions&, std::ostream&) = nullptr;
        if (*simulate) {
            command = "simulate";
            run = sfv::cmd_simulate;
        } else if (*ergodic) {
            command = "ergodic";
            run = sfv::cmd_ergodic;
        } else if (*weak) {
            command = "weak-error";
            run = sfv::cmd_weak_error;
        } else if (*space) {
            command = "space-rate";
            run = sfv::cmd_space_rate;
        } else if (*analytic) {
            command = "analytic";
            run = sfv::cmd_analytic;
        } else {
            command = "selfcheck";
            run = sfv::cmd_selfcheck;
        }

        // buffer so that a failing run leaves no partial file behind
        std::ostringstream buf;
        const int code = run(cfg, opt, buf);
        if (a.out_path.empty()) {
            std::cout << buf.str();
        } else {
            std::ofstream f(a.out_path, std::ios::binary);
            if (!f) throw sfv::ConfigError("cannot write " + a.out_path, 0, "out");
            f << buf.str();
            if (a.plot) {
                const auto script = sfv::gnuplot_script(command, a.out_path, cfg);
                if (!script.empty()) std::ofstream(a.out_path + ".gp") << script;
            }
        }
        return code;
    } catch (const std::exception& e) {
        std::cerr << "sfv: " << e.what() << "\n";
        return sfv::exit_code_for(e);
    }
}
