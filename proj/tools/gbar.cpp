#include "gbar/commands.hpp"
#include "gbar/config.hpp"
#include "gbar/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kBudget = 3 };

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gbar::ConfigError("--config", "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pricing, hedging and shortfall risk for game barrier options"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 1;
    app.add_option("--config", config_path, "JSON experiment configuration")->required();
    auto* out_opt = app.add_option("--out", out_dir, "directory for CSV output");
    auto* seed_opt = app.add_option("--seed", seed, "overrides sim.seed");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    const char* commands[][2] = {
        {"price", "game option price and saddle stopping times"},
        {"shortfall", "shortfall risk at initial capital x"},
        {"hedge", "perfect or risk-minimising hedge summary"},
        {"simulate", "Monte Carlo shortfall of the embedded hedge"},
        {"converge", "prices over n_list with fitted convergence rate"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        const gbar::ExperimentConfig cfg = gbar::parse_config(read_file(config_path));
        gbar::RunOptions opts;
        if (*out_opt) opts.out_dir = out_dir;
        if (*seed_opt) opts.seed = seed;
        opts.threads = threads;
        const std::string command = app.get_subcommands().front()->get_name();
        std::cout << gbar::render(gbar::run_command(command, cfg, opts));
        return kOk;
    } catch (const gbar::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const gbar::BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
}
