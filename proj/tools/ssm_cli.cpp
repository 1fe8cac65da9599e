// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver for the secure-SM precoding experiments.
//
//   ssm <sr-vs-snr|cdf|iters|flops> --config <path> [--seed <u64>] --out <dir>
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "ssm/ssm.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace
{

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Options
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

void add_common(CLI::App* sub, Options& opt)
{
    sub->add_option("--config", opt.config, "key = value experiment config")->required();
    sub->add_option("--seed", opt.seed, "overrides the config seed");
    sub->add_option("--out", opt.out, "output directory")->required();
}

template <class Rows>
void emit(const std::string& dir, const std::string& study, const std::string& stem, const Rows& rows)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string csv = stem + ".csv";
    std::ofstream out(fs::path(dir) / csv);
    if (!out)
        throw ssm::ConfigError("cannot write to output directory '" + dir + "'");
    ssm::write_csv(out, rows);
    std::ofstream py(fs::path(dir) / ("plot_" + stem + ".py"));
    py << ssm::plot_script(study, csv);
    std::cout << "wrote " << (fs::path(dir) / csv).string() << " (" << rows.size() << " rows)\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Secure spatial-modulation precoding experiments"};
    app.require_subcommand(1);
    Options opt;
    auto* sr = app.add_subcommand("sr-vs-snr", "mean secrecy rate versus SNR per method");
    auto* cdf = app.add_subcommand("cdf", "per-realization secrecy rates for empirical CDFs");
    auto* iters = app.add_subcommand("iters", "iteration counts per trial");
    auto* fl = app.add_subcommand("flops", "analytic FLOP counts versus n_tx");
    for (auto* sub : {sr, cdf, iters, fl})
        add_common(sub, opt);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try
    {
        ssm::ExperimentConfig cfg = ssm::load_config(opt.config);
        if (opt.seed)
            cfg.seed = *opt.seed;

        if (sr->parsed())
            emit(opt.out, "sr-vs-snr", "sr_vs_snr", ssm::run_sr_vs_snr(cfg));
        else if (cdf->parsed())
            emit(opt.out, "cdf", "cdf", ssm::run_cdf(cfg, cfg.snr_db_grid));
        else if (iters->parsed())
            emit(opt.out, "iters", "iters", ssm::run_iteration_pmf(cfg));
        else
            emit(opt.out, "flops", "flops", ssm::run_complexity_curve(cfg.flops_n_tx_grid, cfg.flops_inputs));
    }
    catch (const ssm::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const ssm::NumericalError& e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalError;
    }
    return 0;
}
