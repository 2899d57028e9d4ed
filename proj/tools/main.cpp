// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace
{

constexpr const char* units_note = "Angles are in degrees, lengths in metres and attenuations in dB.\n"
                                   "Exit codes: 0 success, 2 config error, 3 data mismatch, 4 numeric failure.";

} // namespace

int main(int argc, char** argv)
{
    using namespace pinhole::cli;

    CLI::App app{"Rotating-mask mmWave imaging simulator"};
    app.footer(units_note);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Simulate measurements for a config");
    simulate->add_option("config", sim.config, "Experiment config (JSON)")->required();
    simulate->add_option("-o,--output", sim.output_dir, "Output directory (default: config output_dir)");
    simulate->add_option("--cache", sim.cache_dir, "Directory for cached factorizations");
    simulate->add_flag("--save-model", sim.save_model, "Also write the forward model container");

    ReconstructArgs rec;
    auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct images from measurements");
    reconstruct->add_option("measurements", rec.measurements, "Measurement container")->required();
    reconstruct->add_option("-c,--config", rec.config, "Experiment config (JSON)")->required();
    reconstruct->add_option("--model", rec.model, "Forward model container (default: build from config)");
    reconstruct->add_option("--sigma-max", rec.sigma_max, "Singular values kept; several values run a sweep")
        ->delimiter(',');
    reconstruct->add_option("--reference", rec.reference,
                            "Reference image CSV, or 'truth' for the scene stored with the measurements");
    reconstruct->add_option("-o,--output", rec.output_dir, "Output directory (default: config output_dir)");
    reconstruct->add_option("--cache", rec.cache_dir, "Directory for cached factorizations");

    AnalyzeArgs ana;
    auto* analyze = app.add_subcommand("analyze", "Singular spectra, point-spread functions, sweeps and power");
    analyze->add_option("analysis", ana.subcommand, "svd | psf | sweep | power")
        ->required()
        ->check(CLI::IsMember({"svd", "psf", "sweep", "power"}));
    analyze->add_option("config", ana.config, "Experiment config (JSON); defaults when omitted");
    analyze->add_option("-o,--output", ana.output_dir, "Output directory (default: config output_dir)");
    analyze->add_option("--cache", ana.cache_dir, "Directory for cached factorizations");
    analyze->add_option("--sar", ana.sar_kind, "psf: use a SAR baseline instead of the mask model")
        ->check(CLI::IsMember({"linear", "circular"}));
    analyze->add_option("--sar-extent", ana.sar_extent_m, "psf: SAR length or radius in metres");
    analyze->add_option("--sigma-max", ana.sigma_max, "psf: truncate at this count instead of full rank");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_config;
    }

    return run_guarded(
        [&] {
            if (*simulate)
                return cmd_simulate(sim, std::cerr);
            if (*reconstruct)
                return cmd_reconstruct(rec, std::cerr);
            return cmd_analyze(ana, std::cerr);
        },
        std::cerr);
}
