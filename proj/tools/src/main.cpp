#include "commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <iostream>
#include <sstream>
#include <spdlog/spdlog.h>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct ConfigArgs {
    std::string path;
    std::string output;
    unsigned workers = 0;
};

void add_config_options(CLI::App* sub, ConfigArgs& args)
{
    sub->add_option("config", args.path, "YAML run configuration")->required();
    sub->add_option("-o,--output", args.output, "Output directory (overrides output.directory)");
    sub->add_option("-j,--workers", args.workers, "Worker threads (default: NAQMD_WORKERS or all cores)");
}

naqmd::app::CommandOptions options_for(const naqmd::app::AppConfig& config, const ConfigArgs& args)
{
    naqmd::app::CommandOptions o;
    o.output = args.output.empty() ? config.output_directory : args.output;
    o.workers = args.workers > 0 ? args.workers : naqmd::default_worker_count();
    return o;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace naqmd::app;
    CLI::App app{"naqmd: laser-driven electron-nuclear dynamics with a projector absorber"};
    app.set_version_flag("--version", std::string(NAQMD_VERSION));
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");

    ConfigArgs args;
    auto* run = app.add_subcommand("run", "Propagate a single trajectory");
    add_config_options(run, args);
    auto* angle = app.add_subcommand("scan-angle", "Fixed-nuclei runs over molecular orientations with cos^2 fits");
    add_config_options(angle, args);
    SyntheticAngles synthetic;
    bool use_synthetic = false;
    angle->add_flag("--synthetic", use_synthetic, "Inject P_par cos^2 + P_perp sin^2 values instead of running");
    angle->add_option("--synthetic-parallel", synthetic.parallel, "Injected P_par");
    angle->add_option("--synthetic-perpendicular", synthetic.perpendicular, "Injected P_perp");
    angle->add_option("--synthetic-noise", synthetic.noise, "Gaussian noise added to injected values");
    angle->add_option("--synthetic-seed", synthetic.seed, "Seed of the injected noise");
    auto* distance = app.add_subcommand("scan-distance", "Ionization rates over internuclear distances (cw runs)");
    add_config_options(distance, args);
    auto* duration = app.add_subcommand("scan-duration", "Ionization probability over sin^2 pulse durations");
    add_config_options(duration, args);
    auto* ensemble = app.add_subcommand("ensemble", "Mobile-nuclei trajectory ensemble from a vibrational level");
    add_config_options(ensemble, args);
    auto* dump_basis = app.add_subcommand("dump-basis", "Print the assembled basis as a table");
    dump_basis->add_option("config", args.path, "YAML run configuration")->required();
    std::string basis_output;
    dump_basis->add_option("-o,--output", basis_output, "Write to a file instead of stdout");
    auto* dump_spectrum = app.add_subcommand("dump-spectrum", "Frame energies eps_a(t) along a fixed-nuclei run");
    add_config_options(dump_spectrum, args);
    int states = 0;
    dump_spectrum->add_option("--states", states, "Number of lowest states to write (default: all)");
    auto* plot = app.add_subcommand("plot", "Render a CSV written by this tool as SVG");
    PlotRequest plot_request;
    std::string plot_input;
    std::string plot_output;
    plot->add_option("input", plot_input, "CSV file")->required()->check(CLI::ExistingFile);
    plot->add_option("-o,--output", plot_output, "SVG file (default: input with .svg)");
    plot->add_option("--x", plot_request.x, "Column for the horizontal axis");
    plot->add_option("--y", plot_request.y, "Columns to draw")->delimiter(',');
    plot->add_flag("--log-y", plot_request.log_y, "Logarithmic vertical axis");
    plot->add_option("--title", plot_request.title, "Plot title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    spdlog::set_level(quiet ? spdlog::level::warn : spdlog::level::info);

    try {
        if (plot->parsed()) {
            plot_request.input = plot_input;
            plot_request.output = plot_output.empty()
                                      ? std::filesystem::path(plot_input).replace_extension(".svg")
                                      : std::filesystem::path(plot_output);
            command_plot(plot_request);
            return 0;
        }
        const AppConfig config = load_config(args.path);
        if (dump_basis->parsed()) {
            if (basis_output.empty()) {
                command_dump_basis(config, std::cout);
            } else {
                std::ostringstream ss;
                command_dump_basis(config, ss);
                write_file_atomic(basis_output, ss.str());
            }
            return 0;
        }
        const CommandOptions options = options_for(config, args);
        if (run->parsed()) {
            command_run(config, options);
        } else if (angle->parsed()) {
            command_scan_angle(config, options, use_synthetic ? std::optional(synthetic) : std::nullopt);
        } else if (distance->parsed()) {
            command_scan_distance(config, options);
        } else if (duration->parsed()) {
            command_scan_duration(config, options);
        } else if (ensemble->parsed()) {
            command_ensemble(config, options);
        } else if (dump_spectrum->parsed()) {
            command_dump_spectrum(config, options, states);
        }
    } catch (const naqmd::ValidationError& e) {
        spdlog::error("{}", e.what());
        return kExitValidation;
    } catch (const naqmd::NumericalError& e) {
        spdlog::error("numerical failure: {}", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
