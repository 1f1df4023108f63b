#include <iostream>
#include <string>

#include <CLI11.hpp>

#include <pointnls/cli.hpp>

int main(int argc, char** argv) {
    using namespace pointnls;

    CLI::App app{"Point-concentrated NLS in two dimensions: charge solver and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_override;
    CommandOptions opt;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("config", config_path, "configuration file (key = value, or JSON)");
        if (config_required) c->required();
        sub->add_option("-o,--output", output_override, "output directory (overrides the config)");
    };

    auto* simulate = app.add_subcommand("simulate", "solve the charge equation; writes charge.csv and summary.json");
    add_common(simulate, true);
    simulate->add_flag("--observables", opt.observables, "also write observables.csv at the configured cadence");
    simulate->add_flag("--dump-forcing", opt.dump_forcing, "also write forcing.csv");

    auto* wave = app.add_subcommand("standing-wave", "frequency, charge and energy of a standing wave");
    add_common(wave, true);
    wave->add_option("--omega", opt.omega, "frequency, > 4 exp(-2 gamma)")->required();

    auto* threshold = app.add_subcommand("threshold", "energy threshold and blow-up certificate for the datum");
    add_common(threshold, true);

    auto* virial = app.add_subcommand("virial", "finite-difference virial check at the given times");
    add_common(virial, true);
    virial->add_option("--samples", opt.samples, "sample times")->delimiter(',')->required();

    auto* sweep = app.add_subcommand("sweep", "tuned blow-up runs over a list of powers");
    add_common(sweep, true);
    std::vector<std::string> sigma_text;
    sweep->add_option("--sigmas", sigma_text, "nonlinearity powers, comma separated; may be empty")
        ->delimiter(',')
        ->expected(0, -1);
    bool no_control = false;
    sweep->add_flag("--no-control", no_control, "omit the defocusing control row");

    auto* table = app.add_subcommand("specfun-table", "tabulate the special functions used by the solver");
    add_common(table, false);
    table->add_option("--tmin", opt.tmin, "first abscissa (> 0)");
    table->add_option("--tmax", opt.tmax, "last abscissa");
    table->add_option("--n", opt.n, "number of points");

    CLI11_PARSE(app, argc, argv);
    opt.sweep_control = !no_control;
    for (const auto& s : sigma_text) {
        if (s.empty()) continue;
        double v = 0.0;
        if (!detail::parse_real(s, v)) {
            std::cerr << "error: sweep: '" << s << "' is not a number\n";
            return exit_usage;
        }
        opt.sigmas.push_back(v);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    RunConfig config;
    if (!config_path.empty()) {
        try {
            config = load_config(config_path);
        } catch (const ConfigError& e) {
            std::cerr << "error: config: " << e.what() << "\n";
            return exit_usage;
        }
    }
    if (!output_override.empty()) config.output_dir = output_override;
    return execute(command, config, opt, std::cout, std::cerr);
}
