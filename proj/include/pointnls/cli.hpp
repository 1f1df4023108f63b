#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "charge.hpp"
#include "config.hpp"
#include "io.hpp"
#include "observables.hpp"
#include "specfun.hpp"
#include "states.hpp"

namespace pointnls {

inline constexpr const char* charge_csv_header = "t,Re_q,Im_q,abs_q,residual";
inline constexpr const char* observables_csv_header = "t,mass,energy,inertia";
inline constexpr const char* forcing_csv_header = "t,Re_f,Im_f";
inline constexpr const char* virial_csv_header = "t,M,d2M_fd,rhs,gap";
inline constexpr const char* sweep_csv_header = "sigma,beta,E0,Lambda,certified,glassey_T,observed_T,status";
inline constexpr const char* specfun_csv_header = "t,I,N,N1,si,ci,K0";

/// Exit codes of execute().
enum ExitCode : int { exit_ok = 0, exit_numeric = 1, exit_usage = 2, exit_tolerance = 3 };

struct CommandOptions {
    bool observables = false;
    bool dump_forcing = false;
    std::optional<double> omega;
    std::vector<double> samples;
    std::vector<double> sigmas;
    bool sweep_control = true;
    double tmin = 0.01;
    double tmax = 10.0;
    int n = 100;
};

namespace detail {

inline std::filesystem::path out_path(const RunConfig& c, const char* name) {
    return std::filesystem::path(c.output_dir) / name;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline ObservableOptions observable_options(const RunConfig& c) {
    ObservableOptions o;
    o.k_max = c.k_max;
    o.tail_tolerance = c.tail_tolerance;
    return o;
}

inline void wrote(std::ostream& out, const std::filesystem::path& p) { out << "wrote " << p.string() << "\n"; }

inline int run_simulate(const RunConfig& c, const CommandOptions& opt, std::ostream& out) {
    const auto d = rebase_lambda(c.datum, 1.0);
    const auto tr = solve_charge(c.params, d, c.solver);

    CsvWriter q(charge_csv_header);
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        q.row({tr.times[i], tr.q[i].real(), tr.q[i].imag(), std::abs(tr.q[i]), tr.residual_norm[i]});
    const auto qpath = out_path(c, "charge.csv");
    write_atomic(qpath, q.str());
    wrote(out, qpath);

    if (opt.dump_forcing) {
        CsvWriter f(forcing_csv_header);
        for (std::size_t i = 0; i < tr.times.size(); ++i) f.row({tr.times[i], tr.forcing[i].real(), tr.forcing[i].imag()});
        const auto fpath = out_path(c, "forcing.csv");
        write_atomic(fpath, f.str());
        wrote(out, fpath);
    }

    nlohmann::json summary = {
        {"status", to_string(tr.status)},
        {"t_est", tr.status_time},
        {"t_last", tr.t_last()},
        {"nodes", tr.times.size()},
        {"rejected_steps", tr.rejected_steps},
        {"step_collapse", tr.step_collapse},
        {"max_abs_q", tr.max_abs_q()},
        {"warnings", tr.warnings},
        {"config", to_json(c)},
    };

    std::string observable_error;
    if (opt.observables) {
        std::vector<double> samples;
        const auto n = static_cast<long>(std::llround(c.solver.t_end / c.cadence));
        for (long k = 0; k <= n; ++k) {
            const double t = k == n ? c.solver.t_end : static_cast<double>(k) * c.cadence;
            if (t <= tr.t_last()) samples.push_back(t);
        }
        try {
            const auto obs = observable_series(tr, d, c.params, samples, observable_options(c));
            CsvWriter o(observables_csv_header);
            for (const auto& s : obs) o.row({s.t, s.mass, s.energy, s.inertia});
            const auto opath = out_path(c, "observables.csv");
            write_atomic(opath, o.str());
            wrote(out, opath);
        } catch (const std::exception& e) {
            observable_error = std::string("observables: ") + e.what();
            summary["observables_error"] = observable_error;
        }
    }

    const auto spath = out_path(c, "summary.json");
    write_atomic(spath, summary.dump(2) + "\n");
    wrote(out, spath);
    if (!observable_error.empty()) throw NumericError(observable_error, 0.0);
    return tr.status == RunStatus::ToleranceFailure ? exit_tolerance : exit_ok;
}

inline int run_standing_wave(const RunConfig& c, const CommandOptions& opt, std::ostream& out) {
    if (!opt.omega) throw ConfigError({"standing-wave: --omega is required"});
    const auto w = standing_wave(*opt.omega, 0.0, c.params);
    const nlohmann::json j = {
        {"omega", w.omega},
        {"Q", w.charge_modulus},
        {"energy", standing_wave_energy(w.charge_modulus, c.params)},
        {"sigma", c.params.sigma},
        {"beta", c.params.beta},
    };
    const auto text = j.dump(2) + "\n";
    write_atomic(out_path(c, "standing_wave.json"), text);
    out << text;
    return exit_ok;
}

inline int run_threshold(const RunConfig& c, std::ostream& out) {
    const auto cert = certify_blowup(c.datum, c.params);
    const nlohmann::json j = {
        {"Lambda", cert.Lambda},
        {"E0", cert.E0},
        {"margin", cert.margin},
        {"certified", cert.certified},
        {"sigma", c.params.sigma},
        {"beta", c.params.beta},
    };
    const auto text = j.dump(2) + "\n";
    write_atomic(out_path(c, "threshold.json"), text);
    out << text;
    return exit_ok;
}

inline int run_virial(const RunConfig& c, const CommandOptions& opt, std::ostream& out) {
    if (opt.samples.empty()) throw ConfigError({"virial: --samples needs at least one time"});
    const auto d = rebase_lambda(c.datum, 1.0);
    const auto tr = solve_charge(c.params, d, c.solver);
    const auto rows = virial_report(tr, d, c.params, opt.samples, c.cadence, observable_options(c));
    CsvWriter v(virial_csv_header);
    for (const auto& r : rows) v.row({r.t, r.M, r.d2M_fd, r.rhs, r.gap});
    const auto path = out_path(c, "virial.csv");
    write_atomic(path, v.str());
    wrote(out, path);
    return exit_ok;
}

inline int run_sweep(const RunConfig& c, const CommandOptions& opt, std::ostream& out) {
    const auto rows = opt.sigmas.empty() ? std::vector<BlowupReport>{}
                                         : sigma_sweep(opt.sigmas, c.params.beta, c.solver, opt.sweep_control);
    nlohmann::json arr = nlohmann::json::array();
    CsvWriter csv(sweep_csv_header);
    auto cell = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
    for (const auto& r : rows) {
        arr.push_back({
            {"sigma", r.sigma},
            {"beta", r.beta},
            {"E0", r.E0},
            {"Lambda", optional_json(r.Lambda)},
            {"certified", r.certified},
            {"margin", r.margin},
            {"M0", r.M0},
            {"Mdot0", r.Mdot0},
            {"glassey_T", optional_json(r.glassey_T)},
            {"observed_T", optional_json(r.observed_T)},
            {"status", r.status ? nlohmann::json(to_string(*r.status)) : nlohmann::json(nullptr)},
            {"max_abs_q", r.max_abs_q},
            {"note", r.note},
        });
        csv.raw_row(format_real(r.sigma) + "," + format_real(r.beta) + "," + format_real(r.E0) + "," + cell(r.Lambda) +
                    "," + (r.certified ? "true" : "false") + "," + cell(r.glassey_T) + "," + cell(r.observed_T) + "," +
                    (r.status ? to_string(*r.status) : ""));
    }
    const auto jpath = out_path(c, "sweep.json");
    const auto cpath = out_path(c, "sweep.csv");
    write_atomic(jpath, arr.dump(2) + "\n");
    write_atomic(cpath, csv.str());
    wrote(out, jpath);
    wrote(out, cpath);
    return exit_ok;
}

inline int run_specfun_table(const RunConfig& c, const CommandOptions& opt, std::ostream& out) {
    std::vector<std::string> v;
    if (!(opt.tmin > 0.0)) v.push_back("specfun-table: --tmin must be positive");
    if (!(opt.tmax >= opt.tmin) || !std::isfinite(opt.tmax)) v.push_back("specfun-table: --tmax must be >= --tmin");
    if (opt.n < 1) v.push_back("specfun-table: --n must be at least 1");
    if (!v.empty()) throw ConfigError(std::move(v));
    CsvWriter csv(specfun_csv_header);
    for (int i = 0; i < opt.n; ++i) {
        const double t = opt.n == 1 ? opt.tmin : opt.tmin + (opt.tmax - opt.tmin) * i / (opt.n - 1);
        const auto sc = sici(t);
        csv.row({t, volterra_I(t), volterra_N(t), volterra_N1(t), sc.si + pi / 2.0, sc.ci, macdonald_k0(t)});
    }
    const auto path = out_path(c, "specfun_table.csv");
    write_atomic(path, csv.str());
    wrote(out, path);
    return exit_ok;
}

}  // namespace detail

/// Runs one command and writes its outputs under config.output_dir.
///
/// Errors are reported on `err` prefixed with the command name; the return
/// value is an ExitCode.
inline int execute(const std::string& command, const RunConfig& config, const CommandOptions& opt, std::ostream& out,
                   std::ostream& err) {
    try {
        config.validate();
        if (command == "simulate") return detail::run_simulate(config, opt, out);
        if (command == "standing-wave") return detail::run_standing_wave(config, opt, out);
        if (command == "threshold") return detail::run_threshold(config, out);
        if (command == "virial") return detail::run_virial(config, opt, out);
        if (command == "sweep") return detail::run_sweep(config, opt, out);
        if (command == "specfun-table") return detail::run_specfun_table(config, opt, out);
        err << "error: unknown command '" << command << "'\n";
        return exit_usage;
    } catch (const ConfigError& e) {
        err << "error: " << command << ": " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << command << ": " << e.what() << "\n";
        return exit_numeric;
    }
}

}  // namespace pointnls
