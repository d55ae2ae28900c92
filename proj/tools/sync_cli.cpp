// sync: command-line front end for the srsync toolkit.
// Exit codes: 0 ok, 1 usage, 2 solver failure, 3 validation failure.
#include "srsync/closedform.hpp"
#include "srsync/harness.hpp"
#include "srsync/meanfield.hpp"
#include "srsync/spectral.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using namespace srsync;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kValidation = 3 };

struct PointArgs {
    std::string scenario;
    std::string w = "0.5";
    std::string delta = "0";
    double xi = 0.0;
    int n = 10000;
    std::string n_gamma = "1e6";
};

void add_point_options(CLI::App* cmd, PointArgs& a) {
    cmd->add_option("--scenario", a.scenario, "BiQuantum, UniQuantum, UniClassical or BiClassical")->required();
    cmd->add_option("--w", a.w, "pump rate (units of N*gamma, or with Hz suffix)")->required();
    cmd->add_option("--delta", a.delta, "detuning (units of N*gamma, or with Hz suffix)")->required();
    cmd->add_option("--xi", a.xi, "feedback strength (BiClassical)");
    cmd->add_option("--n", a.n, "atoms per ensemble");
    cmd->add_option("--n-gamma", a.n_gamma, "collective rate N*gamma in Hz");
}

std::pair<Scenario, ModelParams> point_params(const PointArgs& a) {
    Scenario sc = parse_scenario(a.scenario);
    double hz = parse_rate(a.n_gamma, 1.0);
    ModelParams p = ModelParams::make(sc, a.n, hz, parse_rate(a.w, hz), parse_rate(a.delta, hz), a.xi);
    return {sc, p};
}

json state_json(const CorrelationState& s) {
    return {{"z_a", s.z_a},
            {"z_b", s.z_b},
            {"aa", {s.aa.real(), s.aa.imag()}},
            {"bb", {s.bb.real(), s.bb.imag()}},
            {"ab", {s.ab.real(), s.ab.imag()}}};
}

json params_json(Scenario sc, const ModelParams& p) {
    return {{"scenario", std::string(to_string(sc))},
            {"n_atoms", p.n_atoms},
            {"collective_rate_hz", p.collective_rate},
            {"pump_hz", p.pump},
            {"detuning_hz", p.detuning},
            {"feedback_strength", p.feedback_strength}};
}

int cmd_steady(const PointArgs& a) {
    auto [sc, p] = point_params(a);
    SteadyStateResult r = steady_state(sc, p);
    json eig = json::array();
    for (cplx e : r.jacobian_eigenvalues) eig.push_back({e.real(), e.imag()});
    auto [za, zb] = closedform::sigma_z_leading(sc, p);
    json out{{"params", params_json(sc, p)},
             {"state", state_json(r.state)},
             {"leading_order", {{"z_a", za}, {"z_b", zb}}},
             {"stable", r.stable},
             {"jacobian_eigenvalues_hz", eig},
             {"residual_hz", r.residual_norm},
             {"roots_found", r.roots_found},
             {"stable_roots", r.stable_roots},
             {"multiple_stable", r.multiple_stable},
             {"photon_flux_hz", photon_flux(sc, r, p)}};
    if (!r.diagnostics.empty()) out["diagnostics"] = r.diagnostics;
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int cmd_spectrum(const PointArgs& a, const std::string& out_path, int points, double span) {
    auto [sc, p] = point_params(a);
    Dynamics d = make_dynamics(sc, p);
    SteadyStateResult st = steady_state(d);
    RegressionSystem rs = regression_system(d, st);
    json comps = json::array();
    try {
        for (auto& c : components(rs))
            comps.push_back({{"center_hz", c.center},
                             {"half_width_hz", c.half_width},
                             {"full_width_over_gamma", 2.0 * c.half_width / p.gamma()},
                             {"weight", {c.weight.real(), c.weight.imag()}}});
    } catch (const DefectiveMatrixError& e) {
        comps = e.what();
    }
    json lead = json::array();
    for (auto& w : closedform::linewidth_leading(sc, p)) {
        json j{{"label", w.label}, {"center_hz", w.center * p.collective_rate}};
        if (w.divergent) j["divergent_coefficient"] = w.coefficient;
        else j["full_width_over_gamma"] = w.value;
        lead.push_back(j);
    }
    json out{{"params", params_json(sc, p)}, {"components", comps}, {"leading_order_widths", lead},
             {"photon_flux_hz", photon_flux(sc, st, p)}};
    if (!out_path.empty()) {
        std::vector<double> om = linspace(-span * p.collective_rate, span * p.collective_rate, points);
        Spectrum sp = resolvent_spectrum(rs, om);
        Table t;
        t.metadata = {std::string("# toolkit = srsync ") + kVersion, "# scenario = " + std::string(to_string(sc)),
                      "# n_atoms = " + std::to_string(p.n_atoms),
                      "# collective_rate_hz = " + format_number(p.collective_rate),
                      "# w_hz = " + format_number(p.pump), "# delta_hz = " + format_number(p.detuning),
                      "# units = omega in Hz offset from the carrier; s_norm in 1/Hz"};
        t.columns = {"omega", "s", "s_norm"};
        for (std::size_t i = 0; i < om.size(); ++i) t.rows.push_back({om[i], sp.value[i], sp.normalized[i]});
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw UsageError("cannot open " + out_path);
        write_table_csv(t, f);
        out["spectrum_csv"] = out_path;
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
}

int cmd_sweep(const std::string& config, const std::string& out, bool resume, int jobs) {
    std::ifstream in(config);
    if (!in) throw UsageError("cannot read config " + config);
    SweepSpec s = sweep_from_config(parse_key_values(in));
    if (jobs > 0) s.parallelism = jobs;
    SweepFileResult r = write_sweep_csv(s, out, resume);
    std::cerr << "sweep: " << r.total << " points, " << r.reused << " reused, " << r.computed << " computed, "
              << r.failed << " failed\n";
    return r.total > 0 && r.failed == r.total ? kSolver : kOk;
}

int cmd_figure(const std::string& id, const std::string& out, int jobs, const std::string& scenario) {
    FigureJob job;
    job.id = parse_figure_id(id);
    job.parallelism = jobs;
    if (!scenario.empty()) job.scenario = parse_scenario(scenario);
    Table t = run_figure(job);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw UsageError("cannot open " + out);
    write_table_csv(t, f);
    return kOk;
}

int cmd_validate(int n_small) {
    ValidationReport r = run_validation(n_small, {Scenario::BiQuantum, Scenario::UniQuantum, Scenario::UniClassical,
                                                  Scenario::BiClassical});
    print_report(r, std::cout);
    return r.pass() ? kOk : kValidation;
}

}

int main(int argc, char** argv) {
    CLI::App app{"Synchronization of two superradiant lasers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("srsync ") + kVersion);

    PointArgs steady_args, spec_args;
    auto* steady = app.add_subcommand("steady", "cumulant steady state at one point (JSON)");
    add_point_options(steady, steady_args);

    auto* spec = app.add_subcommand("spectrum", "Lorentzian decomposition of the emitted spectrum (JSON)");
    add_point_options(spec, spec_args);
    std::string spec_out;
    int spec_points = 2001;
    double spec_span = 3.0;
    spec->add_option("--out", spec_out, "also write S(omega) to this CSV");
    spec->add_option("--points", spec_points, "frequency samples")->check(CLI::Range(2, 10'000'000));
    spec->add_option("--span", spec_span, "half range of omega in units of N*gamma")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "(w, delta) grid sweep to CSV");
    std::string sweep_cfg, sweep_out;
    bool sweep_resume = false;
    int sweep_jobs = 0;
    sweep->add_option("--config", sweep_cfg, "key = value sweep description")->required();
    sweep->add_option("--out", sweep_out, "output CSV")->required();
    sweep->add_flag("--resume", sweep_resume, "keep completed rows of an existing output");
    sweep->add_option("--jobs", sweep_jobs, "worker threads (overrides config)")->check(CLI::PositiveNumber);

    auto* fig = app.add_subcommand("figure", "figure data to CSV");
    std::string fig_id, fig_out, fig_scenario;
    int fig_jobs = 1;
    fig->add_option("--id", fig_id,
                    "PullingCurve, SyncContours, SpectrumInset, PlateauCurve, LinewidthComparison, "
                    "ClassicalPoleDistance")
        ->required();
    fig->add_option("--out", fig_out, "output CSV")->required();
    fig->add_option("--scenario", fig_scenario, "scenario for SyncContours");
    fig->add_option("--jobs", fig_jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "exact small-system oracle vs cumulant closure");
    int n_small = 2;
    val->add_option("--n-small", n_small, "atoms per ensemble (1 to 3)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*steady) return cmd_steady(steady_args);
        if (*spec) return cmd_spectrum(spec_args, spec_out, spec_points, spec_span);
        if (*sweep) return cmd_sweep(sweep_cfg, sweep_out, sweep_resume, sweep_jobs);
        if (*fig) return cmd_figure(fig_id, fig_out, fig_jobs, fig_scenario);
        if (*val) return cmd_validate(n_small);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }
    return kUsage;
}
