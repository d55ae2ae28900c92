#include "srsync/harness.hpp"
#include "srsync/closedform.hpp"
#include "srsync/exactsim.hpp"
#include "srsync/meanfield.hpp"
#include "srsync/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace srsync {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        auto b = cur.find_first_not_of(" \t");
        auto e = cur.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(cur.substr(b, e - b + 1));
    }
    return out;
}

int parse_int(const std::string& key, const std::string& v) {
    int out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("key '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw UsageError("key '" + key + "' expects a number, got '" + v + "'");
    return out;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else if (c == '\n' || c == '\r') out += ' ';
        else out += c;
    }
    return out + "\"";
}

std::string join_numbers(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_number(v[i]);
    }
    return out;
}

ModelParams point_params(Scenario sc, int n, double w, double delta, double xi) {
    return ModelParams::make(sc, n, 1.0, w, delta, sc == Scenario::BiClassical ? xi : 0.0);
}

std::pair<cplx, cplx> regression_eigenvalues(const RegressionSystem& rs) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(rs.matrix, false);
    return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

}

std::string_view to_string(Output o) {
    switch (o) {
    case Output::Z: return "z";
    case Output::AA: return "aa";
    case Output::BB: return "bb";
    case Output::ReAB: return "re_ab";
    case Output::Flux: return "flux";
    case Output::Linewidths: return "linewidths";
    case Output::PoleDistance: return "pole_distance";
    }
    return "?";
}

Output parse_output(std::string_view tag) {
    std::string t = lower(tag);
    for (Output o : {Output::Z, Output::AA, Output::BB, Output::ReAB, Output::Flux, Output::Linewidths,
                     Output::PoleDistance})
        if (t == to_string(o)) return o;
    throw UsageError("unknown output '" + std::string(tag) + "'");
}

void validate(const SweepSpec& s) {
    auto check_grid = [](const std::vector<double>& g, const char* name) {
        if (g.empty()) throw UsageError(std::string(name) + " grid is empty");
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i])) throw UsageError(std::string(name) + " grid has a non-finite value");
            if (i && !(g[i] > g[i - 1])) throw UsageError(std::string(name) + " grid must be strictly increasing");
        }
    };
    check_grid(s.w_grid, "w");
    check_grid(s.delta_grid, "delta");
    if (s.w_grid.front() < 0.0) throw UsageError("pump grid must be non-negative");
    if (s.n_atoms < 2) throw UsageError("n_atoms must be at least 2");
    if (!(s.collective_rate_hz > 0.0)) throw UsageError("collective rate must be positive");
    if (s.parallelism < 1) throw UsageError("parallelism must be positive");
    if (s.outputs.empty()) throw UsageError("no outputs requested");
    if (s.scenario == Scenario::BiClassical && !(s.xi >= 0.0 && s.xi < 1.0))
        throw UsageError("BiClassical needs 0 <= xi < 1");
    for (std::size_t i = 0; i < s.outputs.size(); ++i) {
        if (s.outputs[i] == Output::BB && is_symmetric(s.scenario))
            throw UsageError("output bb is only defined for cascaded scenarios");
        for (std::size_t j = 0; j < i; ++j)
            if (s.outputs[i] == s.outputs[j]) throw UsageError("duplicate output " + std::string(to_string(s.outputs[i])));
    }
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw UsageError("grid needs at least one point");
    if (n == 1) return {a};
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
    return out;
}

SweepSpec sweep_from_config(const KeyValues& kv) {
    SweepSpec s;
    KeyValues rest = kv;
    auto take = [&](std::initializer_list<const char*> keys) -> std::optional<std::string> {
        std::optional<std::string> v;
        for (const char* k : keys) {
            auto it = rest.find(k);
            if (it == rest.end()) continue;
            if (v) throw UsageError(std::string("duplicate key ") + k);
            v = it->second;
            rest.erase(it);
        }
        return v;
    };
    auto sc = take({"scenario"});
    if (!sc) throw UsageError("config is missing 'scenario'");
    try {
        s.scenario = parse_scenario(*sc);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    if (auto v = take({"n", "n_atoms"})) s.n_atoms = parse_int("n", *v);
    if (auto v = take({"n_gamma", "collective_rate"})) {
        try {
            s.collective_rate_hz = parse_rate(*v, 1.0);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    auto rate = [&](const std::string& key, const std::string& v) {
        try {
            return parse_rate(v, s.collective_rate_hz) / s.collective_rate_hz;
        } catch (const std::invalid_argument& e) {
            throw UsageError("key '" + key + "': " + e.what());
        }
    };
    if (auto v = take({"xi", "feedback_strength"})) s.xi = parse_double("xi", *v);
    if (auto v = take({"jobs", "parallelism"})) s.parallelism = parse_int("jobs", *v);
    if (auto v = take({"outputs"})) {
        s.outputs.clear();
        for (auto& o : split_list(*v)) s.outputs.push_back(parse_output(o));
    }
    auto axis = [&](const std::string& name) {
        std::vector<double> g;
        auto list = take({(name + "_grid").c_str()});
        auto lo = take({(name + "_min").c_str()});
        auto hi = take({(name + "_max").c_str()});
        auto np = take({(name + "_points").c_str()});
        if (list) {
            if (lo || hi || np) throw UsageError(name + "_grid conflicts with " + name + "_min/max/points");
            for (auto& x : split_list(*list)) g.push_back(rate(name + "_grid", x));
            return g;
        }
        if (!lo || !hi || !np) throw UsageError("config needs " + name + "_grid or " + name + "_min, " + name + "_max and " + name + "_points");
        return linspace(rate(name + "_min", *lo), rate(name + "_max", *hi), parse_int(name + "_points", *np));
    };
    s.w_grid = axis("w");
    s.delta_grid = axis("delta");
    if (!rest.empty()) throw UsageError("unknown config key '" + rest.begin()->first + "'");
    validate(s);
    return s;
}

std::vector<std::string> sweep_columns(const SweepSpec& s) {
    std::vector<std::string> c;
    const bool sym = is_symmetric(s.scenario);
    for (Output o : s.outputs) {
        switch (o) {
        case Output::Z:
            if (sym) c.push_back("z");
            else {
                c.push_back("z_a");
                c.push_back("z_b");
            }
            break;
        case Output::Linewidths:
            c.push_back("width_1");
            c.push_back("width_2");
            break;
        default: c.emplace_back(to_string(o));
        }
    }
    return c;
}

SweepRow compute_point(const SweepSpec& s, double w, double delta) {
    SweepRow r;
    r.w = w;
    r.delta = delta;
    const std::size_t ncol = sweep_columns(s).size();
    r.values.assign(ncol, kNaN);
    try {
        ModelParams p = point_params(s.scenario, s.n_atoms, w, delta, s.xi);
        Dynamics d = make_dynamics(s.scenario, p);
        SteadyStateResult st = steady_state(d);
        if (st.multiple_stable) r.diagnostic = "multiple stable roots; picked by long integration";
        const CorrelationState& x = st.state;
        std::size_t k = 0;
        std::string fail;
        for (Output o : s.outputs) {
            switch (o) {
            case Output::Z:
                r.values[k++] = x.z_a;
                if (!is_symmetric(s.scenario)) r.values[k++] = x.z_b;
                break;
            case Output::AA: r.values[k++] = x.aa.real(); break;
            case Output::BB: r.values[k++] = x.bb.real(); break;
            case Output::ReAB: r.values[k++] = x.ab.real(); break;
            case Output::Flux: r.values[k++] = photon_flux(s.scenario, st, p); break;
            case Output::Linewidths:
                try {
                    auto comps = components(regression_system(d, st));
                    std::sort(comps.begin(), comps.end(),
                              [](const auto& a, const auto& b) { return a.half_width < b.half_width; });
                    r.values[k] = 2.0 * comps[0].half_width / p.gamma();
                    r.values[k + 1] = 2.0 * comps[1].half_width / p.gamma();
                } catch (const SolverError& e) {
                    fail = e.what();
                }
                k += 2;
                break;
            case Output::PoleDistance: {
                auto [l1, l2] = regression_eigenvalues(regression_system(d, st));
                r.values[k++] = std::abs(l1.imag() - l2.imag());
                break;
            }
            }
        }
        r.ok = fail.empty();
        if (!fail.empty()) r.diagnostic = fail;
    } catch (const std::exception& e) {
        r.ok = false;
        r.diagnostic = e.what();
    }
    return r;
}

std::vector<SweepRow> run_sweep(const SweepSpec& s) {
    validate(s);
    const long nd = static_cast<long>(s.delta_grid.size());
    const long n = static_cast<long>(s.w_grid.size()) * nd;
    std::vector<SweepRow> rows(n);
#pragma omp parallel for schedule(dynamic) num_threads(s.parallelism)
    for (long i = 0; i < n; ++i) rows[i] = compute_point(s, s.w_grid[i / nd], s.delta_grid[i % nd]);
    return rows;
}

std::vector<SweepRow> run_sweep_serial(const SweepSpec& s) {
    validate(s);
    std::vector<SweepRow> rows;
    rows.reserve(s.w_grid.size() * s.delta_grid.size());
    for (double w : s.w_grid)
        for (double d : s.delta_grid) rows.push_back(compute_point(s, w, d));
    return rows;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

std::vector<std::string> sweep_metadata(const SweepSpec& s) {
    std::vector<std::string> m;
    m.push_back(std::string("# toolkit = srsync ") + kVersion);
    m.push_back("# scenario = " + std::string(to_string(s.scenario)));
    m.push_back("# n_atoms = " + std::to_string(s.n_atoms));
    m.push_back("# collective_rate_hz = " + format_number(s.collective_rate_hz));
    if (s.scenario == Scenario::BiClassical) m.push_back("# xi = " + format_number(s.xi));
    m.push_back("# units = w, delta, flux, pole_distance in N*gamma; widths are full widths / gamma");
    m.push_back("# w_grid = " + join_numbers(s.w_grid));
    m.push_back("# delta_grid = " + join_numbers(s.delta_grid));
    m.push_back("# seed_policy = deterministic, no random numbers; Newton seeds: leading-order state, "
                "fully inverted state, burn-in trajectory, fixed lattice");
    return m;
}

std::string sweep_header(const SweepSpec& s) {
    std::string h = "w,delta";
    for (auto& c : sweep_columns(s)) h += "," + c;
    return h + ",status,diagnostic";
}

std::string format_row(const SweepRow& r) {
    std::string line = format_number(r.w) + "," + format_number(r.delta);
    for (double v : r.values) line += "," + format_number(v);
    line += r.ok ? ",ok," : ",failed,";
    if (!r.diagnostic.empty()) line += csv_quote(r.diagnostic);
    return line;
}

SweepFileResult write_sweep_csv(const SweepSpec& s, const std::string& path, bool resume) {
    validate(s);
    std::string preamble;
    for (auto& m : sweep_metadata(s)) preamble += m + "\n";
    preamble += sweep_header(s) + "\n";
    const std::size_t nd = s.delta_grid.size();
    const std::size_t total = s.w_grid.size() * nd;
    const std::size_t status_field = 2 + sweep_columns(s).size();

    auto row_failed = [&](const std::string& line) {
        std::size_t pos = 0;
        for (std::size_t f = 0; f < status_field; ++f) pos = line.find(',', pos) + 1;
        return line.compare(pos, 7, "failed,") == 0;
    };

    SweepFileResult res;
    res.total = total;
    std::size_t done = 0;
    namespace fs = std::filesystem;
    if (resume && fs::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (content.compare(0, preamble.size(), preamble) != 0)
            throw UsageError("cannot resume: " + path + " was written for a different sweep");
        std::size_t pos = preamble.size(), keep = pos;
        while (pos < content.size()) {
            std::size_t nl = content.find('\n', pos);
            if (nl == std::string::npos) break;
            std::string line = content.substr(pos, nl - pos);
            if (done >= total) throw UsageError("cannot resume: " + path + " has extra rows");
            std::string expect = format_number(s.w_grid[done / nd]) + "," + format_number(s.delta_grid[done % nd]) + ",";
            if (line.compare(0, expect.size(), expect) != 0)
                throw UsageError("cannot resume: row " + std::to_string(done + 1) + " of " + path + " is out of grid order");
            if (row_failed(line)) ++res.failed;
            ++done;
            pos = nl + 1;
            keep = pos;
        }
        res.reused = done;
        if (done == total) return res;
        if (keep != content.size()) fs::resize_file(path, keep);
    } else {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw UsageError("cannot open " + path + " for writing");
        out << preamble;
    }

    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw UsageError("cannot open " + path + " for appending");
    const std::size_t chunk = std::max<std::size_t>(64, 16 * static_cast<std::size_t>(s.parallelism));
    while (done < total) {
        const long m = static_cast<long>(std::min(chunk, total - done));
        std::vector<SweepRow> rows(m);
        const std::size_t base = done;
#pragma omp parallel for schedule(dynamic) num_threads(s.parallelism)
        for (long i = 0; i < m; ++i) {
            std::size_t idx = base + static_cast<std::size_t>(i);
            rows[i] = compute_point(s, s.w_grid[idx / nd], s.delta_grid[idx % nd]);
        }
        for (auto& r : rows) {
            out << format_row(r) << '\n';
            if (!r.ok) ++res.failed;
        }
        out.flush();
        if (!out) throw UsageError("write to " + path + " failed");
        done += m;
        res.computed += m;
    }
    return res;
}

std::string_view to_string(FigureId id) {
    switch (id) {
    case FigureId::PullingCurve: return "PullingCurve";
    case FigureId::SyncContours: return "SyncContours";
    case FigureId::SpectrumInset: return "SpectrumInset";
    case FigureId::PlateauCurve: return "PlateauCurve";
    case FigureId::LinewidthComparison: return "LinewidthComparison";
    case FigureId::ClassicalPoleDistance: return "ClassicalPoleDistance";
    }
    return "?";
}

FigureId parse_figure_id(std::string_view tag) {
    std::string t = lower(tag);
    t.erase(std::remove(t.begin(), t.end(), '_'), t.end());
    for (FigureId id : {FigureId::PullingCurve, FigureId::SyncContours, FigureId::SpectrumInset, FigureId::PlateauCurve,
                        FigureId::LinewidthComparison, FigureId::ClassicalPoleDistance})
        if (t == lower(to_string(id))) return id;
    throw UsageError("unknown figure id '" + std::string(tag) + "'");
}

namespace {

std::vector<std::string> figure_metadata(FigureId id, Scenario sc, int n, double hz, double w, double xi) {
    std::vector<std::string> m;
    m.push_back(std::string("# toolkit = srsync ") + kVersion);
    m.push_back("# figure = " + std::string(to_string(id)));
    m.push_back("# scenario = " + std::string(to_string(sc)));
    m.push_back("# n_atoms = " + std::to_string(n));
    m.push_back("# collective_rate_hz = " + format_number(hz));
    if (!std::isnan(w)) m.push_back("# w = " + format_number(w));
    if (sc == Scenario::BiClassical) m.push_back("# xi = " + format_number(xi));
    m.push_back("# units = rates and frequencies in N*gamma; s_norm in 1/(N*gamma); widths are full widths / gamma");
    m.push_back("# seed_policy = deterministic, no random numbers");
    return m;
}

[[noreturn]] void rethrow_at(const std::exception& e, double w, double delta) {
    std::ostringstream os;
    os << e.what() << " [figure point w=" << format_number(w) << " delta=" << format_number(delta) << "]";
    throw SolverError(os.str());
}

RegressionSystem point_regression(Scenario sc, int n, double w, double delta, double xi) {
    ModelParams p = point_params(sc, n, w, delta, xi);
    Dynamics d = make_dynamics(sc, p);
    return regression_system(d, steady_state(d));
}

Table pole_distance_curve(FigureId id, Scenario sc, int n, double hz, double w, double xi, double dmax, int pts) {
    Table t;
    t.metadata = figure_metadata(id, sc, n, hz, w, xi);
    t.columns = {"delta", "pole_distance", "pole_distance_leading"};
    std::vector<double> grid = linspace(0.0, dmax, pts);
    t.rows.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double dl = grid[i];
        try {
            auto [l1, l2] = regression_eigenvalues(point_regression(sc, n, w, dl, xi));
            ModelParams p = point_params(sc, n, w, dl, xi);
            t.rows[i] = {dl, std::abs(l1.imag() - l2.imag()), closedform::pole_distance_leading(p, sc)};
        } catch (const std::exception& e) {
            rethrow_at(e, w, dl);
        }
    }
    return t;
}

}

Table run_figure(const FigureJob& job) {
    if (job.parallelism < 1) throw UsageError("parallelism must be positive");
    if (job.scenario && job.id != FigureId::SyncContours)
        throw UsageError(std::string(to_string(job.id)) + " has a fixed scenario");
    const int n = job.n_atoms.value_or(10000);
    if (n < 2) throw UsageError("n_atoms must be at least 2");
    switch (job.id) {
    case FigureId::PullingCurve:
        return pole_distance_curve(job.id, Scenario::BiQuantum, n, job.collective_rate_hz.value_or(1e6),
                                   job.pump.value_or(0.5), 0.0, 2.5, 251);
    case FigureId::ClassicalPoleDistance:
        return pole_distance_curve(job.id, Scenario::BiClassical, n, job.collective_rate_hz.value_or(1e6),
                                   job.pump.value_or(0.5), job.feedback_strength.value_or(0.9), 1.5, 301);
    case FigureId::SyncContours: {
        SweepSpec s;
        s.scenario = job.scenario.value_or(Scenario::BiQuantum);
        s.n_atoms = n;
        s.collective_rate_hz = job.collective_rate_hz.value_or(1e6);
        s.xi = job.feedback_strength.value_or(0.6);
        s.w_grid = linspace(0.025, 2.5, 100);
        s.delta_grid = linspace(0.025, 2.5, 100);
        s.outputs = {Output::Z, Output::AA, Output::ReAB};
        if (!is_symmetric(s.scenario)) s.outputs.push_back(Output::BB);
        s.parallelism = job.parallelism;
        Table t;
        t.metadata = figure_metadata(job.id, s.scenario, n, s.collective_rate_hz, kNaN, s.xi);
        t.metadata.push_back("# failed points carry ok = 0 and nan values");
        t.columns = {"w", "delta"};
        for (auto& c : sweep_columns(s)) t.columns.push_back(c);
        t.columns.push_back("ok");
        for (auto& r : run_sweep(s)) {
            std::vector<double> row{r.w, r.delta};
            row.insert(row.end(), r.values.begin(), r.values.end());
            row.push_back(r.ok ? 1.0 : 0.0);
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    case FigureId::SpectrumInset: {
        const double w = job.pump.value_or(0.5);
        Table t;
        t.metadata = figure_metadata(job.id, Scenario::UniQuantum, n, job.collective_rate_hz.value_or(1e4), w, 0.0);
        t.columns = {"delta", "omega", "s_norm"};
        for (double dl : {1.5, 1.0, 0.5, 0.0}) {
            try {
                RegressionSystem rs = point_regression(Scenario::UniQuantum, n, w, dl, 0.0);
                std::vector<double> om = linspace(-2.0, 0.5, 1001);
                auto [l1, l2] = regression_eigenvalues(rs);
                for (cplx l : {l1, l2})
                    for (double k : {-8.0, -4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0})
                        om.push_back(l.imag() - k * l.real());
                std::sort(om.begin(), om.end());
                om.erase(std::unique(om.begin(), om.end()), om.end());
                Spectrum sp = resolvent_spectrum(rs, om);
                for (std::size_t i = 0; i < om.size(); ++i) t.rows.push_back({dl, om[i], sp.normalized[i]});
            } catch (const std::exception& e) {
                rethrow_at(e, w, dl);
            }
        }
        return t;
    }
    case FigureId::PlateauCurve: {
        const double w = job.pump.value_or(0.5);
        Table t;
        t.metadata = figure_metadata(job.id, Scenario::UniQuantum, n, job.collective_rate_hz.value_or(1e4), w, 0.0);
        t.columns = {"delta", "s_norm_nu"};
        for (double dl : linspace(0.0, 2.0, 201)) {
            try {
                Spectrum sp = resolvent_spectrum(point_regression(Scenario::UniQuantum, n, w, dl, 0.0), {0.0});
                t.rows.push_back({dl, sp.normalized[0]});
            } catch (const std::exception& e) {
                rethrow_at(e, w, dl);
            }
        }
        return t;
    }
    case FigureId::LinewidthComparison: {
        const double xi = job.feedback_strength.value_or(0.6);
        Table t;
        t.metadata = figure_metadata(job.id, Scenario::BiClassical, n, job.collective_rate_hz.value_or(1e6), kNaN, xi);
        t.metadata.push_back("# leading order in 1/N; quantum column is BiQuantum");
        t.columns = {"w", "delta", "width_quantum", "width_classical"};
        for (double w : linspace(0.02, 1.0, 50))
            for (double dl : linspace(0.0, 1.0, 51)) {
                ModelParams q = point_params(Scenario::BiQuantum, n, w, dl, 0.0);
                ModelParams c = point_params(Scenario::BiClassical, n, w, dl, xi);
                t.rows.push_back({w, dl, closedform::linewidth_leading(Scenario::BiQuantum, q)[0].value,
                                  closedform::linewidth_leading(Scenario::BiClassical, c)[0].value});
            }
        return t;
    }
    }
    throw UsageError("unhandled figure id");
}

void write_table_csv(const Table& t, std::ostream& out) {
    for (auto& m : t.metadata) out << m << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
        out << '\n';
    }
}

bool ValidationReport::pass() const {
    if (!invariants_ok || !diagnostics.empty()) return false;
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

namespace {

struct PanelPoint {
    double w;
    double delta;
};

// Superradiant points in units of N*gamma with N = n_small.
const std::vector<PanelPoint>& validation_panel() {
    static const std::vector<PanelPoint> panel{{1.0, 0.0}, {0.75, 0.25}, {1.0, 0.5}};
    return panel;
}

constexpr double kPanelXi = 0.6;

}

ValidationReport run_validation(int n_small, const std::vector<Scenario>& scenarios) {
    if (n_small < 1 || n_small > 3) throw UsageError("n_small must be between 1 and 3");
    ValidationReport rep;
    rep.n_small = n_small;
    rep.tolerance = kValidationTolerance;
    rep.floor = kValidationFloor;
    std::vector<std::pair<PanelPoint, CorrelationState>> uq, uc;
    for (Scenario sc : scenarios) {
        for (const PanelPoint& pt : validation_panel()) {
            ModelParams p = point_params(sc, n_small, pt.w, pt.delta, kPanelXi);
            CorrelationState ex, mf;
            try {
                exact::DensityMatrix r = exact::steady_state_exact(exact::build_liouvillian(sc, p, n_small));
                auto inv = exact::check_invariants(r);
                if (!inv.ok()) {
                    rep.invariants_ok = false;
                    rep.diagnostics.push_back(std::string(to_string(sc)) + ": invariant check failed");
                }
                ex = exact::expectations(r);
            } catch (const std::exception& e) {
                rep.invariants_ok = false;
                std::ostringstream os;
                os << to_string(sc) << " w=" << pt.w << " delta=" << pt.delta << ": oracle failed: " << e.what();
                rep.diagnostics.push_back(os.str());
                continue;
            }
            try {
                mf = steady_state(sc, p).state;
            } catch (const std::exception& e) {
                std::ostringstream os;
                os << to_string(sc) << " w=" << pt.w << " delta=" << pt.delta << ": cumulant solver failed: " << e.what();
                rep.diagnostics.push_back(os.str());
                continue;
            }
            if (sc == Scenario::UniQuantum) uq.push_back({pt, ex});
            if (sc == Scenario::UniClassical) uc.push_back({pt, ex});
            auto add = [&](const char* name, double e, double c) {
                ValidationEntry v{sc, pt.w, pt.delta, name, e, c, 0.0, false};
                v.deviation = std::abs(c - e) / std::max(std::abs(e), rep.floor);
                v.pass = v.deviation <= rep.tolerance;
                rep.entries.push_back(v);
            };
            add("z_a", ex.z_a, mf.z_a);
            if (!is_symmetric(sc)) add("z_b", ex.z_b, mf.z_b);
            if (n_small > 1) {
                add("aa", ex.aa.real(), mf.aa.real());
                if (!is_symmetric(sc)) add("bb", ex.bb.real(), mf.bb.real());
            }
            add("re_ab", ex.ab.real(), mf.ab.real());
            add("im_ab", ex.ab.imag(), mf.ab.imag());
        }
    }
    for (std::size_t i = 0; i < std::min(uq.size(), uc.size()); ++i) {
        const auto& a = uq[i].second;
        const auto& b = uc[i].second;
        rep.classical_quantum_gap = std::max({rep.classical_quantum_gap, std::abs(a.z_b - b.z_b),
                                              std::abs(a.bb - b.bb), std::abs(a.ab - b.ab)});
    }
    return rep;
}

void print_report(const ValidationReport& r, std::ostream& out) {
    out << "exact oracle vs cumulant steady state, n_small = " << r.n_small << " per ensemble\n";
    out << "tolerance " << r.tolerance << " relative (denominator floor " << r.floor << ")\n";
    out << std::left << std::setw(14) << "scenario" << std::setw(7) << "w" << std::setw(7) << "delta" << std::setw(8)
        << "obs" << std::setw(20) << "exact" << std::setw(20) << "cumulant" << std::setw(20) << "deviation"
        << "result\n";
    for (auto& e : r.entries) {
        out << std::left << std::setw(14) << to_string(e.scenario) << std::setw(7) << e.w << std::setw(7) << e.delta
            << std::setw(8) << e.observable << std::setw(20) << format_number(e.exact) << std::setw(20)
            << format_number(e.cumulant) << std::setw(20) << format_number(e.deviation) << (e.pass ? "pass" : "FAIL")
            << '\n';
    }
    for (auto& d : r.diagnostics) out << "diagnostic: " << d << '\n';
    if (r.classical_quantum_gap > 0.0)
        out << "max |UniQuantum - UniClassical| (exact): " << format_number(r.classical_quantum_gap) << '\n';
    out << "invariants " << (r.invariants_ok ? "ok" : "VIOLATED") << "; overall " << (r.pass() ? "PASS" : "FAIL")
        << '\n';
}

}
