#include "srsync/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

using namespace srsync;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "srsync_harness_test";
    fs::create_directories(dir);
    fs::path p = dir / name;
    fs::remove(p);
    return p;
}

SweepSpec small_sweep(int jobs) {
    SweepSpec s;
    s.scenario = Scenario::UniClassical;
    s.n_atoms = 5000;
    s.w_grid = linspace(0.2, 0.9, 5);
    s.delta_grid = linspace(0.0, 1.2, 6);
    s.outputs = {Output::Z, Output::ReAB, Output::BB, Output::Flux};
    s.parallelism = jobs;
    return s;
}

SweepSpec from_text(const std::string& text) {
    std::istringstream in(text);
    return sweep_from_config(parse_key_values(in));
}

struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

}

TEST_CASE("sweep configuration") {
    SweepSpec s = from_text("scenario = BiClassical\nn = 2000\nn_gamma = 1e6 Hz\nxi = 0.6\n"
                            "w_min = 0.1\nw_max = 5e5 Hz\nw_points = 5\ndelta_grid = 0, 0.25, 5e5 Hz\n"
                            "outputs = z, linewidths, pole_distance\njobs = 3\n");
    CHECK(s.scenario == Scenario::BiClassical);
    CHECK(s.n_atoms == 2000);
    CHECK(s.xi == 0.6);
    CHECK(s.parallelism == 3);
    REQUIRE(s.w_grid.size() == 5);
    CHECK(s.w_grid.back() == doctest::Approx(0.5));
    REQUIRE(s.delta_grid.size() == 3);
    CHECK(s.delta_grid[2] == doctest::Approx(0.5));
    CHECK(sweep_columns(s) == std::vector<std::string>{"z", "width_1", "width_2", "pole_distance"});

    CHECK_THROWS_AS(from_text("n = 100\nw_grid = 0.5\ndelta_grid = 0\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BQ\nw_grid = 0.5\ndelta_grid = 0\ncolour = red\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BQ\nw_grid = 0.5, 0.4\ndelta_grid = 0\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BQ\nw_grid = 0.5\ndelta_grid = 0\noutputs = bb\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BQ\nw_grid = 0.5\nw_min = 0\ndelta_grid = 0\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BC\nxi = 1\nw_grid = 0.5\ndelta_grid = 0\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BQ\nw_grid = 0.5\ndelta_min = 0\ndelta_max = 1\n"), UsageError);
    CHECK_THROWS_AS(from_text("scenario = BQ\nw_grid = fast\ndelta_grid = 0\n"), UsageError);
    CHECK_THROWS_AS(parse_output("colour"), UsageError);
}

TEST_CASE("numbers are written with 12 significant digits regardless of locale") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(2.0 / 3.0 * 1e-9) == "6.66666666667e-10");
    CHECK(format_number(1234567.0) == "1234567");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(std::nan("")) == "nan");
    std::locale old = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(1234.5) == "1234.5");
    std::locale::global(old);
}

TEST_CASE("parallel sweep reproduces the serial reference") {
    SweepSpec s = small_sweep(4);
    auto par = run_sweep(s);
    auto ser = run_sweep_serial(s);
    REQUIRE(par.size() == ser.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
        CHECK(par[i].w == ser[i].w);
        CHECK(par[i].delta == ser[i].delta);
        CHECK(format_row(par[i]) == format_row(ser[i]));
    }
    CHECK(par.front().w == s.w_grid.front());
    CHECK(par[1].delta == s.delta_grid[1]);
}

TEST_CASE("sweep CSV is byte-identical for one and eight workers") {
    fs::path a = scratch("jobs1.csv"), b = scratch("jobs8.csv");
    write_sweep_csv(small_sweep(1), a.string(), false);
    write_sweep_csv(small_sweep(8), b.string(), false);
    std::string ta = slurp(a);
    CHECK(ta == slurp(b));
    CHECK(ta.rfind("# ", 0) == 0);
    CHECK(ta.find("w,delta,z_a,z_b,re_ab,bb,flux,status,diagnostic\n") != std::string::npos);
}

TEST_CASE("resume keeps completed work and reproduces a full run") {
    SweepSpec s = small_sweep(2);
    fs::path full = scratch("full.csv");
    SweepFileResult r0 = write_sweep_csv(s, full.string(), false);
    CHECK(r0.total == 30);
    CHECK(r0.computed == 30);
    std::string bytes = slurp(full);

    auto stamp = fs::last_write_time(full);
    SweepFileResult r1 = write_sweep_csv(s, full.string(), true);
    CHECK(r1.computed == 0);
    CHECK(r1.reused == 30);
    CHECK(slurp(full) == bytes);
    CHECK(fs::last_write_time(full) == stamp);

    // Interrupted mid-line after a dozen rows.
    fs::path part = scratch("part.csv");
    std::size_t cut = 0;
    for (int lines = 0; lines < 12 + static_cast<int>(sweep_metadata(s).size()) + 1; ++lines) cut = bytes.find('\n', cut) + 1;
    {
        std::ofstream o(part, std::ios::binary);
        o << bytes.substr(0, cut + 7);
    }
    SweepFileResult r2 = write_sweep_csv(s, part.string(), true);
    CHECK(r2.reused == 12);
    CHECK(r2.computed == 18);
    CHECK(slurp(part) == bytes);

    // Missing file behaves like a fresh run.
    fs::path none = scratch("none.csv");
    CHECK(write_sweep_csv(s, none.string(), true).computed == 30);

    SweepSpec other = s;
    other.n_atoms = 6000;
    CHECK_THROWS_AS(write_sweep_csv(other, full.string(), true), UsageError);
    CHECK(slurp(full) == bytes);
}

TEST_CASE("a failing point is isolated to its row") {
    // N = 2^13 makes gamma * N exactly one, so the unpumped regression matrix is
    // exactly defective at delta = N gamma.
    SweepSpec s;
    s.scenario = Scenario::BiQuantum;
    s.n_atoms = 8192;
    s.w_grid = {0.0, 0.5};
    s.delta_grid = {0.5, 1.0};
    s.outputs = {Output::Z, Output::Linewidths};
    auto rows = run_sweep(s);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].ok);
    CHECK_FALSE(rows[1].ok);
    CHECK(rows[1].diagnostic.find("defective") != std::string::npos);
    CHECK(rows[1].values[0] == -1.0);
    CHECK(std::isnan(rows[1].values[1]));
    CHECK(rows[2].ok);
    CHECK(rows[3].ok);
    std::string line = format_row(rows[1]);
    CHECK(line.find(",failed,\"") != std::string::npos);
}

TEST_CASE("figure identifiers") {
    for (FigureId id : {FigureId::PullingCurve, FigureId::SyncContours, FigureId::SpectrumInset, FigureId::PlateauCurve,
                        FigureId::LinewidthComparison, FigureId::ClassicalPoleDistance})
        CHECK(parse_figure_id(to_string(id)) == id);
    CHECK_THROWS_AS(parse_figure_id("Fig99"), UsageError);
}

TEST_CASE("pulling figure data") {
    FigureJob job;
    job.id = FigureId::PullingCurve;
    Table t = run_figure(job);
    REQUIRE(t.rows.size() == 251);
    CHECK(t.columns.front() == "delta");
    std::ostringstream os;
    write_table_csv(t, os);
    CHECK(os.str().rfind("# ", 0) == 0);
    auto col = [&](const std::string& name) {
        for (std::size_t k = 0; k < t.columns.size(); ++k)
            if (t.columns[k] == name) return k;
        FAIL("missing column " << name);
        return std::size_t{0};
    };
    std::size_t d = col("delta");
    bool saw_locked = false, saw_split = false;
    for (auto& r : t.rows) {
        for (std::size_t k = 0; k < r.size(); ++k) CHECK(std::isfinite(r[k]));
        if (r[d] < 0.45) {
            saw_locked = true;
            for (std::size_t k = 1; k < r.size(); ++k)
                CHECK(std::abs(r[k]) < 1e-12);
        }
        if (r[d] > 1.0) saw_split = true;
    }
    CHECK(saw_locked);
    CHECK(saw_split);
}

TEST_CASE("validation panel bookkeeping") {
    CHECK_THROWS_AS(run_validation(0, {Scenario::BiQuantum}), UsageError);
    CHECK_THROWS_AS(run_validation(4, {Scenario::BiQuantum}), UsageError);
    ValidationReport r = run_validation(1, {Scenario::BiQuantum, Scenario::UniQuantum});
    CHECK(r.invariants_ok);
    CHECK(r.tolerance == kValidationTolerance);
    CHECK_FALSE(r.entries.empty());
    for (auto& e : r.entries) {
        CHECK(e.deviation == doctest::Approx(std::abs(e.cumulant - e.exact) / std::max(std::abs(e.exact), r.floor)));
        CHECK(e.pass == (e.deviation <= r.tolerance));
        CHECK(e.observable != "aa");
    }
    std::ostringstream os;
    print_report(r, os);
    CHECK(os.str().find("z_a") != std::string::npos);
}
