#pragma once

#include "srsync/model.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace srsync {

// Bad input to the batch layer (maps to exit code 1).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Output { Z, AA, BB, ReAB, Flux, Linewidths, PoleDistance };

std::string_view to_string(Output o);
Output parse_output(std::string_view tag);

struct SweepSpec {
    Scenario scenario = Scenario::BiQuantum;
    int n_atoms = 10000;
    double collective_rate_hz = 1e6;
    double xi = 0.0;
    // Units of N*gamma.
    std::vector<double> w_grid;
    std::vector<double> delta_grid;
    std::vector<Output> outputs{Output::Z, Output::ReAB};
    int parallelism = 1;
};

// Throws UsageError.
void validate(const SweepSpec& s);

// Keys: scenario, n, n_gamma, xi, jobs, outputs (comma list), and per axis
// either w_grid / delta_grid (comma list) or w_min, w_max, w_points (same for
// delta). Rates accept a Hz suffix.
SweepSpec sweep_from_config(const KeyValues& kv);

std::vector<double> linspace(double a, double b, int n);

struct SweepRow {
    double w = 0.0;
    double delta = 0.0;
    std::vector<double> values;  // one per column from sweep_columns
    bool ok = false;
    std::string diagnostic;
};

// Value columns, excluding w, delta, status and diagnostic.
std::vector<std::string> sweep_columns(const SweepSpec& s);

SweepRow compute_point(const SweepSpec& s, double w, double delta);

// Row order is w-major regardless of parallelism.
std::vector<SweepRow> run_sweep(const SweepSpec& s);
std::vector<SweepRow> run_sweep_serial(const SweepSpec& s);

// 12 significant digits, shortest form, locale independent.
std::string format_number(double v);

std::vector<std::string> sweep_metadata(const SweepSpec& s);
std::string sweep_header(const SweepSpec& s);
std::string format_row(const SweepRow& r);

struct SweepFileResult {
    std::size_t total = 0;
    std::size_t reused = 0;
    std::size_t computed = 0;
    std::size_t failed = 0;  // among computed rows
};

// Writes rows in chunks so an interrupted run can be resumed. With resume, an
// existing file must carry the same metadata and header; its complete rows
// are kept and the file is only touched if rows are missing.
SweepFileResult write_sweep_csv(const SweepSpec& s, const std::string& path, bool resume);

enum class FigureId {
    PullingCurve,
    SyncContours,
    SpectrumInset,
    PlateauCurve,
    LinewidthComparison,
    ClassicalPoleDistance
};

std::string_view to_string(FigureId id);
FigureId parse_figure_id(std::string_view tag);

struct FigureJob {
    FigureId id = FigureId::PullingCurve;
    std::optional<Scenario> scenario;  // SyncContours only
    std::optional<int> n_atoms;
    std::optional<double> collective_rate_hz;
    std::optional<double> pump;
    std::optional<double> feedback_strength;
    int parallelism = 1;
};

struct Table {
    std::vector<std::string> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

Table run_figure(const FigureJob& job);
void write_table_csv(const Table& t, std::ostream& out);

struct ValidationEntry {
    Scenario scenario = Scenario::BiQuantum;
    double w = 0.0;
    double delta = 0.0;
    std::string observable;
    double exact = 0.0;
    double cumulant = 0.0;
    double deviation = 0.0;  // |cumulant - exact| / max(|exact|, floor)
    bool pass = false;
};

struct ValidationReport {
    int n_small = 2;
    double tolerance = 0.15;
    double floor = 0.0;
    std::vector<ValidationEntry> entries;
    bool invariants_ok = true;
    std::vector<std::string> diagnostics;
    // Largest |UniQuantum - UniClassical| over the exact panel observables.
    double classical_quantum_gap = 0.0;
    bool pass() const;
};

inline constexpr double kValidationTolerance = 0.15;
inline constexpr double kValidationFloor = 0.02;

// Exact oracle against the cumulant steady state on a fixed superradiant
// panel. n_small in [1, 3].
ValidationReport run_validation(int n_small, const std::vector<Scenario>& scenarios);
void print_report(const ValidationReport& r, std::ostream& out);

}
