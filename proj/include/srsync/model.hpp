#pragma once

#include <complex>
#include <map>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace srsync {

using cplx = std::complex<double>;

inline constexpr const char* kVersion = "1.0.0";

enum class Scenario { BiQuantum, UniQuantum, UniClassical, BiClassical };

enum class CarrierConvention { SymmetricHalfDetuning, MasterAtCarrier };

std::string_view to_string(Scenario s);
// Accepts the enum name, kebab-case and short tags (bq, uq, uc, bc).
Scenario parse_scenario(std::string_view tag);

inline bool is_symmetric(Scenario s) {
    return s == Scenario::BiQuantum || s == Scenario::BiClassical;
}

inline CarrierConvention carrier_for(Scenario s) {
    return is_symmetric(s) ? CarrierConvention::SymmetricHalfDetuning
                           : CarrierConvention::MasterAtCarrier;
}

// Rates are in one common frequency unit. gamma() is the single-atom
// collective-decay rate implied by collective_rate = N * gamma.
struct ModelParams {
    int n_atoms = 10000;
    double collective_rate = 1.0;
    double pump = 0.5;
    double detuning = 0.0;
    double feedback_strength = 0.0;
    CarrierConvention carrier = CarrierConvention::SymmetricHalfDetuning;

    double gamma() const { return collective_rate / n_atoms; }

    static ModelParams make(Scenario s, int n, double n_gamma, double w,
                            double delta, double xi = 0.0);
};

// Throws std::invalid_argument on any violated invariant.
void validate(const ModelParams& p);
void validate(const ModelParams& p, Scenario s);

ModelParams dimensionless(const ModelParams& p);

struct CorrelationState {
    double z_a = 0.0;
    double z_b = 0.0;
    cplx aa{0.0, 0.0};
    cplx bb{0.0, 0.0};
    cplx ab{0.0, 0.0};

    static CorrelationState symmetric(double z, cplx c, cplx ab) {
        return {z, z, c, c, ab};
    }
    static CorrelationState inverted() { return {1.0, 1.0, {}, {}, {}}; }
    static CorrelationState ground() { return {-1.0, -1.0, {}, {}, {}}; }
};

struct SteadyStateResult {
    CorrelationState state;
    std::vector<cplx> jacobian_eigenvalues;
    bool stable = false;
    double residual_norm = 0.0;
    int seeds_tried = 0;
    int roots_found = 0;
    int stable_roots = 0;
    bool multiple_stable = false;
    std::string diagnostics;
};

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// key = value text, '#' comments, blank lines ignored. Keys are lowercased.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);

// A rate given as "0.5" is in units of n_gamma; "5e5 Hz" or "5e5Hz" is absolute.
double parse_rate(const std::string& text, double n_gamma);

struct ScenarioConfig {
    Scenario scenario = Scenario::BiQuantum;
    ModelParams params;
};

// Recognised keys: scenario, n_atoms, collective_rate (Hz), pump, detuning,
// feedback_strength (aliases n, n_gamma, w, delta, xi).
ScenarioConfig params_from_config(const KeyValues& kv);

}
