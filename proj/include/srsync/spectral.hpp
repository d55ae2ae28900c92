#pragma once

#include "srsync/meanfield.hpp"
#include "srsync/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace srsync {

// C(tau) = weights^T exp(matrix tau) initial is the leading-order
// <b_out^dag(tau) b_out(0)> of the emitted field.
struct RegressionSystem {
    Eigen::Matrix2cd matrix;
    Eigen::Vector2cd initial;
    Eigen::Vector2cd weights;
    // Frequency scale used for tolerances (the collective rate).
    double scale = 1.0;
};

struct SpectralComponent {
    double center = 0.0;
    double half_width = 0.0;
    cplx weight{0.0, 0.0};
};

class DefectiveMatrixError : public SolverError {
public:
    using SolverError::SolverError;
};

RegressionSystem regression_system(Scenario sc, const SteadyStateResult& steady,
                                   const ModelParams& p);
RegressionSystem regression_system(const Dynamics& d, const SteadyStateResult& steady);

// Throws DefectiveMatrixError when |lambda_1 - lambda_2| < 1e-8 * scale.
std::vector<SpectralComponent> components(const RegressionSystem& rs);

// Sum of Re(weight); equals C(0) and the photon flux.
double total_weight(const std::vector<SpectralComponent>& comps);

double lorentzian_sum(const std::vector<SpectralComponent>& comps, double omega);

struct Spectrum {
    std::vector<double> omega;
    std::vector<double> value;       // unnormalised S(omega)
    std::vector<double> normalized;  // S / (pi I), integrates to 1
    double flux = 0.0;
};

Spectrum spectrum(const std::vector<SpectralComponent>& comps, const std::vector<double>& omega);

// S(omega) = Re w^T (i omega - M)^{-1} initial, valid also for defective M.
Spectrum resolvent_spectrum(const RegressionSystem& rs, const std::vector<double>& omega);

std::vector<cplx> correlation_function(const RegressionSystem& rs, const std::vector<double>& tau);

// Spectrum from the FFT of C(tau) on n points of spacing dt, normalised the
// same way as spectrum(). Frequencies are sorted ascending.
Spectrum fft_spectrum(const RegressionSystem& rs, int n, double dt);

// Indices of local maxima whose value exceeds rel_floor * max.
std::vector<std::size_t> find_peaks(const std::vector<double>& values, double rel_floor = 1e-3);

double photon_flux(Scenario sc, const SteadyStateResult& steady, const ModelParams& p);

double peak_separation(const std::vector<SpectralComponent>& comps);

// Steady state, regression system and Lorentzian components in one go.
struct SpectralAnalysis {
    SteadyStateResult steady;
    RegressionSystem rs;
    std::vector<SpectralComponent> comps;
};

SpectralAnalysis analyze(Scenario sc, const ModelParams& p, const SteadyOptions& opt = {});

}
