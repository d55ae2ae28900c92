#pragma once

#include "srsync/model.hpp"

#include <string>
#include <utility>
#include <vector>

// Leading-order (large N) formulas. Inputs in units of N*gamma unless the
// function takes ModelParams, in which case it normalises internally.
namespace srsync::closedform {

// Solution of (z - w)^2 + delta^2 = (xi z)^2 on the synchronized branch
// (delta < xi w), otherwise w; clipped to 1. xi = 1 is the quantum case.
double symmetric_z(double w, double delta, double xi);

// Slave polarization of the cascaded pair.
double cascaded_slave_z(double w, double delta);

// (z_a, z_b); equal for symmetric scenarios.
std::pair<double, double> sigma_z_leading(Scenario s, const ModelParams& p);

// Full leading-order correlation state, used as a solver seed.
CorrelationState leading_state(Scenario s, const ModelParams& p);
CorrelationState leading_state_symmetric(double w, double delta, double xi);
CorrelationState leading_state_cascaded(double w, double delta);

struct PeakWidth {
    std::string label;
    // Offset from nu in units of N*gamma.
    double center = 0.0;
    // Gamma / gamma when finite.
    double value = 0.0;
    // Order-N width: Gamma / gamma ~ coefficient * N.
    bool divergent = false;
    double coefficient = 0.0;
};

std::vector<PeakWidth> linewidth_leading(Scenario s, const ModelParams& p);

// Peak separation in the units of p.
double pole_distance_leading(const ModelParams& p, Scenario s);

// delta and the result in units of N*gamma.
double critical_pumping(Scenario s, double delta, double xi);

struct CouplingCoefficients {
    double kappa_tilde = 1.0;  // all kappa ratios relative to kappa
    double kappa_plus = 1.0;
    double kappa_minus = 1.0;
    double n_plus = 0.0;
    double n_minus = 0.0;
    double zeta = 1.0;
};

CouplingCoefficients coupling_coefficients(double xi);

std::pair<double, double> stability_eigenvalues(double kappa_tilde, double xi);

enum class BoundaryKind { SyncLine, QuarterCircle };

struct PhaseBoundary {
    BoundaryKind kind = BoundaryKind::SyncLine;
    // SyncLine: delta_c = slope * w. QuarterCircle: (w - 1)^2 + delta^2 = radius^2.
    double slope = 1.0;
    double radius = 1.0;
};

PhaseBoundary sync_line(Scenario s, double xi);
PhaseBoundary quarter_circle(Scenario s, double xi);

// True if (w, delta) lies in the leading-order synchronized region.
bool synchronized(Scenario s, double w, double delta, double xi);

}
