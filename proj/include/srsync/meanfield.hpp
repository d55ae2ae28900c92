#pragma once

#include "srsync/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace srsync {

struct NoiseCoefficients {
    double u = 1.0;
    double v = 1.0;
    double zeta = 1.0;
};

double zeta_of(double xi);

NoiseCoefficients noise_coefficients(Scenario s, double xi);

// Time derivatives returned in the same record layout as the state.
CorrelationState rhs_symmetric(const CorrelationState& s, const ModelParams& p, double xi,
                               double zeta);
CorrelationState rhs_cascaded(const CorrelationState& s, const ModelParams& p,
                              const NoiseCoefficients& nc);
CorrelationState rhs(Scenario sc, const ModelParams& p, const CorrelationState& s);

// Everything an evaluation of the equations of motion needs. make_dynamics
// fills xi and the noise insertions from the scenario; callers may override
// them (for example xi = zeta = 1 on the BiClassical path).
struct Dynamics {
    Scenario scenario = Scenario::BiQuantum;
    ModelParams params;
    double xi = 1.0;
    NoiseCoefficients nc;
};

Dynamics make_dynamics(Scenario sc, const ModelParams& p);
CorrelationState rhs(const Dynamics& d, const CorrelationState& s);

// Real-ified unknowns: symmetric (z, aa, Re ab, Im ab);
// cascaded (z_a, z_b, aa, bb, Re ab, Im ab).
int real_dim(Scenario sc);
Eigen::VectorXd pack(Scenario sc, const CorrelationState& s);
CorrelationState unpack(Scenario sc, const Eigen::VectorXd& x);
Eigen::VectorXd rhs_real(Scenario sc, const ModelParams& p, const Eigen::VectorXd& x);
Eigen::VectorXd rhs_real(const Dynamics& d, const Eigen::VectorXd& x);

Eigen::MatrixXd jacobian(Scenario sc, const ModelParams& p, const CorrelationState& s);
Eigen::MatrixXd jacobian(const Dynamics& d, const Eigen::VectorXd& x);
Eigen::MatrixXd jacobian_analytic(Scenario sc, const ModelParams& p, const Eigen::VectorXd& x);
Eigen::MatrixXd jacobian_analytic(const Dynamics& d, const Eigen::VectorXd& x);

struct IntegrateOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    // Initial and minimum step in units of 1/collective_rate.
    double h0 = 1e-3;
    double h_min = 1e-14;
    long max_steps = 5'000'000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<CorrelationState> states;
    double final_rhs_norm = 0.0;
    long steps = 0;
};

class IntegrationError : public SolverError {
public:
    using SolverError::SolverError;
};

// Samples every dt_control (and the end point); dt_control <= 0 records only
// the end points.
Trajectory integrate(Scenario sc, const ModelParams& p, const CorrelationState& s0,
                     double t_final, double dt_control, const IntegrateOptions& opt = {});
Trajectory integrate(const Dynamics& d, const CorrelationState& s0, double t_final,
                     double dt_control, const IntegrateOptions& opt = {});

struct SteadyOptions {
    // Both relative to collective_rate.
    double residual_tol = 1e-10;
    double stability_tol = 1e-9;
    int max_newton = 100;
    int max_halvings = 20;
    double burn_in_rates = 60.0;
};

SteadyStateResult steady_state(Scenario sc, const ModelParams& p, const SteadyOptions& opt = {});
SteadyStateResult steady_state(const Dynamics& d, const SteadyOptions& opt = {});

// Damped Newton from one seed; returns false when it fails to converge.
bool newton_solve(const Dynamics& d, Eigen::VectorXd& x, double tol, int max_iter,
                  int max_halvings, double* residual = nullptr);

}
