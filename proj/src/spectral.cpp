#include "srsync/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace srsync {

RegressionSystem regression_system(const Dynamics& d, const SteadyStateResult& steady) {
    if (!steady.stable) throw SolverError("regression system needs a stable steady state");
    const ModelParams& p = d.params;
    const double N = p.n_atoms, g = p.gamma(), w = p.pump, dl = p.detuning;
    const CorrelationState& s = steady.state;
    const double amp = g * N * N;
    RegressionSystem rs;
    rs.scale = p.collective_rate;
    if (is_symmetric(d.scenario)) {
        const double z = s.z_a;
        cplx X(g * (N - 1.0) * z - g * d.nc.zeta - w, dl);
        cplx Y(g * N * d.xi * z, 0.0);
        rs.matrix << X, Y, Y, std::conj(X);
        rs.matrix *= 0.5;
        rs.initial << s.aa + s.ab, s.aa + std::conj(s.ab);
        rs.weights << amp, amp;
    } else {
        cplx X(g * (N - 1.0) * s.z_a - g - w, 0.0);
        cplx Xp(g * (N - 1.0) * s.z_b - d.nc.u * g - w, -2.0 * dl);
        cplx Y(-2.0 * N * g * s.z_b, 0.0);
        rs.matrix << X, 0.0, Y, Xp;
        rs.matrix *= 0.5;
        rs.initial << s.aa - s.ab, std::conj(s.ab) - s.bb;
        rs.weights << amp, -amp;
    }
    return rs;
}

RegressionSystem regression_system(Scenario sc, const SteadyStateResult& steady,
                                   const ModelParams& p) {
    return regression_system(make_dynamics(sc, p), steady);
}

std::vector<SpectralComponent> components(const RegressionSystem& rs) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(rs.matrix, true);
    if (es.info() != Eigen::Success) throw SolverError("eigen-decomposition failed");
    Eigen::Vector2cd lam = es.eigenvalues();
    if (std::abs(lam[0] - lam[1]) < 1e-8 * rs.scale) {
        std::ostringstream os;
        os << "regression matrix is defective within tolerance (|dlambda| = "
           << std::abs(lam[0] - lam[1]) << "); use the FFT spectrum";
        throw DefectiveMatrixError(os.str());
    }
    Eigen::Matrix2cd V = es.eigenvectors();
    Eigen::Vector2cd left = (rs.weights.transpose() * V).transpose();
    Eigen::Vector2cd right = V.partialPivLu().solve(rs.initial);
    std::vector<SpectralComponent> out;
    for (int k = 0; k < 2; ++k) out.push_back({lam[k].imag(), -lam[k].real(), left[k] * right[k]});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.center != b.center ? a.center < b.center : a.half_width < b.half_width;
    });
    return out;
}

double total_weight(const std::vector<SpectralComponent>& comps) {
    double s = 0.0;
    for (auto& c : comps) s += c.weight.real();
    return s;
}

double lorentzian_sum(const std::vector<SpectralComponent>& comps, double omega) {
    double s = 0.0;
    for (auto& c : comps) s += (c.weight / cplx(c.half_width, omega - c.center)).real();
    return s;
}

Spectrum spectrum(const std::vector<SpectralComponent>& comps, const std::vector<double>& omega) {
    if (comps.empty()) throw std::invalid_argument("spectrum needs at least one component");
    Spectrum sp;
    sp.omega = omega;
    sp.flux = total_weight(comps);
    const double norm = std::numbers::pi * sp.flux;
    sp.value.reserve(omega.size());
    sp.normalized.reserve(omega.size());
    for (double w : omega) {
        double v = lorentzian_sum(comps, w);
        sp.value.push_back(v);
        sp.normalized.push_back(v / norm);
    }
    return sp;
}

Spectrum resolvent_spectrum(const RegressionSystem& rs, const std::vector<double>& omega) {
    Spectrum sp;
    sp.omega = omega;
    sp.flux = (rs.weights.transpose() * rs.initial).value().real();
    const double norm = std::numbers::pi * sp.flux;
    for (double w : omega) {
        Eigen::Matrix2cd A = cplx(0.0, w) * Eigen::Matrix2cd::Identity() - rs.matrix;
        double v = (rs.weights.transpose() * A.partialPivLu().solve(rs.initial)).value().real();
        sp.value.push_back(v);
        sp.normalized.push_back(v / norm);
    }
    return sp;
}

std::vector<cplx> correlation_function(const RegressionSystem& rs, const std::vector<double>& tau) {
    std::vector<cplx> out;
    out.reserve(tau.size());
    if (tau.empty()) return out;
    const double dt = tau.size() > 1 ? tau[1] - tau[0] : 0.0;
    for (std::size_t k = 2; k < tau.size(); ++k)
        if (std::abs((tau[k] - tau[k - 1]) - dt) > 1e-9 * std::abs(dt) + 1e-300)
            throw std::invalid_argument("correlation_function needs a uniform grid");
    Eigen::Matrix2cd step = (rs.matrix * dt).exp();
    Eigen::Vector2cd v = (rs.matrix * tau[0]).exp() * rs.initial;
    for (std::size_t k = 0; k < tau.size(); ++k) {
        out.push_back(rs.weights.transpose() * v);
        v = step * v;
    }
    return out;
}

Spectrum fft_spectrum(const RegressionSystem& rs, int n, double dt) {
    if (n < 4) throw std::invalid_argument("fft_spectrum needs n >= 4");
    std::vector<double> tau(n);
    for (int k = 0; k < n; ++k) tau[k] = k * dt;
    auto C = correlation_function(rs, tau);
    fftw_complex* buf = fftw_alloc_complex(n);
    fftw_plan plan;
#pragma omp critical(srsync_fftw_plan)
    plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    for (int k = 0; k < n; ++k) {
        cplx c = k == 0 ? 0.5 * C[0] : C[k];
        buf[k][0] = c.real();
        buf[k][1] = c.imag();
    }
    fftw_execute(plan);
    Spectrum sp;
    sp.flux = C[0].real();
    const double norm = std::numbers::pi * sp.flux;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n);
    for (int j = 0; j < n; ++j) {
        int jj = j <= n / 2 - 1 ? j : j - n;
        double om = 2.0 * std::numbers::pi * jj / (n * dt);
        pts.emplace_back(om, dt * buf[j][0]);
    }
#pragma omp critical(srsync_fftw_plan)
    fftw_destroy_plan(plan);
    fftw_free(buf);
    std::sort(pts.begin(), pts.end());
    for (auto& [om, v] : pts) {
        sp.omega.push_back(om);
        sp.value.push_back(v);
        sp.normalized.push_back(v / norm);
    }
    return sp;
}

std::vector<std::size_t> find_peaks(const std::vector<double>& values, double rel_floor) {
    std::vector<std::size_t> out;
    if (values.size() < 3) return out;
    double mx = *std::max_element(values.begin(), values.end());
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        if (values[i] > values[i - 1] && values[i] >= values[i + 1] && values[i] > rel_floor * mx)
            out.push_back(i);
    return out;
}

double photon_flux(Scenario sc, const SteadyStateResult& steady, const ModelParams& p) {
    if (!steady.stable) throw SolverError("photon flux needs a stable steady state");
    const double N = p.n_atoms, g = p.gamma();
    const CorrelationState& s = steady.state;
    double f = is_symmetric(sc)
                   ? 2.0 * g * N * N * (s.aa.real() + s.ab.real())
                   : g * N * N * (s.aa.real() + s.bb.real() - 2.0 * s.ab.real());
    if (f < -1e-9 * g * N * N) {
        std::ostringstream os;
        os << "negative photon flux " << f << " (internal inconsistency)";
        throw SolverError(os.str());
    }
    return std::max(f, 0.0);
}

double peak_separation(const std::vector<SpectralComponent>& comps) {
    double d = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i)
        for (std::size_t j = i + 1; j < comps.size(); ++j)
            d = std::max(d, std::abs(comps[i].center - comps[j].center));
    return d;
}

SpectralAnalysis analyze(Scenario sc, const ModelParams& p, const SteadyOptions& opt) {
    SpectralAnalysis a;
    Dynamics d = make_dynamics(sc, p);
    a.steady = steady_state(d, opt);
    a.rs = regression_system(d, a.steady);
    a.comps = components(a.rs);
    return a;
}

}
