#include "srsync/closedform.hpp"
#include "srsync/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace srsync::closedform {

double symmetric_z(double w, double delta, double xi) {
    delta = std::abs(delta);
    if (w <= 0.0) return -1.0;
    if (delta >= xi * w) return std::min(w, 1.0);
    double a = 1.0 - xi * xi;
    double disc = xi * xi * w * w - a * delta * delta;
    double z;
    if (a < 1e-12)
        z = (w * w + delta * delta) / (2.0 * w);
    else
        z = (w - std::sqrt(std::max(disc, 0.0))) / a;
    return std::min(z, 1.0);
}

double cascaded_slave_z(double w, double delta) {
    delta = std::abs(delta);
    if (w <= 0.0) return -1.0;
    if (w >= 1.0) return 1.0;
    if (delta >= w) return w;
    auto f = [&](double z) {
        double s = 0.5 * (z - w);
        return (1.0 - z) * (s * s + delta * delta) - z * w * (1.0 - w);
    };
    double lo = 0.0, hi = w;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> sigma_z_leading(Scenario s, const ModelParams& p) {
    ModelParams q = dimensionless(p);
    if (is_symmetric(s)) {
        double xi = s == Scenario::BiClassical ? q.feedback_strength : 1.0;
        double z = symmetric_z(q.pump, q.detuning, xi);
        return {z, z};
    }
    double za = q.pump <= 0.0 ? -1.0 : std::min(q.pump, 1.0);
    return {za, cascaded_slave_z(q.pump, q.detuning)};
}

CorrelationState leading_state_symmetric(double w, double delta, double xi) {
    if (w <= 0.0) return CorrelationState::symmetric(-1.0, 0.0, 0.0);
    double z = symmetric_z(w, delta, xi);
    if (z >= 1.0) return CorrelationState::symmetric(1.0, 0.0, 0.0);
    double c = 0.5 * z * (1.0 - z);
    cplx ab;
    if (std::abs(delta) < xi * w) {
        ab = {(1.0 - z) * (w - z) / (2.0 * xi), c * delta / (xi * z)};
    } else if (delta != 0.0) {
        ab = {0.0, xi * w * c / delta};
    }
    return CorrelationState::symmetric(z, c, ab);
}

CorrelationState leading_state_cascaded(double w, double delta) {
    CorrelationState s;
    if (w <= 0.0) return {-1.0, -1.0, {}, {}, {}};
    s.z_a = std::min(w, 1.0);
    double aa = 0.5 * s.z_a * (1.0 - s.z_a);
    s.aa = aa;
    s.z_b = cascaded_slave_z(w, delta);
    s.bb = 0.5 * s.z_b * (1.0 - s.z_b);
    if (s.z_a >= 1.0) return s;
    if (std::abs(delta) < w) {
        double sh = 0.5 * (s.z_b - w);
        s.ab = s.z_b * aa / cplx(sh, delta);
    } else if (delta != 0.0) {
        s.ab = cplx(0.0, -w * aa / delta);
    }
    return s;
}

CorrelationState leading_state(Scenario s, const ModelParams& p) {
    ModelParams q = dimensionless(p);
    if (is_symmetric(s)) {
        double xi = s == Scenario::BiClassical ? q.feedback_strength : 1.0;
        return leading_state_symmetric(q.pump, q.detuning, xi);
    }
    return leading_state_cascaded(q.pump, q.detuning);
}

std::vector<PeakWidth> linewidth_leading(Scenario s, const ModelParams& p) {
    ModelParams q = dimensionless(p);
    double w = q.pump, d = std::abs(q.detuning);
    std::vector<PeakWidth> out;
    switch (s) {
    case Scenario::BiQuantum: {
        double v = d < w ? (w * w + d * d) / (2.0 * w) + 1.0 : w + 1.0;
        out.push_back({"narrow", 0.0, v});
        break;
    }
    case Scenario::BiClassical: {
        double xi = q.feedback_strength;
        double zeta = zeta_of(xi);
        double v;
        if (d < w * xi)
            v = zeta + (w - std::sqrt(std::max(w * w * xi * xi - d * d * (1 - xi * xi), 0.0))) /
                           (1 - xi * xi);
        else
            v = zeta + w;
        out.push_back({"narrow", 0.0, v});
        break;
    }
    case Scenario::UniQuantum:
    case Scenario::UniClassical: {
        double offset = s == Scenario::UniQuantum ? 1.0 : 3.0;
        out.push_back({"nu", 0.0, w + 1.0});
        PeakWidth slave{"nu_minus_delta", -q.detuning};
        if (d > w) {
            slave.value = w + offset;
        } else {
            slave.divergent = true;
            slave.coefficient = w - cascaded_slave_z(w, d);
        }
        out.push_back(slave);
        break;
    }
    }
    return out;
}

double pole_distance_leading(const ModelParams& p, Scenario s) {
    if (!is_symmetric(s)) throw std::invalid_argument("pole distance is defined for symmetric scenarios");
    ModelParams q = dimensionless(p);
    double xi = s == Scenario::BiClassical ? q.feedback_strength : 1.0;
    double z = symmetric_z(q.pump, q.detuning, xi);
    double x2 = q.detuning * q.detuning - xi * xi * z * z;
    return x2 > 0.0 ? std::sqrt(x2) * p.collective_rate : 0.0;
}

double critical_pumping(Scenario s, double delta, double xi) {
    delta = std::abs(delta);
    if (!is_symmetric(s)) return 1.0;
    double r = s == Scenario::BiClassical ? xi : 1.0;
    if (delta > r) return 1.0;
    return 1.0 + std::sqrt(r * r - delta * delta);
}

CouplingCoefficients coupling_coefficients(double xi) {
    if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("feedback strength must lie in [0, 1)");
    CouplingCoefficients c;
    c.kappa_tilde = 1.0 / ((1.0 - xi) * (1.0 + xi));
    c.kappa_plus = c.kappa_tilde * (1.0 + xi);
    c.kappa_minus = c.kappa_tilde * (1.0 - xi);
    c.n_plus = xi * xi / (4.0 * (1.0 + xi));
    c.n_minus = xi * xi / (4.0 * (1.0 - xi));
    c.zeta = zeta_of(xi);
    return c;
}

std::pair<double, double> stability_eigenvalues(double kappa_tilde, double xi) {
    return {-0.5 * kappa_tilde * (1.0 + xi), -0.5 * kappa_tilde * (1.0 - xi)};
}

PhaseBoundary sync_line(Scenario s, double xi) {
    return {BoundaryKind::SyncLine, s == Scenario::BiClassical ? xi : 1.0, 0.0};
}

PhaseBoundary quarter_circle(Scenario s, double xi) {
    return {BoundaryKind::QuarterCircle, 0.0, s == Scenario::BiClassical ? xi : 1.0};
}

bool synchronized(Scenario s, double w, double delta, double xi) {
    delta = std::abs(delta);
    if (w <= 0.0) return false;
    if (!is_symmetric(s)) return delta < w && w < 1.0;
    PhaseBoundary line = sync_line(s, xi);
    PhaseBoundary circ = quarter_circle(s, xi);
    bool inside_circle = (w - 1.0) * (w - 1.0) + delta * delta < circ.radius * circ.radius || w < 1.0;
    return delta < line.slope * w && inside_circle;
}

}
