#include "srsync/meanfield.hpp"
#include "srsync/closedform.hpp"
#include "srsync/detail/dopri.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace srsync {

double zeta_of(double xi) {
    if (!(xi >= 0.0 && xi < 1.0)) throw std::invalid_argument("feedback strength must lie in [0, 1)");
    double x2 = xi * xi;
    return (x2 * x2 - x2 + 2.0) / (2.0 * (1.0 - x2));
}

NoiseCoefficients noise_coefficients(Scenario s, double xi) {
    switch (s) {
    case Scenario::BiQuantum:
    case Scenario::UniQuantum: return {1.0, 1.0, 1.0};
    case Scenario::UniClassical: return {3.0, 2.0, 1.0};
    case Scenario::BiClassical: return {1.0, 1.0, zeta_of(xi)};
    }
    return {};
}

CorrelationState rhs_symmetric(const CorrelationState& s, const ModelParams& p, double xi,
                               double zeta) {
    const double N = p.n_atoms, g = p.gamma(), w = p.pump, d = p.detuning;
    const double z = s.z_a;
    const cplx c = s.aa, ab = s.ab;
    const double x2 = xi * xi;
    const double denom = x2 * x2 - x2 + 2.0;

    double dz = w * (1.0 - z) - g - z * g * zeta - 2.0 * g * ((N - 1.0) * c.real() + xi * N * ab.real());
    cplx dc = c * (-w + g * (N - 2.0) * z - g * zeta) +
              0.5 * g * z * (1.0 + zeta * z + 2.0 * N * xi * ab.real());
    cplx dab = ab * cplx(g * (N - 1.0) * z - g * zeta - w, d) +
               0.5 * g * xi * z * (2.0 * z * zeta / denom + 1.0) + g * xi * z * c * (N - 1.0);
    return {dz, dz, dc, dc, dab};
}

CorrelationState rhs_cascaded(const CorrelationState& s, const ModelParams& p,
                              const NoiseCoefficients& nc) {
    const double N = p.n_atoms, g = p.gamma(), w = p.pump, d = p.detuning;
    const double u = nc.u, v = nc.v;
    const double za = s.z_a, zb = s.z_b;
    const double re_ab = s.ab.real();

    CorrelationState r;
    r.z_a = -za * (g + w) - 2.0 * g * (N - 1.0) * s.aa.real() - g + w;
    r.aa = -s.aa * (g + w - g * za * (N - 2.0)) + 0.5 * g * za * (za + 1.0);
    r.z_b = -zb * (g * u + w) - 2.0 * g * (N - 1.0) * s.bb.real() - g + w + 4.0 * g * N * re_ab;
    r.bb = -s.bb * (u * g + w - g * zb * (N - 2.0)) + 0.5 * g * zb * (u * zb + 1.0) -
           2.0 * g * N * zb * re_ab;
    r.ab = s.ab * (0.5 * g * (N - 1.0) * (za + zb)) + s.ab * cplx(-v * g - w, d) -
           0.5 * g * zb * za - 0.5 * g * zb * (2.0 * s.aa * (N - 1.0) + 1.0);
    return r;
}

Dynamics make_dynamics(Scenario sc, const ModelParams& p) {
    validate(p, sc);
    Dynamics d;
    d.scenario = sc;
    d.params = p;
    d.xi = sc == Scenario::BiClassical ? p.feedback_strength : 1.0;
    d.nc = noise_coefficients(sc, p.feedback_strength);
    return d;
}

CorrelationState rhs(const Dynamics& d, const CorrelationState& s) {
    if (is_symmetric(d.scenario)) return rhs_symmetric(s, d.params, d.xi, d.nc.zeta);
    return rhs_cascaded(s, d.params, d.nc);
}

CorrelationState rhs(Scenario sc, const ModelParams& p, const CorrelationState& s) {
    return rhs(make_dynamics(sc, p), s);
}

int real_dim(Scenario sc) { return is_symmetric(sc) ? 4 : 6; }

Eigen::VectorXd pack(Scenario sc, const CorrelationState& s) {
    Eigen::VectorXd x(real_dim(sc));
    if (is_symmetric(sc))
        x << s.z_a, s.aa.real(), s.ab.real(), s.ab.imag();
    else
        x << s.z_a, s.z_b, s.aa.real(), s.bb.real(), s.ab.real(), s.ab.imag();
    return x;
}

CorrelationState unpack(Scenario sc, const Eigen::VectorXd& x) {
    if (is_symmetric(sc)) return CorrelationState::symmetric(x[0], x[1], {x[2], x[3]});
    return {x[0], x[1], x[2], x[3], {x[4], x[5]}};
}

Eigen::VectorXd rhs_real(const Dynamics& d, const Eigen::VectorXd& x) {
    return pack(d.scenario, rhs(d, unpack(d.scenario, x)));
}

Eigen::VectorXd rhs_real(Scenario sc, const ModelParams& p, const Eigen::VectorXd& x) {
    return rhs_real(make_dynamics(sc, p), x);
}

Eigen::MatrixXd jacobian(const Dynamics& d, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const double h = std::max(1e-7, 1e-7 * x.norm());
    Eigen::MatrixXd J(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (rhs_real(d, xp) - rhs_real(d, xm)) / (2.0 * h);
    }
    return J;
}

Eigen::MatrixXd jacobian(Scenario sc, const ModelParams& p, const CorrelationState& s) {
    return jacobian(make_dynamics(sc, p), pack(sc, s));
}

Eigen::MatrixXd jacobian_analytic(const Dynamics& d, const Eigen::VectorXd& x) {
    const ModelParams& p = d.params;
    const double N = p.n_atoms, g = p.gamma(), w = p.pump, dl = p.detuning;
    if (is_symmetric(d.scenario)) {
        const double xi = d.xi, zeta = d.nc.zeta;
        const double x2 = xi * xi, D = x2 * x2 - x2 + 2.0;
        const double z = x[0], c = x[1], r = x[2], q = x[3];
        const double K = g * (N - 1.0) * z - g * zeta - w;
        Eigen::Matrix4d J;
        J.row(0) << -w - g * zeta, -2.0 * g * (N - 1.0), -2.0 * g * xi * N, 0.0;
        J.row(1) << c * g * (N - 2.0) + 0.5 * g * (1.0 + 2.0 * zeta * z + 2.0 * N * xi * r),
            -w + g * (N - 2.0) * z - g * zeta, g * z * N * xi, 0.0;
        J.row(2) << r * g * (N - 1.0) + 0.5 * g * xi * (4.0 * zeta * z / D + 1.0) +
                        g * xi * c * (N - 1.0),
            g * xi * z * (N - 1.0), K, -dl;
        J.row(3) << q * g * (N - 1.0), 0.0, dl, K;
        return J;
    }
    const double u = d.nc.u, v = d.nc.v;
    const double za = x[0], zb = x[1], a = x[2], b = x[3], r = x[4], q = x[5];
    const double K = 0.5 * g * (N - 1.0) * (za + zb) - v * g - w;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(6, 6);
    J.row(0) << -(g + w), 0, -2.0 * g * (N - 1.0), 0, 0, 0;
    J.row(1) << 0, -(g * u + w), 0, -2.0 * g * (N - 1.0), 4.0 * g * N, 0;
    J.row(2) << a * g * (N - 2.0) + 0.5 * g * (2.0 * za + 1.0), 0, -(g + w - g * za * (N - 2.0)), 0, 0, 0;
    J.row(3) << 0, b * g * (N - 2.0) + 0.5 * g * (2.0 * u * zb + 1.0) - 2.0 * g * N * r, 0,
        -(u * g + w - g * zb * (N - 2.0)), -2.0 * g * N * zb, 0;
    J.row(4) << 0.5 * r * g * (N - 1.0) - 0.5 * g * zb,
        0.5 * r * g * (N - 1.0) - 0.5 * g * za - 0.5 * g * (2.0 * a * (N - 1.0) + 1.0),
        -g * zb * (N - 1.0), 0, K, -dl;
    J.row(5) << 0.5 * q * g * (N - 1.0), 0.5 * q * g * (N - 1.0), 0, 0, dl, K;
    return J;
}

Eigen::MatrixXd jacobian_analytic(Scenario sc, const ModelParams& p, const Eigen::VectorXd& x) {
    return jacobian_analytic(make_dynamics(sc, p), x);
}

namespace {

const char* component_name(Scenario sc, long i) {
    static const char* sym[] = {"z", "aa", "re_ab", "im_ab"};
    static const char* cas[] = {"z_a", "z_b", "aa", "bb", "re_ab", "im_ab"};
    if (is_symmetric(sc)) return i >= 0 && i < 4 ? sym[i] : "?";
    return i >= 0 && i < 6 ? cas[i] : "?";
}

}

Trajectory integrate(const Dynamics& d, const CorrelationState& s0, double t_final,
                     double dt_control, const IntegrateOptions& opt) {
    if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be nonnegative");
    Trajectory tr;
    Eigen::VectorXd y = pack(d.scenario, s0);
    const double scale = d.params.collective_rate;
    auto f = [&](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) { dx = rhs_real(d, x); };
    auto obs = [&](double t, const Eigen::VectorXd& x) {
        tr.t.push_back(t);
        tr.states.push_back(unpack(d.scenario, x));
    };
    if (t_final == 0.0) {
        obs(0.0, y);
    } else {
        try {
            auto st = detail::dopri5(f, y, 0.0, t_final, opt.h0 / scale, opt.rtol, opt.atol,
                                     opt.h_min / scale, opt.max_steps, dt_control, obs);
            tr.steps = st.steps;
        } catch (const detail::StepUnderflow& e) {
            std::ostringstream os;
            os << "step size underflow at t=" << e.t << " in stiff component "
               << component_name(d.scenario, e.component);
            throw IntegrationError(os.str());
        } catch (const std::runtime_error& e) {
            throw IntegrationError(e.what());
        }
    }
    tr.final_rhs_norm = rhs_real(d, y).norm();
    return tr;
}

Trajectory integrate(Scenario sc, const ModelParams& p, const CorrelationState& s0,
                     double t_final, double dt_control, const IntegrateOptions& opt) {
    return integrate(make_dynamics(sc, p), s0, t_final, dt_control, opt);
}

bool newton_solve(const Dynamics& d, Eigen::VectorXd& x, double tol, int max_iter,
                  int max_halvings, double* residual) {
    Eigen::VectorXd F = rhs_real(d, x);
    double r = F.norm();
    bool ok = false;
    for (int it = 0; it <= max_iter; ++it) {
        if (!std::isfinite(r)) break;
        if (r <= tol) {
            ok = true;
            break;
        }
        if (it == max_iter) break;
        Eigen::MatrixXd J = jacobian_analytic(d, x);
        Eigen::VectorXd dx = J.fullPivLu().solve(-F);
        if (!dx.allFinite()) break;
        double alpha = 1.0;
        bool accepted = false;
        for (int k = 0; k <= max_halvings; ++k) {
            Eigen::VectorXd xt = x + alpha * dx;
            Eigen::VectorXd Ft = rhs_real(d, xt);
            double rt = Ft.norm();
            if (std::isfinite(rt) && rt < r) {
                x = xt;
                F = Ft;
                r = rt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    if (residual) *residual = r;
    return ok;
}

namespace {

struct Root {
    Eigen::VectorXd x;
    double residual;
    Eigen::VectorXcd eig;
    bool stable;
    bool from_dark_seed = false;
};

bool admissible(Scenario sc, const Eigen::VectorXd& x) {
    CorrelationState s = unpack(sc, x);
    const double e = 1e-6;
    return std::abs(s.z_a) <= 1 + e && std::abs(s.z_b) <= 1 + e && std::abs(s.aa) <= 1 + e &&
           std::abs(s.bb) <= 1 + e && std::abs(s.ab) <= 1 + e;
}

std::vector<Eigen::VectorXd> lattice(Scenario sc) {
    std::vector<Eigen::VectorXd> out;
    for (int k = 0; k < 8; ++k) {
        double z = (k & 1) ? 0.6 : -0.4;
        double c = (k & 2) ? 0.15 : 0.02;
        double r = (k & 4) ? 0.1 : -0.1;
        CorrelationState s = is_symmetric(sc)
                                 ? CorrelationState::symmetric(z, c, {r, 0.5 * r})
                                 : CorrelationState{z, 0.5 * z + 0.1, c, 0.5 * c, {r, -0.5 * r}};
        out.push_back(pack(sc, s));
    }
    return out;
}

std::string describe(Scenario sc, const Root& r) {
    std::ostringstream os;
    os.precision(6);
    os << "[x=(";
    for (int i = 0; i < r.x.size(); ++i) os << (i ? "," : "") << r.x[i];
    os << ") eig=(";
    for (int i = 0; i < r.eig.size(); ++i)
        os << (i ? "," : "") << r.eig[i].real() << (r.eig[i].imag() >= 0 ? "+" : "") << r.eig[i].imag() << "i";
    os << ")" << (r.stable ? " stable" : " unstable") << "]";
    (void)sc;
    return os.str();
}

}

SteadyStateResult steady_state(const Dynamics& dyn, const SteadyOptions& opt) {
    const Scenario sc = dyn.scenario;
    const double scale = dyn.params.collective_rate;
    Dynamics d = dyn;
    d.params = dimensionless(dyn.params);
    const double w = d.params.pump, delta = d.params.detuning;

    std::vector<Eigen::VectorXd> seeds;
    CorrelationState lead = is_symmetric(sc)
                                ? closedform::leading_state_symmetric(w, delta, std::min(d.xi, 1.0))
                                : closedform::leading_state_cascaded(w, delta);
    seeds.push_back(pack(sc, lead));
    seeds.push_back(pack(sc, CorrelationState::inverted()));
    // Without pump the truncated equations also admit trapped subradiant roots;
    // the physical answer is the dark uncorrelated state, tried first.
    const bool unpumped = w == 0.0;
    if (unpumped) seeds.insert(seeds.begin(), pack(sc, CorrelationState::ground()));

    const double t_burn = std::min(opt.burn_in_rates * std::max(1.0, 1.0 / std::max(w, 1e-6)), 2e4);
    Eigen::VectorXd burned;
    std::string diag;
    try {
        auto tr = integrate(d, CorrelationState::inverted(), t_burn, 0.0);
        burned = pack(sc, tr.states.back());
        seeds.push_back(burned);
    } catch (const IntegrationError& e) {
        diag += std::string("burn-in failed: ") + e.what() + "; ";
    }
    for (auto& s : lattice(sc)) seeds.push_back(s);

    std::vector<Root> roots;
    double best = std::numeric_limits<double>::infinity();
    int tried = 0;
    int inadmissible = 0;
    for (auto& s0 : seeds) {
        ++tried;
        Eigen::VectorXd x = s0;
        double res = 0.0;
        bool ok = newton_solve(d, x, opt.residual_tol, opt.max_newton, opt.max_halvings, &res);
        if (std::isfinite(res)) best = std::min(best, res);
        if (!ok) continue;
        if (!admissible(sc, x)) {
            ++inadmissible;
            continue;
        }
        bool dup = false;
        for (auto& r : roots)
            if ((r.x - x).lpNorm<Eigen::Infinity>() <= 1e-7 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
                dup = true;
                break;
            }
        if (dup) continue;
        Root r{x, res, {}, false};
        Eigen::EigenSolver<Eigen::MatrixXd> es(jacobian_analytic(d, x), false);
        r.eig = es.eigenvalues();
        r.stable = (r.eig.real().array() < -opt.stability_tol).all();
        if (unpumped && tried == 1) {
            // The dark state sits on a line of fixed points (one per decaying ensemble), so
            // eigenvalues may vanish.
            int neutral = 0;
            for (int i = 0; i < r.eig.size(); ++i)
                if (r.eig[i].real() >= -opt.stability_tol) ++neutral;
            r.from_dark_seed = neutral <= (is_symmetric(sc) ? 1 : 2) && (r.eig.real().array() <= opt.stability_tol).all();
        }
        roots.push_back(r);
    }

    if (roots.empty()) {
        std::ostringstream os;
        os << "no convergent seed for " << to_string(sc) << " at w=" << w << " delta=" << delta
           << " (units of N gamma); best residual " << best * scale;
        throw SolverError(os.str());
    }
    std::vector<const Root*> stable;
    const Root* dark_root = nullptr;
    for (auto& r : roots) {
        if (r.from_dark_seed) dark_root = &r;
        if (r.stable || r.from_dark_seed) stable.push_back(&r);
    }
    if (stable.empty()) {
        std::ostringstream os;
        os << "no stable root for " << to_string(sc) << " at w=" << w << " delta=" << delta << ":";
        for (auto& r : roots) os << " " << describe(sc, r);
        throw SolverError(os.str());
    }

    const Root* pick = stable.front();
    if (dark_root) {
        pick = dark_root;
        if (!dark_root->stable) diag += "unpumped: dark state has neutral modes (line of trapped fixed points); ";
        if (stable.size() > 1)
            diag += "unpumped: dark state selected over " + std::to_string(stable.size() - 1) + " trapped roots; ";
    } else if (stable.size() > 1) {
        // Dynamical selection: follow the physical preparation from full inversion.
        Eigen::VectorXd target = burned.size() ? burned : pack(sc, CorrelationState::inverted());
        try {
            auto tr = integrate(d, CorrelationState::inverted(), 20.0 * t_burn, 0.0);
            target = pack(sc, tr.states.back());
        } catch (const IntegrationError&) {
        }
        double bestd = std::numeric_limits<double>::infinity();
        for (auto* r : stable) {
            double dist = (r->x - target).norm();
            if (dist < bestd) {
                bestd = dist;
                pick = r;
            }
        }
        diag += "multiple stable roots (" + std::to_string(stable.size()) +
                "); selected by integration from the inverted state; ";
    }
    if (inadmissible) diag += std::to_string(inadmissible) + " unphysical roots discarded; ";

    SteadyStateResult out;
    out.state = unpack(sc, pick->x);
    for (int i = 0; i < pick->eig.size(); ++i) out.jacobian_eigenvalues.push_back(pick->eig[i] * scale);
    std::sort(out.jacobian_eigenvalues.begin(), out.jacobian_eigenvalues.end(),
              [](cplx a, cplx b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() < b.imag(); });
    out.stable = true;
    out.residual_norm = pick->residual * scale;
    out.seeds_tried = tried;
    out.roots_found = static_cast<int>(roots.size());
    out.stable_roots = static_cast<int>(stable.size());
    out.multiple_stable = stable.size() > 1;
    out.diagnostics = diag;
    return out;
}

SteadyStateResult steady_state(Scenario sc, const ModelParams& p, const SteadyOptions& opt) {
    return steady_state(make_dynamics(sc, p), opt);
}

}
