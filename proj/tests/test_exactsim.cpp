#include "srsync/exactsim.hpp"
#include "srsync/meanfield.hpp"

#include <doctest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include <random>

using namespace srsync;
using namespace srsync::exact;

namespace {

const Scenario kAll[] = {Scenario::BiQuantum, Scenario::UniQuantum, Scenario::UniClassical, Scenario::BiClassical};

// gamma = 1 with n atoms per ensemble.
ModelParams unit_gamma(Scenario s, int n, double w, double d, double xi = 0.0) {
    return ModelParams::make(s, n, static_cast<double>(n), w, d, xi);
}

// Single-atom state in the {g, e} basis with <sigma_z> = z and <sigma^+> = s.
Eigen::Matrix2cd qubit(double z, cplx s) {
    Eigen::Matrix2cd r;
    r << 0.5 * (1 - z), s, std::conj(s), 0.5 * (1 + z);
    return r;
}

// Product of identical qubits within each ensemble; site 0 varies fastest.
DensityMatrix coherent_product(const Layout& l, const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(1, 1);
    for (int k = 0; k < l.n_a + l.n_b; ++k) {
        Eigen::MatrixXcd next = Eigen::kroneckerProduct(k < l.n_a ? a : b, rho);
        rho = next;
    }
    return {l, rho};
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) { return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size()); }

}

TEST_CASE("Liouvillian preserves trace and hermiticity") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    for (Scenario s : kAll) {
        Liouvillian L = build_liouvillian(s, unit_gamma(s, 2, 0.7, 0.4, 0.6), 2);
        const int d = L.layout.dim();
        Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
        Eigen::VectorXcd tr = Eigen::VectorXcd(L.L.adjoint() * vec(I));
        double scale = 0.0;
        for (int k = 0; k < L.L.outerSize(); ++k)
            for (SpMat::InnerIterator it(L.L, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
        CHECK(tr.lpNorm<Eigen::Infinity>() <= 1e-12 * scale);

        Eigen::MatrixXcd rho(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) rho(i, j) = cplx(g(rng), g(rng));
        Eigen::VectorXcd a = L.L * vec(rho);
        Eigen::MatrixXcd ra = Eigen::Map<Eigen::MatrixXcd>(a.data(), d, d);
        Eigen::MatrixXcd rh = rho.adjoint();
        Eigen::VectorXcd b = L.L * vec(rh);
        Eigen::MatrixXcd rb = Eigen::Map<Eigen::MatrixXcd>(b.data(), d, d);
        CHECK((rb - ra.adjoint()).norm() <= 1e-12 * ra.norm());
    }
}

TEST_CASE("two-atom pumped superradiance matches the analytic steady state") {
    // One atom per ensemble, gamma = 1, w = 0.5, resonant.
    ModelParams p = unit_gamma(Scenario::BiQuantum, 1, 0.5, 0.0);
    DensityMatrix r = steady_state_exact(build_liouvillian(Scenario::BiQuantum, p, 1));
    CorrelationState s = expectations(r);
    CHECK(s.z_a == doctest::Approx(-5.0 / 23.0).epsilon(1e-10));
    CHECK(s.z_b == doctest::Approx(-5.0 / 23.0).epsilon(1e-10));
    CHECK(s.ab.real() == doctest::Approx(-2.0 / 23.0).epsilon(1e-10));
    CHECK(std::abs(s.ab.imag()) < 1e-12);
    CHECK(check_invariants(r).ok());
}

TEST_CASE("exact generator equals the cumulant equations on product states") {
    // Every cumulant beyond the first vanishes for product states, so the
    // truncated equations are exact there at any N.
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (Scenario sc : kAll)
        for (int n = 1; n <= 3; ++n)
            for (int trial = 0; trial < 3; ++trial) {
                ModelParams p = unit_gamma(sc, n, 0.3 + 0.4 * trial, 0.25 * trial - 0.2, 0.6);
                Liouvillian L = build_liouvillian(sc, p, n);
                double za = u(rng), zb = u(rng);
                double ra = 0.5 * std::sqrt(1 - za * za) * std::abs(u(rng));
                double rb = 0.5 * std::sqrt(1 - zb * zb) * std::abs(u(rng));
                if (is_symmetric(sc)) {
                    // The symmetric equations assume A <-> B exchange symmetry; only the phases differ.
                    zb = za;
                    rb = ra;
                }
                DensityMatrix rho = coherent_product(L.layout, qubit(za, std::polar(ra, 3.0 * u(rng))),
                                                     qubit(zb, std::polar(rb, 3.0 * u(rng))));
                CorrelationState s = expectations(rho);
                CorrelationState f = rhs(sc, p, s);
                Operators op(L.layout);
                CHECK(expectation_rate(L, rho, op.sigma_z(0)).real() == doctest::Approx(f.z_a).epsilon(1e-10));
                CHECK(expectation_rate(L, rho, op.sigma_z(n)).real() == doctest::Approx(f.z_b).epsilon(1e-10));
                SpMat ab = op.sigma_plus(0) * op.sigma_minus(n);
                CHECK(std::abs(expectation_rate(L, rho, ab) - f.ab) < 1e-10);
                if (n > 1) {
                    SpMat aa = op.sigma_plus(0) * op.sigma_minus(1);
                    SpMat bb = op.sigma_plus(n) * op.sigma_minus(n + 1);
                    CHECK(std::abs(expectation_rate(L, rho, aa) - f.aa) < 1e-10);
                    CHECK(std::abs(expectation_rate(L, rho, bb) - f.bb) < 1e-10);
                }
            }
}

TEST_CASE("eliminated cavity agrees with the explicit bad cavity") {
    // Atomic expectations are bounded by one; the finite-kappa offset is measured on that scale.
    ModelParams p = unit_gamma(Scenario::UniQuantum, 1, 0.5, 0.8);
    CorrelationState el = expectations(steady_state_exact(build_liouvillian(Scenario::UniQuantum, p, 1)));
    std::vector<double> diff;
    for (double kappa : {0.0, 150.0, 500.0}) {
        Mode m;
        m.kind = Mode::FullCavity;
        m.kappa = kappa;
        DensityMatrix r = steady_state_full_cavity(Scenario::UniQuantum, p, 1, m);
        CHECK(check_invariants(r).ok());
        CHECK(top_fock_population(r) < 1e-4);
        CorrelationState fc = expectations(r);
        diff.push_back(std::max({std::abs(fc.z_a - el.z_a), std::abs(fc.z_b - el.z_b), std::abs(fc.ab - el.ab)}));
    }
    CHECK(diff[0] <= 0.05);
    CHECK(diff[1] < diff[0]);
    CHECK(diff[2] < diff[1]);
    // Adiabatic corrections are first order in 1/kappa (default kappa = 50 here).
    CHECK(diff[0] / diff[2] == doctest::Approx(10.0).epsilon(0.3));

    ModelParams q = unit_gamma(Scenario::BiQuantum, 1, 0.5, 0.3);
    CorrelationState eb = expectations(steady_state_exact(build_liouvillian(Scenario::BiQuantum, q, 1)));
    Mode m;
    m.kind = Mode::FullCavity;
    CorrelationState fb = expectations(steady_state_full_cavity(Scenario::BiQuantum, q, 1, m));
    CHECK(std::abs(fb.z_a - eb.z_a) <= 0.05);
    CHECK(std::abs(fb.ab - eb.ab) <= 0.05);
}

TEST_CASE("unpumped exact steady state is the all-ground state") {
    for (auto [sc, xi] : {std::pair{Scenario::UniQuantum, 0.0}, std::pair{Scenario::BiClassical, 0.0}}) {
        DensityMatrix r = steady_state_exact(build_liouvillian(sc, unit_gamma(sc, 1, 0.0, 0.3, xi), 1));
        CHECK(std::abs(r.rho(0, 0) - 1.0) < 1e-9);
        CorrelationState s = expectations(r, 1e-9);
        CHECK(s.z_a == doctest::Approx(-1.0));
        CHECK(s.z_b == doctest::Approx(-1.0));
    }
    // Resonant symmetric decay has a dark singlet, so the kernel is not one-dimensional.
    CHECK_THROWS_AS(steady_state_exact(build_liouvillian(Scenario::BiQuantum, unit_gamma(Scenario::BiQuantum, 1, 0.0, 0.0), 1)),
                    ExactError);
}

TEST_CASE("steady state is the long-time limit of the evolution") {
    for (Scenario sc : {Scenario::BiQuantum, Scenario::UniClassical}) {
        ModelParams p = unit_gamma(sc, 1, 0.5, 0.3);
        Liouvillian L = build_liouvillian(sc, p, 1);
        DensityMatrix ss = steady_state_exact(L);
        DensityMatrix r0 = product_state(L.layout, {1.0, 1.0});
        DensityMatrix same = evolve(r0, L, 0.0);
        CHECK((same.rho - r0.rho).norm() < 1e-14);
        DensityMatrix mid = evolve(r0, L, 2.0);
        CHECK(check_invariants(mid).ok());
        DensityMatrix late = evolve(r0, L, 200.0);
        CHECK((late.rho - ss.rho).cwiseAbs().maxCoeff() < 1e-6);
    }
    // Sparse propagation path.
    ModelParams p = unit_gamma(Scenario::UniQuantum, 2, 0.6, 0.4);
    Liouvillian L = build_liouvillian(Scenario::UniQuantum, p, 2);
    DensityMatrix r = evolve(product_state(L.layout, {1, 1, 1, 1}), L, 3.0);
    InvariantReport inv = check_invariants(r);
    CHECK(inv.trace_error < 1e-9);
    CHECK(inv.hermiticity_error < 1e-10);
    CHECK(inv.min_eigenvalue > -1e-9);
}

TEST_CASE("steady states satisfy the density-matrix invariants") {
    for (Scenario sc : kAll)
        for (int n : {1, 2}) {
            DensityMatrix r = steady_state_exact(build_liouvillian(sc, unit_gamma(sc, n, 0.8, 0.5, 0.6), n));
            InvariantReport inv = check_invariants(r);
            CHECK(inv.ok());
            CorrelationState s = expectations(r);
            CHECK(std::abs(s.z_a) <= 1.0);
            CHECK(std::abs(s.ab) <= 1.0);
        }
}

TEST_CASE("reference states") {
    Layout l{2, 2, 0, 0};
    CorrelationState m = expectations(maximally_mixed(l));
    CHECK(std::abs(m.z_a) < 1e-15);
    CHECK(std::abs(m.aa) < 1e-15);
    CHECK(std::abs(m.ab) < 1e-15);
    CorrelationState e = expectations(product_state(l, {1, 1, 1, 1}));
    CHECK(e.z_a == 1.0);
    CHECK(e.z_b == 1.0);
    CorrelationState c = expectations(coherent_product(l, qubit(0.2, {0.3, 0.1}), qubit(-0.4, {0.0, 0.2})));
    CHECK(c.z_a == doctest::Approx(0.2));
    CHECK(std::abs(c.aa - cplx(0.1, 0.0)) < 1e-14);
    CHECK(std::abs(c.ab - cplx(0.3, 0.1) * cplx(0.0, -0.2)) < 1e-14);
    CHECK_THROWS_AS(expectations(product_state(l, {0.2, 0.7, 0.5, 0.5})), ExactError);
    CHECK_THROWS_AS(product_state(l, {0.2}), std::invalid_argument);
}

TEST_CASE("dimension guards") {
    ModelParams p = unit_gamma(Scenario::BiQuantum, 5, 0.5, 0.0);
    CHECK_THROWS_AS(build_liouvillian(Scenario::BiQuantum, p, 5), ExactError);
    Mode m;
    m.kind = Mode::FullCavity;
    CHECK_THROWS_AS(build_liouvillian(Scenario::UniQuantum, p, 3, m), ExactError);
    m.n_max = 7;
    CHECK_THROWS_AS(build_liouvillian(Scenario::UniQuantum, p, 1, m), ExactError);
}
