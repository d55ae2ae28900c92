#include "srsync/closedform.hpp"
#include "srsync/meanfield.hpp"

#include <doctest.h>

#include <cmath>

using namespace srsync;
using namespace srsync::closedform;

namespace {

ModelParams mk(Scenario s, double w, double d, double xi = 0.0) {
    return ModelParams::make(s, 10000, 1.0, w, d, xi);
}

double width(Scenario s, double w, double d, double xi = 0.0) {
    return linewidth_leading(s, mk(s, w, d, xi))[0].value;
}

}

TEST_CASE("leading-order polarization") {
    CHECK(sigma_z_leading(Scenario::BiQuantum, mk(Scenario::BiQuantum, 0.5, 0.3)).first == doctest::Approx(0.34));
    CHECK(sigma_z_leading(Scenario::BiClassical, mk(Scenario::BiClassical, 0.5, 0.0, 0.6)).first ==
          doctest::Approx(0.3125));
    for (Scenario s : {Scenario::BiQuantum, Scenario::UniQuantum, Scenario::UniClassical, Scenario::BiClassical}) {
        auto z = sigma_z_leading(s, mk(s, 1.2, 1.5, 0.6));
        CHECK(z.first == 1.0);
        CHECK(z.second == 1.0);
    }
    // Units: the same point in Hz.
    ModelParams hz = ModelParams::make(Scenario::BiQuantum, 10000, 1e6, 5e5, 3e5);
    CHECK(sigma_z_leading(Scenario::BiQuantum, hz).first == doctest::Approx(0.34));
}

TEST_CASE("leading-order linewidths") {
    CHECK(width(Scenario::BiQuantum, 0.5, 0.7) == doctest::Approx(1.5));
    CHECK(width(Scenario::BiClassical, 0.5, 0.5, 0.6) == doctest::Approx(1.8825));
    auto uc = linewidth_leading(Scenario::UniClassical, mk(Scenario::UniClassical, 0.5, 0.8));
    auto uq = linewidth_leading(Scenario::UniQuantum, mk(Scenario::UniQuantum, 0.5, 0.8));
    REQUIRE(uc.size() == 2);
    CHECK(uc[1].value == doctest::Approx(3.5));
    CHECK(uq[1].value == doctest::Approx(1.5));
    CHECK(uq[0].value == doctest::Approx(1.5));
    CHECK(uq[1].center == doctest::Approx(-0.8));
}

TEST_CASE("synchronized slave width is an order-N sentinel") {
    auto uq = linewidth_leading(Scenario::UniQuantum, mk(Scenario::UniQuantum, 0.5, 0.25));
    CHECK(uq[1].divergent);
    CHECK(uq[1].coefficient > 0.0);
    CHECK_FALSE(uq[0].divergent);
}

TEST_CASE("pole distance") {
    CHECK(pole_distance_leading(mk(Scenario::BiQuantum, 0.5, 1.0), Scenario::BiQuantum) ==
          doctest::Approx(std::sqrt(0.75)));
    CHECK(pole_distance_leading(mk(Scenario::BiQuantum, 0.5, 0.5), Scenario::BiQuantum) == 0.0);
    CHECK(pole_distance_leading(mk(Scenario::BiClassical, 0.5, 0.45, 0.9), Scenario::BiClassical) == 0.0);
    CHECK(pole_distance_leading(mk(Scenario::BiClassical, 0.5, 0.3, 0.9), Scenario::BiClassical) == 0.0);
    double r = pole_distance_leading(mk(Scenario::BiQuantum, 0.5, 500.0), Scenario::BiQuantum) / 500.0;
    CHECK(r == doctest::Approx(1.0).epsilon(1e-5));
    CHECK_THROWS_AS(pole_distance_leading(mk(Scenario::UniQuantum, 0.5, 1.0), Scenario::UniQuantum),
                    std::invalid_argument);
}

TEST_CASE("critical pumping") {
    CHECK(critical_pumping(Scenario::BiQuantum, 0.0, 1.0) == 2.0);
    CHECK(critical_pumping(Scenario::BiClassical, 0.0, 0.6) == doctest::Approx(1.6));
    CHECK(critical_pumping(Scenario::BiQuantum, 1.0, 1.0) == doctest::Approx(1.0));
    CHECK(critical_pumping(Scenario::UniQuantum, 0.0, 0.0) == 1.0);
    CHECK(critical_pumping(Scenario::UniClassical, 0.3, 0.0) == 1.0);
}

TEST_CASE("coupling coefficients") {
    auto c0 = coupling_coefficients(0.0);
    CHECK(c0.kappa_tilde == 1.0);
    CHECK(c0.n_plus == 0.0);
    CHECK(c0.n_minus == 0.0);
    CHECK(c0.zeta == 1.0);
    auto c = coupling_coefficients(0.6);
    CHECK(c.kappa_tilde == doctest::Approx(1.5625));
    CHECK(c.n_plus == doctest::Approx(0.05625));
    CHECK(c.n_minus == doctest::Approx(0.225));
    CHECK(c.zeta == doctest::Approx(1.3825));
    CHECK(c.kappa_plus == doctest::Approx(1.5625 * 1.6));
    CHECK(c.kappa_minus == doctest::Approx(1.5625 * 0.4));
    double prev = coupling_coefficients(0.9).zeta;
    for (double xi = 0.901; xi <= 0.999; xi += 0.001) {
        double z = coupling_coefficients(xi).zeta;
        CHECK(z > prev);
        prev = z;
    }
    CHECK_THROWS_AS(coupling_coefficients(1.0), std::invalid_argument);
}

TEST_CASE("stability eigenvalues") {
    auto [a, b] = stability_eigenvalues(2.0, 0.5);
    CHECK(a == doctest::Approx(-1.5));
    CHECK(b == doctest::Approx(-0.5));
    auto [c, d] = stability_eigenvalues(3.0, 0.0);
    CHECK(c == d);
    CHECK(stability_eigenvalues(3.0, 1.0).second == 0.0);
}

TEST_CASE("phase boundaries") {
    CHECK(sync_line(Scenario::BiQuantum, 0.0).slope == 1.0);
    CHECK(sync_line(Scenario::BiClassical, 0.6).slope == 0.6);
    CHECK(sync_line(Scenario::UniClassical, 0.6).slope == 1.0);
    CHECK(quarter_circle(Scenario::BiQuantum, 0.0).radius == 1.0);
    CHECK(quarter_circle(Scenario::BiClassical, 0.6).radius == 0.6);
    CHECK(synchronized(Scenario::BiQuantum, 0.5, 0.3, 1.0));
    CHECK_FALSE(synchronized(Scenario::BiQuantum, 0.5, 0.7, 1.0));
    CHECK(synchronized(Scenario::BiQuantum, 1.5, 0.5, 1.0));
    CHECK_FALSE(synchronized(Scenario::BiQuantum, 1.9, 0.6, 1.0));
    CHECK_FALSE(synchronized(Scenario::BiClassical, 0.5, 0.35, 0.6));
}

TEST_CASE("piecewise formulas are continuous at their branch points") {
    const double eps = 1e-9;
    for (double w : {0.2, 0.5, 0.8}) {
        for (Scenario s : {Scenario::BiQuantum, Scenario::BiClassical}) {
            double xi = s == Scenario::BiClassical ? 0.6 : 1.0;
            double dc = w * xi;
            double lo = dc * (1 - eps), hi = dc * (1 + eps);
            auto z = [&](double d) { return sigma_z_leading(s, mk(s, w, d, s == Scenario::BiClassical ? xi : 0.0)).first; };
            auto g = [&](double d) { return width(s, w, d, s == Scenario::BiClassical ? xi : 0.0); };
            CHECK(std::abs(z(lo) - z(hi)) < 1e-6);
            CHECK(std::abs(g(lo) - g(hi)) < 1e-6);
            CHECK(std::abs(pole_distance_leading(mk(s, w, lo, s == Scenario::BiClassical ? xi : 0.0), s) -
                           pole_distance_leading(mk(s, w, hi, s == Scenario::BiClassical ? xi : 0.0), s)) < 1e-4);
        }
        double lo = w * (1 - eps), hi = w * (1 + eps);
        CHECK(std::abs(cascaded_slave_z(w, lo) - cascaded_slave_z(w, hi)) < 1e-6);
    }
}

TEST_CASE("classical formulas reduce to the quantum ones at zeta = xi = 1") {
    // Literal classical width with zeta and xi as free symbols.
    auto classical_width = [](double w, double d, double xi, double zeta) {
        if (d < w * xi) return zeta + (w - std::sqrt(w * w * xi * xi - d * d * (1 - xi * xi))) / (1 - xi * xi);
        return zeta + w;
    };
    const double xi = 1.0 - 1e-8;
    for (double w : {0.3, 0.6})
        for (double d : {0.0, 0.1, 0.25, 0.9}) {
            CHECK(classical_width(w, d, xi, 1.0) == doctest::Approx(width(Scenario::BiQuantum, w, d)).epsilon(1e-6));
            CHECK(symmetric_z(w, d, xi) == doctest::Approx(symmetric_z(w, d, 1.0)).epsilon(1e-6));
            CHECK(symmetric_z(w, d, 1.0) == doctest::Approx(d < w ? (w * w + d * d) / (2 * w) : w));
        }
}

TEST_CASE("classical symmetric linewidth always exceeds the quantum one") {
    for (double xi : {0.1, 0.3, 0.6, 0.9})
        for (double w = 0.02; w < 1.0; w += 0.04)
            for (double d = 0.0; d < 1.0; d += 0.04) CHECK(width(Scenario::BiClassical, w, d, xi) > width(Scenario::BiQuantum, w, d));
}

TEST_CASE("cascaded slave polarization solves its leading-order balance") {
    for (double w : {0.2, 0.5, 0.8})
        for (double d : {0.0, 0.1, 0.5 * w, 0.9 * w}) {
            double z = cascaded_slave_z(w, d);
            CHECK(z > 0.0);
            CHECK(z < w);
            double s = 0.5 * (z - w);
            CHECK((1 - z) * (s * s + d * d) == doctest::Approx(z * w * (1 - w)).epsilon(1e-10));
        }
    CHECK(cascaded_slave_z(0.5, 0.7) == 0.5);
}

TEST_CASE("leading-order state is a good seed for the numeric root") {
    for (Scenario s : {Scenario::BiQuantum, Scenario::UniQuantum, Scenario::UniClassical, Scenario::BiClassical})
        for (double d : {0.1, 0.35, 0.9}) {
            ModelParams p = mk(s, 0.5, d, 0.6);
            CorrelationState lead = leading_state(s, p);
            CorrelationState num = steady_state(s, p).state;
            CHECK(std::abs(lead.z_a - num.z_a) < 2e-2);
            CHECK(std::abs(lead.z_b - num.z_b) < 2e-2);
            CHECK(std::abs(lead.ab - num.ab) < 2e-2);
        }
}
