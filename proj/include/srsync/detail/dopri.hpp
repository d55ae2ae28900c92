#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace srsync::detail {

struct DopriStats {
    long steps = 0;
    long rejected = 0;
    double h_last = 0.0;
};

// Thrown when the step size falls below h_min; `component` is the index with
// the largest scaled local error at the failing step.
struct StepUnderflow : std::runtime_error {
    long component;
    double t;
    StepUnderflow(long c, double tt)
        : std::runtime_error("step size underflow"), component(c), t(tt) {}
};

// Dormand-Prince 5(4) with FSAL and a PI-free standard controller.
// f(t, y, dy) writes dy; observe(t, y) is called at t0, every multiple of
// dt_sample (if > 0) and t1.
template <class Vec, class F, class Obs>
DopriStats dopri5(F&& f, Vec& y, double t0, double t1, double h0, double rtol, double atol,
                  double h_min, long max_steps, double dt_sample, Obs&& observe) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    DopriStats st;
    const long n = static_cast<long>(y.size());
    Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);
    double t = t0;
    double h = std::min(h0, t1 - t0);
    f(t, y, k1);
    observe(t, y);
    double next_sample = dt_sample > 0 ? t0 + dt_sample : t1;
    long sample_index = 1;

    while (t < t1) {
        if (st.steps >= max_steps) throw std::runtime_error("maximum step count exceeded");
        double target = std::min(next_sample, t1);
        bool clipped = false;
        if (t + h >= target) {
            h = target - t;
            clipped = true;
        }
        tmp = y + h * a21 * k1;
        f(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, tmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double acc = 0.0;
        long worst = 0;
        double worst_val = -1.0;
        for (long i = 0; i < n; ++i) {
            double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double r = std::abs(err[i]) / sc;
            acc += r * r;
            if (r > worst_val) {
                worst_val = r;
                worst = i;
            }
        }
        double en = std::sqrt(acc / static_cast<double>(n));
        if (!std::isfinite(en)) en = 1e10;

        if (en <= 1.0) {
            t = clipped ? target : t + h;
            y = ynew;
            k1 = k7;
            ++st.steps;
            st.h_last = h;
            if (clipped && target == next_sample && target < t1) {
                observe(t, y);
                ++sample_index;
                next_sample = t0 + sample_index * dt_sample;
            }
            double fac = en > 0 ? 0.9 * std::pow(en, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
        } else {
            ++st.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            if (h < h_min) throw StepUnderflow(worst, t);
        }
    }
    observe(t, y);
    return st;
}

}
