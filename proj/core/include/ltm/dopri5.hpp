#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ltm/errors.hpp"
#include "ltm/geometry.hpp"

namespace ltm::ode {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.0;          // 0 = no cap (callers usually set one)
    double dense_resolution = 64.0; // stored samples per time unit in flow()

    void check() const {
        if (!(rel_tol > 0.0 && rel_tol <= 1e-2) || !(abs_tol > 0.0 && abs_tol <= 1e-2))
            throw ValidationError("integrator tolerances must lie in (0, 1e-2]");
        if (max_step < 0.0) throw ValidationError("max_step must be positive");
    }
};

/// One accepted step with its quartic dense-output polynomial.
struct StepRecord {
    double t0 = 0.0, t1 = 0.0;
    Vec2 y0, y1;
    std::array<Vec2, 5> rcont;

    double h() const { return t1 - t0; }

    Vec2 eval(double t) const {
        const double s = (t - t0) / (t1 - t0);
        const double s1 = 1.0 - s;
        return rcont[0] +
               s * (rcont[1] + s1 * (rcont[2] + s * (rcont[3] + s1 * rcont[4])));
    }
};

/// Dormand-Prince 5(4) embedded pair with PI step-size control and the
/// classic 4th-order continuous extension.
template <class RHS>
class Dopri5 {
  public:
    Dopri5(RHS rhs, const IntegratorConfig& cfg, double t0, Vec2 y0)
        : rhs_(rhs), cfg_(cfg), t_(t0), y_(y0) {
        cfg_.check();
        k1_ = rhs_(t_, y_);
        n_rhs_ = 1;
        h_ = initial_step();
    }

    double time() const { return t_; }
    Vec2 state() const { return y_; }
    long evaluations() const { return n_rhs_; }

    /// Advance one accepted step, not overshooting t_end. Returns the step
    /// record (valid until the next call).
    const StepRecord& step_to(double t_end) {
        const double uround = std::numeric_limits<double>::epsilon();
        int rejected_in_a_row = 0;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            double h = h_;
            if (cfg_.max_step > 0.0) h = std::min(h, cfg_.max_step);
            h = std::min(h, t_end - t_);
            if (h <= std::abs(t_) * uround * 4.0 && t_end - t_ > std::abs(t_) * uround * 16.0)
                throw IntegrationError("step size underflow", t_, y_);
            const bool clipped = (h == t_end - t_);

            const double err = try_step(h);
            const double expo = 0.2 - kBeta * 0.75;
            double fac = std::pow(err, expo) * std::pow(fac_old_, -kBeta);
            fac = std::max(kFacMin, std::min(kFacMax, fac / kSafe));

            if (err <= 1.0) {
                fac_old_ = std::max(err, 1e-4);
                make_dense(h);
                rec_.t0 = t_;
                rec_.t1 = clipped ? t_end : t_ + h;
                rec_.y0 = y_;
                rec_.y1 = ynew_;
                t_ = rec_.t1;
                y_ = ynew_;
                k1_ = k7_;  // FSAL
                if (!clipped) h_ = h / fac;
                return rec_;
            }
            h_ = h / std::min(1.0 / kFacMin, std::pow(err, expo) / kSafe);
            if (++rejected_in_a_row > 60)
                throw IntegrationError("too many rejected steps", t_, y_);
        }
        throw IntegrationError("integrator stalled", t_, y_);
    }

  private:
    static constexpr double kSafe = 0.9;
    static constexpr double kFacMin = 0.2;   // h may grow at most 1/kFacMin per step
    static constexpr double kFacMax = 10.0;  // and shrink at most 1/kFacMax
    static constexpr double kBeta = 0.04;

    double error_norm(Vec2 e, Vec2 ya, Vec2 yb) const {
        const double sx = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(ya.x), std::abs(yb.x));
        const double sy = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(ya.y), std::abs(yb.y));
        const double ex = e.x / sx;
        const double ey = e.y / sy;
        return std::sqrt(0.5 * (ex * ex + ey * ey));
    }

    double initial_step() {
        double h1 = cfg_.max_step > 0.0 ? cfg_.max_step : 1.0;
        const double d0 = norm(y_);
        const double d1 = norm(k1_);
        double h0 = (d1 > 1e-12) ? 0.01 * (d0 + cfg_.abs_tol) / d1 : 1e-6;
        h0 = std::min(h0, h1);
        const Vec2 y1 = y_ + h0 * k1_;
        const Vec2 f1 = rhs_(t_ + h0, y1);
        ++n_rhs_;
        const double d2 = norm(f1 - k1_) / h0;
        double h;
        if (std::max(d1, d2) < 1e-15) {
            h = std::max(1e-6, h0 * 1e-3);
        } else {
            h = std::pow(0.01 / std::max(d1, d2), 0.2);
        }
        return std::min({100.0 * h0, h, h1});
    }

    /// One trial step of size h from (t_, y_); returns the scaled error norm.
    double try_step(double h) {
        constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                         a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                         a75 = -2187.0 / 6784, a76 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        k2_ = rhs_(t_ + c2 * h, y_ + h * (a21 * k1_));
        k3_ = rhs_(t_ + c3 * h, y_ + h * (a31 * k1_ + a32 * k2_));
        k4_ = rhs_(t_ + c4 * h, y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_));
        k5_ = rhs_(t_ + c5 * h, y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_));
        k6_ = rhs_(t_ + h, y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_));
        ynew_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        k7_ = rhs_(t_ + h, ynew_);
        n_rhs_ += 6;

        const Vec2 err = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        if (!std::isfinite(ynew_.x) || !std::isfinite(ynew_.y))
            throw IntegrationError("non-finite state", t_, y_);
        return error_norm(err, y_, ynew_);
    }

    void make_dense(double h) {
        constexpr double d1 = -12715105075.0 / 11282082432.0;
        constexpr double d3 = 87487479700.0 / 32700410799.0;
        constexpr double d4 = -10690763975.0 / 1880347072.0;
        constexpr double d5 = 701980252875.0 / 199316789632.0;
        constexpr double d6 = -1453857185.0 / 822651844.0;
        constexpr double d7 = 69997945.0 / 29380423.0;

        const Vec2 ydiff = ynew_ - y_;
        const Vec2 bspl = h * k1_ - ydiff;
        rec_.rcont[0] = y_;
        rec_.rcont[1] = ydiff;
        rec_.rcont[2] = bspl;
        rec_.rcont[3] = ydiff - h * k7_ - bspl;
        rec_.rcont[4] = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
    }

    RHS rhs_;
    IntegratorConfig cfg_;
    double t_;
    Vec2 y_;
    Vec2 k1_, k2_, k3_, k4_, k5_, k6_, k7_, ynew_;
    double h_ = 1e-6;
    double fac_old_ = 1e-4;
    StepRecord rec_;
    long n_rhs_ = 0;
};

/// Integrate rhs from (t0, y0) to t1, invoking `observe(const StepRecord&)`
/// after every accepted step. Returns the final state.
template <class RHS, class Observer>
Vec2 integrate(RHS rhs, const IntegratorConfig& cfg, double t0, Vec2 y0, double t1,
               Observer&& observe) {
    if (t1 < t0) throw ValidationError("integration horizon must be non-negative");
    if (t1 == t0) return y0;
    Dopri5<RHS> stepper(rhs, cfg, t0, y0);
    while (true) {
        const StepRecord& rec = stepper.step_to(t1);
        observe(rec);
        if (rec.t1 >= t1) break;
    }
    return stepper.state();
}

}  // namespace ltm::ode
