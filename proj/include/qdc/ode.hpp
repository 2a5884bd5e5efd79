// ode.hpp - embedded Dormand-Prince 5(4) integrator with 4th-order dense output
//
// The stepper works on any Eigen column vector type. The right-hand side is a
// callable `void(double t, const Vec& y, Vec& dydt)` that must fully overwrite
// dydt. Steps are taken one at a time so callers can inspect the continuous
// solution (event location, sampling) between accepted steps.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace qdc {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-8;
    double h_initial = 0.0;   // 0 selects a starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-12;
    long max_steps = 50'000'000;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double failure_time)
        : std::runtime_error(what), time_(failure_time) {}
    double failure_time() const noexcept { return time_; }

private:
    double time_;
};

template <typename Vec, typename Rhs>
class DormandPrince45 {
public:
    DormandPrince45(Rhs rhs, double t0, Vec y0, OdeOptions opts = {})
        : rhs_(std::move(rhs)), opts_(opts) {
        reset(t0, std::move(y0));
    }

    // Restart from a new state, e.g. after a discontinuous jump.
    void reset(double t0, Vec y0) {
        t_ = t0;
        t_old_ = t0;
        y_ = std::move(y0);
        y_old_ = y_;
        const auto n = y_.size();
        for (Vec* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &ytmp_, &err_}) k->resize(n);
        for (Vec* r : {&r2_, &r3_, &r4_, &r5_}) r->resize(n);
        rhs_(t_, y_, k1_);
        ++evaluations_;
        if (h_ <= 0.0 || opts_.h_initial > 0.0) h_ = opts_.h_initial;
        if (h_ <= 0.0) h_ = initial_step();
    }

    double t() const noexcept { return t_; }
    double t_previous() const noexcept { return t_old_; }
    const Vec& y() const noexcept { return y_; }
    long steps() const noexcept { return accepted_; }
    long evaluations() const noexcept { return evaluations_; }
    const OdeOptions& options() const noexcept { return opts_; }
    void set_h_max(double h_max) noexcept { opts_.h_max = h_max; }

    // Take one accepted step, never advancing past t_limit. Returns the new time.
    double step(double t_limit) {
        if (t_limit <= t_) return t_;
        for (;;) {
            if (++attempts_ > opts_.max_steps) {
                throw IntegrationError(message("step budget exhausted"), t_);
            }
            double h = std::min({h_, opts_.h_max, t_limit - t_});
            const bool hits_limit = (t_ + h >= t_limit) || (t_limit - (t_ + h) < 1e-12 * std::abs(t_limit));
            if (hits_limit) h = t_limit - t_;
            if (h < opts_.h_min && !hits_limit) {
                throw IntegrationError(message("step size underflow"), t_);
            }
            const double err = trial_step(h);
            if (!std::isfinite(err)) {
                throw IntegrationError(message("non-finite state"), t_);
            }
            if (err <= 1.0) {
                t_old_ = t_;
                y_old_.swap(y_);
                y_.swap(ytmp_);
                t_ = hits_limit ? t_limit : t_ + h;
                build_dense(h);
                k1_.swap(k7_);  // FSAL
                ++accepted_;
                const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                // A step clipped by t_limit says nothing about the natural step size.
                const bool clipped = hits_limit && h < h_;
                h_ = clipped ? std::max(h_, h * fac) : h * fac;
                return t_;
            }
            h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }

    // Continuous solution on [t_previous(), t()].
    void interpolate(double t, Vec& out) const {
        const double h = t_ - t_old_;
        if (h <= 0.0) {
            out = y_;
            return;
        }
        const double th = (t - t_old_) / h;
        const double th1 = 1.0 - th;
        out = y_old_ + th * (r2_ + th1 * (r3_ + th * (r4_ + th1 * r5_)));
    }

    Vec interpolate(double t) const {
        Vec out(y_.size());
        interpolate(t, out);
        return out;
    }

private:
    // Dormand-Prince coefficients.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    double trial_step(double h) {
        ytmp_ = y_ + h * a21 * k1_;
        rhs_(t_ + c2 * h, ytmp_, k2_);
        ytmp_ = y_ + h * (a31 * k1_ + a32 * k2_);
        rhs_(t_ + c3 * h, ytmp_, k3_);
        ytmp_ = y_ + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
        rhs_(t_ + c4 * h, ytmp_, k4_);
        ytmp_ = y_ + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t_ + c5 * h, ytmp_, k5_);
        ytmp_ = y_ + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t_ + h, ytmp_, k6_);
        ytmp_ = y_ + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
        rhs_(t_ + h, ytmp_, k7_);
        evaluations_ += 6;
        err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y_[i]), std::abs(ytmp_[i]));
            const double r = std::abs(err_[i]) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, y_.size())));
    }

    void build_dense(double h) {
        // y_old_ holds the step start, y_ the step end, k1_ the start slope, k7_ the end slope.
        r2_ = y_ - y_old_;
        r3_ = h * k1_ - r2_;
        r4_ = r2_ - h * k7_ - r3_;
        r5_ = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
    }

    double initial_step() {
        // Hairer-Wanner heuristic.
        double d0 = 0.0, d1n = 0.0;
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            const double sc = opts_.atol + opts_.rtol * std::abs(y_[i]);
            d0 += std::norm(y_[i] / sc);
            d1n += std::norm(k1_[i] / sc);
        }
        const double n = static_cast<double>(std::max<Eigen::Index>(1, y_.size()));
        d0 = std::sqrt(d0 / n);
        d1n = std::sqrt(d1n / n);
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, opts_.h_max);
        ytmp_ = y_ + h0 * k1_;
        rhs_(t_ + h0, ytmp_, k2_);
        ++evaluations_;
        double d2 = 0.0;
        for (Eigen::Index i = 0; i < y_.size(); ++i) {
            const double sc = opts_.atol + opts_.rtol * std::abs(y_[i]);
            d2 += std::norm((k2_[i] - k1_[i]) / sc);
        }
        d2 = std::sqrt(d2 / n) / h0;
        const double dm = std::max(d1n, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        return std::min({100.0 * h0, h1, opts_.h_max});
    }

    std::string message(const char* what) const {
        std::ostringstream os;
        os << "ODE integration failed at t = " << t_ << ": " << what;
        return os.str();
    }

    Rhs rhs_;
    OdeOptions opts_;
    double t_ = 0.0, t_old_ = 0.0, h_ = 0.0;
    long accepted_ = 0, attempts_ = 0, evaluations_ = 0;
    Vec y_, y_old_, ytmp_, err_;
    Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_;
    Vec r2_, r3_, r4_, r5_;
};

template <typename Vec, typename Rhs>
DormandPrince45<Vec, Rhs> make_stepper(Rhs rhs, double t0, Vec y0, OdeOptions opts = {}) {
    return DormandPrince45<Vec, Rhs>(std::move(rhs), t0, std::move(y0), opts);
}

}  // namespace qdc
