#include "qdc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qdc {

namespace {

using VectorXcd = Eigen::VectorXcd;

// Tr(A B) without forming the product.
std::complex<double> trace_product(const CMatrixd& A, const CMatrixd& B) {
    return A.cwiseProduct(B.transpose()).sum();
}

void check_grid(const std::vector<double>& t) {
    if (t.empty()) throw std::invalid_argument("evolve: empty sample grid");
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i])) throw std::invalid_argument("evolve: non-finite sample time");
        if (i > 0 && t[i] < t[i - 1]) throw std::invalid_argument("evolve: sample grid must be nondecreasing");
    }
}

// Signal used for Rabi/DPRF curves: the cavity channel, or the emitter channel
// when the cavity is decoupled.
double rf_signal(const EmissionCount& e, const SystemParams& p) { return p.g > 0.0 ? e.cavity : e.emitter; }

double single_pulse_signal(const SystemParams& params, double area, double fwhm, double t1,
                           const ScanOptions& opts) {
    if (area == 0.0) return 0.0;
    const DriveField drive = DriveField::pulse_train({make_pulse(area, fwhm)}, opts.target);
    const double t_end = drive.pulses_end() + kEmissionTailLifetimes * t1;
    return rf_signal(emitted_photons(params, drive, t_end, opts.evolve), params);
}

}  // namespace

std::vector<double> linspace(double start, double stop, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = start;
        return v;
    }
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return v;
}

EvolutionResult evolve(const CMatrixd& initial, const SystemParams& params, const DriveField& drive,
                       const std::vector<double>& sample_times, const EvolveOptions& opts) {
    check_grid(sample_times);
    const LindbladModel model(params, drive);
    const int d = model.dim();
    if (initial.rows() != d || initial.cols() != d) {
        throw std::invalid_argument("evolve: initial state dimension mismatch");
    }
    const int dd = d * d;
    const int i_em = model.channel_index(Channel::emitter);
    const int i_cav = model.channel_index(Channel::cavity);

    VectorXcd y0 = VectorXcd::Zero(dd + 2);
    Eigen::Map<CMatrixd>(y0.data(), d, d) = initial;

    auto rhs = [&model, d, dd, i_em, i_cav, rho = CMatrixd(d, d), drho = CMatrixd(d, d),
                K = CMatrixd(d, d)](double t, const VectorXcd& y, VectorXcd& dy) mutable {
        rho = Eigen::Map<const CMatrixd>(y.data(), d, d);
        model.apply(t, rho, drho, K);
        Eigen::Map<CMatrixd>(dy.data(), d, d) = drho;
        const auto& ch = model.channels();
        dy[dd] = i_em >= 0 ? trace_product(ch[i_em].op_dag_op, rho).real() : 0.0;
        dy[dd + 1] = i_cav >= 0 ? trace_product(ch[i_cav].op_dag_op, rho).real() : 0.0;
    };

    const double t0 = sample_times.front();
    const double t_end = sample_times.back();
    auto stepper = make_stepper<VectorXcd>(rhs, t0, y0, opts.ode);

    const auto windows = drive.active_windows();
    double min_sigma = std::numeric_limits<double>::infinity();
    for (const auto& p : drive.pulses) min_sigma = std::min(min_sigma, p.sigma());
    const double h_pulse = std::min(opts.ode.h_max, opts.pulse_step_fraction * min_sigma);

    std::vector<double> breaks;
    for (const auto& w : windows) {
        if (w.first > t0 && w.first < t_end) breaks.push_back(w.first);
        if (w.second > t0 && w.second < t_end) breaks.push_back(w.second);
    }
    breaks.push_back(t_end);
    std::sort(breaks.begin(), breaks.end());

    const auto inside_pulse = [&windows](double t) {
        for (const auto& w : windows) {
            if (t >= w.first && t < w.second) return true;
        }
        return false;
    };

    const std::size_t n = sample_times.size();
    const int ne = params.space.emitter_levels;
    const auto& ops = model.ops();
    std::vector<CMatrixd> level_proj;
    for (int l = 0; l < ne; ++l) level_proj.push_back(ops.level_projector(l));

    EvolutionResult res;
    res.times = sample_times;
    res.populations.resize(static_cast<Eigen::Index>(n), ne);
    res.cavity_photons.resize(static_cast<Eigen::Index>(n));
    res.emitted_emitter.resize(static_cast<Eigen::Index>(n));
    res.emitted_cavity.resize(static_cast<Eigen::Index>(n));
    res.min_eigenvalue = std::numeric_limits<double>::infinity();
    if (opts.store_states) res.states.reserve(n);

    VectorXcd ys(dd + 2);
    const auto record = [&](std::size_t k, const VectorXcd& y) {
        const CMatrixd rho = Eigen::Map<const CMatrixd>(y.data(), d, d);
        const auto i = static_cast<Eigen::Index>(k);
        for (int l = 0; l < ne; ++l) res.populations(i, l) = trace_product(level_proj[l], rho).real();
        res.cavity_photons(i) = trace_product(ops.number, rho).real();
        res.emitted_emitter(i) = y[dd].real();
        res.emitted_cavity(i) = y[dd + 1].real();
        res.max_trace_error = std::max(res.max_trace_error, std::abs(rho.trace() - 1.0));
        if (opts.check_positivity) res.min_eigenvalue = std::min(res.min_eigenvalue, min_eigenvalue(rho));
        if (opts.store_states) res.states.push_back(rho);
    };

    std::size_t k = 0;
    while (k < n && sample_times[k] <= t0) record(k++, y0);
    std::size_t b = 0;
    while (k < n) {
        while (b < breaks.size() && breaks[b] <= stepper.t()) ++b;
        const double limit = b < breaks.size() ? breaks[b] : t_end;
        stepper.set_h_max(inside_pulse(stepper.t()) ? h_pulse : opts.ode.h_max);
        stepper.step(limit);
        while (k < n && sample_times[k] <= stepper.t()) {
            stepper.interpolate(sample_times[k], ys);
            record(k++, ys);
        }
    }
    if (!opts.check_positivity) res.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
    res.steps = stepper.steps();
    return res;
}

EmissionCount emitted_photons(const SystemParams& params, const DriveField& drive, double t_end,
                              const EvolveOptions& opts) {
    EvolveOptions o = opts;
    o.store_states = false;
    o.check_positivity = false;
    const auto res = evolve(ground_density(params.space), params, drive, {0.0, t_end}, o);
    return {res.total_emitted_emitter(), res.total_emitted_cavity()};
}

PiCalibration calibrate_pi_pulse(const SystemParams& params, double pulse_fwhm, const ScanOptions& opts) {
    if (!(pulse_fwhm > 0.0)) throw std::invalid_argument("calibrate_pi_pulse: pulse FWHM must be > 0");
    const double t1 = radiative_lifetime(params);
    const auto signal = [&](double area) { return single_pulse_signal(params, area, pulse_fwhm, t1, opts); };

    PiCalibration cal;
    constexpr int kSteps = 32;  // pi/8 spacing over (0, 4 pi]
    cal.scan_areas.push_back(0.0);
    cal.scan_emission.push_back(0.0);
    int peak = -1;
    for (int i = 1; i <= kSteps; ++i) {
        const double a = units::pi * i / 8.0;
        cal.scan_areas.push_back(a);
        cal.scan_emission.push_back(signal(a));
        if (i >= 2) {
            const auto& e = cal.scan_emission;
            if (e[i - 1] >= e[i - 2] && e[i - 1] > e[i]) {
                peak = i - 1;
                break;
            }
        }
    }
    if (peak < 0) {
        throw CalibrationError("calibrate_pi_pulse: no emission maximum for areas in (0, 4 pi]");
    }

    // Golden-section maximization on the bracketing interval.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = cal.scan_areas[peak - 1], hi = cal.scan_areas[peak + 1];
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = signal(x1), f2 = signal(x2);
    while (hi - lo > 1e-6) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = signal(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = signal(x1);
        }
    }
    cal.area = f1 > f2 ? x1 : x2;
    cal.emission = std::max(f1, f2);
    return cal;
}

RabiScan rabi_scan(const SystemParams& params, double pulse_fwhm, const std::vector<double>& areas,
                   const ScanOptions& opts) {
    if (areas.empty()) throw std::invalid_argument("rabi_scan: empty area list");
    if (!(pulse_fwhm > 0.0)) throw std::invalid_argument("rabi_scan: pulse FWHM must be > 0");
    const double t1 = radiative_lifetime(params);
    RabiScan scan;
    scan.areas = areas;
    for (double a : areas) {
        if (a == 0.0) {
            scan.cavity_emission.push_back(0.0);
            scan.emitter_emission.push_back(0.0);
            continue;
        }
        const DriveField drive = DriveField::pulse_train({make_pulse(a, pulse_fwhm)}, opts.target);
        const auto e = emitted_photons(params, drive, drive.pulses_end() + kEmissionTailLifetimes * t1, opts.evolve);
        scan.cavity_emission.push_back(e.cavity);
        scan.emitter_emission.push_back(e.emitter);
    }
    return scan;
}

DriveField dprf_drive(double area, double pulse_fwhm, double delta_t, double relative_phase,
                      DriveTarget target) {
    GaussianPulse first = make_pulse(area, pulse_fwhm);
    GaussianPulse second = first;
    second.center = first.center + delta_t;
    second.phase = relative_phase;
    return DriveField::pulse_train({first, second}, target);
}

DprfScan dprf_scan(const SystemParams& params, double pulse_fwhm, const std::vector<double>& delta_t,
                   const DprfOptions& opts) {
    for (double dt : delta_t) {
        if (!(dt >= 0.0)) throw std::invalid_argument("dprf_scan: delta_t must be >= 0");
    }
    const double t1 = radiative_lifetime(params);
    DprfScan scan;
    scan.pi_area = opts.area > 0.0 ? opts.area : calibrate_pi_pulse(params, pulse_fwhm, opts.scan).area;
    scan.single_pulse_emission = single_pulse_signal(params, scan.pi_area, pulse_fwhm, t1, opts.scan);
    scan.delta_t = delta_t;
    for (double dt : delta_t) {
        const DriveField drive = dprf_drive(scan.pi_area, pulse_fwhm, dt, opts.relative_phase, opts.scan.target);
        const double t_end = drive.pulses_end() + kEmissionTailLifetimes * t1;
        const double e = rf_signal(emitted_photons(params, drive, t_end, opts.scan.evolve), params);
        scan.emission.push_back(e);
        scan.normalized.push_back(e / scan.single_pulse_emission);
    }
    return scan;
}

double late_time_decay_time(const std::vector<double>& times, const Eigen::VectorXd& values,
                            double t_from, double t_to) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double v = values(static_cast<Eigen::Index>(i));
        if (times[i] < t_from || times[i] > t_to || !(v > 0.0)) continue;
        const double x = times[i], yv = std::log(v);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        ++m;
    }
    if (m < 3) throw std::invalid_argument("late_time_decay_time: fewer than 3 usable points in window");
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (!(slope < 0.0)) throw std::runtime_error("late_time_decay_time: trace is not decaying");
    return -1.0 / slope;
}

RelaxationTrace relaxation_decay(const SystemParams& params, RelaxationExcitation excitation,
                                 const EvolveOptions& opts) {
    params.validate();
    if (!params.relax || params.space.emitter_levels != 3) {
        throw std::invalid_argument("relaxation_decay: requires three-level params with a relaxation channel");
    }
    const double t1 = radiative_lifetime(params);
    const double t1f = params.relax->t1f;

    DriveField drive = DriveField::none(DriveTarget::emitter);
    CMatrixd rho0;
    double t_start = 0.0, t_fast = t1, t_slow = t1;
    if (excitation == RelaxationExcitation::via_f_level) {
        rho0 = pure_density(basis_state(params.space, 2, 0));
        t_fast = std::min(t1, t1f);
        t_slow = std::max(t1, t1f);
    } else {
        rho0 = ground_density(params.space);
        drive = DriveField::pulse_train({make_pulse(units::pi, 0.02 * t1)}, DriveTarget::emitter);
        t_start = drive.pulses_end();
    }
    RelaxationTrace tr;
    tr.fit_from = t_start + (excitation == RelaxationExcitation::via_f_level ? 8.0 * t_fast : 2.0 * t1);
    tr.fit_to = tr.fit_from + 3.0 * t_slow;
    const auto grid = linspace(0.0, tr.fit_to, 2001);
    tr.evolution = evolve(rho0, params, drive, grid, opts);
    tr.x_population = tr.evolution.populations.col(1);
    tr.f_population = tr.evolution.populations.col(2);
    tr.decay_time = late_time_decay_time(grid, tr.x_population, tr.fit_from, tr.fit_to);
    return tr;
}

FockConvergence check_fock_convergence(const SystemParams& params, const DriveField& drive,
                                       const std::vector<double>& sample_times, double tol,
                                       const EvolveOptions& opts) {
    SystemParams bigger = params;
    bigger.space.fock_cutoff += 1;
    EvolveOptions o = opts;
    o.store_states = false;
    const auto a = evolve(ground_density(params.space), params, drive, sample_times, o);
    const auto b = evolve(ground_density(bigger.space), bigger, drive, sample_times, o);
    FockConvergence fc;
    fc.max_difference = std::max((a.populations - b.populations).cwiseAbs().maxCoeff(),
                                 (a.cavity_photons - b.cavity_photons).cwiseAbs().maxCoeff());
    fc.converged = fc.max_difference <= tol;
    return fc;
}

}  // namespace qdc
