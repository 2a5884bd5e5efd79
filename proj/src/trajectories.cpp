#include "qdc/trajectories.hpp"

#include "qdc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace qdc {

namespace {

using VectorXcd = Eigen::VectorXcd;

double default_t_end(const SystemParams& params, const DriveField& drive, const TrajectoryConfig& config) {
    if (config.t_end > 0.0) return config.t_end;
    const double last = drive.is_pulsed() && !drive.pulses.empty() ? drive.pulses_end() : 0.0;
    return last + kEmissionTailLifetimes * radiative_lifetime(params);
}

}  // namespace

void TrajectoryConfig::validate() const {
    if (n_trajectories < 1) throw std::invalid_argument("TrajectoryConfig: n_trajectories must be >= 1");
    if (jobs < 1) throw std::invalid_argument("TrajectoryConfig: jobs must be >= 1");
    if (!(jump_time_tolerance > 0.0)) throw std::invalid_argument("TrajectoryConfig: jump time tolerance must be > 0");
    if (!std::is_sorted(sample_times.begin(), sample_times.end())) {
        throw std::invalid_argument("TrajectoryConfig: sample_times must be nondecreasing");
    }
}

int TrajectoryRecord::count(const std::vector<Channel>& channels) const {
    int n = 0;
    for (const auto& j : jumps) {
        if (std::find(channels.begin(), channels.end(), j.channel) != channels.end()) ++n;
    }
    return n;
}

TrajectoryRecord run_trajectory(const SystemParams& params, const DriveField& drive, std::uint64_t seed,
                                const TrajectoryConfig& config) {
    const LindbladModel model(params, drive);
    const int d = model.dim();
    const auto& channels = model.channels();
    const double t_end = default_t_end(params, drive, config);
    const double drive_off = drive.kind == DriveField::Kind::cw ? t_end
                             : drive.pulses.empty()             ? 0.0
                                                                : drive.pulses_end();

    auto rhs = [&model, K = CMatrixd(d, d)](double t, const VectorXcd& psi, VectorXcd& dpsi) mutable {
        model.effective_generator(t, K);
        dpsi.noalias() = K * psi;
    };

    const auto windows = drive.active_windows();
    double min_sigma = std::numeric_limits<double>::infinity();
    for (const auto& p : drive.pulses) min_sigma = std::min(min_sigma, p.sigma());
    const double h_pulse = std::min(config.ode.h_max, config.pulse_step_fraction * min_sigma);
    std::vector<double> breaks;
    for (const auto& w : windows) {
        breaks.push_back(w.first);
        breaks.push_back(w.second);
    }
    breaks.push_back(t_end);
    std::sort(breaks.begin(), breaks.end());
    const auto inside_pulse = [&windows](double t) {
        for (const auto& w : windows) {
            if (t >= w.first && t < w.second) return true;
        }
        return false;
    };

    UniformStream uniform(seed);
    TrajectoryRecord rec;
    const auto& samples = config.sample_times;
    rec.excited.assign(samples.size(), 0.0);
    const CMatrixd& P_x = model.ops().excited;
    const auto excited_of = [&P_x](const VectorXcd& psi) {
        return psi.dot(P_x * psi).real() / psi.squaredNorm();
    };

    const VectorXcd ground = basis_state(params.space, 0, 0);
    const int ground_index = params.space.index(0, 0);
    double t = 0.0;
    auto stepper = make_stepper<VectorXcd>(rhs, t, ground, config.ode);
    double threshold = uniform();
    std::size_t k = 0;
    while (k < samples.size() && samples[k] <= t) rec.excited[k++] = 0.0;

    VectorXcd psi(d), work(d);
    std::vector<double> weights(channels.size());
    while (t < t_end) {
        // Nothing can happen once the system sits in |0,0> with the drive off.
        if (t >= drive_off) {
            const auto& y = stepper.y();
            const double n2 = y.squaredNorm();
            if (n2 - std::norm(y[ground_index]) <= 1e-14 * n2) break;
        }
        auto b = std::upper_bound(breaks.begin(), breaks.end(), t);
        const double limit = b != breaks.end() ? *b : t_end;
        stepper.set_h_max(inside_pulse(t) ? h_pulse : config.ode.h_max);
        const double t_prev = t;
        t = stepper.step(limit);

        double t_jump = -1.0;
        if (stepper.y().squaredNorm() < threshold) {
            double lo = t_prev, hi = t;
            while (hi - lo > config.jump_time_tolerance) {
                const double mid = 0.5 * (lo + hi);
                stepper.interpolate(mid, work);
                (work.squaredNorm() < threshold ? hi : lo) = mid;
            }
            t_jump = hi;
        }

        const double covered = t_jump >= 0.0 ? t_jump : t;
        while (k < samples.size() && samples[k] <= covered) {
            stepper.interpolate(samples[k], work);
            rec.excited[k++] = excited_of(work);
        }

        if (t_jump >= 0.0) {
            stepper.interpolate(t_jump, psi);
            double total = 0.0;
            for (std::size_t c = 0; c < channels.size(); ++c) {
                weights[c] = (channels[c].op * psi).squaredNorm();
                total += weights[c];
            }
            const double pick = uniform() * total;
            std::size_t c = 0;
            double acc = weights[0];
            while (acc <= pick && c + 1 < channels.size()) acc += weights[++c];
            rec.jumps.push_back({t_jump, channels[c].kind});
            psi = channels[c].op * psi;
            psi /= psi.norm();
            threshold = uniform();
            t = t_jump;
            stepper.reset(t, psi);
        }
    }
    // Remaining samples after early exit or the final step.
    for (; k < samples.size(); ++k) {
        if (samples[k] <= stepper.t()) {
            stepper.interpolate(samples[k], work);
            rec.excited[k] = excited_of(work);
        } else {
            rec.excited[k] = excited_of(stepper.y());
        }
    }
    return rec;
}

std::vector<TrajectoryRecord> run_ensemble(const SystemParams& params, const DriveField& drive,
                                           const TrajectoryConfig& config) {
    config.validate();
    params.validate();
    drive.validate();
    const std::size_t n = config.n_trajectories;
    std::vector<TrajectoryRecord> records(n);
    const unsigned jobs = static_cast<unsigned>(std::min<std::size_t>(config.jobs, n));
    std::vector<std::exception_ptr> errors(jobs);

    const auto work = [&](unsigned w) {
        const std::size_t begin = n * w / jobs, end = n * (w + 1) / jobs;
        try {
            for (std::size_t i = begin; i < end; ++i) {
                records[i] = run_trajectory(params, drive, stream_seed(config.master_seed, i), config);
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return records;
}

double EmissionStatistics::p_at_least(int n) const {
    double s = 0.0;
    for (std::size_t i = std::max(n, 0); i < p_of_n.size(); ++i) s += p_of_n[i];
    return s;
}

EmissionStatistics emission_statistics(const std::vector<int>& counts) {
    if (counts.empty()) throw std::invalid_argument("emission_statistics: no records");
    EmissionStatistics s;
    s.n_records = counts.size();
    int max_n = 0;
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("emission_statistics: negative count");
        ++s.counts_histogram[c];
        max_n = std::max(max_n, c);
    }
    const double N = static_cast<double>(s.n_records);
    s.p_of_n.assign(max_n + 1, 0.0);
    s.p_err.assign(max_n + 1, 0.0);
    for (const auto& [n, occ] : s.counts_histogram) {
        const double p = static_cast<double>(occ) / N;
        s.p_of_n[n] = p;
        s.p_err[n] = std::sqrt(p * (1.0 - p) / N);
    }
    double sum = 0.0, sum2 = 0.0;
    for (int c : counts) {
        sum += c;
        sum2 += static_cast<double>(c) * c;
    }
    s.mean = sum / N;
    const double var = N > 1 ? std::max(0.0, (sum2 - N * s.mean * s.mean) / (N - 1.0)) : 0.0;
    s.std_err = std::sqrt(var / N);
    return s;
}

EmissionStatistics emission_statistics(const std::vector<TrajectoryRecord>& records,
                                       const std::vector<Channel>& channels) {
    std::vector<int> counts;
    counts.reserve(records.size());
    for (const auto& r : records) counts.push_back(r.count(channels));
    return emission_statistics(counts);
}

G2Estimate g2_from_distribution(const std::vector<double>& p, const std::vector<double>& p_err) {
    if (!p_err.empty() && p_err.size() != p.size()) {
        throw std::invalid_argument("g2_from_distribution: error vector size mismatch");
    }
    double mu = 0.0, f = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        mu += n * p[n];
        f += n * (n - 1.0) * p[n];
    }
    if (!(mu > 0.0)) throw std::domain_error("g2_from_distribution: mean photon number is zero");
    G2Estimate g{f / (mu * mu), 0.0};
    double var = 0.0;
    for (std::size_t n = 0; n < p_err.size(); ++n) {
        const double dn = n * (n - 1.0) / (mu * mu) - 2.0 * f * n / (mu * mu * mu);
        var += dn * dn * p_err[n] * p_err[n];
    }
    g.error = std::sqrt(var);
    return g;
}

G2Estimate g2_from_distribution(const EmissionStatistics& stats) {
    return g2_from_distribution(stats.p_of_n, stats.p_err);
}

EnsemblePopulation ensemble_population(const std::vector<TrajectoryRecord>& records,
                                       const std::vector<double>& sample_times) {
    if (records.empty()) throw std::invalid_argument("ensemble_population: no records");
    const std::size_t m = sample_times.size();
    EnsemblePopulation pop{sample_times, std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    const double N = static_cast<double>(records.size());
    for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0, s2 = 0.0;
        for (const auto& r : records) {
            if (r.excited.size() != m) throw std::invalid_argument("ensemble_population: record/sample mismatch");
            s += r.excited[k];
            s2 += r.excited[k] * r.excited[k];
        }
        pop.mean[k] = s / N;
        const double var = N > 1 ? std::max(0.0, (s2 - N * pop.mean[k] * pop.mean[k]) / (N - 1.0)) : 0.0;
        pop.std_err[k] = std::sqrt(var / N);
    }
    return pop;
}

DoublePulseStatistics double_pulse_statistics(const SystemParams& params, double pulse_fwhm,
                                              const std::vector<double>& delta_tau,
                                              const TrajectoryConfig& config,
                                              const DoublePulseOptions& opts) {
    if (delta_tau.empty()) throw std::invalid_argument("double_pulse_statistics: empty delta_tau grid");
    DoublePulseStatistics out;
    ScanOptions scan;
    scan.target = opts.target;
    out.area = opts.area > 0.0 ? opts.area : calibrate_pi_pulse(params, pulse_fwhm, scan).area;
    for (std::size_t i = 0; i < delta_tau.size(); ++i) {
        if (!(delta_tau[i] >= 0.0)) throw std::invalid_argument("double_pulse_statistics: delta_tau must be >= 0");
        TrajectoryConfig cfg = config;
        cfg.master_seed = stream_seed(config.master_seed, i);
        const DriveField drive = dprf_drive(out.area, pulse_fwhm, delta_tau[i], opts.relative_phase, opts.target);
        const auto records = run_ensemble(params, drive, cfg);
        DoublePulsePoint pt;
        pt.delta_tau = delta_tau[i];
        pt.stats = emission_statistics(records, cfg.jump_channels);
        pt.p0 = pt.stats.p(0);
        pt.p1 = pt.stats.p(1);
        pt.p2 = pt.stats.p(2);
        pt.p2_plus = pt.stats.p_at_least(2);
        out.points.push_back(std::move(pt));
    }
    return out;
}

std::vector<G2Point> g2_vs_pulse_duration(const SystemParams& params, const std::vector<double>& tp_over_t1,
                                          const TrajectoryConfig& config, AreaConvention convention,
                                          DriveTarget target) {
    if (tp_over_t1.empty()) throw std::invalid_argument("g2_vs_pulse_duration: empty grid");
    const double t1 = radiative_lifetime(params);
    std::vector<G2Point> out;
    for (std::size_t i = 0; i < tp_over_t1.size(); ++i) {
        if (!(tp_over_t1[i] > 0.0)) throw std::invalid_argument("g2_vs_pulse_duration: grid values must be > 0");
        G2Point pt;
        pt.tp_over_t1 = tp_over_t1[i];
        pt.pulse_fwhm = tp_over_t1[i] * t1;
        if (convention == AreaConvention::exact_pi) {
            pt.area = units::pi;
        } else {
            ScanOptions scan;
            scan.target = target;
            pt.area = calibrate_pi_pulse(params, pt.pulse_fwhm, scan).area;
        }
        TrajectoryConfig cfg = config;
        cfg.master_seed = stream_seed(config.master_seed, i);
        const DriveField drive = DriveField::pulse_train({make_pulse(pt.area, pt.pulse_fwhm)}, target);
        pt.stats = emission_statistics(run_ensemble(params, drive, cfg), cfg.jump_channels);
        pt.g2 = g2_from_distribution(pt.stats);
        out.push_back(std::move(pt));
    }
    return out;
}

}  // namespace qdc
