// trajectories.hpp - Monte Carlo wavefunction (quantum jump) ensembles and
// photon-number statistics.

#pragma once

#include "qdc/drive.hpp"
#include "qdc/dynamics.hpp"
#include "qdc/ode.hpp"
#include "qdc/system.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace qdc {

struct TrajectoryConfig {
    std::size_t n_trajectories = 10000;
    std::uint64_t master_seed = 20190501;
    // Collapse channels counted as emissions.
    std::vector<Channel> jump_channels{Channel::cavity};
    // End of each trajectory in ps; <= 0 means last pulse end + 20 T1.
    double t_end = 0.0;
    // Times at which the normalized <s+ s-> of each trajectory is recorded.
    std::vector<double> sample_times;
    unsigned jobs = 1;
    double jump_time_tolerance = 1e-3;  // ps
    double pulse_step_fraction = 0.25;
    OdeOptions ode{1e-7, 1e-9};

    void validate() const;
};

struct Jump {
    double time;
    Channel channel;
};

struct TrajectoryRecord {
    std::vector<Jump> jumps;
    std::vector<double> excited;  // at TrajectoryConfig::sample_times

    int count(const std::vector<Channel>& channels) const;
};

// One trajectory from the joint ground state.
TrajectoryRecord run_trajectory(const SystemParams& params, const DriveField& drive, std::uint64_t seed,
                                const TrajectoryConfig& config);

// Trajectory i uses stream_seed(master_seed, i); records are returned in index order.
std::vector<TrajectoryRecord> run_ensemble(const SystemParams& params, const DriveField& drive,
                                           const TrajectoryConfig& config);

struct EmissionStatistics {
    std::map<int, std::size_t> counts_histogram;
    std::vector<double> p_of_n;
    std::vector<double> p_err;  // binomial standard error per bin
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n_records = 0;

    double p(int n) const { return n >= 0 && n < static_cast<int>(p_of_n.size()) ? p_of_n[n] : 0.0; }
    double p_at_least(int n) const;
};

EmissionStatistics emission_statistics(const std::vector<int>& counts);
EmissionStatistics emission_statistics(const std::vector<TrajectoryRecord>& records,
                                       const std::vector<Channel>& channels);

struct G2Estimate {
    double value = 0.0;
    double error = 0.0;
};

// g2(0) = sum n(n-1) P[n] / (sum n P[n])^2, error propagated to first order
// from the per-bin errors (if given).
G2Estimate g2_from_distribution(const std::vector<double>& p_of_n, const std::vector<double>& p_err = {});
G2Estimate g2_from_distribution(const EmissionStatistics& stats);

struct EnsemblePopulation {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_err;
};
EnsemblePopulation ensemble_population(const std::vector<TrajectoryRecord>& records,
                                       const std::vector<double>& sample_times);

struct DoublePulseOptions {
    DriveTarget target = DriveTarget::emitter;
    double relative_phase = units::pi / 2.0;
    double area = 0.0;  // <= 0 selects calibrate_pi_pulse
};

struct DoublePulsePoint {
    double delta_tau = 0.0;
    EmissionStatistics stats;
    double p0 = 0.0, p1 = 0.0, p2 = 0.0, p2_plus = 0.0;
};

struct DoublePulseStatistics {
    double area = 0.0;
    std::vector<DoublePulsePoint> points;
};

DoublePulseStatistics double_pulse_statistics(const SystemParams& params, double pulse_fwhm,
                                              const std::vector<double>& delta_tau,
                                              const TrajectoryConfig& config,
                                              const DoublePulseOptions& opts = {});

enum class AreaConvention {
    exact_pi,     // area = pi
    experimental  // area from calibrate_pi_pulse
};

struct G2Point {
    double tp_over_t1 = 0.0;
    double pulse_fwhm = 0.0;
    double area = 0.0;
    G2Estimate g2;
    EmissionStatistics stats;
};

// Single-pulse g2(0) over T_P / T1. Grid point k runs with master seed
// stream_seed(config.master_seed, k).
std::vector<G2Point> g2_vs_pulse_duration(const SystemParams& params, const std::vector<double>& tp_over_t1,
                                          const TrajectoryConfig& config,
                                          AreaConvention convention = AreaConvention::exact_pi,
                                          DriveTarget target = DriveTarget::emitter);

}  // namespace qdc
