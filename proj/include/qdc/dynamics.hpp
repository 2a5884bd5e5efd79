// dynamics.hpp - master-equation integration and the deterministic experiments
// built on it: Rabi scans, pi-pulse calibration, double-pi-pulse (DPRF) scans
// and relaxation through a higher state.

#pragma once

#include "qdc/drive.hpp"
#include "qdc/hilbert.hpp"
#include "qdc/ode.hpp"
#include "qdc/system.hpp"
#include "qdc/units.hpp"

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

namespace qdc {

struct EvolutionResult {
    std::vector<double> times;
    std::vector<CMatrixd> states;
    Eigen::MatrixXd populations;     // samples x emitter_levels
    Eigen::VectorXd cavity_photons;  // <a^dag a>
    // Cumulative emitted photons: integral of gamma1' <s+ s-> and 2 kappa <a^dag a>.
    Eigen::VectorXd emitted_emitter;
    Eigen::VectorXd emitted_cavity;
    double max_trace_error = 0.0;    // max |Tr rho - 1| over samples
    double min_eigenvalue = 0.0;     // smallest eigenvalue over samples
    long steps = 0;

    Eigen::VectorXd excited_population() const { return populations.col(1); }
    double total_emitted_cavity() const { return emitted_cavity.size() ? emitted_cavity.tail(1)(0) : 0.0; }
    double total_emitted_emitter() const { return emitted_emitter.size() ? emitted_emitter.tail(1)(0) : 0.0; }
};

struct EvolveOptions {
    OdeOptions ode{};
    // Max step inside pulse windows as a fraction of the pulse sigma.
    double pulse_step_fraction = 0.25;
    bool store_states = true;
    bool check_positivity = true;
};

// Integrates the master equation from sample_times.front() to
// sample_times.back(), sampling the state on the given nondecreasing grid.
EvolutionResult evolve(const CMatrixd& initial, const SystemParams& params, const DriveField& drive,
                       const std::vector<double>& sample_times, const EvolveOptions& opts = {});

// Emitted photon numbers {emitter channel, cavity channel} from the ground state.
struct EmissionCount {
    double emitter = 0.0;
    double cavity = 0.0;
    double total() const noexcept { return emitter + cavity; }
};
EmissionCount emitted_photons(const SystemParams& params, const DriveField& drive, double t_end,
                              const EvolveOptions& opts = {});

// Time after the last pulse over which emission is integrated, in units of T1.
inline constexpr double kEmissionTailLifetimes = 20.0;

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PiCalibration {
    double area = 0.0;              // rad, first emission maximum
    double emission = 0.0;          // cavity-channel photons at that area
    std::vector<double> scan_areas;
    std::vector<double> scan_emission;
};

struct ScanOptions {
    DriveTarget target = DriveTarget::emitter;
    EvolveOptions evolve{};
};

// Area giving the first maximum of single-pulse emission (the experimental
// pi-power), scanned over (0, 4 pi] and refined by golden-section search.
PiCalibration calibrate_pi_pulse(const SystemParams& params, double pulse_fwhm,
                                 const ScanOptions& opts = {});

struct RabiScan {
    std::vector<double> areas;
    std::vector<double> cavity_emission;
    std::vector<double> emitter_emission;
};
RabiScan rabi_scan(const SystemParams& params, double pulse_fwhm, const std::vector<double>& areas,
                   const ScanOptions& opts = {});

struct DprfOptions {
    ScanOptions scan{};
    // Optical phase of the second pulse relative to the first. pi/2 makes
    // coincident pulses add to a sqrt(2) pi pulse.
    double relative_phase = units::pi / 2.0;
    // Pulse area; <= 0 selects calibrate_pi_pulse.
    double area = 0.0;
};

struct DprfScan {
    double pi_area = 0.0;
    double single_pulse_emission = 0.0;
    std::vector<double> delta_t;
    std::vector<double> emission;    // cavity-channel photons per pulse pair
    std::vector<double> normalized;  // emission / single_pulse_emission
};
DprfScan dprf_scan(const SystemParams& params, double pulse_fwhm, const std::vector<double>& delta_t,
                   const DprfOptions& opts = {});

// Drive pulses for a DPRF pulse pair (first pulse window starts at t = 0).
DriveField dprf_drive(double area, double pulse_fwhm, double delta_t, double relative_phase,
                      DriveTarget target);

enum class RelaxationExcitation {
    via_f_level,  // |f> populated impulsively at t = 0
    resonant      // short pi pulse on |0> <-> |X>, bypassing |f>
};

struct RelaxationTrace {
    EvolutionResult evolution;
    Eigen::VectorXd x_population;
    Eigen::VectorXd f_population;
    double decay_time = 0.0;  // late-time |X> decay constant
    double fit_from = 0.0, fit_to = 0.0;
};

// Three-level dynamics. The late-time fit window starts 8 fast lifetimes in and
// spans 3 slow lifetimes.
RelaxationTrace relaxation_decay(const SystemParams& params, RelaxationExcitation excitation,
                                 const EvolveOptions& opts = {});

// Log-linear least-squares decay constant of `values` over [t_from, t_to].
double late_time_decay_time(const std::vector<double>& times, const Eigen::VectorXd& values,
                            double t_from, double t_to);

struct FockConvergence {
    double max_difference = 0.0;
    bool converged = false;
};

// Re-runs the evolution at fock_cutoff + 1 and compares emitter populations and
// <a^dag a> over the sample grid.
FockConvergence check_fock_convergence(const SystemParams& params, const DriveField& drive,
                                       const std::vector<double>& sample_times, double tol = 1e-4,
                                       const EvolveOptions& opts = {});

// Uniform grid helper [start, stop] with n points.
std::vector<double> linspace(double start, double stop, std::size_t n);

}  // namespace qdc
