// analysis.hpp - detector-response convolution, curve fits and two-photon
// interference visibility corrections.

#pragma once

#include "qdc/fit.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qdc {

struct SampledCurve {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;  // empty or same length as y

    std::size_t size() const noexcept { return x.size(); }
    bool has_errors() const noexcept { return !y_err.empty(); }
    // Throws unless lengths match and x is strictly increasing.
    void validate() const;
    bool uniform(double rel_tol = 1e-6) const;
    // Trapezoidal integral of y.
    double integral() const;
};

// Points with x in [x_min, x_max].
SampledCurve restrict_to(const SampledCurve& curve, double x_min, double x_max);

class ResolutionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IllConditionedFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Discrete convolution with a unit-area Gaussian of the given FWHM. Nonuniform
// grids are resampled onto the finest spacing first. Needs >= 8 points per FWHM.
SampledCurve convolve_irf(const SampledCurve& curve, double irf_fwhm);

struct DecayFit {
    double tau = 0.0, tau_err = 0.0;
    double amplitude = 0.0, amplitude_err = 0.0;
    double fit_from = 0.0, fit_to = 0.0;
};

// Unweighted single-exponential fit A exp(-(x - x_peak) / tau) from the peak
// down to floor_fraction of the peak value, as done without deconvolution.
DecayFit fit_tail_decay(const SampledCurve& curve, double floor_fraction = 0.2);

struct RecoveryFit {
    double T1 = 0.0, T1_err = 0.0;
    double amplitude = 0.0, amplitude_err = 0.0;
    FitResult fit;
};

// A (1 - exp(-x / T1)), weighted by y_err when present.
RecoveryFit fit_exponential_recovery(const SampledCurve& curve);

struct RrsFit {
    double T1 = 0.0, T1_err = 0.0;
    double T2 = 0.0, T2_err = 0.0;
    FitResult fit;
};

// RRS fraction versus Rabi frequency (rad/ps), two-parameter fit in T1, T2.
RrsFit fit_rrs_curve(const SampledCurve& fractions);

struct FpDecomposition {
    double rrs_area = 0.0;
    double se_area = 0.0;
    double se_linewidth = 0.0;  // Lorentzian FWHM, x units
    double center = 0.0;
    bool linewidth_constrained = false;
    double rrs_fraction() const { return rrs_area / (rrs_area + se_area); }
};

struct FpOptions {
    // Used when the fitted SE area is below 5% of the total.
    std::optional<double> constrained_linewidth;
};

// Gaussian of FWHM irf_width (RRS) plus a Lorentzian (SE) sharing one center;
// areas constrained nonnegative. Background must already be subtracted.
FpDecomposition decompose_fp_spectrum(const SampledCurve& spectrum, double irf_width, const FpOptions& opts = {});

// Model spectrum for the decomposition, areas and FWHMs in x units.
std::vector<double> fp_spectrum_model(const std::vector<double>& x, double center, double rrs_area, double irf_width,
                                      double se_area, double se_linewidth);

struct HomPeakAreas {
    std::array<double, 5> area{};
    std::array<double, 5> error{};
    double center = 0.0;
    bool degenerate = false;  // spacing < 1.5 IRF FWHM
};

// Five Gaussians of fixed width irf_fwhm at center + (k - 2) * spacing. The
// center is fitted, starting from `center_guess` (default: the middle of x).
HomPeakAreas fit_hom_peaks(const SampledCurve& histogram, double irf_fwhm, double peak_spacing,
                           std::optional<double> center_guess = std::nullopt);

// Histogram model for the same five-peak pattern.
std::vector<double> hom_peak_model(const std::vector<double>& x, const std::array<double, 5>& areas, double center,
                                   double spacing, double irf_fwhm);

struct Measured {
    double value = 0.0;
    double error = 0.0;
};

struct HomCorrectionParams {
    double g2 = 0.0;
    double epsilon = 0.0;  // 1 - fringe contrast
    double R = 0.5;
    double T = 0.5;

    void validate() const;
};

struct VisibilityResult {
    double value = 0.0;
    double error = 0.0;
    bool saturated = false;  // value > 1, reported as is
};

// (A3_cross - A3_co) / A3_cross.
Measured raw_visibility(Measured A3_cross, Measured A3_co);

// Raw visibility of perfectly indistinguishable photons for the given apparatus:
// 2 (1 - eps)^2 R^2 T^2 / ((R^3 T + R T^3)(1 + 2 g2)).
double santori_ideal_raw_visibility(const HomCorrectionParams& params);

// Raw visibility normalized by santori_ideal_raw_visibility.
VisibilityResult corrected_visibility_santori(Measured raw, const HomCorrectionParams& params);
VisibilityResult corrected_visibility_santori(Measured A3_co, Measured A3_cross, const HomCorrectionParams& params);

// Single-formula correction from co-polarized peak areas A2, A3, A4.
VisibilityResult corrected_visibility_somaschi(const HomPeakAreas& co_polarized, const HomCorrectionParams& params);

// Co-polarized peak areas consistent with the Santori central-peak model:
// A3 = (R^3 T + R T^3)(1 + 2 g2) - 2 (1 - eps)^2 R^2 T^2 V, A2 = A4 = 2 R^2 T^2 + g2 R T (R^2 + T^2),
// and A1 = A5 = A2 / 2. `visibility` = 0 gives the cross-polarized set.
HomPeakAreas hom_peak_area_model(const HomCorrectionParams& params, double visibility, double scale = 1.0);

struct MollowCalibration {
    double slope = 0.0;           // Omega^2 per unit power
    double slope_err = 0.0;
    double damping_offset = 0.0;  // (gamma1 - gamma2)^2 / 4
    double omega_at(double power) const;
};

// Fits Omega_d^2 + (gamma1 - gamma2)^2 / 4 = slope * P through the origin.
// Non-positive splittings are treated as below threshold and ignored.
MollowCalibration mollow_calibration(const std::vector<double>& powers, const std::vector<double>& splittings,
                                     double gamma1, double gamma2);

}  // namespace qdc
