#include "qdc/analysis.hpp"

#include "qdc/units.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace qdc {

namespace {

constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

double gaussian_unit_area(double x, double fwhm) {
    const double s = fwhm / kFwhmPerSigma;
    return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * std::numbers::pi));
}

double lorentzian_unit_area(double x, double fwhm) {
    const double h = 0.5 * fwhm;
    return h / (std::numbers::pi * (x * x + h * h));
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::VectorXd weights_of(const SampledCurve& c) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(c.size()));
    if (c.has_errors()) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (!(c.y_err[i] > 0.0)) throw std::invalid_argument("SampledCurve: y_err must be > 0");
            w[static_cast<Eigen::Index>(i)] = 1.0 / c.y_err[i];
        }
    }
    return w;
}

// Linear interpolation of (x, y) at t; zero outside the range.
double interp(const std::vector<double>& x, const std::vector<double>& y, double t) {
    if (t < x.front() || t > x.back()) return 0.0;
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.end()) return y.back();
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double f = (t - x[j - 1]) / (x[j] - x[j - 1]);
    return y[j - 1] + f * (y[j] - y[j - 1]);
}

}  // namespace

void SampledCurve::validate() const {
    if (x.size() != y.size()) throw std::invalid_argument("SampledCurve: x and y lengths differ");
    if (!y_err.empty() && y_err.size() != y.size()) throw std::invalid_argument("SampledCurve: y_err length differs");
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (!(x[i] > x[i - 1])) throw std::invalid_argument("SampledCurve: x must be strictly increasing");
    }
}

bool SampledCurve::uniform(double rel_tol) const {
    if (x.size() < 3) return true;
    const double dx = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (std::abs((x[i] - x[i - 1]) - dx) > rel_tol * dx) return false;
    }
    return true;
}

double SampledCurve::integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

SampledCurve restrict_to(const SampledCurve& curve, double x_min, double x_max) {
    curve.validate();
    SampledCurve out;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve.x[i] < x_min || curve.x[i] > x_max) continue;
        out.x.push_back(curve.x[i]);
        out.y.push_back(curve.y[i]);
        if (curve.has_errors()) out.y_err.push_back(curve.y_err[i]);
    }
    return out;
}

SampledCurve convolve_irf(const SampledCurve& curve, double irf_fwhm) {
    curve.validate();
    if (!(irf_fwhm > 0.0)) throw std::invalid_argument("convolve_irf: IRF FWHM must be > 0");
    if (curve.size() < 2) throw ResolutionError("convolve_irf: need at least two samples");

    SampledCurve grid;
    if (curve.uniform()) {
        grid.x = curve.x;
        grid.y = curve.y;
    } else {
        double dx = INFINITY;
        for (std::size_t i = 1; i < curve.size(); ++i) dx = std::min(dx, curve.x[i] - curve.x[i - 1]);
        const auto n = static_cast<std::size_t>(std::floor((curve.x.back() - curve.x.front()) / dx)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = curve.x.front() + dx * static_cast<double>(i);
            grid.x.push_back(t);
            grid.y.push_back(interp(curve.x, curve.y, t));
        }
    }
    const double dx = (grid.x.back() - grid.x.front()) / static_cast<double>(grid.size() - 1);
    if (irf_fwhm / dx < 8.0) {
        throw ResolutionError("convolve_irf: grid too coarse (" + std::to_string(irf_fwhm / dx) +
                              " points per FWHM, need 8)");
    }
    const double sigma = irf_fwhm / kFwhmPerSigma;
    const auto half = static_cast<long>(std::ceil(8.0 * sigma / dx));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    double ksum = 0.0;
    for (long j = -half; j <= half; ++j) {
        const double t = static_cast<double>(j) * dx;
        kernel[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * t * t / (sigma * sigma));
        ksum += kernel[static_cast<std::size_t>(j + half)];
    }
    for (double& k : kernel) k /= ksum;

    const long n = static_cast<long>(grid.size());
    SampledCurve out;
    out.x = grid.x;
    out.y.assign(grid.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double s = 0.0;
        const long lo = std::max(-half, i - n + 1), hi = std::min(half, i);
        for (long j = lo; j <= hi; ++j) s += kernel[static_cast<std::size_t>(j + half)] * grid.y[static_cast<std::size_t>(i - j)];
        out.y[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

DecayFit fit_tail_decay(const SampledCurve& curve, double floor_fraction) {
    curve.validate();
    if (!(floor_fraction > 0.0 && floor_fraction < 1.0)) {
        throw std::invalid_argument("fit_tail_decay: floor fraction must be in (0, 1)");
    }
    const auto peak_it = std::max_element(curve.y.begin(), curve.y.end());
    const std::size_t ip = static_cast<std::size_t>(peak_it - curve.y.begin());
    const double peak = *peak_it;
    if (!(peak > 0.0)) throw std::invalid_argument("fit_tail_decay: no positive peak");
    std::size_t last = ip;
    while (last + 1 < curve.size() && curve.y[last + 1] >= floor_fraction * peak) ++last;
    if (last - ip + 1 < 3) throw std::invalid_argument("fit_tail_decay: fewer than 3 points above the floor");

    const double x0 = curve.x[ip];
    std::vector<double> xs(curve.x.begin() + static_cast<long>(ip), curve.x.begin() + static_cast<long>(last) + 1);
    std::vector<double> ys(curve.y.begin() + static_cast<long>(ip), curve.y.begin() + static_cast<long>(last) + 1);
    const auto m = static_cast<Eigen::Index>(xs.size());
    const double tau0 = (xs.back() - x0) / std::log(ys.front() / ys.back());

    const ResidualFunction f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        for (Eigen::Index i = 0; i < m; ++i) {
            r[i] = ys[static_cast<std::size_t>(i)] - p[0] * std::exp(-(xs[static_cast<std::size_t>(i)] - x0) / p[1]);
        }
    };
    const FitResult fit = levenberg_marquardt(f, Eigen::Vector2d(peak, tau0), m);
    DecayFit d;
    d.amplitude = fit.params[0];
    d.amplitude_err = fit.errors[0];
    d.tau = fit.params[1];
    d.tau_err = fit.errors[1];
    d.fit_from = xs.front();
    d.fit_to = xs.back();
    return d;
}

RecoveryFit fit_exponential_recovery(const SampledCurve& curve) {
    curve.validate();
    if (curve.size() < 5) throw std::invalid_argument("fit_exponential_recovery: need at least 5 points");
    for (double v : curve.y) {
        if (!(v > 0.0)) throw std::invalid_argument("fit_exponential_recovery: values must be positive");
    }
    const Eigen::VectorXd w = weights_of(curve);
    const auto m = static_cast<Eigen::Index>(curve.size());
    const ResidualFunction f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto k = static_cast<std::size_t>(i);
            r[i] = w[i] * (curve.y[k] + p[0] * std::expm1(-curve.x[k] / p[1]));
        }
    };
    const double a0 = *std::max_element(curve.y.begin(), curve.y.end());
    const double span = curve.x.back() - std::min(curve.x.front(), 0.0);
    std::vector<Eigen::VectorXd> starts;
    for (double s : {0.1, 0.3, 1.0, 3.0}) starts.push_back(Eigen::Vector2d(a0, s * span));
    RecoveryFit out;
    out.fit = fit_multistart(f, starts, m);
    if (!(out.fit.params[1] > 0.0)) throw FitError("fit_exponential_recovery: fitted T1 is not positive", std::sqrt(out.fit.chi2));
    out.amplitude = out.fit.params[0];
    out.amplitude_err = out.fit.errors[0];
    out.T1 = out.fit.params[1];
    out.T1_err = out.fit.errors[1];
    return out;
}

RrsFit fit_rrs_curve(const SampledCurve& fractions) {
    fractions.validate();
    if (fractions.size() < 4) throw std::invalid_argument("fit_rrs_curve: need at least 4 points");
    const auto [lo, hi] = std::minmax_element(fractions.y.begin(), fractions.y.end());
    if (*hi - *lo <= 1e-3 * std::abs(*hi)) throw IllConditionedFit("fit_rrs_curve: flat curve, T1 and T2 not separable");
    for (double om : fractions.x) {
        if (om < 0.0) throw std::invalid_argument("fit_rrs_curve: Rabi frequencies must be >= 0");
    }

    const Eigen::VectorXd w = weights_of(fractions);
    const auto m = static_cast<Eigen::Index>(fractions.size());
    // Parameters are log T1, log T2.
    const ResidualFunction f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        const double t1 = std::exp(p[0]), t2 = std::exp(p[1]);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto k = static_cast<std::size_t>(i);
            const double om = fractions.x[k];
            r[i] = w[i] * (fractions.y[k] - (t2 / (2.0 * t1)) / (1.0 + om * om * t1 * t2));
        }
    };

    // Start: low-power plateau gives T2 / 2 T1, the half-point gives T1 T2.
    const double r0 = std::clamp(fractions.y.front(), 0.05, 1.0);
    double om_half = fractions.x.back();
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (fractions.y[i] <= 0.5 * fractions.y.front()) {
            om_half = fractions.x[i];
            break;
        }
    }
    if (!(om_half > 0.0)) om_half = fractions.x.back();
    std::vector<Eigen::VectorXd> starts;
    for (double scale : {0.3, 1.0, 3.0}) {
        const double prod = scale / (om_half * om_half);
        const double t1 = std::sqrt(prod / (2.0 * r0));
        starts.push_back(Eigen::Vector2d(std::log(t1), std::log(2.0 * r0 * t1)));
    }
    RrsFit out;
    out.fit = fit_multistart(f, starts, m);
    if (!out.fit.covariance.allFinite()) throw IllConditionedFit("fit_rrs_curve: singular covariance");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.fit.covariance);
    const double emax = es.eigenvalues().cwiseAbs().maxCoeff(), emin = es.eigenvalues().cwiseAbs().minCoeff();
    if (emax > 0.0 && emin < 1e-14 * emax) throw IllConditionedFit("fit_rrs_curve: ill-conditioned covariance");
    out.T1 = std::exp(out.fit.params[0]);
    out.T2 = std::exp(out.fit.params[1]);
    out.T1_err = out.T1 * out.fit.errors[0];
    out.T2_err = out.T2 * out.fit.errors[1];
    return out;
}

std::vector<double> fp_spectrum_model(const std::vector<double>& x, double center, double rrs_area, double irf_width,
                                      double se_area, double se_linewidth) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - center;
        y[i] = rrs_area * gaussian_unit_area(d, irf_width) + se_area * lorentzian_unit_area(d, se_linewidth);
    }
    return y;
}

FpDecomposition decompose_fp_spectrum(const SampledCurve& spectrum, double irf_width, const FpOptions& opts) {
    spectrum.validate();
    if (!(irf_width > 0.0)) throw std::invalid_argument("decompose_fp_spectrum: IRF width must be > 0");
    if (spectrum.size() < 8) throw std::invalid_argument("decompose_fp_spectrum: need at least 8 points");
    const Eigen::VectorXd w = weights_of(spectrum);
    const Eigen::VectorXd y = to_vector(spectrum.y).cwiseProduct(w);
    const auto m = static_cast<Eigen::Index>(spectrum.size());
    const double span = spectrum.x.back() - spectrum.x.front();

    // Variable projection: areas by NNLS for given (center, linewidth).
    const auto design = [&](double c, double lw) {
        Eigen::MatrixXd A(m, 2);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double d = spectrum.x[static_cast<std::size_t>(i)] - c;
            A(i, 0) = w[i] * gaussian_unit_area(d, irf_width);
            A(i, 1) = w[i] * lorentzian_unit_area(d, lw);
        }
        return A;
    };
    const auto solve = [&](double c, double lw, Eigen::VectorXd& r) {
        const Eigen::MatrixXd A = design(c, lw);
        const Eigen::VectorXd a = nnls(A, y);
        r = y - A * a;
        return a;
    };

    const double c0 = spectrum.x[static_cast<std::size_t>(
        std::max_element(spectrum.y.begin(), spectrum.y.end()) - spectrum.y.begin())];
    const double dx = span / static_cast<double>(spectrum.size() - 1);

    FpDecomposition out;
    const auto finish = [&](double c, double lw) {
        Eigen::VectorXd r;
        const Eigen::VectorXd a = solve(c, lw, r);
        out.center = c;
        out.se_linewidth = lw;
        out.rrs_area = a[0];
        out.se_area = a[1];
    };

    const ResidualFunction free_fit = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        solve(p[0], std::exp(p[1]), r);
    };
    std::vector<Eigen::VectorXd> starts;
    for (double lw : {irf_width, 3.0 * irf_width, span / 30.0, span / 10.0}) {
        starts.push_back(Eigen::Vector2d(c0, std::log(std::max(lw, dx))));
    }
    const FitResult fit = fit_multistart(free_fit, starts, m);
    finish(fit.params[0], std::exp(fit.params[1]));
    if (out.rrs_area + out.se_area <= 0.0) throw FitError("decompose_fp_spectrum: zero total area", std::sqrt(fit.chi2));

    if (out.se_area < 0.05 * (out.rrs_area + out.se_area)) {
        if (opts.constrained_linewidth) {
            const double lw = *opts.constrained_linewidth;
            if (!(lw > 0.0)) throw std::invalid_argument("decompose_fp_spectrum: constrained linewidth must be > 0");
            const ResidualFunction fixed = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) { solve(p[0], lw, r); };
            Eigen::VectorXd p0(1);
            p0[0] = out.center;
            const FitResult fc = levenberg_marquardt(fixed, p0, m);
            finish(fc.params[0], lw);
            out.linewidth_constrained = true;
        }
    } else if (span < 3.0 * out.se_linewidth) {
        throw std::invalid_argument("decompose_fp_spectrum: spectrum spans fewer than 3 SE linewidths");
    }
    return out;
}

std::vector<double> hom_peak_model(const std::vector<double>& x, const std::array<double, 5>& areas, double center,
                                   double spacing, double irf_fwhm) {
    std::vector<double> y(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (int k = 0; k < 5; ++k) y[i] += areas[k] * gaussian_unit_area(x[i] - center - (k - 2) * spacing, irf_fwhm);
    }
    return y;
}

HomPeakAreas fit_hom_peaks(const SampledCurve& histogram, double irf_fwhm, double peak_spacing,
                           std::optional<double> center_guess) {
    histogram.validate();
    if (!(irf_fwhm > 0.0)) throw std::invalid_argument("fit_hom_peaks: IRF FWHM must be > 0");
    if (!(peak_spacing > irf_fwhm)) throw std::invalid_argument("fit_hom_peaks: peak spacing must exceed the IRF FWHM");
    if (histogram.size() < 10) throw std::invalid_argument("fit_hom_peaks: need at least 10 points");
    const Eigen::VectorXd w = weights_of(histogram);
    const Eigen::VectorXd y = to_vector(histogram.y).cwiseProduct(w);
    const auto m = static_cast<Eigen::Index>(histogram.size());

    const auto design = [&](double c) {
        Eigen::MatrixXd A(m, 5);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (int k = 0; k < 5; ++k) {
                A(i, k) = w[i] * gaussian_unit_area(histogram.x[static_cast<std::size_t>(i)] - c - (k - 2) * peak_spacing,
                                                    irf_fwhm);
            }
        }
        return A;
    };
    const ResidualFunction f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
        const Eigen::MatrixXd A = design(p[0]);
        r = y - A * nnls(A, y);
    };
    const double c0 = center_guess.value_or(0.5 * (histogram.x.front() + histogram.x.back()));
    std::vector<Eigen::VectorXd> starts;
    for (double off : {0.0, -0.25, 0.25}) {
        Eigen::VectorXd p(1);
        p[0] = c0 + off * irf_fwhm;
        starts.push_back(p);
    }
    const FitResult fit = fit_multistart(f, starts, m);

    HomPeakAreas out;
    out.center = fit.params[0];
    out.degenerate = peak_spacing < 1.5 * irf_fwhm;
    const Eigen::MatrixXd A = design(out.center);
    const Eigen::VectorXd a = nnls(A, y);
    const double dof = static_cast<double>(m - 6);
    const double red_chi2 = (y - A * a).squaredNorm() / dof;
    const Eigen::MatrixXd cov = (A.transpose() * A).inverse() * red_chi2;
    for (int k = 0; k < 5; ++k) {
        out.area[k] = a[k];
        out.error[k] = std::sqrt(std::max(cov(k, k), 0.0));
    }
    return out;
}

void HomCorrectionParams::validate() const {
    if (std::abs(R + T - 1.0) > 1e-3) throw std::invalid_argument("HomCorrectionParams: R + T must equal 1");
    if (!(R > 0.0 && T > 0.0)) throw std::invalid_argument("HomCorrectionParams: R and T must be > 0");
    if (!(g2 >= 0.0)) throw std::invalid_argument("HomCorrectionParams: g2 must be >= 0");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("HomCorrectionParams: epsilon must be in [0, 1)");
}

Measured raw_visibility(Measured A3_cross, Measured A3_co) {
    if (!(A3_cross.value > 0.0)) throw std::invalid_argument("raw_visibility: A3 (cross) must be > 0");
    Measured v;
    v.value = (A3_cross.value - A3_co.value) / A3_cross.value;
    const double a = A3_co.error / A3_cross.value;
    const double b = A3_co.value * A3_cross.error / (A3_cross.value * A3_cross.value);
    v.error = std::hypot(a, b);
    return v;
}

double santori_ideal_raw_visibility(const HomCorrectionParams& p) {
    p.validate();
    const double c = (1.0 - p.epsilon) * (1.0 - p.epsilon);
    const double v = 2.0 * c * p.R * p.R * p.T * p.T /
                     ((p.R * p.R * p.R * p.T + p.R * p.T * p.T * p.T) * (1.0 + 2.0 * p.g2));
    if (!(v > 0.0)) throw std::domain_error("santori_ideal_raw_visibility: unusable configuration");
    return v;
}

VisibilityResult corrected_visibility_santori(Measured raw, const HomCorrectionParams& params) {
    const double ideal = santori_ideal_raw_visibility(params);
    VisibilityResult r;
    r.value = raw.value / ideal;
    r.error = raw.error / ideal;
    r.saturated = r.value > 1.0;
    return r;
}

VisibilityResult corrected_visibility_santori(Measured A3_co, Measured A3_cross, const HomCorrectionParams& params) {
    return corrected_visibility_santori(raw_visibility(A3_cross, A3_co), params);
}

VisibilityResult corrected_visibility_somaschi(const HomPeakAreas& a, const HomCorrectionParams& p) {
    p.validate();
    const double s = a.area[1] + a.area[3];
    if (!(s > 0.0)) throw std::invalid_argument("corrected_visibility_somaschi: A2 + A4 must be > 0");
    const double x = a.area[2] / s;
    const double sx = std::hypot(a.error[2] / s, a.area[2] * std::hypot(a.error[1], a.error[3]) / (s * s));
    const double c = (1.0 - p.epsilon) * (1.0 - p.epsilon);
    const double rt = p.R * p.T, q = p.R * p.R + p.T * p.T;
    const double slope = 2.0 + p.g2 * q / rt;
    VisibilityResult r;
    r.value = (2.0 * p.g2 + q / (2.0 * rt) - x * slope) / c;
    r.error = slope * sx / c;
    r.saturated = r.value > 1.0;
    return r;
}

HomPeakAreas hom_peak_area_model(const HomCorrectionParams& p, double visibility, double scale) {
    p.validate();
    const double rt = p.R * p.T, q = p.R * p.R + p.T * p.T;
    const double c = (1.0 - p.epsilon) * (1.0 - p.epsilon);
    HomPeakAreas a;
    const double side = 2.0 * rt * rt + p.g2 * rt * q;
    a.area = {0.5 * side, side, rt * q * (1.0 + 2.0 * p.g2) - 2.0 * c * rt * rt * visibility, side, 0.5 * side};
    for (double& v : a.area) v *= scale;
    return a;
}

double MollowCalibration::omega_at(double power) const {
    if (power < 0.0) throw std::invalid_argument("MollowCalibration: power must be >= 0");
    return std::sqrt(slope * power);
}

MollowCalibration mollow_calibration(const std::vector<double>& powers, const std::vector<double>& splittings,
                                     double gamma1, double gamma2) {
    if (powers.size() != splittings.size()) throw std::invalid_argument("mollow_calibration: length mismatch");
    MollowCalibration cal;
    cal.damping_offset = 0.25 * (gamma1 - gamma2) * (gamma1 - gamma2);
    std::vector<double> P, Y;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (powers[i] < 0.0) throw std::invalid_argument("mollow_calibration: powers must be >= 0");
        if (splittings[i] > 0.0) {
            P.push_back(powers[i]);
            Y.push_back(splittings[i] * splittings[i] + cal.damping_offset);
        }
    }
    if (P.size() < 3) throw std::invalid_argument("mollow_calibration: need 3 points above the damping threshold");
    double spp = 0.0, spy = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        spp += P[i] * P[i];
        spy += P[i] * Y[i];
    }
    cal.slope = spy / spp;
    if (!(cal.slope > 0.0)) throw std::runtime_error("mollow_calibration: negative fitted slope");
    double rss = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) rss += std::pow(Y[i] - cal.slope * P[i], 2);
    cal.slope_err = std::sqrt(rss / static_cast<double>(P.size() - 1) / spp);
    return cal;
}

}  // namespace qdc
