#include "qdc/drive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qdc {

namespace {
const double kFwhmToSigma = 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

double GaussianPulse::sigma() const noexcept { return fwhm * kFwhmToSigma; }

double GaussianPulse::half_width() const noexcept {
    return 4.0 * fwhm / std::sqrt(2.0 * std::numbers::ln2);
}

std::complex<double> GaussianPulse::rabi(double t) const noexcept {
    const double dt = t - center;
    if (std::abs(dt) > half_width()) return {0.0, 0.0};
    const double s = sigma();
    const double env = area / (s * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * dt * dt / (s * s));
    return std::polar(env, phase);
}

GaussianPulse make_pulse(double area, double fwhm) {
    GaussianPulse p{area, fwhm, 0.0, 0.0};
    p.center = p.half_width();
    return p;
}

DriveField DriveField::none(DriveTarget target) {
    DriveField d;
    d.target = target;
    return d;
}

DriveField DriveField::pulse_train(std::vector<GaussianPulse> pulses, DriveTarget target) {
    DriveField d;
    d.kind = Kind::gaussian_pulses;
    d.pulses = std::move(pulses);
    d.target = target;
    d.validate();
    return d;
}

DriveField DriveField::continuous(std::complex<double> amplitude, DriveTarget target) {
    DriveField d;
    d.kind = Kind::cw;
    d.cw_amplitude = amplitude;
    d.target = target;
    d.validate();
    return d;
}

void DriveField::validate() const {
    if (!std::isfinite(cw_amplitude.real()) || !std::isfinite(cw_amplitude.imag())) {
        throw std::invalid_argument("DriveField: CW amplitude is not finite");
    }
    for (std::size_t i = 0; i < pulses.size(); ++i) {
        const auto& p = pulses[i];
        if (!std::isfinite(p.area) || !std::isfinite(p.center) || !std::isfinite(p.phase)) {
            throw std::invalid_argument("DriveField: pulse " + std::to_string(i) + " has a non-finite field");
        }
        if (!(p.fwhm > 0.0) || !std::isfinite(p.fwhm)) {
            throw std::invalid_argument("DriveField: pulse " + std::to_string(i) + " needs fwhm > 0");
        }
        if (i > 0 && p.center < pulses[i - 1].center) {
            throw std::invalid_argument("DriveField: pulse centers must be ordered");
        }
    }
}

std::complex<double> DriveField::pulse_rabi(double t) const noexcept {
    std::complex<double> sum{0.0, 0.0};
    if (kind != Kind::gaussian_pulses) return sum;
    for (const auto& p : pulses) sum += p.rabi(t);
    return sum;
}

std::vector<std::pair<double, double>> DriveField::active_windows() const {
    std::vector<std::pair<double, double>> w;
    if (kind != Kind::gaussian_pulses) return w;
    for (const auto& p : pulses) w.emplace_back(p.start(), p.end());
    std::sort(w.begin(), w.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& iv : w) {
        if (!merged.empty() && iv.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, iv.second);
        } else {
            merged.push_back(iv);
        }
    }
    return merged;
}

double DriveField::pulses_end() const noexcept {
    double e = -std::numeric_limits<double>::infinity();
    if (kind != Kind::gaussian_pulses) return e;
    for (const auto& p : pulses) e = std::max(e, p.end());
    return e;
}

}  // namespace qdc
