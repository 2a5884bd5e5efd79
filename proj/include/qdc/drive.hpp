// drive.hpp - coherent drive: Gaussian pulse trains and CW fields

#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace qdc {

enum class DriveTarget { cavity, emitter };

// A Gaussian pulse whose electric field (and hence emitter Rabi frequency) has
// temporal FWHM `fwhm` and pulse area `area` = integral of the Rabi frequency.
struct GaussianPulse {
    double area = 0.0;     // rad
    double fwhm = 1.0;     // ps, electric-field FWHM
    double center = 0.0;   // ps
    double phase = 0.0;    // rad, optical phase of this pulse

    double sigma() const noexcept;
    // Envelope is exactly zero beyond center +- half_width() (= 8 sigma).
    double half_width() const noexcept;
    double start() const noexcept { return center - half_width(); }
    double end() const noexcept { return center + half_width(); }
    // Complex Rabi frequency Omega(t) (rad/ps), including the phase factor.
    std::complex<double> rabi(double t) const noexcept;
};

struct DriveField {
    enum class Kind { gaussian_pulses, cw };

    Kind kind = Kind::gaussian_pulses;
    std::vector<GaussianPulse> pulses;
    // CW amplitude E0 (rad/ps); enters the Hamiltonian as E0 X^dag + h.c.
    std::complex<double> cw_amplitude{0.0, 0.0};
    DriveTarget target = DriveTarget::cavity;

    static DriveField none(DriveTarget target = DriveTarget::cavity);
    static DriveField pulse_train(std::vector<GaussianPulse> pulses,
                                  DriveTarget target = DriveTarget::cavity);
    static DriveField continuous(std::complex<double> amplitude,
                                 DriveTarget target = DriveTarget::cavity);

    // Throws std::invalid_argument on NaN amplitudes, nonpositive widths or
    // unordered pulse centers.
    void validate() const;

    bool is_pulsed() const noexcept { return kind == Kind::gaussian_pulses; }
    // Sum of the pulse Rabi frequencies at time t; zero for CW.
    std::complex<double> pulse_rabi(double t) const noexcept;
    // Support intervals of the pulses, merged where they overlap.
    std::vector<std::pair<double, double>> active_windows() const;
    // End of the last pulse window (or -inf when there are no pulses).
    double pulses_end() const noexcept;
};

// Single Gaussian pulse helper; center defaults to half_width so the window starts at t = 0.
GaussianPulse make_pulse(double area, double fwhm);

}  // namespace qdc
