// units.hpp - internal unit system and physical constants
//
// Internal units: time in ps, angular frequency in rad/ps. Energies quoted in
// ueV or meV are converted through hbar = 0.65821195 meV ps.

#pragma once

#include <numbers>

namespace qdc::units {

inline constexpr double pi = std::numbers::pi;

inline constexpr double hbar_meV_ps = 0.65821195;
inline constexpr double hbar_ueV_ps = hbar_meV_ps * 1e3;

// SI constants (CODATA 2018)
inline constexpr double hbar_si = 1.054571817e-34;        // J s
inline constexpr double epsilon0_si = 8.8541878128e-12;   // F/m
inline constexpr double c_si = 2.99792458e8;              // m/s
inline constexpr double elementary_charge_si = 1.602176634e-19;  // C (= J/eV)
inline constexpr double debye_si = 3.33564095198e-30;     // C m

inline constexpr double ueV_to_rad_per_ps(double energy_ueV) { return energy_ueV / hbar_ueV_ps; }
inline constexpr double rad_per_ps_to_ueV(double rate) { return rate * hbar_ueV_ps; }
inline constexpr double meV_to_rad_per_ps(double energy_meV) { return energy_meV / hbar_meV_ps; }

// Rate that corresponds to a lifetime, and back.
inline constexpr double rate_from_lifetime(double lifetime_ps) { return 1.0 / lifetime_ps; }

// GHz (cycles) to rad/ps: omega = 2 pi f.
inline constexpr double ghz_to_rad_per_ps(double f_ghz) { return 2.0 * pi * f_ghz * 1e-3; }

inline constexpr double ev_to_rad_per_s(double energy_eV) {
    return energy_eV * elementary_charge_si / hbar_si;
}

}  // namespace qdc::units
