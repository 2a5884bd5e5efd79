// cavityqed.hpp - closed-form cavity QED relations for a quantum dot in a
// photonic-crystal nanocavity.
//
// Energies are in ueV unless a name says otherwise, lifetimes in ps, rates in
// 1/ps (rad/ps for angular frequencies). Mode volumes are in units of (lambda/n)^3.

#pragma once

#include <optional>

namespace qdc {

struct CavityDesign {
    double Q = 540.0;
    double V_m = 0.63;
    double overlap_field = 0.81;     // |e(r0).mu| / |mu|, squared inside the Purcell factor
    double linewidth_2kappa = 0.0;   // ueV; 0 derives it from Q and the photon energy
    double photon_energy = 1.354;    // eV
    double refractive_index = 3.4;

    // Cavity FWHM in ueV.
    double two_kappa_ueV() const;
    void validate() const;
};

struct EmitterConstants {
    double T1_prime = 971.0;       // ps
    double gamma1_prime = 0.0;     // ueV, hbar / T1'
    double dipole_moment = 0.0;    // Debye

    static EmitterConstants from_lifetime(double T1_prime_ps);
    void validate() const;
};

struct BrightnessBudget {
    double rep_rate = 76.2e6;          // Hz
    double eta_qd_waveguide = 0.40;
    double waveguide_length = 0.1;     // mm
    double propagation_loss = 17.0;    // dB/mm
    double detector_efficiency = 0.20;

    void validate() const;
};

// F_P = 3 Q / (4 pi^2 V_m).
double ideal_purcell(double Q, double V_m);

// Ideal Purcell factor x Lorentzian detuning factor x overlap^2.
double purcell_factor(const CavityDesign& design, const EmitterConstants& emitter, double detuning_ueV = 0.0);
// T1 = T1' / F_P(detuning).
double t1_of_detuning(const CavityDesign& design, const EmitterConstants& emitter, double detuning_ueV);

// |mu| = sqrt(3 pi hbar eps0 gamma1' c^3 / (n w^3)) in Debye; gamma1' in 1/ps.
double dipole_moment(double gamma1_prime_per_ps, double photon_energy_eV, double refractive_index);

// hbar g = hbar sqrt(w |e.mu|^2 / (2 hbar eps0 n^2 V)) in ueV, V = V_m (lambda/n)^3.
double coupling_strength(double photon_energy_eV, double dipole_debye, double overlap_field,
                         double refractive_index, double V_m);

enum class CouplingRegime { weak, boundary, strong };

struct StrongCouplingResult {
    CouplingRegime regime = CouplingRegime::weak;
    bool strong() const noexcept { return regime == CouplingRegime::strong; }
    // Q at which 16 g^2 = (2 kappa - gamma1')^2 with g, gamma1' and the photon energy fixed.
    double threshold_Q = 0.0;
};

// Strong coupling iff 16 g^2 > (2 kappa - gamma1')^2; equality is the boundary.
StrongCouplingResult strong_coupling_check(double hbar_g, double hbar_2kappa, double hbar_gamma1_prime,
                                           double photon_energy_eV = 1.354);

// I_RRS / I_total = (T2 / 2 T1) / (1 + Omega^2 T1 T2).
double rrs_fraction(double T1, double T2, double omega_R);

// sqrt(Omega^2 - (gamma1 - gamma2)^2 / 4), or nullopt below the damping threshold.
std::optional<double> damped_rabi(double omega_R, double gamma1, double gamma2);

// 2 (1 - exp(-dt / T1)).
double dprf_intensity(double delta_t, double T1);
// 1 - exp(-dtau / T1).
double p2_probability(double delta_tau, double T1);

struct CouplingEfficiencies {
    double cavity_waveguides_total = 0.0;  // 1 - Q_M1 / Q_u
    double main_waveguide = 0.0;
    double secondary_waveguide = 0.0;
    double beta = 0.0;                     // F_P / (1 + F_P)
    double qd_waveguide = 0.0;             // beta x main waveguide
};

// branch_ratio is main : secondary waveguide coupling.
CouplingEfficiencies coupling_efficiencies(double Q_M1, double Q_uncoupled, double branch_ratio, double F_P);

// Detected rate in Hz: rep_rate x eta x 10^(-loss L / 10) x detector efficiency.
double count_rate_budget(const BrightnessBudget& budget);

}  // namespace qdc
