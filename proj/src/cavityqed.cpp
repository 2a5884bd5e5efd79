#include "qdc/cavityqed.hpp"

#include "qdc/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

double photon_energy_ueV(double eV) { return eV * 1e6; }

}  // namespace

double CavityDesign::two_kappa_ueV() const {
    return linewidth_2kappa > 0.0 ? linewidth_2kappa : photon_energy_ueV(photon_energy) / Q;
}

void CavityDesign::validate() const {
    require(std::isfinite(Q) && Q > 0.0, "CavityDesign: Q must be > 0");
    require(std::isfinite(V_m) && V_m > 0.0, "CavityDesign: V_m must be > 0");
    require(overlap_field >= 0.0 && overlap_field <= 1.0, "CavityDesign: overlap_field must be in [0, 1]");
    require(std::isfinite(photon_energy) && photon_energy > 0.0, "CavityDesign: photon energy must be > 0");
    require(std::isfinite(refractive_index) && refractive_index > 0.0, "CavityDesign: refractive index must be > 0");
    require(std::isfinite(linewidth_2kappa) && linewidth_2kappa >= 0.0, "CavityDesign: linewidth must be >= 0");
    if (linewidth_2kappa > 0.0) {
        const double from_q = photon_energy_ueV(photon_energy) / Q;
        require(std::abs(linewidth_2kappa - from_q) <= 0.05 * from_q,
                "CavityDesign: linewidth inconsistent with Q and photon energy (> 5%)");
    }
}

EmitterConstants EmitterConstants::from_lifetime(double T1_prime_ps) {
    require(T1_prime_ps > 0.0, "EmitterConstants: T1' must be > 0");
    EmitterConstants e;
    e.T1_prime = T1_prime_ps;
    e.gamma1_prime = units::hbar_ueV_ps / T1_prime_ps;
    return e;
}

void EmitterConstants::validate() const {
    require(std::isfinite(T1_prime) && T1_prime > 0.0, "EmitterConstants: T1' must be > 0");
    if (gamma1_prime > 0.0) {
        const double expected = units::hbar_ueV_ps / T1_prime;
        require(std::abs(gamma1_prime - expected) <= 1e-3 * expected,
                "EmitterConstants: gamma1' inconsistent with hbar / T1'");
    }
    require(dipole_moment >= 0.0, "EmitterConstants: dipole moment must be >= 0");
}

void BrightnessBudget::validate() const {
    require(rep_rate >= 0.0 && waveguide_length >= 0.0 && propagation_loss >= 0.0,
            "BrightnessBudget: rates, lengths and losses must be >= 0");
    require(eta_qd_waveguide >= 0.0 && eta_qd_waveguide <= 1.0, "BrightnessBudget: eta_qd_waveguide must be in [0, 1]");
    require(detector_efficiency >= 0.0 && detector_efficiency <= 1.0,
            "BrightnessBudget: detector efficiency must be in [0, 1]");
}

double ideal_purcell(double Q, double V_m) {
    require(Q > 0.0 && V_m > 0.0, "ideal_purcell: Q and V_m must be > 0");
    return 3.0 * Q / (4.0 * units::pi * units::pi * V_m);
}

double purcell_factor(const CavityDesign& design, const EmitterConstants& emitter, double detuning_ueV) {
    design.validate();
    emitter.validate();
    const double lw = design.two_kappa_ueV();
    require(lw > 0.0, "purcell_factor: linewidth must be > 0");
    const double lorentz = lw * lw / (4.0 * detuning_ueV * detuning_ueV + lw * lw);
    return ideal_purcell(design.Q, design.V_m) * lorentz * design.overlap_field * design.overlap_field;
}

double t1_of_detuning(const CavityDesign& design, const EmitterConstants& emitter, double detuning_ueV) {
    const double fp = purcell_factor(design, emitter, detuning_ueV);
    require(fp > 0.0, "t1_of_detuning: Purcell factor is zero");
    return emitter.T1_prime / fp;
}

double dipole_moment(double gamma1_prime_per_ps, double photon_energy_eV, double refractive_index) {
    require(gamma1_prime_per_ps > 0.0 && photon_energy_eV > 0.0 && refractive_index > 0.0,
            "dipole_moment: inputs must be > 0");
    using namespace units;
    const double gamma = gamma1_prime_per_ps * 1e12;
    const double w = ev_to_rad_per_s(photon_energy_eV);
    const double mu = std::sqrt(3.0 * pi * hbar_si * epsilon0_si * gamma * c_si * c_si * c_si /
                                (refractive_index * w * w * w));
    return mu / debye_si;
}

double coupling_strength(double photon_energy_eV, double dipole_debye, double overlap_field,
                         double refractive_index, double V_m) {
    require(photon_energy_eV > 0.0 && refractive_index > 0.0 && V_m > 0.0, "coupling_strength: inputs must be > 0");
    require(dipole_debye >= 0.0 && overlap_field >= 0.0, "coupling_strength: dipole and overlap must be >= 0");
    using namespace units;
    const double w = ev_to_rad_per_s(photon_energy_eV);
    const double lambda = 2.0 * pi * c_si / w;
    const double volume = V_m * std::pow(lambda / refractive_index, 3);
    const double mu = overlap_field * dipole_debye * debye_si;
    const double g = std::sqrt(w * mu * mu / (2.0 * hbar_si * epsilon0_si * refractive_index * refractive_index * volume));
    return g * hbar_si / elementary_charge_si * 1e6;
}

StrongCouplingResult strong_coupling_check(double hbar_g, double hbar_2kappa, double hbar_gamma1_prime,
                                           double photon_energy_eV) {
    require(hbar_g >= 0.0 && hbar_2kappa > 0.0 && hbar_gamma1_prime >= 0.0 && photon_energy_eV > 0.0,
            "strong_coupling_check: rates must be positive");
    StrongCouplingResult r;
    const double lhs = 16.0 * hbar_g * hbar_g;
    const double diff = hbar_2kappa - hbar_gamma1_prime;
    const double rhs = diff * diff;
    if (lhs > rhs) {
        r.regime = CouplingRegime::strong;
    } else if (lhs == rhs) {
        r.regime = CouplingRegime::boundary;
    }
    r.threshold_Q = photon_energy_ueV(photon_energy_eV) / (4.0 * hbar_g + hbar_gamma1_prime);
    return r;
}

double rrs_fraction(double T1, double T2, double omega_R) {
    require(T1 > 0.0 && T2 > 0.0, "rrs_fraction: T1 and T2 must be > 0");
    require(omega_R >= 0.0 && std::isfinite(omega_R), "rrs_fraction: Rabi frequency must be >= 0");
    if (T2 > 2.0 * T1 * (1.0 + 1e-9)) {
        throw std::domain_error("rrs_fraction: T2 exceeds 2 T1 (unphysical)");
    }
    return (T2 / (2.0 * T1)) / (1.0 + omega_R * omega_R * T1 * T2);
}

std::optional<double> damped_rabi(double omega_R, double gamma1, double gamma2) {
    require(omega_R >= 0.0 && gamma1 >= 0.0 && gamma2 >= 0.0, "damped_rabi: rates must be >= 0");
    const double damping = 0.25 * (gamma1 - gamma2) * (gamma1 - gamma2);
    const double w2 = omega_R * omega_R - damping;
    if (w2 < 0.0) return std::nullopt;
    return std::sqrt(w2);
}

double dprf_intensity(double delta_t, double T1) {
    require(delta_t >= 0.0, "dprf_intensity: delta_t must be >= 0");
    require(T1 > 0.0, "dprf_intensity: T1 must be > 0");
    return -2.0 * std::expm1(-delta_t / T1);
}

double p2_probability(double delta_tau, double T1) {
    require(delta_tau >= 0.0, "p2_probability: delta_tau must be >= 0");
    require(T1 > 0.0, "p2_probability: T1 must be > 0");
    return -std::expm1(-delta_tau / T1);
}

CouplingEfficiencies coupling_efficiencies(double Q_M1, double Q_uncoupled, double branch_ratio, double F_P) {
    require(Q_M1 > 0.0 && Q_uncoupled >= Q_M1, "coupling_efficiencies: need Q_uncoupled >= Q_M1 > 0");
    require(branch_ratio > 0.0, "coupling_efficiencies: branch ratio must be > 0");
    require(F_P >= 0.0, "coupling_efficiencies: F_P must be >= 0");
    CouplingEfficiencies e;
    e.cavity_waveguides_total = 1.0 - Q_M1 / Q_uncoupled;
    e.main_waveguide = e.cavity_waveguides_total * branch_ratio / (1.0 + branch_ratio);
    e.secondary_waveguide = e.cavity_waveguides_total - e.main_waveguide;
    e.beta = std::isinf(F_P) ? 1.0 : F_P / (1.0 + F_P);
    e.qd_waveguide = e.beta * e.main_waveguide;
    return e;
}

double count_rate_budget(const BrightnessBudget& b) {
    b.validate();
    const double transmission = std::pow(10.0, -b.propagation_loss * b.waveguide_length / 10.0);
    return b.rep_rate * b.eta_qd_waveguide * transmission * b.detector_efficiency;
}

}  // namespace qdc
