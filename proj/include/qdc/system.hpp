// system.hpp - emitter-cavity parameters and the rotating-frame Lindblad model
//
// Rotating frame at the laser frequency w0:
//   H(t) = dAL |X><X| + dCL a^dag a + i g (a^dag s- - a s+) + E0(t) D^dag + E0(t)* D
// with D = a (cavity drive) or D = s- (emitter drive), dAL = wA - w0 and
// dCL = wC - w0. Collapse channels: sqrt(gamma1') s-, sqrt(2 kappa) a and, when
// present, sqrt(1/T1f) |X><f| and sqrt(2/T2*) |X><X|.

#pragma once

#include "qdc/drive.hpp"
#include "qdc/hilbert.hpp"

#include <optional>
#include <vector>

namespace qdc {

struct Relaxation {
    double t1f = 100.0;  // ps, lifetime of |f> -> |X>
};

struct SystemParams {
    double g = 0.0;              // rad/ps
    double kappa = 1.0;          // rad/ps, cavity field decay (FWHM = 2 kappa)
    double gamma1_prime = 1e-3;  // rad/ps, bare emitter decay
    double delta_al = 0.0;       // rad/ps, wA - w0
    double delta_cl = 0.0;       // rad/ps, wC - w0
    std::optional<Relaxation> relax;
    double pure_dephasing = 0.0; // 1/T2* in 1/ps; 0 disables the channel
    SystemSpace space{2, 2};

    void validate() const;

    // hbar {2 kappa, g, gamma1'} = {2510, 135, 0.68} ueV.
    static SystemParams device_defaults();
    // Parameters from energies in ueV.
    static SystemParams from_energies_ueV(double two_kappa, double g, double gamma1_prime,
                                          double delta_al = 0.0, double delta_cl = 0.0);
};

// Exciton lifetime T1 of the driven-free system: inverse of the slowest
// population decay rate of the one-excitation manifold {|X,0>, |0,1>}.
double radiative_lifetime(const SystemParams& params);

enum class Channel : int { emitter = 0, cavity = 1, relaxation = 2, dephasing = 3 };
inline constexpr int kChannelCount = 4;

const char* channel_name(Channel c) noexcept;

struct CollapseChannel {
    Channel kind;
    CMatrixd op;         // C
    CMatrixd op_dag;     // C^dag
    CMatrixd op_dag_op;  // C^dag C
};

// Pulse areas are converted to Hamiltonian amplitudes E0 so that the emitter
// sees Rabi frequency Omega(t): E0 = Omega / 2 for emitter drive and
// E0 = kappa Omega / (2 g) for cavity drive (adiabatically eliminated cavity
// at zero cavity-laser detuning).
class LindbladModel {
public:
    LindbladModel(SystemParams params, DriveField drive);

    const SystemParams& params() const noexcept { return params_; }
    const DriveField& drive() const noexcept { return drive_; }
    const SystemOperators<double>& ops() const noexcept { return ops_; }
    const std::vector<CollapseChannel>& channels() const noexcept { return channels_; }
    int dim() const noexcept { return params_.space.dim(); }

    std::complex<double> drive_amplitude(double t) const noexcept;
    CMatrixd hamiltonian(double t) const;
    // K(t) = -i H(t) - 1/2 sum_k C_k^dag C_k, written into `out` (resized as needed).
    void effective_generator(double t, CMatrixd& out) const;
    // Lindblad right-hand side d(rho)/dt = K rho + rho K^dag + sum_k C_k rho C_k^dag.
    void apply(double t, const CMatrixd& rho, CMatrixd& drho, CMatrixd& K_work) const;

    // Index into channels() for a channel kind, or -1.
    int channel_index(Channel c) const noexcept;

private:
    SystemParams params_;
    DriveField drive_;
    SystemOperators<double> ops_;
    std::vector<CollapseChannel> channels_;
    CMatrixd K0_;          // static part of K
    CMatrixd drive_up_;    // -i D^dag
    CMatrixd drive_down_;  // -i D
    double pulse_scale_ = 0.5;
};

// d(rho)/dt of the master equation at time t.
CMatrixd lindblad_generator(const SystemParams& params, const DriveField& drive, double t,
                            const CMatrixd& rho);

}  // namespace qdc
