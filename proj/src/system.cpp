#include "qdc/system.hpp"

#include "qdc/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdc {

void SystemParams::validate() const {
    space.validate();
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw std::invalid_argument("SystemParams: " + what);
    };
    require(std::isfinite(g) && g >= 0.0, "g must be finite and >= 0");
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(std::isfinite(gamma1_prime) && gamma1_prime > 0.0, "gamma1_prime must be > 0");
    require(std::isfinite(delta_al) && std::isfinite(delta_cl), "detunings must be finite");
    require(std::isfinite(pure_dephasing) && pure_dephasing >= 0.0, "pure_dephasing must be >= 0");
    if (relax) {
        require(space.emitter_levels == 3, "relaxation channel requires emitter_levels = 3");
        require(std::isfinite(relax->t1f) && relax->t1f > 0.0, "t1f must be > 0");
    }
}

SystemParams SystemParams::from_energies_ueV(double two_kappa, double g, double gamma1_prime,
                                             double delta_al, double delta_cl) {
    SystemParams p;
    p.kappa = units::ueV_to_rad_per_ps(two_kappa) / 2.0;
    p.g = units::ueV_to_rad_per_ps(g);
    p.gamma1_prime = units::ueV_to_rad_per_ps(gamma1_prime);
    p.delta_al = units::ueV_to_rad_per_ps(delta_al);
    p.delta_cl = units::ueV_to_rad_per_ps(delta_cl);
    p.validate();
    return p;
}

SystemParams SystemParams::device_defaults() { return from_energies_ueV(2510.0, 135.0, 0.68); }

double radiative_lifetime(const SystemParams& params) {
    params.validate();
    // Non-Hermitian Hamiltonian on {|X,0>, |0,1>}:
    //   [[dAL - i gamma/2, -i g], [i g, dCL - i kappa]]
    using C = std::complex<double>;
    const C h11(params.delta_al, -params.gamma1_prime / 2.0);
    const C h22(params.delta_cl, -params.kappa);
    const C off = params.g * params.g;  // product of the off-diagonal entries (-ig)(ig)
    const C tr = h11 + h22;
    const C disc = std::sqrt((h11 - h22) * (h11 - h22) + 4.0 * off);
    const C l1 = (tr + disc) / 2.0;
    const C l2 = (tr - disc) / 2.0;
    const double slow = std::min(std::abs(l1.imag()), std::abs(l2.imag()));
    return 1.0 / (2.0 * slow);
}

const char* channel_name(Channel c) noexcept {
    switch (c) {
        case Channel::emitter: return "emitter";
        case Channel::cavity: return "cavity";
        case Channel::relaxation: return "relaxation";
        case Channel::dephasing: return "dephasing";
    }
    return "unknown";
}

LindbladModel::LindbladModel(SystemParams params, DriveField drive)
    : params_(std::move(params)), drive_(std::move(drive)) {
    params_.validate();
    drive_.validate();
    ops_ = build_system_operators<double>(params_.space);
    const std::complex<double> I(0.0, 1.0);

    auto add_channel = [this](Channel kind, double rate, const CMatrixd& base) {
        if (rate <= 0.0) return;
        CollapseChannel c{kind, std::sqrt(rate) * base, {}, {}};
        c.op_dag = c.op.adjoint();
        c.op_dag_op = c.op_dag * c.op;
        channels_.push_back(std::move(c));
    };
    add_channel(Channel::emitter, params_.gamma1_prime, ops_.sigma_minus);
    add_channel(Channel::cavity, 2.0 * params_.kappa, ops_.a);
    if (params_.relax) add_channel(Channel::relaxation, 1.0 / params_.relax->t1f, ops_.x_from_f);
    add_channel(Channel::dephasing, 2.0 * params_.pure_dephasing, ops_.excited);

    const CMatrixd H0 = params_.delta_al * ops_.excited + params_.delta_cl * ops_.number +
                        I * params_.g * (ops_.a_dag * ops_.sigma_minus - ops_.a * ops_.sigma_plus);
    CMatrixd lambda = CMatrixd::Zero(dim(), dim());
    for (const auto& c : channels_) lambda += 0.5 * c.op_dag_op;
    K0_ = -I * H0 - lambda;

    const CMatrixd& D = drive_.target == DriveTarget::cavity ? ops_.a : ops_.sigma_minus;
    drive_down_ = -I * D;
    drive_up_ = -I * D.adjoint();

    if (drive_.target == DriveTarget::cavity) {
        if (drive_.is_pulsed() && !drive_.pulses.empty() && params_.g <= 0.0) {
            throw std::invalid_argument("LindbladModel: cavity-driven pulses need g > 0");
        }
        pulse_scale_ = params_.g > 0.0 ? params_.kappa / (2.0 * params_.g) : 0.0;
    } else {
        pulse_scale_ = 0.5;
    }
}

std::complex<double> LindbladModel::drive_amplitude(double t) const noexcept {
    if (drive_.kind == DriveField::Kind::cw) return drive_.cw_amplitude;
    return pulse_scale_ * drive_.pulse_rabi(t);
}

CMatrixd LindbladModel::hamiltonian(double t) const {
    const std::complex<double> I(0.0, 1.0);
    CMatrixd K;
    effective_generator(t, K);
    CMatrixd lambda = CMatrixd::Zero(dim(), dim());
    for (const auto& c : channels_) lambda += 0.5 * c.op_dag_op;
    // K = -i H - lambda  =>  H = i (K + lambda)
    return I * (K + lambda);
}

void LindbladModel::effective_generator(double t, CMatrixd& out) const {
    const std::complex<double> e0 = drive_amplitude(t);
    out = K0_;
    if (e0 != std::complex<double>(0.0, 0.0)) {
        out += e0 * drive_up_ + std::conj(e0) * drive_down_;
    }
}

void LindbladModel::apply(double t, const CMatrixd& rho, CMatrixd& drho, CMatrixd& K_work) const {
    effective_generator(t, K_work);
    drho.noalias() = K_work * rho;
    drho.noalias() += rho * K_work.adjoint();
    for (const auto& c : channels_) drho.noalias() += c.op * rho * c.op_dag;
}

int LindbladModel::channel_index(Channel c) const noexcept {
    for (std::size_t i = 0; i < channels_.size(); ++i) {
        if (channels_[i].kind == c) return static_cast<int>(i);
    }
    return -1;
}

CMatrixd lindblad_generator(const SystemParams& params, const DriveField& drive, double t,
                            const CMatrixd& rho) {
    const LindbladModel model(params, drive);
    if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
        throw std::invalid_argument("lindblad_generator: density matrix dimension mismatch");
    }
    CMatrixd drho(model.dim(), model.dim()), K;
    model.apply(t, rho, drho, K);
    return drho;
}

}  // namespace qdc
