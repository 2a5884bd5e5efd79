#include "qdc/cavityqed.hpp"
#include "qdc/dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace qdc;

namespace {

SystemParams bare_emitter(double gamma) {
    SystemParams p;
    p.g = 0.0;
    p.kappa = 1.0;
    p.gamma1_prime = gamma;
    p.space = make_space(2, 1);
    return p;
}

// Fixed-step RK4 of the lab-frame master equation, written out independently
// of LindbladModel: H = wA |X><X| + wC a^dag a + i g (a^dag s- - a s+)
// + E0(t) e^{-i w0 t} s+ + h.c.
CMatrixd lab_frame_rk4(const SystemParams& p, const LindbladModel& model, double w0, double t_end, int steps) {
    const auto& o = model.ops();
    const double wA = w0 + p.delta_al, wC = w0 + p.delta_cl;
    const Complex I(0.0, 1.0);
    const CMatrixd H0 = wA * o.excited + wC * o.number + I * p.g * (o.a_dag * o.sigma_minus - o.a * o.sigma_plus);
    const CMatrixd c1 = std::sqrt(p.gamma1_prime) * o.sigma_minus;
    const CMatrixd c2 = std::sqrt(2.0 * p.kappa) * o.a;
    const auto rhs = [&](double t, const CMatrixd& rho) {
        const Complex e = model.drive_amplitude(t) * std::exp(-I * w0 * t);
        const CMatrixd H = H0 + e * o.sigma_plus + std::conj(e) * o.sigma_minus;
        CMatrixd d = -I * (H * rho - rho * H);
        for (const CMatrixd* c : {&c1, &c2}) {
            const CMatrixd cd = c->adjoint();
            d += *c * rho * cd - 0.5 * (cd * *c * rho + rho * cd * *c);
        }
        return d;
    };
    CMatrixd rho = ground_density(p.space);
    const double h = t_end / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const CMatrixd k1 = rhs(t, rho);
        const CMatrixd k2 = rhs(t + h / 2, rho + h / 2 * k1);
        const CMatrixd k3 = rhs(t + h / 2, rho + h / 2 * k2);
        const CMatrixd k4 = rhs(t + h, rho + h * k3);
        rho += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return rho;
}

}  // namespace

TEST_CASE("generator rejects NaN drive amplitudes") {
    const SystemParams p = SystemParams::device_defaults();
    const CMatrixd rho = ground_density(p.space);
    CHECK_THROWS_AS(lindblad_generator(p, DriveField::continuous({std::numeric_limits<double>::quiet_NaN(), 0.0}), 0.0, rho),
                    std::invalid_argument);
    GaussianPulse pulse = make_pulse(units::pi, 5.0);
    pulse.area = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(lindblad_generator(p, DriveField::pulse_train({pulse}), 0.0, rho), std::invalid_argument);
    CHECK_THROWS_AS(lindblad_generator(p, DriveField::none(), 0.0, CMatrixd::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("generator is trace-free and Hermitian-preserving") {
    const SystemParams p = SystemParams::device_defaults();
    const DriveField d = DriveField::pulse_train({make_pulse(units::pi, 5.0)}, DriveTarget::emitter);
    const CVectord psi = (basis_state(p.space, 0, 0) + basis_state(p.space, 1, 1)) / std::sqrt(2.0);
    const CMatrixd drho = lindblad_generator(p, d, d.pulses[0].center, pure_density(psi));
    CHECK(std::abs(drho.trace()) < 1e-12);
    CHECK(is_hermitian(drho, 1e-12));
}

TEST_CASE("free coherence decay at gamma1' / 2") {
    const double gamma = 0.2;
    const SystemParams p = bare_emitter(gamma);
    const CVectord psi = (basis_state(p.space, 0, 0) + basis_state(p.space, 1, 0)) / std::sqrt(2.0);
    const auto times = linspace(0.0, 20.0, 21);
    const EvolutionResult r = evolve(pure_density(psi), p, DriveField::none(), times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double coh = std::abs(r.states[i](p.space.index(1, 0), p.space.index(0, 0)));
        CHECK(coh == doctest::Approx(0.5 * std::exp(-gamma * times[i] / 2.0)).epsilon(1e-7));
        CHECK(r.excited_population()[i] == doctest::Approx(0.5 * std::exp(-gamma * times[i])).epsilon(1e-7));
    }
}

TEST_CASE("CW steady state matches the optical Bloch solution") {
    const double gamma = 0.5;
    for (double delta : {0.0, 0.3, -0.8}) {
        for (double omega : {0.2, 1.0}) {
            SystemParams p = bare_emitter(gamma);
            p.delta_al = delta;
            // E0 = Omega / 2 for emitter drive.
            const DriveField d = DriveField::continuous(omega / 2.0, DriveTarget::emitter);
            EvolveOptions o;
            o.ode = {1e-10, 1e-12};
            const EvolutionResult r = evolve(ground_density(p.space), p, d, {0.0, 100.0}, o);
            const double expected = (omega * omega / 4.0) / (delta * delta + gamma * gamma / 4.0 + omega * omega / 2.0);
            CHECK(std::abs(r.excited_population()[1] - expected) < 1e-6);
        }
    }
}

TEST_CASE("rotating-frame populations agree with a lab-frame integration") {
    SystemParams p = SystemParams::from_energies_ueV(600.0, 120.0, 30.0, 40.0, -60.0);
    p.space = make_space(2, 2);
    const GaussianPulse pulse = make_pulse(units::pi, 3.0);
    const DriveField d = DriveField::pulse_train({pulse}, DriveTarget::emitter);
    const LindbladModel model(p, d);
    const double w0 = 3.0;  // rad/ps, kept small so fixed-step RK4 stays cheap
    const double t_end = pulse.end() + 5.0;
    EvolveOptions o;
    o.ode = {1e-11, 1e-13};
    const EvolutionResult rot = evolve(ground_density(p.space), p, d, {0.0, t_end}, o);
    const CMatrixd lab = lab_frame_rk4(p, model, w0, t_end, 40000);
    const auto& ops = model.ops();
    CHECK(std::abs(expectation(ops.excited, lab).real() - rot.excited_population()[1]) < 1e-7);
    CHECK(std::abs(expectation(ops.number, lab).real() - rot.cavity_photons[1]) < 1e-7);
    // Coherences pick up the frame phase exp(-i w0 t).
    const Complex lab_coh = expectation(ops.sigma_minus, lab);
    const Complex rot_coh = expectation(ops.sigma_minus, rot.states[1]);
    CHECK(std::abs(lab_coh * std::exp(Complex(0.0, w0 * t_end)) - rot_coh) < 1e-7);
}

TEST_CASE("evolution keeps trace and positivity, self-converges under tighter tolerances") {
    const SystemParams p = SystemParams::device_defaults();
    const DriveField d = DriveField::pulse_train({make_pulse(units::pi, 13.0)}, DriveTarget::emitter);
    const auto times = linspace(0.0, d.pulses_end() + 100.0, 201);
    EvolveOptions loose;
    EvolveOptions tight;
    tight.ode = {1e-11, 1e-13};
    const EvolutionResult a = evolve(ground_density(p.space), p, d, times, loose);
    const EvolutionResult b = evolve(ground_density(p.space), p, d, times, tight);
    CHECK(a.max_trace_error < 1e-8);
    CHECK(b.min_eigenvalue > -1e-8);
    CHECK((a.populations - b.populations).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((b.populations.array() >= -1e-6).all());
    CHECK((b.populations.array() <= 1.0 + 1e-6).all());
    CHECK_THROWS_AS(evolve(ground_density(p.space), p, d, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("short pi pulse decays with the slow eigenvalue lifetime") {
    SystemParams p = SystemParams::device_defaults();
    const double t1 = radiative_lifetime(p);
    CHECK(t1 == doctest::Approx(21.8849).epsilon(1e-4));
    // The resonant pulse bypasses |f>, so its lifetime does not matter.
    p.space = make_space(3, 2);
    p.relax = Relaxation{1e4};
    const RelaxationTrace r = relaxation_decay(p, RelaxationExcitation::resonant);
    CHECK(r.decay_time == doctest::Approx(t1).epsilon(1e-4));
    // The weak-coupling estimate 1 / (gamma1' + 4 g^2 / 2 kappa) sits close by.
    const double weak = 1.0 / (p.gamma1_prime + 4.0 * p.g * p.g / (2.0 * p.kappa));
    CHECK(t1 == doctest::Approx(weak).epsilon(0.05));
}

TEST_CASE("three-level relaxation is limited by the slower step") {
    SystemParams p = SystemParams::device_defaults();
    p.space = make_space(3, 2);
    p.relax = Relaxation{100.0};
    const RelaxationTrace via = relaxation_decay(p, RelaxationExcitation::via_f_level);
    CHECK(via.decay_time == doctest::Approx(100.0).epsilon(0.01));
    p.relax = Relaxation{2.0};
    const RelaxationTrace fast = relaxation_decay(p, RelaxationExcitation::via_f_level);
    CHECK(fast.decay_time == doctest::Approx(radiative_lifetime(p)).epsilon(0.01));
    p.space = make_space(2, 2);
    CHECK_THROWS(p.validate());
}

TEST_CASE("pi calibration grows with pulse duration") {
    const SystemParams p = SystemParams::device_defaults();
    const PiCalibration a = calibrate_pi_pulse(p, 0.5);
    const PiCalibration b = calibrate_pi_pulse(p, 7.0);
    const PiCalibration c = calibrate_pi_pulse(p, 13.0);
    CHECK(a.area == doctest::Approx(units::pi).epsilon(0.01));
    CHECK(a.area < b.area);
    CHECK(b.area < c.area);
    CHECK(a.emission == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("DPRF intensity recovers to twice the single-pulse value") {
    const SystemParams p = SystemParams::device_defaults();
    const double t1 = radiative_lifetime(p);
    const DprfScan s = dprf_scan(p, 2.0, {0.0, 2.0 * t1, 12.0 * t1});
    CHECK(s.normalized[2] == doctest::Approx(2.0).epsilon(0.01));
    CHECK(s.normalized[1] == doctest::Approx(dprf_intensity(2.0 * t1, t1)).epsilon(0.05));
    CHECK(s.normalized[0] < 1.2);
}

TEST_CASE("default Fock cutoff is converged") {
    const SystemParams p = SystemParams::device_defaults();
    const DriveField d = DriveField::pulse_train({make_pulse(units::pi, 13.0)}, DriveTarget::emitter);
    const FockConvergence fc = check_fock_convergence(p, d, linspace(0.0, d.pulses_end() + 60.0, 50));
    CHECK(fc.converged);
    CHECK(fc.max_difference < 1e-4);
}
