#include "qdc/cli/scenarios.hpp"

#include "qdc/analysis.hpp"
#include "qdc/cavityqed.hpp"
#include "qdc/dynamics.hpp"
#include "qdc/rng.hpp"
#include "qdc/trajectories.hpp"
#include "qdc/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qdc::cli {

Target Target::around(double value, double tolerance, std::string source) {
    return {value - tolerance, value + tolerance, std::move(source)};
}

Target Target::relative(double value, double rel_tolerance, std::string source) {
    return around(value, std::abs(value) * rel_tolerance, std::move(source));
}

const Headline& ScenarioOutput::headline(const std::string& name) const {
    for (const auto& h : headlines) {
        if (h.name == name) return h;
    }
    throw std::out_of_range("no headline '" + name + "'");
}

namespace {

constexpr double kPi = units::pi;

// ------------------------------- config helpers -------------------------------

SystemParams system_params(const ScenarioConfig& c) {
    const SystemParams d = SystemParams::device_defaults();
    SystemParams p = SystemParams::from_energies_ueV(
        c.number("params.two_kappa", units::rad_per_ps_to_ueV(2.0 * d.kappa)),
        c.number("params.g", units::rad_per_ps_to_ueV(d.g)),
        c.number("params.gamma1_prime", units::rad_per_ps_to_ueV(d.gamma1_prime)),
        c.number("params.delta_al", 0.0), c.number("params.delta_cl", 0.0));
    p.space = make_space(static_cast<int>(c.integer("params.emitter_levels", 2)),
                         static_cast<int>(c.integer("params.fock_cutoff", 2)));
    if (c.has("params.t1f")) p.relax = Relaxation{c.number("params.t1f", 100.0)};
    p.pure_dephasing = c.number("params.pure_dephasing", 0.0);
    p.validate();
    return p;
}

DriveTarget drive_target(const ScenarioConfig& c) {
    return c.text("drive.target", "emitter") == "cavity" ? DriveTarget::cavity : DriveTarget::emitter;
}

std::vector<Channel> emission_channels(const ScenarioConfig& c, const std::string& fallback) {
    const std::string s = c.text("trajectories.channels", fallback);
    if (s == "emitter") return {Channel::emitter};
    if (s == "radiative") return {Channel::cavity, Channel::emitter};
    return {Channel::cavity};
}

TrajectoryConfig trajectory_config(const ScenarioConfig& c, const std::string& channels) {
    TrajectoryConfig t;
    t.n_trajectories = static_cast<std::size_t>(c.integer("trajectories.n", 10000));
    t.jobs = static_cast<unsigned>(c.integer("trajectories.jobs", 1));
    t.master_seed = c.seed();
    t.jump_channels = emission_channels(c, channels);
    return t;
}

std::size_t points(const ScenarioConfig& c, long fallback) {
    return static_cast<std::size_t>(c.integer("scan.points", fallback));
}

CavityDesign cavity_design(const ScenarioConfig& c) {
    CavityDesign d;
    d.Q = c.number("cavity.Q", d.Q);
    d.V_m = c.number("cavity.V_m", d.V_m);
    d.overlap_field = c.number("cavity.overlap", d.overlap_field);
    d.photon_energy = c.number("cavity.photon_energy", d.photon_energy * 1e6) * 1e-6;
    d.refractive_index = c.number("cavity.n", d.refractive_index);
    d.validate();
    return d;
}

EmitterConstants emitter_constants(const ScenarioConfig& c) {
    return EmitterConstants::from_lifetime(c.number("cavity.t1_prime", 971.0));
}

Column column(std::string name, std::string unit, std::vector<double> values) {
    return {std::move(name), std::move(unit), std::move(values)};
}

Headline headline(std::string name, double value, double error, std::string unit,
                  std::optional<Target> target = std::nullopt) {
    return {std::move(name), value, error, std::move(unit), std::move(target)};
}

std::vector<double> scaled(std::vector<double> v, double s) {
    for (double& x : v) x *= s;
    return v;
}

// Index of the grid value within rel_tol of `x`, or -1.
long find_value(const std::vector<double>& grid, double x, double rel_tol = 1e-9) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - x) <= rel_tol * std::max(std::abs(x), 1e-300)) return static_cast<long>(i);
    }
    return -1;
}

// ------------------------------- closed forms --------------------------------

ScenarioOutput run_purcell(const ScenarioConfig& c) {
    const CavityDesign d = cavity_design(c);
    const EmitterConstants e = emitter_constants(c);
    ScenarioOutput out;
    out.headlines.push_back(headline("ideal_purcell", ideal_purcell(d.Q, d.V_m), 0.0, "",
                                     Target::relative(65.0, 0.005, "ideal Purcell factor 65")));
    out.headlines.push_back(headline("purcell_factor", purcell_factor(d, e), 0.0, "",
                                     Target::around(43.0, 2.0, "measured Purcell factor 43 +- 2")));
    out.headlines.push_back(headline("T1", t1_of_detuning(d, e, 0.0), 0.0, "ps",
                                     Target::around(22.7, 0.7, "T1 = 22.7 ps")));
    const double mu = dipole_moment(1.0 / e.T1_prime, d.photon_energy, d.refractive_index);
    out.headlines.push_back(headline("dipole_moment", mu, 0.0, "D", Target::relative(27.2, 0.03, "|mu| = 27.2 D")));
    const double g_max = coupling_strength(d.photon_energy, mu, 1.0, d.refractive_index, d.V_m);
    const double g = coupling_strength(d.photon_energy, mu, d.overlap_field, d.refractive_index, d.V_m);
    out.headlines.push_back(headline("g_max", g_max, 0.0, "ueV", Target::relative(166.0, 0.03, "hbar g max = 166 ueV")));
    out.headlines.push_back(headline("g", g, 0.0, "ueV", Target::relative(135.0, 0.03, "hbar g = 135 ueV")));
    const auto sc = strong_coupling_check(g, d.two_kappa_ueV(), e.gamma1_prime, d.photon_energy);
    out.headlines.push_back(headline("strong_coupling_threshold_Q", sc.threshold_Q, 0.0, "",
                                     Target::relative(2500.0, 0.05, "strong coupling for Q > 2500")));
    out.headlines.push_back(headline("strong_coupling", sc.strong() ? 1.0 : 0.0, 0.0, "",
                                     Target::around(0.0, 0.0, "weak coupling")));
    out.headlines.push_back(headline("two_kappa", d.two_kappa_ueV(), 0.0, "ueV"));

    Table q{"q_sweep", {}};
    std::vector<double> Q = linspace(100.0, 4000.0, points(c, 40));
    std::vector<double> fp, t1;
    for (double x : Q) {
        CavityDesign dq = d;
        dq.Q = x;
        fp.push_back(purcell_factor(dq, e));
        t1.push_back(t1_of_detuning(dq, e, 0.0));
    }
    q.columns = {column("Q", "", Q), column("purcell_factor", "", fp), column("T1", "ps", t1)};
    out.tables.push_back(std::move(q));
    return out;
}

ScenarioOutput run_detuning(const ScenarioConfig& c) {
    const CavityDesign d = cavity_design(c);
    const EmitterConstants e = emitter_constants(c);
    const SystemParams base = system_params(c);
    const double dmax = c.number("scan.detuning_max", 2000.0);
    const std::vector<double> det = linspace(-dmax, dmax, points(c, 81));
    std::vector<double> fp, t1_closed, t1_model;
    for (double x : det) {
        fp.push_back(purcell_factor(d, e, x));
        t1_closed.push_back(t1_of_detuning(d, e, x));
        SystemParams p = base;
        p.delta_al = base.delta_cl + units::ueV_to_rad_per_ps(x);
        t1_model.push_back(radiative_lifetime(p));
    }
    ScenarioOutput out;
    out.headlines.push_back(headline("T1_resonant", t1_of_detuning(d, e, 0.0), 0.0, "ps",
                                     Target::around(22.7, 0.7, "T1 = 22.7 ps at zero detuning")));
    out.headlines.push_back(headline("T1_model_resonant", radiative_lifetime(base), 0.0, "ps"));
    out.headlines.push_back(headline("T1_at_max_detuning", t1_closed.back(), 0.0, "ps"));
    out.tables.push_back({"t1_vs_detuning",
                          {column("detuning", "ueV", det), column("purcell_factor", "", fp),
                           column("T1_closed_form", "ps", t1_closed), column("T1_model", "ps", t1_model)}});
    return out;
}

// ------------------------------- master equation ------------------------------

ScenarioOutput run_pl_decay(const ScenarioConfig& c) {
    const double tau = c.number("analysis.decay_time", 22.7);
    const double irf = c.number("analysis.irf_fwhm", 60.0);
    const double floor = c.number("analysis.tail_floor", 0.2);
    const double step = std::min(0.5, irf / 16.0);
    SampledCurve trace;
    const double t_lo = -5.0 * irf, t_hi = 60.0 * tau + 5.0 * irf;
    for (double t = t_lo; t <= t_hi + 1e-9; t += step) {
        trace.x.push_back(t);
        trace.y.push_back(t < 0.0 ? 0.0 : std::exp(-t / tau));
    }
    const SampledCurve conv = convolve_irf(trace, irf);
    const DecayFit naive = fit_tail_decay(conv, floor);
    const DecayFit direct = fit_tail_decay(trace, floor);
    const double peak = *std::max_element(conv.y.begin(), conv.y.end());

    ScenarioOutput out;
    out.headlines.push_back(headline("naive_decay_time", naive.tau, naive.tau_err, "ps",
                                     Target::relative(46.2, 0.15, "naive PL decay 46.2 ps")));
    out.headlines.push_back(headline("true_decay_time", tau, 0.0, "ps"));
    out.headlines.push_back(headline("unconvolved_fit", direct.tau, direct.tau_err, "ps",
                                     Target::relative(tau, 1e-3, "input decay time")));
    out.headlines.push_back(headline("area_ratio", conv.integral() / trace.integral(), 0.0, "",
                                     Target::around(1.0, 1e-6, "area preserved")));
    std::vector<double> model(conv.x.size(), 0.0), norm(conv.y.size());
    for (std::size_t i = 0; i < conv.x.size(); ++i) {
        norm[i] = conv.y[i] / peak;
        if (conv.x[i] >= naive.fit_from) model[i] = naive.amplitude / peak * std::exp(-(conv.x[i] - naive.fit_from) / naive.tau);
    }
    // Keep the written trace to a readable resolution.
    const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(2.0 / step)));
    std::vector<double> tx, ty, tc, tm;
    for (std::size_t i = 0; i < conv.x.size(); i += stride) {
        tx.push_back(conv.x[i]);
        ty.push_back(trace.y[i]);
        tc.push_back(norm[i]);
        tm.push_back(model[i]);
    }
    out.tables.push_back({"trace",
                          {column("time", "ps", tx), column("exponential", "", ty), column("convolved", "", tc),
                           column("naive_fit", "", tm)}});
    return out;
}

ScenarioOutput run_rabi(const ScenarioConfig& c) {
    const SystemParams p = system_params(c);
    const double tp = c.number("drive.pulse_fwhm", 13.0);
    ScanOptions so;
    so.target = drive_target(c);
    const std::vector<double> areas = linspace(0.0, c.number("scan.area_max", 4.0 * kPi), points(c, 81));
    const RabiScan scan = rabi_scan(p, tp, areas, so);
    const PiCalibration cal = calibrate_pi_pulse(p, tp, so);
    std::vector<double> total(areas.size());
    for (std::size_t i = 0; i < areas.size(); ++i) total[i] = scan.cavity_emission[i] + scan.emitter_emission[i];

    ScenarioOutput out;
    out.headlines.push_back(headline("pi_area", cal.area, 0.0, "rad"));
    out.headlines.push_back(headline("pi_area_over_pi", cal.area / kPi, 0.0, ""));
    out.headlines.push_back(headline("emission_at_pi", cal.emission, 0.0, "photons"));
    out.headlines.push_back(headline("T1_model", radiative_lifetime(p), 0.0, "ps"));
    out.tables.push_back({"rabi",
                          {column("area", "rad", areas), column("cavity_photons", "", scan.cavity_emission),
                           column("emitter_photons", "", scan.emitter_emission), column("total_photons", "", total)}});
    return out;
}

ScenarioOutput run_dprf(const ScenarioConfig& c) {
    const SystemParams p = system_params(c);
    const double tp = c.number("drive.pulse_fwhm", 13.0);
    const double t1 = radiative_lifetime(p);
    const std::vector<double> dt = linspace(0.0, c.number("scan.delta_t_max", 8.0 * t1), points(c, 61));
    DprfOptions o;
    o.scan.target = drive_target(c);
    o.relative_phase = c.number("drive.relative_phase", kPi / 2.0);
    o.area = c.number("drive.area", 0.0);
    const DprfScan scan = dprf_scan(p, tp, dt, o);

    SampledCurve fit_data;
    for (std::size_t i = 0; i < dt.size(); ++i) {
        if (dt[i] >= 3.0 * tp) {
            fit_data.x.push_back(dt[i]);
            fit_data.y.push_back(scan.normalized[i]);
        }
    }
    const RecoveryFit fit = fit_exponential_recovery(fit_data);
    std::vector<double> model(dt.size()), analytic(dt.size());
    for (std::size_t i = 0; i < dt.size(); ++i) {
        model[i] = fit.amplitude * (1.0 - std::exp(-dt[i] / fit.T1));
        analytic[i] = dprf_intensity(dt[i], t1);
    }
    ScenarioOutput out;
    out.headlines.push_back(headline("T1_fit", fit.T1, fit.T1_err, "ps",
                                     Target::around(22.7, 0.9, "DPRF lifetime 22.7 +- 0.9 ps")));
    out.headlines.push_back(headline("T1_model", t1, 0.0, "ps"));
    out.headlines.push_back(headline("T1_fit_bias", fit.T1 / t1 - 1.0, 0.0, ""));
    out.headlines.push_back(headline("amplitude", fit.amplitude, fit.amplitude_err, ""));
    out.headlines.push_back(headline("pi_area", scan.pi_area, 0.0, "rad"));
    out.tables.push_back({"dprf",
                          {column("delta_t", "ps", dt), column("emission", "photons", scan.emission),
                           column("normalized", "", scan.normalized), column("fit", "", model),
                           column("analytic", "", analytic)}});
    return out;
}

ScenarioOutput run_relaxation(const ScenarioConfig& c) {
    SystemParams p = system_params(c);
    p.space = make_space(3, p.space.fock_cutoff);
    if (!p.relax) p.relax = Relaxation{100.0};
    SystemParams no_purcell = p;
    no_purcell.g = 0.0;

    const RelaxationTrace res = relaxation_decay(p, RelaxationExcitation::resonant);
    const RelaxationTrace via = relaxation_decay(p, RelaxationExcitation::via_f_level);
    const RelaxationTrace bare = relaxation_decay(no_purcell, RelaxationExcitation::via_f_level);

    ScenarioOutput out;
    out.headlines.push_back(headline("T1_model", radiative_lifetime(p), 0.0, "ps"));
    out.headlines.push_back(headline("T1f", p.relax->t1f, 0.0, "ps"));
    out.headlines.push_back(headline("decay_resonant", res.decay_time, 0.0, "ps"));
    out.headlines.push_back(headline("decay_via_f", via.decay_time, 0.0, "ps"));
    out.headlines.push_back(headline("decay_via_f_no_purcell", bare.decay_time, 0.0, "ps"));
    const auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    out.tables.push_back({"resonant",
                          {column("time", "ps", res.evolution.times), column("X_population", "", vec(res.x_population))}});
    out.tables.push_back({"via_f",
                          {column("time", "ps", via.evolution.times), column("X_population", "", vec(via.x_population)),
                           column("f_population", "", vec(via.f_population))}});
    out.tables.push_back({"via_f_no_purcell",
                          {column("time", "ps", bare.evolution.times),
                           column("X_population", "", vec(bare.x_population)),
                           column("f_population", "", vec(bare.f_population))}});
    return out;
}

// ------------------------------- trajectories --------------------------------

ScenarioOutput run_g2_duration(const ScenarioConfig& c) {
    const SystemParams p = system_params(c);
    const TrajectoryConfig tc = trajectory_config(c, "cavity");
    const std::vector<double> grid = c.list("scan.tp_over_t1", {0.02, 0.05, 0.106, 0.2, 0.3, 0.4, 0.573, 0.8});
    const DriveTarget target = drive_target(c);
    const auto exact = g2_vs_pulse_duration(p, grid, tc, AreaConvention::exact_pi, target);
    const auto expt = g2_vs_pulse_duration(p, grid, tc, AreaConvention::experimental, target);

    ScenarioOutput out;
    out.headlines.push_back(headline("T1_model", radiative_lifetime(p), 0.0, "ps"));
    const auto add = [&](double x, double value, double tol, const char* label) {
        const long i = find_value(grid, x);
        if (i < 0) return;
        const auto& pt = exact[static_cast<std::size_t>(i)];
        std::ostringstream name;
        name << "g2_at_" << format_number(x);
        out.headlines.push_back(headline(name.str(), pt.g2.value, pt.g2.error, "", Target::around(value, tol, label)));
        const auto& pe = expt[static_cast<std::size_t>(i)];
        out.headlines.push_back(headline(name.str() + "_experimental_area", pe.g2.value, pe.g2.error, ""));
    };
    add(0.573, 0.134, 0.03, "g2 = 0.134 at T_P = 13 ps");
    add(0.106, 0.026, 0.015, "g2 = 0.026 at T_P = 2.4 ps");

    std::vector<double> tp, g2a, g2ae, m_a, area_b, g2b, g2be, m_b;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        tp.push_back(exact[i].pulse_fwhm);
        g2a.push_back(exact[i].g2.value);
        g2ae.push_back(exact[i].g2.error);
        m_a.push_back(exact[i].stats.mean);
        area_b.push_back(expt[i].area);
        g2b.push_back(expt[i].g2.value);
        g2be.push_back(expt[i].g2.error);
        m_b.push_back(expt[i].stats.mean);
    }
    out.tables.push_back({"g2",
                          {column("tp_over_t1", "", grid), column("pulse_fwhm", "ps", tp),
                           column("g2_pi", "", g2a), column("g2_pi_err", "", g2ae), column("mean_photons_pi", "", m_a),
                           column("experimental_area", "rad", area_b), column("g2_experimental", "", g2b),
                           column("g2_experimental_err", "", g2be), column("mean_photons_experimental", "", m_b)}});
    return out;
}

ScenarioOutput run_dprf_mc(const ScenarioConfig& c) {
    const SystemParams p = system_params(c);
    const double t1 = radiative_lifetime(p);
    const TrajectoryConfig tc = trajectory_config(c, "radiative");
    const double tp = c.number("drive.pulse_fwhm", 0.02 * t1);
    const std::vector<double> dtau =
        c.list("scan.delta_tau", scaled({0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0}, t1));
    DoublePulseOptions o;
    o.target = drive_target(c);
    o.relative_phase = c.number("drive.relative_phase", kPi / 2.0);
    o.area = c.number("drive.area", 0.0);
    const DoublePulseStatistics st = double_pulse_statistics(p, tp, dtau, tc, o);

    ScenarioOutput out;
    out.headlines.push_back(headline("T1_model", t1, 0.0, "ps"));
    out.headlines.push_back(headline("pulse_area", st.area, 0.0, "rad"));
    const long i5 = find_value(dtau, 5.0 * t1);
    if (i5 >= 0) {
        const auto& pt = st.points[static_cast<std::size_t>(i5)];
        out.headlines.push_back(headline("P2_at_5T1", pt.p2, pt.stats.p_err.size() > 2 ? pt.stats.p_err[2] : 0.0, "",
                                         Target::around(0.993, 0.005, "P[2] = 0.993 at 5 T1")));
    }
    std::vector<double> p0, p1, p2, p2p, mean, analytic;
    for (const auto& pt : st.points) {
        p0.push_back(pt.p0);
        p1.push_back(pt.p1);
        p2.push_back(pt.p2);
        p2p.push_back(pt.p2_plus);
        mean.push_back(pt.stats.mean);
        analytic.push_back(p2_probability(pt.delta_tau, t1));
    }
    out.tables.push_back({"statistics",
                          {column("delta_tau", "ps", dtau), column("P0", "", p0), column("P1", "", p1),
                           column("P2", "", p2), column("P2_plus", "", p2p), column("mean_photons", "", mean),
                           column("P2_analytic", "", analytic)}});
    return out;
}

// ------------------------------- analysis pipelines --------------------------

struct RrsNoiseSummary {
    double mean_t1_err = 0.0, mean_t2_err = 0.0;
    std::size_t failures = 0;
};

RrsNoiseSummary rrs_noise_study(const SampledCurve& clean, double noise, std::size_t realizations, std::uint64_t seed) {
    RrsNoiseSummary s;
    std::size_t ok = 0;
    for (std::size_t k = 0; k < realizations; ++k) {
        std::mt19937_64 eng(stream_seed(seed, k));
        std::normal_distribution<double> normal(0.0, 1.0);
        SampledCurve q = clean;
        for (double& y : q.y) y *= 1.0 + noise * normal(eng);
        try {
            const RrsFit f = fit_rrs_curve(q);
            s.mean_t1_err += f.T1_err;
            s.mean_t2_err += f.T2_err;
            ++ok;
        } catch (const std::exception&) {
            ++s.failures;
        }
    }
    if (ok == 0) throw std::runtime_error("rrs: every noisy realization failed to fit");
    s.mean_t1_err /= static_cast<double>(ok);
    s.mean_t2_err /= static_cast<double>(ok);
    return s;
}

ScenarioOutput run_rrs(const ScenarioConfig& c) {
    const double T1 = c.number("rrs.t1", 24.6);
    const double T2 = c.number("rrs.t2", 49.2);
    const double noise = c.number("analysis.noise", 0.02);
    const auto realizations = static_cast<std::size_t>(c.integer("analysis.realizations", 200));
    const std::vector<double> powers = c.list("scan.powers", {10, 25, 50, 100, 200, 500, 1000});
    const double p_ref = c.number("rrs.reference_power", 25.0);
    const double f_ref = c.number("rrs.reference_rabi", 2e9);
    const double omega_ref = 2.0 * kPi * f_ref * 1e-12;  // rad/ps
    const double slope_true = omega_ref * omega_ref / p_ref;

    // Power calibration from the Mollow splitting at the same powers.
    const double g1 = 1.0 / T1, g2 = 1.0 / T2;
    std::vector<double> splittings;
    for (double P : powers) splittings.push_back(damped_rabi(std::sqrt(slope_true * P), g1, g2).value_or(0.0));
    const MollowCalibration cal = mollow_calibration(powers, splittings, g1, g2);

    // Fabry-Perot spectra in GHz: RRS at the instrument width, SE lifetime-broadened.
    const double fp_irf = 0.1;
    const double se_width = 1e3 / (kPi * T2);
    const std::vector<double> nu = linspace(-6.0 * se_width, 6.0 * se_width, 4801);
    SampledCurve clean, fp_fractions;
    std::vector<double> omegas, truth, from_fp;
    for (double P : powers) {
        const double om = cal.omega_at(P);
        const double f = rrs_fraction(T1, T2, om);
        SampledCurve spec;
        spec.x = nu;
        spec.y = fp_spectrum_model(nu, 0.0, f, fp_irf, 1.0 - f, se_width);
        FpOptions fo;
        fo.constrained_linewidth = se_width;
        const FpDecomposition dec = decompose_fp_spectrum(spec, fp_irf, fo);
        omegas.push_back(om);
        truth.push_back(f);
        from_fp.push_back(dec.rrs_fraction());
    }
    clean.x = omegas;
    clean.y = from_fp;
    double fp_dev = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) fp_dev = std::max(fp_dev, std::abs(from_fp[i] - truth[i]));

    const RrsFit exact = fit_rrs_curve(clean);
    const RrsNoiseSummary lit = rrs_noise_study(clean, noise, realizations, c.seed());
    // Noise level at which the mean T1 error bar matches the reported one.
    const double calibrated = noise * 1.6 / lit.mean_t1_err;
    const RrsNoiseSummary calib = rrs_noise_study(clean, calibrated, realizations, c.seed());

    SampledCurve noisy = clean;
    {
        std::mt19937_64 eng(stream_seed(c.seed(), 0));
        std::normal_distribution<double> normal(0.0, 1.0);
        for (double& y : noisy.y) y *= 1.0 + noise * normal(eng);
    }
    const RrsFit one = fit_rrs_curve(noisy);

    ScenarioOutput out;
    out.headlines.push_back(headline("mollow_slope_rel_error", cal.slope / slope_true - 1.0, 0.0, "",
                                     Target::around(0.0, 1e-9, "power calibration recovered")));
    out.headlines.push_back(headline("fp_max_fraction_error", fp_dev, 0.0, "", Target{0.0, 1e-6, "FP decomposition"}));
    out.headlines.push_back(headline("T1_noiseless", exact.T1, exact.T1_err, "ps",
                                     Target::relative(T1, 1e-6, "input T1")));
    out.headlines.push_back(headline("T2_noiseless", exact.T2, exact.T2_err, "ps",
                                     Target::relative(T2, 1e-6, "input T2")));
    out.headlines.push_back(headline("max_fraction", rrs_fraction(T1, T2, 0.0), 0.0, "",
                                     Target::around(T2 / (2.0 * T1), 1e-12, "T2 / 2 T1")));
    out.headlines.push_back(headline("T1_noisy", one.T1, one.T1_err, "ps"));
    out.headlines.push_back(headline("T2_noisy", one.T2, one.T2_err, "ps"));
    out.headlines.push_back(headline("mean_T1_error", lit.mean_t1_err, 0.0, "ps",
                                     Target{0.8, 3.2, "T1 error 1.6 ps within a factor 2"}));
    out.headlines.push_back(headline("mean_T2_error", lit.mean_t2_err, 0.0, "ps",
                                     Target{2.7, 10.8, "T2 error 5.4 ps within a factor 2"}));
    out.headlines.push_back(headline("calibrated_noise", calibrated, 0.0, ""));
    out.headlines.push_back(headline("calibrated_mean_T1_error", calib.mean_t1_err, 0.0, "ps",
                                     Target{0.8, 3.2, "T1 error 1.6 ps within a factor 2"}));
    out.headlines.push_back(headline("calibrated_mean_T2_error", calib.mean_t2_err, 0.0, "ps",
                                     Target{2.7, 10.8, "T2 error 5.4 ps within a factor 2"}));

    std::vector<double> fitted;
    for (double om : omegas) fitted.push_back(rrs_fraction(exact.T1, exact.T2, om));
    out.tables.push_back({"fractions",
                          {column("power", "nW", powers), column("omega_R", "rad/ps", omegas),
                           column("mollow_splitting", "rad/ps", splittings), column("fraction_true", "", truth),
                           column("fraction_fp", "", from_fp), column("fraction_noisy", "", noisy.y),
                           column("fraction_fit", "", fitted)}});
    return out;
}

HomCorrectionParams hom_params(const ScenarioConfig& c) {
    HomCorrectionParams h;
    h.g2 = c.number("hom.g2", 0.134);
    h.epsilon = c.number("hom.epsilon", 0.032);
    h.R = c.number("hom.R", 0.544);
    h.T = c.number("hom.T", 0.456);
    h.validate();
    return h;
}

SampledCurve hom_histogram(const HomPeakAreas& areas, double spacing, double irf, double counts, std::uint64_t seed) {
    SampledCurve h;
    const double bin = std::min(irf / 8.0, 16.0);
    const double half = 2.5 * spacing;
    for (double t = -half; t <= half + 1e-9; t += bin) h.x.push_back(t);
    double total = 0.0;
    for (double a : areas.area) total += a;
    const double scale = counts > 0.0 ? counts / total : 1.0;
    std::array<double, 5> scaled_areas{};
    for (int k = 0; k < 5; ++k) scaled_areas[k] = areas.area[k] * scale * bin;  // counts per bin x width
    h.y = hom_peak_model(h.x, scaled_areas, 0.0, spacing, irf);
    if (counts > 0.0) {
        std::mt19937_64 eng(seed);
        for (double& y : h.y) y = static_cast<double>(std::poisson_distribution<long>(std::max(y, 0.0))(eng));
        for (double y : h.y) h.y_err.push_back(std::sqrt(std::max(y, 1.0)));
    }
    return h;
}

ScenarioOutput run_visibility(const ScenarioConfig& c) {
    const HomCorrectionParams hp = hom_params(c);
    const Measured raw{c.number("hom.raw_visibility", 0.601), c.number("hom.raw_visibility_error", 0.032)};
    const double spacing = c.number("hom.peak_spacing", 2000.0);
    const double irf = c.number("hom.irf_fwhm", 60.0);
    const double counts = c.number("hom.counts", 50000.0);

    const VisibilityResult v_raw = corrected_visibility_santori(raw, hp);
    const double ideal = santori_ideal_raw_visibility(hp);

    // Synthetic histograms whose central peaks reproduce the measured raw visibility.
    const double v_true = raw.value / ideal;
    const HomPeakAreas co = hom_peak_area_model(hp, v_true);
    const HomPeakAreas cross = hom_peak_area_model(hp, 0.0);
    const SampledCurve h_co = hom_histogram(co, spacing, irf, counts, stream_seed(c.seed(), 0));
    const SampledCurve h_cross = hom_histogram(cross, spacing, irf, counts, stream_seed(c.seed(), 1));
    const HomPeakAreas f_co = fit_hom_peaks(h_co, irf, spacing, 0.0);
    const HomPeakAreas f_cross = fit_hom_peaks(h_cross, irf, spacing, 0.0);

    // Normalize each histogram by its side peaks so the two central areas compare.
    const auto side = [](const HomPeakAreas& a) { return a.area[1] + a.area[3]; };
    const Measured a3_co{f_co.area[2] / side(f_co), f_co.error[2] / side(f_co)};
    const Measured a3_cross{f_cross.area[2] / side(f_cross), f_cross.error[2] / side(f_cross)};
    const Measured raw_fit = raw_visibility(a3_cross, a3_co);
    const VisibilityResult santori_fit = corrected_visibility_santori(a3_co, a3_cross, hp);
    const VisibilityResult somaschi_fit = corrected_visibility_somaschi(f_co, hp);

    // Agreement of the two corrections on model-consistent areas.
    double max_diff = 0.0;
    for (double g2 : linspace(0.0, 0.2, 11)) {
        for (double eps : linspace(0.0, 0.1, 11)) {
            for (double R : linspace(0.45, 0.55, 11)) {
                for (double V : {0.5, 0.8, 1.0}) {
                    HomCorrectionParams q{g2, eps, R, 1.0 - R};
                    const HomPeakAreas a = hom_peak_area_model(q, V);
                    const HomPeakAreas x = hom_peak_area_model(q, 0.0);
                    const double s = corrected_visibility_santori(Measured{a.area[2], 0.0}, Measured{x.area[2], 0.0}, q).value;
                    const double m = corrected_visibility_somaschi(a, q).value;
                    max_diff = std::max(max_diff, std::abs(s - m));
                }
            }
        }
    }

    ScenarioOutput out;
    out.headlines.push_back(headline("ideal_raw_visibility", ideal, 0.0, ""));
    out.headlines.push_back(headline("santori_from_raw", v_raw.value, v_raw.error, "",
                                     Target::around(0.796, 0.005, "Santori-corrected visibility 79.6 %")));
    out.headlines.push_back(headline("raw_from_peaks", raw_fit.value, raw_fit.error, ""));
    out.headlines.push_back(headline("santori_from_peaks", santori_fit.value, santori_fit.error, ""));
    out.headlines.push_back(headline("somaschi_from_peaks", somaschi_fit.value, somaschi_fit.error, "",
                                     Target::around(0.798, 0.005, "Somaschi-corrected visibility 79.8 %")));
    out.headlines.push_back(headline("max_formula_disagreement", max_diff, 0.0, "",
                                     Target{0.0, 0.01, "corrections agree within 1 point"}));

    const std::vector<double> model_co = hom_peak_model(h_co.x, f_co.area, f_co.center, spacing, irf);
    out.tables.push_back({"histograms",
                          {column("delay", "ps", h_co.x), column("co_counts", "", h_co.y),
                           column("cross_counts", "", h_cross.y), column("co_fit", "", model_co)}});
    std::vector<double> idx, aco, aco_e, across, across_e;
    for (int k = 0; k < 5; ++k) {
        idx.push_back(k + 1);
        aco.push_back(f_co.area[k]);
        aco_e.push_back(f_co.error[k]);
        across.push_back(f_cross.area[k]);
        across_e.push_back(f_cross.error[k]);
    }
    out.tables.push_back({"peak_areas",
                          {column("peak", "", idx), column("co_area", "", aco), column("co_area_err", "", aco_e),
                           column("cross_area", "", across), column("cross_area_err", "", across_e)}});
    return out;
}

ScenarioOutput run_budget(const ScenarioConfig& c) {
    const CavityDesign d = cavity_design(c);
    const EmitterConstants e = emitter_constants(c);
    const double fp = purcell_factor(d, e);
    const CouplingEfficiencies eff =
        coupling_efficiencies(d.Q, c.number("cavity.Q_uncoupled", 1109.0), c.number("cavity.branch_ratio", 4.0), fp);

    BrightnessBudget b;
    b.rep_rate = c.number("budget.rep_rate", b.rep_rate);
    b.eta_qd_waveguide = c.number("budget.eta", eff.qd_waveguide);
    b.waveguide_length = c.number("budget.length", b.waveguide_length);
    b.propagation_loss = c.number("budget.loss", b.propagation_loss);
    b.detector_efficiency = c.number("budget.detector", b.detector_efficiency);
    BrightnessBudget fast = b;
    fast.rep_rate = 10e9;

    ScenarioOutput out;
    out.headlines.push_back(headline("purcell_factor", fp, 0.0, ""));
    out.headlines.push_back(headline("eta_cavity_waveguides", eff.cavity_waveguides_total, 0.0, "",
                                     Target::around(0.51, 0.01, "51 %")));
    out.headlines.push_back(headline("eta_main_waveguide", eff.main_waveguide, 0.0, "", Target::around(0.41, 0.01, "41 %")));
    out.headlines.push_back(headline("eta_secondary_waveguide", eff.secondary_waveguide, 0.0, "",
                                     Target::around(0.10, 0.01, "10 %")));
    out.headlines.push_back(headline("beta", eff.beta, 0.0, "", Target::around(0.98, 0.01, "98 %")));
    out.headlines.push_back(headline("eta_qd_waveguide", eff.qd_waveguide, 0.0, "", Target::around(0.40, 0.01, "40 %")));
    out.headlines.push_back(headline("count_rate", count_rate_budget(b) * 1e-6, 0.0, "MHz",
                                     Target::relative(4.1, 0.05, "4.1 MHz at 76.2 MHz")));
    out.headlines.push_back(headline("count_rate_10GHz", count_rate_budget(fast) * 1e-6, 0.0, "MHz",
                                     Target::relative(540.0, 0.05, "540 MHz at 10 GHz")));

    std::vector<double> rep, rate;
    for (double lg : linspace(7.0, 10.0, points(c, 31))) {
        BrightnessBudget x = b;
        x.rep_rate = std::pow(10.0, lg);
        rep.push_back(x.rep_rate * 1e-6);
        rate.push_back(count_rate_budget(x) * 1e-6);
    }
    out.tables.push_back({"count_rate", {column("rep_rate", "MHz", rep), column("detected_rate", "MHz", rate)}});
    return out;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_registry() {
    static const std::vector<ScenarioInfo> registry = {
        {"purcell", "Purcell factor, dipole moment, coupling strength and strong-coupling threshold", 1.0, run_purcell},
        {"detuning", "T1 versus emitter-cavity detuning, closed form and master-equation model", 1.0, run_detuning},
        {"pl_decay", "exponential decay seen through a Gaussian detector response, naive tail fit", 5.0, run_pl_decay},
        {"rabi", "emitted photons versus pulse area and the experimental pi area", 60.0, run_rabi},
        {"dprf", "double pi-pulse intensity recovery and fitted T1", 60.0, run_dprf},
        {"relaxation", "X population after resonant and via-|f> excitation", 10.0, run_relaxation},
        {"g2_duration", "g2(0) from trajectory photon statistics versus pulse duration", 600.0, run_g2_duration},
        {"dprf_mc", "photon-number probabilities for a pair of short pi pulses", 300.0, run_dprf_mc},
        {"rrs", "RRS fraction pipeline: Mollow calibration, FP decomposition, T1/T2 fit", 10.0, run_rrs},
        {"visibility", "HOM peak fit and Santori/Somaschi visibility corrections", 1.0, run_visibility},
        {"budget", "coupling efficiencies and detected count-rate budget", 1.0, run_budget},
    };
    return registry;
}

const ScenarioInfo* find_scenario(const std::string& name) {
    for (const auto& s : scenario_registry()) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::vector<std::string> scenario_names() {
    std::vector<std::string> n;
    for (const auto& s : scenario_registry()) n.push_back(s.name);
    return n;
}

bool ScenarioReport::targets_met() const noexcept {
    return std::all_of(headlines.begin(), headlines.end(), [](const Headline& h) { return h.passed(); });
}

namespace {

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string ScenarioReport::to_text() const {
    std::ostringstream os;
    os << "scenario " << scenario << " (qdcavity " << version << ", seed " << seed << ")\n";
    for (const auto& h : headlines) {
        os << "  " << h.name << " = " << short_number(h.value);
        if (h.error > 0.0) os << " +- " << short_number(h.error);
        if (!h.unit.empty()) os << " " << h.unit;
        if (h.target) {
            os << "  [" << (h.passed() ? "ok" : "MISS") << ": " << h.target->source << ", accepted "
               << short_number(h.target->lo) << " .. " << short_number(h.target->hi) << "]";
        }
        os << "\n";
    }
    for (const auto& f : files) os << "  wrote " << f.string() << "\n";
    os << "  duration " << short_number(duration_s) << " s\n";
    return os.str();
}

std::string ScenarioReport::to_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["version"] = version;
    j["seed"] = seed;
    j["input"] = input_echo;
    auto hs = nlohmann::ordered_json::array();
    for (const auto& h : headlines) {
        nlohmann::ordered_json x;
        x["name"] = h.name;
        x["value"] = h.value;
        x["error"] = h.error;
        x["unit"] = h.unit;
        if (h.target) {
            x["target"] = {{"lo", h.target->lo}, {"hi", h.target->hi}, {"source", h.target->source}};
            x["passed"] = h.passed();
        }
        hs.push_back(std::move(x));
    }
    j["headlines"] = std::move(hs);
    auto fs = nlohmann::ordered_json::array();
    for (const auto& f : files) fs.push_back(f.string());
    j["files"] = std::move(fs);
    j["duration_s"] = duration_s;
    j["targets_met"] = targets_met();
    return j.dump(2);
}

ScenarioOutput compute_scenario(const ScenarioConfig& config) {
    const ScenarioInfo* info = find_scenario(config.scenario());
    if (!info) throw std::invalid_argument("unknown scenario '" + config.scenario() + "'");
    return info->run(config);
}

ScenarioReport run_scenario(const ScenarioConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioOutput out = compute_scenario(config);
    ScenarioReport rep;
    rep.scenario = config.scenario();
    rep.input_echo = serialize(config);
    rep.seed = config.seed();
    rep.headlines = std::move(out.headlines);
    const std::filesystem::path dir = config.text("scenario.output_dir", "out");
    const std::string format = config.text("scenario.format", "csv");
    const OutputMeta meta{rep.scenario, kVersion, rep.seed};
    for (const auto& t : out.tables) rep.files.push_back(write_table(t, meta, dir, format));
    rep.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto report_path = dir / (rep.scenario + "_report.json");
    rep.files.push_back(report_path);
    std::ofstream(report_path) << rep.to_json() << "\n";
    return rep;
}

ScenarioConfig default_config(const std::string& scenario) {
    const auto r = validate_config_text("[scenario]\nname = " + scenario + "\n", scenario_names());
    if (!r.ok()) throw std::invalid_argument(r.errors.front().to_string());
    return *r.config;
}

}  // namespace qdc::cli
