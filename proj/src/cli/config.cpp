#include "qdc/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qdc::cli {

namespace {

using Q = Quantity;

struct UnitFactor {
    const char* unit;
    double factor;  // canonical = value * factor
};

const std::vector<UnitFactor>& units_for(Quantity q) {
    static const std::map<Quantity, std::vector<UnitFactor>> table = {
        {Q::energy, {{"ueV", 1.0}, {"meV", 1e3}, {"eV", 1e6}}},
        {Q::time, {{"ps", 1.0}, {"fs", 1e-3}, {"ns", 1e3}}},
        {Q::rate, {{"1/ps", 1.0}, {"1/ns", 1e-3}}},
        {Q::angle, {{"rad", 1.0}, {"pi", std::numbers::pi}, {"deg", std::numbers::pi / 180.0}}},
        {Q::power, {{"nW", 1.0}, {"uW", 1e3}, {"mW", 1e6}}},
        {Q::frequency, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}}},
        {Q::length, {{"mm", 1.0}, {"um", 1e-3}, {"cm", 10.0}}},
        {Q::loss, {{"dB/mm", 1.0}, {"dB/cm", 0.1}}},
        {Q::dimensionless, {{"", 1.0}, {"%", 0.01}}},
        {Q::integer, {{"", 1.0}}},
    };
    static const std::vector<UnitFactor> none;
    const auto it = table.find(q);
    return it == table.end() ? none : it->second;
}

const char* quantity_name(Quantity q) {
    switch (q) {
        case Q::energy: return "energy";
        case Q::time: return "time";
        case Q::rate: return "rate";
        case Q::angle: return "angle";
        case Q::power: return "power";
        case Q::frequency: return "frequency";
        case Q::length: return "length";
        case Q::loss: return "loss";
        case Q::dimensionless: return "dimensionless";
        case Q::integer: return "integer";
        case Q::text: return "text";
        case Q::list: return "list";
    }
    return "?";
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
    const auto p = s.find_first_of("#;");
    return p == std::string::npos ? s : s.substr(0, p);
}

// Parses "<number> [unit]" into canonical units. Returns an error message on failure.
std::optional<std::string> parse_quantity(const std::string& raw, Quantity q, double& out) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || !std::isfinite(v)) return "expected a number, got '" + s + "'";
    const std::string unit = trim(std::string(res.ptr, s.data() + s.size()));
    const auto& table = units_for(q);
    for (const auto& u : table) {
        if (unit == u.unit) {
            out = v * u.factor;
            return std::nullopt;
        }
    }
    std::string allowed;
    for (const auto& u : table) {
        if (*u.unit == '\0') continue;
        allowed += (allowed.empty() ? "" : ", ") + std::string(u.unit);
    }
    if (unit.empty()) return std::string("missing unit for ") + quantity_name(q) + " (one of: " + allowed + ")";
    return "unit '" + unit + "' is not a " + quantity_name(q) + " unit" +
           (allowed.empty() ? std::string(" (dimensionless)") : " (one of: " + allowed + ")");
}

std::optional<std::string> parse_list(const std::string& raw, Quantity element, std::vector<double>& out) {
    std::string s = trim(raw);
    // A trailing unit applies to every element: "0, 10, 20 ps".
    std::string unit;
    const auto last_comma = s.rfind(',');
    const std::string tail = trim(s.substr(last_comma == std::string::npos ? 0 : last_comma + 1));
    const auto sp = tail.find_first_of(" \t");
    if (sp != std::string::npos) unit = trim(tail.substr(sp));
    std::stringstream ss(s);
    std::string item;
    out.clear();
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) return std::string("empty list element");
        const auto isp = item.find_first_of(" \t");
        std::string number = isp == std::string::npos ? item : trim(item.substr(0, isp));
        double v = 0.0;
        if (auto err = parse_quantity(number + (unit.empty() ? "" : " " + unit), element, v)) return err;
        out.push_back(v);
    }
    if (out.empty()) return std::string("empty list");
    return std::nullopt;
}

FieldSpec spec(std::string key, Quantity q, std::string desc) {
    FieldSpec f;
    f.key = std::move(key);
    f.quantity = q;
    f.description = std::move(desc);
    return f;
}

FieldSpec positive(FieldSpec f) {
    f.min = 0.0;
    f.min_exclusive = true;
    return f;
}

FieldSpec nonnegative(FieldSpec f) {
    f.min = 0.0;
    return f;
}

FieldSpec unit_interval(FieldSpec f) {
    f.min = 0.0;
    f.max = 1.0;
    return f;
}

FieldSpec choice(FieldSpec f, std::vector<std::string> c) {
    f.choices = std::move(c);
    return f;
}

FieldSpec list_of(std::string key, Quantity element, std::string desc) {
    FieldSpec f = spec(std::move(key), Q::list, std::move(desc));
    f.element = element;
    return f;
}

FieldSpec range(FieldSpec f, double lo, double hi) {
    f.min = lo;
    f.max = hi;
    return f;
}

}  // namespace

std::string canonical_unit(Quantity q) {
    const auto& t = units_for(q);
    return t.empty() ? std::string() : std::string(t.front().unit);
}

const std::vector<FieldSpec>& field_specs() {
    static const std::vector<FieldSpec> specs = [] {
        std::vector<FieldSpec> v;
        FieldSpec name = spec("scenario.name", Q::text, "registered scenario to run");
        name.required = true;
        v.push_back(name);
        v.push_back(range(spec("scenario.seed", Q::integer, "master seed"), 0.0, 9007199254740992.0));
        v.push_back(choice(spec("scenario.format", Q::text, "output format"), {"csv", "json"}));
        v.push_back(spec("scenario.output_dir", Q::text, "output directory"));

        v.push_back(nonnegative(spec("params.g", Q::energy, "emitter-cavity coupling hbar g")));
        v.push_back(positive(spec("params.two_kappa", Q::energy, "cavity linewidth hbar 2 kappa")));
        v.push_back(positive(spec("params.gamma1_prime", Q::energy, "bare emitter decay hbar gamma1'")));
        v.push_back(spec("params.delta_al", Q::energy, "emitter-laser detuning"));
        v.push_back(spec("params.delta_cl", Q::energy, "cavity-laser detuning"));
        v.push_back(range(spec("params.fock_cutoff", Q::integer, "cavity Fock cutoff"), 1.0, 12.0));
        v.push_back(range(spec("params.emitter_levels", Q::integer, "emitter levels (2 or 3)"), 2.0, 3.0));
        v.push_back(positive(spec("params.t1f", Q::time, "lifetime of |f> -> |X>")));
        v.push_back(nonnegative(spec("params.pure_dephasing", Q::rate, "pure dephasing rate 1/T2*")));

        v.push_back(positive(spec("drive.pulse_fwhm", Q::time, "pulse field FWHM T_P")));
        v.push_back(positive(spec("drive.area", Q::angle, "pulse area (default: calibrated pi)")));
        v.push_back(choice(spec("drive.target", Q::text, "driven mode"), {"emitter", "cavity"}));
        v.push_back(spec("drive.relative_phase", Q::angle, "phase of the second DPRF pulse"));

        v.push_back(range(spec("trajectories.n", Q::integer, "trajectories per point"), 1.0, 1e8));
        v.push_back(range(spec("trajectories.jobs", Q::integer, "worker threads"), 1.0, 1024.0));
        v.push_back(choice(spec("trajectories.channels", Q::text, "channels counted as emission"),
                           {"cavity", "emitter", "radiative"}));

        v.push_back(positive(spec("scan.delta_t_max", Q::time, "largest pulse separation")));
        v.push_back(range(spec("scan.points", Q::integer, "points per scan"), 2.0, 100000.0));
        v.push_back(list_of("scan.tp_over_t1", Q::dimensionless, "pulse durations in units of T1"));
        v.push_back(list_of("scan.delta_tau", Q::time, "double-pulse separations"));
        v.push_back(positive(spec("scan.area_max", Q::angle, "largest Rabi-scan area")));
        v.push_back(positive(spec("scan.detuning_max", Q::energy, "largest QD-cavity detuning")));
        v.push_back(list_of("scan.powers", Q::power, "CW excitation powers"));

        v.push_back(positive(spec("analysis.irf_fwhm", Q::time, "detector IRF FWHM")));
        v.push_back(positive(spec("analysis.decay_time", Q::time, "true decay time of the synthetic PL trace")));
        v.push_back(unit_interval(spec("analysis.tail_floor", Q::dimensionless, "tail-fit floor (fraction of peak)")));
        v.push_back(nonnegative(spec("analysis.noise", Q::dimensionless, "relative noise of synthetic data")));
        v.push_back(range(spec("analysis.realizations", Q::integer, "synthetic noise realizations"), 1.0, 1e6));

        v.push_back(positive(spec("rrs.t1", Q::time, "T1 of the synthetic RRS data")));
        v.push_back(positive(spec("rrs.t2", Q::time, "T2 of the synthetic RRS data")));
        v.push_back(positive(spec("rrs.reference_power", Q::power, "power of the Rabi-frequency reference point")));
        v.push_back(positive(spec("rrs.reference_rabi", Q::frequency, "Omega_R / 2 pi at the reference power")));

        v.push_back(nonnegative(spec("hom.g2", Q::dimensionless, "g2(0) used in the correction")));
        v.push_back(range(spec("hom.epsilon", Q::dimensionless, "1 - fringe contrast"), 0.0, 0.999999));
        v.push_back(unit_interval(spec("hom.R", Q::dimensionless, "beam-splitter reflectance")));
        v.push_back(unit_interval(spec("hom.T", Q::dimensionless, "beam-splitter transmittance")));
        v.push_back(range(spec("hom.raw_visibility", Q::dimensionless, "measured raw visibility"), -1.0, 1.0));
        v.push_back(nonnegative(spec("hom.raw_visibility_error", Q::dimensionless, "raw visibility 1 sigma")));
        v.push_back(positive(spec("hom.peak_spacing", Q::time, "HOM peak spacing")));
        v.push_back(positive(spec("hom.irf_fwhm", Q::time, "HOM detector IRF FWHM")));
        v.push_back(positive(spec("hom.counts", Q::integer, "counts in the synthetic histogram")));

        v.push_back(nonnegative(spec("budget.rep_rate", Q::frequency, "repetition rate")));
        v.push_back(unit_interval(spec("budget.eta", Q::dimensionless, "QD-waveguide coupling efficiency")));
        v.push_back(nonnegative(spec("budget.length", Q::length, "waveguide length")));
        v.push_back(nonnegative(spec("budget.loss", Q::loss, "propagation loss")));
        v.push_back(unit_interval(spec("budget.detector", Q::dimensionless, "detector efficiency")));

        v.push_back(positive(spec("cavity.Q", Q::dimensionless, "quality factor")));
        v.push_back(positive(spec("cavity.V_m", Q::dimensionless, "mode volume in (lambda/n)^3")));
        v.push_back(unit_interval(spec("cavity.overlap", Q::dimensionless, "field overlap factor")));
        v.push_back(positive(spec("cavity.photon_energy", Q::energy, "photon energy")));
        v.push_back(positive(spec("cavity.n", Q::dimensionless, "refractive index")));
        v.push_back(positive(spec("cavity.t1_prime", Q::time, "bare emitter lifetime")));
        v.push_back(positive(spec("cavity.Q_uncoupled", Q::dimensionless, "Q without waveguide loading")));
        v.push_back(positive(spec("cavity.branch_ratio", Q::dimensionless, "main : secondary waveguide coupling")));
        return v;
    }();
    return specs;
}

const FieldSpec* find_field(const std::string& key) {
    for (const auto& f : field_specs()) {
        if (f.key == key) return &f;
    }
    return nullptr;
}

std::string ConfigError::to_string() const {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ", column " << column << ": ";
    if (!field.empty()) os << field << ": ";
    os << message;
    return os.str();
}

double ScenarioConfig::number(const std::string& key, double fallback) const {
    const auto it = fields.find(key);
    return it == fields.end() ? fallback : it->second.number;
}

long ScenarioConfig::integer(const std::string& key, long fallback) const {
    const auto it = fields.find(key);
    return it == fields.end() ? fallback : static_cast<long>(it->second.number);
}

std::string ScenarioConfig::text(const std::string& key, const std::string& fallback) const {
    const auto it = fields.find(key);
    return it == fields.end() ? fallback : it->second.text;
}

std::vector<double> ScenarioConfig::list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = fields.find(key);
    return it == fields.end() ? fallback : it->second.list;
}

std::string format_number(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

struct RawEntry {
    std::string section, key, value;
    int line, key_col, value_col;
};

struct RawFile {
    std::vector<RawEntry> entries;
    std::vector<ConfigError> errors;
};

RawFile lex(const std::string& text) {
    RawFile out;
    std::istringstream in(text);
    std::string line, section;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string body = strip_comment(line);
        const std::string t = trim(body);
        if (t.empty()) continue;
        const int indent = static_cast<int>(body.find_first_not_of(" \t")) + 1;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3) {
                out.errors.push_back({n, indent, "", "malformed section header '" + t + "'"});
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            out.errors.push_back({n, indent, "", "expected 'key = value'"});
            continue;
        }
        RawEntry e;
        e.section = section;
        e.key = trim(body.substr(0, eq));
        e.value = trim(body.substr(eq + 1));
        e.line = n;
        e.key_col = indent;
        const auto vpos = body.find_first_not_of(" \t", eq + 1);
        e.value_col = static_cast<int>(vpos == std::string::npos ? eq + 2 : vpos + 1);
        if (e.key.empty()) {
            out.errors.push_back({n, indent, "", "missing key before '='"});
            continue;
        }
        out.entries.push_back(std::move(e));
    }
    return out;
}

std::string full_key(const RawEntry& e) { return e.section.empty() ? e.key : e.section + "." + e.key; }

std::string render(const FieldValue& v) {
    switch (v.quantity) {
        case Q::text: return v.text;
        case Q::list: {
            std::string s;
            for (std::size_t i = 0; i < v.list.size(); ++i) s += (i ? ", " : "") + format_number(v.list[i]);
            const std::string u = canonical_unit(v.element);
            return u.empty() ? s : s + " " + u;
        }
        default: {
            const std::string u = canonical_unit(v.quantity);
            return u.empty() ? format_number(v.number) : format_number(v.number) + " " + u;
        }
    }
}

std::string emit(const std::map<std::string, std::string>& kv) {
    std::ostringstream os;
    std::string current = "\x01";
    for (const auto& [key, value] : kv) {
        const auto dot = key.find('.');
        const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (section != current) {
            if (current != "\x01") os << "\n";
            if (!section.empty()) os << "[" << section << "]\n";
            current = section;
        }
        os << name << " = " << value << "\n";
    }
    return os.str();
}

// Converts one raw value according to its spec. Returns an error message on failure.
std::optional<std::string> convert(const FieldSpec& f, const std::string& raw, FieldValue& out) {
    out.quantity = f.quantity;
    out.element = f.element;
    if (f.quantity == Q::text) {
        out.text = raw;
        return std::nullopt;
    }
    if (f.quantity == Q::list) return parse_list(raw, f.element, out.list);
    return parse_quantity(raw, f.quantity, out.number);
}

}  // namespace

ValidationResult validate_config_text(const std::string& text, const std::vector<std::string>& scenario_names) {
    ValidationResult result;
    RawFile raw = lex(text);
    result.errors = std::move(raw.errors);
    ScenarioConfig cfg;
    std::map<std::string, int> seen;

    for (const auto& e : raw.entries) {
        const std::string key = full_key(e);
        const FieldSpec* f = find_field(key);
        if (!f) {
            result.errors.push_back({e.line, e.key_col, key, "unknown field"});
            continue;
        }
        if (seen.count(key)) {
            result.errors.push_back({e.line, e.key_col, key, "duplicate field (first set on line " +
                                                                 std::to_string(seen[key]) + ")"});
            continue;
        }
        seen[key] = e.line;
        FieldValue v;
        if (auto err = convert(*f, e.value, v)) {
            result.errors.push_back({e.line, e.value_col, key, *err});
            continue;
        }
        const std::string unit = canonical_unit(f->quantity == Q::list ? f->element : f->quantity);
        const auto bound_error = [&](double x) -> std::optional<std::string> {
            const std::string shown = format_number(x) + (unit.empty() ? "" : " " + unit);
            if (f->min && (f->min_exclusive ? !(x > *f->min) : !(x >= *f->min))) {
                return "value " + shown + " must be " + (f->min_exclusive ? "> " : ">= ") + format_number(*f->min) +
                       (unit.empty() ? "" : " " + unit);
            }
            if (f->max && !(x <= *f->max)) {
                return "value " + shown + " must be <= " + format_number(*f->max) + (unit.empty() ? "" : " " + unit);
            }
            if (f->quantity == Q::integer && x != std::floor(x)) return "value " + shown + " must be an integer";
            return std::nullopt;
        };
        std::optional<std::string> err;
        if (f->quantity == Q::list) {
            for (double x : v.list) {
                if (x <= 0.0) err = "list values must be > 0";
            }
        } else if (f->quantity != Q::text) {
            err = bound_error(v.number);
        } else if (!f->choices.empty() &&
                   std::find(f->choices.begin(), f->choices.end(), v.text) == f->choices.end()) {
            std::string c;
            for (const auto& s : f->choices) c += (c.empty() ? "" : ", ") + s;
            err = "'" + v.text + "' is not one of: " + c;
        }
        if (!err && key == "scenario.name" &&
            std::find(scenario_names.begin(), scenario_names.end(), v.text) == scenario_names.end()) {
            err = "unknown scenario '" + v.text + "' (see 'qdcavity list')";
        }
        if (err) {
            result.errors.push_back({e.line, e.value_col, key, *err});
            continue;
        }
        cfg.fields[key] = std::move(v);
    }

    std::vector<std::string> missing;
    for (const auto& f : field_specs()) {
        if (f.required && !seen.count(f.key)) missing.push_back(f.key);
    }
    if (!missing.empty()) {
        std::string m;
        for (const auto& s : missing) m += (m.empty() ? "" : ", ") + s;
        result.errors.push_back({0, 0, "", "missing required fields: " + m});
    }
    if (result.errors.empty()) {
        if (cfg.has("params.t1f") && cfg.integer("params.emitter_levels", 2) != 3) {
            result.errors.push_back({0, 0, "params.t1f", "requires params.emitter_levels = 3"});
        }
        if (cfg.has("hom.R") && cfg.has("hom.T") && std::abs(cfg.number("hom.R", 0) + cfg.number("hom.T", 0) - 1.0) > 1e-3) {
            result.errors.push_back({0, 0, "hom.R", "R + T must equal 1"});
        }
    }
    std::stable_sort(result.errors.begin(), result.errors.end(),
                     [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; });
    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

ValidationResult validate_config(const std::filesystem::path& path, const std::vector<std::string>& scenario_names) {
    std::ifstream in(path);
    if (!in) {
        ValidationResult r;
        r.errors.push_back({0, 0, "", "cannot read '" + path.string() + "'"});
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return validate_config_text(ss.str(), scenario_names);
}

std::string serialize(const ScenarioConfig& config) {
    std::map<std::string, std::string> kv;
    for (const auto& [key, v] : config.fields) kv[key] = render(v);
    return emit(kv);
}

std::string normalize(const std::string& text) {
    const RawFile raw = lex(text);
    std::map<std::string, std::string> kv;
    for (const auto& e : raw.entries) {
        const std::string key = full_key(e);
        std::string value = e.value;
        if (const FieldSpec* f = find_field(key)) {
            FieldValue v;
            if (!convert(*f, e.value, v)) value = render(v);
        }
        kv.emplace(key, value);
    }
    return emit(kv);
}

}  // namespace qdc::cli
