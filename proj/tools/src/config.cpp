#include "config.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <openssl/sha.h>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace naqmd::app {

ScanAxis parse_scan_axis(const std::string& name)
{
    if (name == "none") {
        return ScanAxis::None;
    }
    if (name == "angle") {
        return ScanAxis::Angle;
    }
    if (name == "distance") {
        return ScanAxis::Distance;
    }
    if (name == "duration") {
        return ScanAxis::Duration;
    }
    throw ValidationError(fmt::format("unknown scan axis '{}' (none, angle, distance, duration)", name));
}

std::string to_string(ScanAxis axis)
{
    switch (axis) {
    case ScanAxis::Angle:
        return "angle";
    case ScanAxis::Distance:
        return "distance";
    case ScanAxis::Duration:
        return "duration";
    case ScanAxis::None:
        break;
    }
    return "none";
}

namespace {

/// Walks a mapping, converting known keys and recording every problem with its dotted path.
class Section {
public:
    Section(const YAML::Node& node, std::string path, std::vector<std::string>& errors)
        : node_(node), path_(std::move(path)), errors_(errors)
    {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            errors_.push_back(fmt::format("{}: expected a mapping", path_));
            node_ = YAML::Node();
        }
    }

    ~Section()
    {
        if (!node_ || !node_.IsMap()) {
            return;
        }
        for (const auto& kv : node_) {
            const std::string key = kv.first.as<std::string>();
            if (!seen_.count(key)) {
                errors_.push_back(fmt::format("{}: unknown key", join(key)));
            }
        }
    }

    Section(const Section&) = delete;
    Section& operator=(const Section&) = delete;

    bool has(const std::string& key)
    {
        seen_.insert(key);
        return node_ && node_.IsMap() && node_[key] && !node_[key].IsNull();
    }

    template <typename T>
    void read(const std::string& key, T& out)
    {
        if (!has(key)) {
            return;
        }
        try {
            out = node_[key].as<T>();
        } catch (const YAML::Exception&) {
            errors_.push_back(fmt::format("{}: malformed value", join(key)));
        }
    }

    /// Reads a value and reports a bad one without aborting the parse.
    template <typename T, typename Convert>
    void read_as(const std::string& key, Convert convert)
    {
        if (!has(key)) {
            return;
        }
        try {
            convert(node_[key].as<T>());
        } catch (const YAML::Exception&) {
            errors_.push_back(fmt::format("{}: malformed value", join(key)));
        } catch (const ValidationError& e) {
            errors_.push_back(fmt::format("{}: {}", join(key), e.what()));
        }
    }

    YAML::Node child(const std::string& key)
    {
        seen_.insert(key);
        return node_ && node_.IsMap() ? node_[key] : YAML::Node();
    }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::vector<std::string>& errors() { return errors_; }

private:
    YAML::Node node_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

std::vector<YAML::Node> list_items(const YAML::Node& node, const std::string& path, std::vector<std::string>& errors)
{
    std::vector<YAML::Node> out;
    if (!node || node.IsNull()) {
        return out;
    }
    if (!node.IsSequence()) {
        errors.push_back(fmt::format("{}: expected a list", path));
        return out;
    }
    for (const auto& item : node) {
        out.push_back(item);
    }
    return out;
}

BasisRecipe read_recipe(Section& system, BasisRecipe recipe)
{
    Section basis(system.child("basis"), system.join("basis"), system.errors());
    auto& errors = system.errors();
    if (basis.has("nuclear")) {
        recipe.nuclear.clear();
        const auto items = list_items(basis.child("nuclear"), basis.join("nuclear"), errors);
        for (std::size_t i = 0; i < items.size(); ++i) {
            Section s(items[i], fmt::format("{}[{}]", basis.join("nuclear"), i), errors);
            NuclearShellRecipe r;
            s.read("l", r.l);
            s.read("sigma_first", r.sigma_first);
            s.read("count", r.count);
            s.read("ratio", r.ratio);
            recipe.nuclear.push_back(r);
        }
    }
    if (basis.has("hydrogenic")) {
        recipe.hydrogenic.clear();
        const auto items = list_items(basis.child("hydrogenic"), basis.join("hydrogenic"), errors);
        for (std::size_t i = 0; i < items.size(); ++i) {
            Section s(items[i], fmt::format("{}[{}]", basis.join("hydrogenic"), i), errors);
            HydrogenicRecipe r;
            s.read("n", r.n);
            s.read("l", r.l);
            s.read("m", r.m);
            recipe.hydrogenic.push_back(r);
        }
    }
    if (basis.has("grids")) {
        recipe.grids.clear();
        const auto items = list_items(basis.child("grids"), basis.join("grids"), errors);
        for (std::size_t i = 0; i < items.size(); ++i) {
            Section s(items[i], fmt::format("{}[{}]", basis.join("grids"), i), errors);
            HexGridRecipe r;
            s.read("sigma", r.sigma);
            s.read("spacing", r.spacing);
            s.read("n1", r.n1);
            s.read("n2", r.n2);
            recipe.grids.push_back(r);
        }
    }
    if (basis.has("chains")) {
        recipe.chains.clear();
        const auto items = list_items(basis.child("chains"), basis.join("chains"), errors);
        for (std::size_t i = 0; i < items.size(); ++i) {
            Section s(items[i], fmt::format("{}[{}]", basis.join("chains"), i), errors);
            ChainRecipe r;
            s.read("sigma", r.sigma);
            s.read("spacing", r.spacing);
            s.read("count", r.count);
            recipe.chains.push_back(r);
        }
    }
    double rotation = 0.0;
    basis.read("rotation_deg", rotation);
    recipe.frame = Eigen::AngleAxisd(rotation * std::numbers::pi / 180.0, Vec3::UnitX()).toRotationMatrix();
    return recipe;
}

void read_system(Section& root, AppConfig& c)
{
    Section s(root.child("system"), "system", root.errors());
    SystemSetup& sys = c.run.system;
    s.read_as<std::string>("kind", [&](const std::string& v) { sys.kind = parse_system_kind(v); });
    s.read("distance", sys.distance);
    double angle_deg = 0.0;
    s.read("angle_deg", angle_deg);
    sys.angle = angle_deg * std::numbers::pi / 180.0;
    s.read("cholesky_tolerance", sys.cholesky_tolerance);
    s.read("lin_dep_threshold", sys.lin_dep_threshold);
    c.run.integrator.lin_dep_threshold = sys.lin_dep_threshold;
    if (s.has("basis")) {
        sys.recipe = read_recipe(s, default_recipe(sys.kind));
    }
}

void read_pulse(Section& root, AppConfig& c)
{
    Section s(root.child("pulse"), "pulse", root.errors());
    LaserPulse& p = c.run.pulse;
    s.read_as<std::string>("envelope", [&](const std::string& v) { p.envelope = parse_envelope(v); });
    s.read("omega", p.omega);
    if (s.has("wavelength_nm")) {
        if (s.has("omega")) {
            s.errors().push_back("pulse: give either omega or wavelength_nm");
        }
        s.read_as<double>("wavelength_nm", [&](double nm) {
            if (!(nm > 0.0)) {
                throw ValidationError("must be positive");
            }
            p.omega = units::omega_from_nm(nm);
        });
    }
    s.read("amplitude", p.amplitude);
    if (s.has("intensity_wcm2")) {
        if (s.has("amplitude")) {
            s.errors().push_back("pulse: give either amplitude or intensity_wcm2");
        }
        s.read_as<double>("intensity_wcm2", [&](double i) {
            if (!(i >= 0.0)) {
                throw ValidationError("must not be negative");
            }
            p.amplitude = LaserPulse::amplitude_from_intensity(i);
        });
    }
    s.read("phase", p.phase);
    s.read("duration", p.duration);
    s.read_as<double>("duration_fs", [&](double fs) { p.duration = fs * units::au_time_per_fs; });
    s.read("turn_on", p.turn_on);
    s.read_as<double>("turn_on_fs", [&](double fs) { p.turn_on = fs * units::au_time_per_fs; });
    s.read("cycles", p.cycles);
    s.read_as<std::string>("ramp", [&](const std::string& v) { p.ramp = parse_ramp(v); });
    s.read_as<std::vector<double>>("polarization", [&](const std::vector<double>& v) {
        if (v.size() != 3) {
            throw ValidationError("needs three components");
        }
        p.polarization = Vec3(v[0], v[1], v[2]);
    });
}

void read_absorber(Section& root, AppConfig& c)
{
    Section s(root.child("absorber"), "absorber", root.errors());
    s.read("tau_min", c.run.absorber.tau_min);
    s.read("e_ref", c.run.absorber.e_ref);
    s.read("enabled", c.run.absorber.enabled);
}

void read_integrator(Section& root, AppConfig& c)
{
    Section s(root.child("integrator"), "integrator", root.errors());
    IntegratorOptions& o = c.run.integrator;
    s.read_as<std::string>("kind", [&](const std::string& v) { o.kind = parse_propagator(v); });
    s.read("rtol", o.rtol);
    s.read("atol", o.atol);
    s.read("dt_initial", o.dt_initial);
    s.read("dt_min", o.dt_min);
    s.read("dt_max", o.dt_max);
    s.read("safety", o.safety);
    s.read("field_in_frame", o.field_in_frame);
    s.read("force_displacement", o.force_displacement);
    s.read("nuclear_step", o.nuclear_step);
}

void read_run(Section& root, AppConfig& c)
{
    Section s(root.child("run"), "run", root.errors());
    s.read("t_final", c.run.t_final);
    s.read("sample_interval", c.run.sample_interval);
    s.read("mobile_nuclei", c.run.mobile_nuclei);
    s.read("distance_rate", c.run.distance_rate);
}

void read_scan(Section& root, AppConfig& c)
{
    Section s(root.child("scan"), "scan", root.errors());
    s.read_as<std::string>("axis", [&](const std::string& v) { c.scan.axis = parse_scan_axis(v); });
    s.read("values", c.scan.values);
    if (s.has("grid")) {
        if (s.has("values")) {
            s.errors().push_back("scan: give either values or grid");
        }
        Section g(s.child("grid"), "scan.grid", s.errors());
        double start = 0.0;
        double stop = 0.0;
        double step = 0.0;
        g.read("start", start);
        g.read("stop", stop);
        g.read("step", step);
        if (!(step > 0.0) || stop < start) {
            s.errors().push_back("scan.grid: needs step > 0 and stop >= start");
        } else {
            const long n = std::lround(std::floor((stop - start) / step + 1e-9));
            c.scan.values.clear();
            for (long k = 0; k <= n; ++k) {
                c.scan.values.push_back(start + static_cast<double>(k) * step);
            }
        }
    }
    s.read("compare_without_absorber", c.compare_without_absorber);
}

void read_rate(Section& root, AppConfig& c)
{
    Section s(root.child("rate"), "rate", root.errors());
    s.read("start", c.rate.start);
    s.read("cycles", c.rate.cycles);
}

void read_ensemble(Section& root, AppConfig& c)
{
    Section s(root.child("ensemble"), "ensemble", root.errors());
    s.read("size", c.ensemble.size);
    s.read("level", c.ensemble.level);
    s.read("seed", c.ensemble.seed);
    s.read("r_dissociation", c.ensemble.r_dissociation);
    if (s.has("curve")) {
        Section k(s.child("curve"), "ensemble.curve", s.errors());
        k.read("r_min", c.ensemble.curve_r_min);
        k.read("r_max", c.ensemble.curve_r_max);
        k.read("spacing", c.ensemble.curve_spacing);
    }
}

template <typename F>
void collect(std::vector<std::string>& errors, const char* prefix, F&& check)
{
    try {
        check();
    } catch (const ValidationError& e) {
        errors.push_back(fmt::format("{}: {}", prefix, e.what()));
    }
}

} // namespace

void AppConfig::validate() const
{
    std::vector<std::string> errors;
    collect(errors, "system", [&] { run.system.validate(); });
    collect(errors, "system.basis", [&] {
        if (run.system.recipe) {
            build_basis(*run.system.recipe, run.system.nuclei());
        }
    });
    collect(errors, "pulse", [&] {
        LaserPulse pulse = run.pulse;
        if (scan.axis == ScanAxis::Duration && pulse.duration <= 0.0) {
            // Each grid point supplies T.
            pulse.duration = units::au_time_per_fs;
        }
        pulse.validate();
    });
    collect(errors, "absorber", [&] { run.absorber.validate(); });
    collect(errors, "integrator", [&] { run.integrator.validate(); });
    collect(errors, "run", [&] {
        if (run.mobile_nuclei && run.system.kind == SystemKind::H) {
            throw ValidationError("mobile nuclei need a molecule");
        }
        if (run.mobile_nuclei && electron_count(run.system.kind) != 1) {
            throw ValidationError("mobile nuclei are supported for one-electron systems only");
        }
        if (run.sample_interval < 0.0) {
            throw ValidationError("sample_interval must not be negative");
        }
    });
    if (scan.axis != ScanAxis::None) {
        if (scan.values.empty()) {
            errors.push_back("scan.values: grid is empty");
        }
        for (std::size_t i = 1; i < scan.values.size(); ++i) {
            if (!(scan.values[i] > scan.values[i - 1])) {
                errors.push_back("scan.values: grid must be strictly increasing");
                break;
            }
        }
        for (double v : scan.values) {
            if ((scan.axis == ScanAxis::Distance || scan.axis == ScanAxis::Duration) && !(v > 0.0)) {
                errors.push_back(fmt::format("scan.values: {} grid entries must be positive", to_string(scan.axis)));
                break;
            }
        }
    }
    if (!(rate.cycles > 0.0)) {
        errors.push_back("rate.cycles: must be positive");
    }
    if (ensemble.size == 0) {
        errors.push_back("ensemble.size: must be positive");
    }
    if (ensemble.level < 0) {
        errors.push_back("ensemble.level: must not be negative");
    }
    if (!(ensemble.r_dissociation > 0.0)) {
        errors.push_back("ensemble.r_dissociation: must be positive");
    }
    if (!(ensemble.curve_r_min > 0.0 && ensemble.curve_r_max > ensemble.curve_r_min && ensemble.curve_spacing > 0.0)) {
        errors.push_back("ensemble.curve: needs 0 < r_min < r_max and spacing > 0");
    }
    if (output_directory.empty()) {
        errors.push_back("output.directory: must not be empty");
    }
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) {
            msg += "\n  " + e;
        }
        throw ValidationError(msg);
    }
}

AppConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ValidationError(fmt::format("configuration is not valid YAML: {}", e.what()));
    }
    AppConfig c;
    c.source = text;
    std::vector<std::string> errors;
    {
        Section top(root, "", errors);
        read_system(top, c);
        read_pulse(top, c);
        read_absorber(top, c);
        read_integrator(top, c);
        read_run(top, c);
        read_scan(top, c);
        read_rate(top, c);
        read_ensemble(top, c);
        Section out(top.child("output"), "output", errors);
        out.read("directory", c.output_directory);
    }
    try {
        c.validate();
    } catch (const ValidationError& e) {
        // Append the semantic problems to the parse problems, dropping the repeated heading.
        std::string text = e.what();
        const std::string heading = "invalid configuration:\n  ";
        if (text.rfind(heading, 0) == 0) {
            text = text.substr(heading.size());
        }
        errors.push_back(text);
    }
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) {
            msg += "\n  " + e;
        }
        throw ValidationError(msg);
    }
    return c;
}

AppConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError(fmt::format("cannot open configuration file '{}'", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    std::string out;
    for (unsigned char b : digest) {
        out += fmt::format("{:02x}", b);
    }
    return out;
}

} // namespace naqmd::app
