#include "commands.hpp"

#include <naqmd/integrals.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <spdlog/spdlog.h>

namespace naqmd::app {

namespace fs = std::filesystem;

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

struct PointRecord {
    std::string key;
    double wall_time = 0.0;
    bool resumed = false;
};

class Manifest {
public:
    Manifest(std::string command, const AppConfig& config, unsigned workers)
        : command_(std::move(command)), hash_(sha256_hex(config.source)), workers_(workers),
          start_(std::chrono::steady_clock::now())
    {
    }

    const std::string& hash() const { return hash_; }

    void add(PointRecord p)
    {
        std::lock_guard lock(mutex_);
        points_.push_back(std::move(p));
    }

    void write(const fs::path& dir)
    {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        std::sort(points_.begin(), points_.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
        std::string out = fmt::format("command: {}\nversion: {}\nconfig_sha256: {}\nworkers: {}\nwall_time_s: {:.3f}\n",
                                      command_, NAQMD_VERSION, hash_, workers_, wall);
        if (!points_.empty()) {
            out += "runs:\n";
            for (const auto& p : points_) {
                out += fmt::format("  - {{key: {}, wall_time_s: {:.3f}, resumed: {}}}\n", p.key, p.wall_time,
                                   p.resumed ? "true" : "false");
            }
        }
        write_file_atomic(dir / "manifest.yaml", out);
    }

private:
    std::string command_;
    std::string hash_;
    unsigned workers_;
    std::chrono::steady_clock::time_point start_;
    std::mutex mutex_;
    std::vector<PointRecord> points_;
};

std::string point_key(const std::string& axis, double value)
{
    return fmt::format("{}_{:g}", axis, value);
}

/// Reuse a finished point whose summary carries the same configuration hash; otherwise compute
/// it. The summary is written last, so its presence marks a complete point.
Summary cached_point(const fs::path& dir, const std::string& key, Manifest& manifest,
                     const std::function<Summary(const fs::path&)>& compute)
{
    const fs::path summary_path = dir / "summary.txt";
    if (fs::exists(summary_path)) {
        Summary s = Summary::parse(read_file(summary_path));
        if (s.has("config_sha256") && s.string("config_sha256") == manifest.hash()) {
            spdlog::info("{}: reusing finished point", key);
            manifest.add({key, 0.0, true});
            return s;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    Summary s;
    try {
        s = compute(dir);
    } catch (const NumericalError& e) {
        throw NumericalError(fmt::format("{}: {}", key, e.what()));
    }
    s.set("config_sha256", manifest.hash());
    write_file_atomic(summary_path, s.text());
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest.add({key, wall, false});
    spdlog::info("{}: done in {:.1f} s", key, wall);
    return s;
}

void describe_run(Summary& s, const RunResult& r)
{
    s.set("ionization", r.ionization);
    for (std::size_t j = 0; j < r.final_orbital_norms.size(); ++j) {
        s.set(fmt::format("norm_{}", j + 1), r.final_orbital_norms[j]);
    }
    s.set("single_ionization", r.single_double_ionization.single);
    s.set("double_ionization", r.single_double_ionization.twofold);
    s.set("positive_energy_population", r.positive_energy_population);
    if (r.scf) {
        s.set("scf_energy", r.scf->energy);
        s.set("scf_iterations", static_cast<double>(r.scf->iterations));
        s.set("scf_homo_energy", r.scf->orbital_energies(0));
        s.set("scf_below_restricted_limit", r.scf->variational_ok ? "false" : "true");
    }
    s.set("basis_size", static_cast<double>(r.basis_size));
    s.set("steps_accepted", static_cast<double>(r.statistics.accepted));
    s.set("steps_rejected", static_cast<double>(r.statistics.rejected));
    if (r.statistics.nuclear_steps > 0) {
        s.set("nuclear_steps", static_cast<double>(r.statistics.nuclear_steps));
    }
}

Summary run_and_store(const RunSpec& spec, const fs::path& dir)
{
    const RunResult r = run_trajectory(spec);
    write_csv(dir / "trajectory.csv", trajectory_table(r.record));
    check_plateau(r.record, spec.final_time());
    Summary s;
    describe_run(s, r);
    s.set("t_final", spec.final_time());
    return s;
}

void require_axis(const AppConfig& config, ScanAxis axis)
{
    if (config.scan.axis != axis) {
        throw ValidationError(fmt::format("scan.axis must be '{}' for this command (found '{}')", to_string(axis),
                                          to_string(config.scan.axis)));
    }
}

Table comment_table(std::vector<std::string> comments, std::vector<std::string> columns)
{
    Table t;
    t.comments = std::move(comments);
    t.columns = std::move(columns);
    return t;
}

} // namespace

RunSpec angle_point(const AppConfig& config, double angle_deg)
{
    RunSpec s = config.run;
    s.system.angle = angle_deg * kDegree;
    return s;
}

RunSpec duration_point(const AppConfig& config, double duration_fs)
{
    RunSpec s = config.run;
    if (s.pulse.envelope != Envelope::Sin2) {
        throw ValidationError("duration scans need pulse.envelope: sin2");
    }
    s.pulse.duration = duration_fs * units::au_time_per_fs;
    s.t_final = 0.0;
    return s;
}

std::pair<double, double> rate_window(const LaserPulse& pulse, const RateSpec& rate)
{
    const double start = rate.start > 0.0 ? rate.start : default_rate_window_start(pulse.ramp_end(), pulse.period());
    return {start, start + rate.cycles * pulse.period()};
}

RunSpec distance_point(const AppConfig& config, double distance)
{
    RunSpec s = config.run;
    if (s.pulse.envelope != Envelope::CWCycles && s.pulse.envelope != Envelope::QuasiCW) {
        throw ValidationError("distance scans need a cw envelope (cw_cycles or quasi_cw)");
    }
    s.system.distance = distance;
    s.mobile_nuclei = false;
    s.t_final = rate_window(s.pulse, config.rate).second;
    if (s.sample_interval <= 0.0) {
        s.sample_interval = s.pulse.period() / 8.0;
    }
    return s;
}

void command_run(const AppConfig& config, const CommandOptions& options)
{
    Manifest manifest("run", config, options.workers);
    fs::create_directories(options.output);
    const Summary s = cached_point(options.output, "run", manifest,
                                   [&](const fs::path& dir) { return run_and_store(config.run, dir); });
    manifest.write(options.output);
    fmt::print("{}", s.text());
}

void command_scan_angle(const AppConfig& config, const CommandOptions& options,
                        const std::optional<SyntheticAngles>& synthetic)
{
    require_axis(config, ScanAxis::Angle);
    Manifest manifest("scan-angle", config, options.workers);
    const auto& grid = config.scan.values;
    std::vector<Summary> results(grid.size());
    if (synthetic) {
        std::mt19937_64 rng(synthetic->seed);
        std::normal_distribution<double> noise(0.0, synthetic->noise > 0.0 ? synthetic->noise : 1.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double c = std::cos(grid[i] * kDegree);
            double p = synthetic->parallel * c * c + synthetic->perpendicular * (1.0 - c * c);
            if (synthetic->noise > 0.0) {
                p += noise(rng);
            }
            results[i].set("ionization", p);
            results[i].set("single_ionization", p);
            results[i].set("double_ionization", 0.0);
        }
    } else {
        parallel_for(grid.size(), options.workers, [&](std::size_t i) {
            const std::string key = point_key("angle", grid[i]);
            results[i] = cached_point(options.output / "points" / key, key, manifest, [&](const fs::path& dir) {
                return run_and_store(angle_point(config, grid[i]), dir);
            });
        });
    }
    Table t = comment_table({"naqmd angle scan; angle in degrees, probabilities dimensionless",
                             synthetic ? "synthetic values (no trajectories)" : "one fixed-nuclei run per angle"},
                            {"angle_deg", "P_ion", "P_single", "P_double"});
    std::vector<double> angles;
    std::vector<double> ion;
    std::vector<double> single;
    std::vector<double> twofold;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        angles.push_back(grid[i] * kDegree);
        ion.push_back(results[i].number("ionization"));
        single.push_back(results[i].number("single_ionization"));
        twofold.push_back(results[i].number("double_ionization"));
        t.add_row({grid[i], ion.back(), single.back(), twofold.back()});
    }
    write_csv(options.output / "scan.csv", t);
    Summary s;
    s.set("system", to_string(config.run.system.kind));
    s.set("points", static_cast<double>(grid.size()));
    const std::pair<const char*, const std::vector<double>*> quantities[] = {
        {"P_ion", &ion}, {"P_single", &single}, {"P_double", &twofold}};
    for (const auto& [name, values] : quantities) {
        if (grid.size() < 2) {
            break;
        }
        const Cos2Fit f = cos2_fit(angles, *values);
        s.set(fmt::format("{}_parallel", name), f.parallel);
        s.set(fmt::format("{}_perpendicular", name), f.perpendicular);
        s.set(fmt::format("{}_fit_residual", name), f.residual);
    }
    write_file_atomic(options.output / "summary.txt", s.text());
    manifest.write(options.output);
    fmt::print("{}", s.text());
}

void command_scan_duration(const AppConfig& config, const CommandOptions& options)
{
    require_axis(config, ScanAxis::Duration);
    Manifest manifest("scan-duration", config, options.workers);
    const auto& grid = config.scan.values;
    const bool compare = config.compare_without_absorber;
    std::vector<Summary> with(grid.size());
    std::vector<Summary> without(grid.size());
    const std::size_t jobs = grid.size() * (compare ? 2 : 1);
    parallel_for(jobs, options.workers, [&](std::size_t job) {
        const std::size_t i = job % grid.size();
        const bool reference = job >= grid.size();
        RunSpec spec = duration_point(config, grid[i]);
        std::string key = point_key("duration_fs", grid[i]);
        if (reference) {
            spec.absorber.enabled = false;
            key += "_no_absorber";
        }
        Summary s = cached_point(options.output / "points" / key, key, manifest,
                                 [&](const fs::path& dir) { return run_and_store(spec, dir); });
        (reference ? without : with)[i] = std::move(s);
    });
    std::vector<std::string> columns{"T_fs", "T_au", "P_ion"};
    if (compare) {
        columns.emplace_back("P_positive_no_absorber");
    }
    Table t = comment_table({"naqmd pulse-duration scan; T in fs and a.u.; sin^2 envelope of length 2T",
                             "P_ion = 1 - N(2T + 500)"},
                            columns);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<double> row{grid[i], grid[i] * units::au_time_per_fs, with[i].number("ionization")};
        if (compare) {
            row.push_back(without[i].number("positive_energy_population"));
        }
        t.add_row(std::move(row));
    }
    write_csv(options.output / "scan.csv", t);
    Summary s;
    s.set("system", to_string(config.run.system.kind));
    s.set("omega", config.run.pulse.omega);
    s.set("amplitude", config.run.pulse.amplitude);
    bool monotone = true;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        monotone = monotone && with[i].number("ionization") >= with[i - 1].number("ionization");
    }
    s.set("monotone", monotone ? "true" : "false");
    write_file_atomic(options.output / "summary.txt", s.text());
    manifest.write(options.output);
    fmt::print("{}", s.text());
}

void command_scan_distance(const AppConfig& config, const CommandOptions& options)
{
    require_axis(config, ScanAxis::Distance);
    Manifest manifest("scan-distance", config, options.workers);
    const auto& grid = config.scan.values;
    std::vector<Summary> results(grid.size());
    parallel_for(grid.size(), options.workers, [&](std::size_t i) {
        const std::string key = point_key("distance", grid[i]);
        results[i] = cached_point(options.output / "points" / key, key, manifest, [&](const fs::path& dir) {
            const RunSpec spec = distance_point(config, grid[i]);
            const RunResult r = run_trajectory(spec);
            write_csv(dir / "trajectory.csv", trajectory_table(r.record));
            const auto [t0, t1] = rate_window(spec.pulse, config.rate);
            const RateFit fit = rate_fit(r.record, t0, t1);
            Summary s;
            describe_run(s, r);
            s.set("rate_au", fit.rate_au);
            s.set("rate_per_s", fit.rate_per_s);
            s.set("window_start", t0);
            s.set("window_end", t1);
            return s;
        });
    });
    Table t = comment_table({"naqmd distance scan; R in bohr; Gamma from the slope of -ln N over the window",
                             fmt::format("orientation {:g} degrees", config.run.system.angle / kDegree)},
                            {"R", "Gamma_au", "Gamma_per_s", "P_ion"});
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t.add_row({grid[i], results[i].number("rate_au"), results[i].number("rate_per_s"),
                   results[i].number("ionization")});
        if (results[i].number("rate_au") > results[best].number("rate_au")) {
            best = i;
        }
    }
    write_csv(options.output / "rates.csv", t);
    Summary s;
    s.set("system", to_string(config.run.system.kind));
    s.set("angle_deg", config.run.system.angle / kDegree);
    s.set("max_rate_distance", grid[best]);
    s.set("max_rate_au", results[best].number("rate_au"));
    write_file_atomic(options.output / "summary.txt", s.text());
    manifest.write(options.output);
    fmt::print("{}", s.text());
}

void command_ensemble(const AppConfig& config, const CommandOptions& options)
{
    Manifest manifest("ensemble", config, options.workers);
    const EnsembleSpec& e = config.ensemble;
    SystemSetup curve_setup = config.run.system;
    curve_setup.angle = 0.0;
    const CurveTable table = ground_state_curve(curve_setup, e.curve_r_min, e.curve_r_max, e.curve_spacing);
    const PotentialCurve curve = table.curve();
    const auto minimum = curve.minimum();
    const std::vector<double> levels = bohr_sommerfeld_levels(curve, e.level);
    const double energy = levels.back();
    const TurningPoints tp = turning_points(curve, energy);
    const auto samples = sample_vibrational_ensemble(curve, energy, e.size, e.seed);

    Table curve_csv = comment_table({"naqmd H2+ ground-state curve; R in bohr, E in hartree (with 1/R)"}, {"R", "E"});
    for (std::size_t i = 0; i < table.energies.size(); ++i) {
        curve_csv.add_row({table.r_min + table.spacing * static_cast<double>(i), table.energies[i]});
    }
    write_csv(options.output / "curve.csv", curve_csv);
    Table sample_csv = comment_table({"naqmd initial conditions; R in bohr, dR/dt in bohr per a.u. of time"},
                                     {"index", "R", "dR_dt"});
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sample_csv.add_row({static_cast<double>(i), samples[i].distance, samples[i].velocity});
    }
    write_csv(options.output / "samples.csv", sample_csv);

    RunSpec base = config.run;
    base.mobile_nuclei = true;
    if (base.sample_interval <= 0.0) {
        base.sample_interval = 5.0;
    }
    std::vector<TrajectoryRecord> records(samples.size());
    parallel_for(samples.size(), options.workers, [&](std::size_t i) {
        const std::string key = fmt::format("trajectory_{:04d}", i);
        const fs::path dir = options.output / "trajectories" / key;
        cached_point(dir, key, manifest, [&](const fs::path& d) {
            RunSpec spec = base;
            spec.system.distance = samples[i].distance;
            spec.distance_rate = samples[i].velocity;
            try {
                return run_and_store(spec, d);
            } catch (const NumericalError& err) {
                throw NumericalError(fmt::format("R0 = {:.6f}, dR/dt = {:.6e}: {}", samples[i].distance,
                                                 samples[i].velocity, err.what()));
            }
        });
        records[i] = trajectory_from_table(read_csv(dir / "trajectory.csv"));
    });
    const EnsembleSeries avg = average_ensemble(records, e.r_dissociation);
    Table out = comment_table({"naqmd ensemble average; t in a.u. and fs; probabilities with jackknife errors",
                               fmt::format("{} trajectories, vibrational level {}, R_D = {:g} bohr", samples.size(),
                                           e.level, e.r_dissociation)},
                              {"t", "t_fs", "P_ion", "P_ion_err", "P_diss", "P_diss_err", "P_frag"});
    for (std::size_t k = 0; k < avg.time.size(); ++k) {
        out.add_row({avg.time[k], avg.time[k] / units::au_time_per_fs, avg.ionization[k], avg.ionization_error[k],
                     avg.dissociation[k], avg.dissociation_error[k], avg.fragmentation[k]});
    }
    write_csv(options.output / "ensemble.csv", out);
    Summary s;
    s.set("trajectories", static_cast<double>(samples.size()));
    s.set("curve_minimum_distance", minimum.distance);
    s.set("curve_minimum_energy", minimum.energy);
    s.set("level", static_cast<double>(e.level));
    s.set("level_energy", energy);
    s.set("inner_turning_point", tp.inner);
    s.set("outer_turning_point", tp.outer);
    s.set("final_ionization", avg.ionization.back());
    s.set("final_dissociation", avg.dissociation.back());
    write_file_atomic(options.output / "summary.txt", s.text());
    manifest.write(options.output);
    fmt::print("{}", s.text());
}

void command_dump_basis(const AppConfig& config, std::ostream& out)
{
    config.run.system.validate();
    const BasisSet basis = config.run.system.basis();
    out << "# naqmd basis for " << to_string(config.run.system.kind) << "; centers and widths in bohr\n";
    out << "index,x,y,z,sigma,l,m,kind,anchor\n";
    for (Index i = 0; i < basis.size(); ++i) {
        const BasisFunction& f = basis[i];
        const bool gaussian = f.kind == FunctionKind::Gaussian;
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", i, format_number(f.center.x()), format_number(f.center.y()),
                           format_number(f.center.z()), gaussian ? format_number(f.width) : std::string("-"), f.l,
                           f.m, gaussian ? "gaussian" : fmt::format("hydrogenic_n{}", f.n),
                           f.anchored() ? fmt::format("nucleus_{}", f.nucleus) : std::string("fixed"));
    }
}

void command_dump_spectrum(const AppConfig& config, const CommandOptions& options, int states)
{
    Manifest manifest("dump-spectrum", config, options.workers);
    const RunSpec& spec = config.run;
    spec.validate();
    if (spec.mobile_nuclei) {
        throw ValidationError("dump-spectrum propagates with fixed nuclei (set run.mobile_nuclei: false)");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Vec3 pol = spec.pulse.polarization.normalized();
    const bool closed = electron_count(spec.system.kind) == 2;
    auto H = build_hamiltonian(spec.system, pol);
    const CMatrix b0 = H->ground_state(closed ? 0.0 : spec.pulse.field(0.0));
    FixedNucleiPropagator prop(H, spec.pulse, spec.absorber, spec.integrator, H->to_local(b0));
    const Index kept = H->kept();
    const Index count = states > 0 ? std::min<Index>(states, kept) : kept;
    std::vector<std::string> columns{"t", "field"};
    for (Index a = 0; a < count; ++a) {
        columns.push_back(fmt::format("eps_{}", a));
    }
    Table t = comment_table({"naqmd instantaneous frame energies (hartree) vs time (a.u.)"}, columns);
    const double interval = spec.sample_interval > 0.0 ? spec.sample_interval : 1.0;
    const double t_end = spec.final_time();
    auto record = [&] {
        std::vector<double> row{prop.time(), spec.pulse.field(prop.time())};
        const Vector& eps = prop.frame_energies();
        for (Index a = 0; a < count; ++a) {
            row.push_back(eps(a));
        }
        t.add_row(std::move(row));
    };
    record();
    for (long k = 1; prop.time() < t_end; ++k) {
        const double target = std::min(t_end, static_cast<double>(k) * interval);
        while (prop.time() < target) {
            prop.step(target);
        }
        record();
    }
    write_csv(options.output / "spectrum.csv", t);
    manifest.add({"spectrum", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), false});
    manifest.write(options.output);
}

void command_plot(const PlotRequest& request)
{
    const Table t = read_csv(request.input);
    auto has = [&](const std::string& c) {
        return std::find(t.columns.begin(), t.columns.end(), c) != t.columns.end();
    };
    PlotSpec spec;
    spec.title = request.title.empty() ? request.input.filename().string() : request.title;
    spec.log_y = request.log_y;
    if (!request.y.empty()) {
        const std::string x = request.x.empty() ? t.columns.front() : request.x;
        spec.x_label = x;
        spec.y_label = request.y.size() == 1 ? request.y.front() : "";
        for (const auto& y : request.y) {
            spec.series.push_back({y, t.column(x), t.column(y), false});
        }
    } else if (has("angle_deg")) {
        spec.x_label = "angle (degrees)";
        spec.y_label = "probability";
        const auto deg = t.column("angle_deg");
        std::vector<double> rad;
        for (double d : deg) {
            rad.push_back(d * kDegree);
        }
        for (const char* name : {"P_ion", "P_single", "P_double"}) {
            const auto y = t.column(name);
            spec.series.push_back({name, deg, y, true});
            if (deg.size() >= 2) {
                const Cos2Fit f = cos2_fit(rad, y);
                Series fit{fmt::format("{} fit", name), {}, {}, false};
                for (int k = 0; k <= 90; ++k) {
                    const double a = deg.front() + (deg.back() - deg.front()) * k / 90.0;
                    const double c = std::cos(a * kDegree);
                    fit.x.push_back(a);
                    fit.y.push_back(f.parallel * c * c + f.perpendicular * (1.0 - c * c));
                }
                spec.series.push_back(std::move(fit));
            }
        }
    } else if (has("Gamma_au")) {
        spec.x_label = "R (bohr)";
        spec.y_label = "Gamma (1/s)";
        spec.log_y = true;
        spec.series.push_back({"Gamma", t.column("R"), t.column("Gamma_per_s"), false});
    } else if (has("P_diss")) {
        spec.x_label = "t (fs)";
        spec.y_label = "probability";
        spec.series.push_back({"P_ion", t.column("t_fs"), t.column("P_ion"), false});
        spec.series.push_back({"P_diss", t.column("t_fs"), t.column("P_diss"), false});
    } else if (has("T_fs")) {
        spec.x_label = "T (fs)";
        spec.y_label = "P_ion";
        spec.series.push_back({"P_ion", t.column("T_fs"), t.column("P_ion"), false});
        if (has("P_positive_no_absorber")) {
            spec.series.push_back({"P_pos (no absorber)", t.column("T_fs"), t.column("P_positive_no_absorber"), false});
        }
    } else if (has("N")) {
        spec.x_label = "t (a.u.)";
        spec.y_label = "N";
        spec.series.push_back({"N", t.column("t"), t.column("N"), false});
    } else {
        throw ValidationError("cannot infer a plot layout; pass --y");
    }
    write_file_atomic(request.output, render_svg(spec));
}

} // namespace naqmd::app
