#include "naqmd/simulation.hpp"

#include "naqmd/integrals.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fmt/format.h>
#include <mutex>
#include <spdlog/spdlog.h>
#include <string>
#include <thread>

namespace naqmd {

BasisRecipe SystemSetup::effective_recipe() const
{
    return recipe ? *recipe : default_recipe(kind);
}

std::vector<Nucleus> SystemSetup::nuclei() const
{
    return system_nuclei(kind, distance, angle);
}

BasisSet SystemSetup::basis() const
{
    return build_basis(effective_recipe(), nuclei());
}

void SystemSetup::validate() const
{
    if (kind != SystemKind::H && !(distance > 0.0)) {
        throw ValidationError("system.distance must be positive");
    }
    if (!std::isfinite(angle)) {
        throw ValidationError("system.angle must be finite");
    }
    if (!(cholesky_tolerance > 0.0)) {
        throw ValidationError("system.cholesky_tolerance must be positive");
    }
    if (!(lin_dep_threshold > 0.0 && lin_dep_threshold < 1.0)) {
        throw ValidationError("system.lin_dep_threshold must lie in (0, 1)");
    }
}

std::shared_ptr<ElectronicHamiltonian> build_hamiltonian(const SystemSetup& setup, const Vec3& polarization,
                                                         ScfSummary* scf)
{
    setup.validate();
    const std::vector<Nucleus> nuclei = setup.nuclei();
    const BasisSet basis = build_basis(setup.effective_recipe(), nuclei);
    if (electron_count(setup.kind) == 1) {
        return std::make_shared<ElectronicHamiltonian>(one_electron_matrices(basis, nuclei), nuclei, polarization,
                                                       setup.lin_dep_threshold);
    }
    auto context =
        std::make_shared<const FockContext>(FockContext::build(basis, nuclei, setup.cholesky_tolerance));
    Matrix dipole = Matrix::Zero(basis.size(), basis.size());
    const Vec3 e = polarization.normalized();
    for (Index i = 0; i < basis.size(); ++i) {
        for (Index j = 0; j <= i; ++j) {
            dipole(i, j) = dipole(j, i) = e.dot(naqmd::dipole(basis[i], basis[j]));
        }
    }
    auto H = std::make_shared<ElectronicHamiltonian>(context, dipole, nuclei, polarization, setup.lin_dep_threshold);
    if (scf) {
        ScfOptions options;
        options.lin_dep_threshold = setup.lin_dep_threshold;
        const ScfResult r = scf_ground_state(*context, options);
        scf->energy = r.energy;
        scf->iterations = r.iterations;
        scf->orbital_energies = r.orbital_energies;
        scf->variational_ok = check_variational_bound(r.energy);
    }
    return H;
}

double RunSpec::final_time() const
{
    return t_final > 0.0 ? t_final : pulse.default_final_time();
}

void RunSpec::validate() const
{
    system.validate();
    pulse.validate();
    absorber.validate();
    integrator.validate();
    if (mobile_nuclei && system.kind == SystemKind::H) {
        throw ValidationError("mobile nuclei need a molecule");
    }
    if (mobile_nuclei && electron_count(system.kind) != 1) {
        throw ValidationError("mobile nuclei are supported for one-electron systems only");
    }
    if (!(final_time() > 0.0)) {
        throw ValidationError("final time must be positive");
    }
    if (sample_interval < 0.0) {
        throw ValidationError("sample_interval must not be negative");
    }
}

namespace {

RunResult finish_result(TrajectoryRecord record, double t_final)
{
    RunResult r;
    r.record = std::move(record);
    r.ionization = ionization_probability(r.record, t_final);
    for (const auto& o : r.record.orbital_norms) {
        r.final_orbital_norms.push_back(value_at(r.record.time, o, t_final));
    }
    if (r.final_orbital_norms.size() == 2) {
        r.single_double_ionization = single_double(r.final_orbital_norms[0], r.final_orbital_norms[1]);
    } else if (r.final_orbital_norms.size() == 1) {
        r.single_double_ionization = {1.0 - r.final_orbital_norms[0], 0.0};
    }
    return r;
}

} // namespace

RunResult run_trajectory(const RunSpec& spec)
{
    spec.validate();
    const double t_final = spec.final_time();
    const Vec3 pol = spec.pulse.polarization.normalized();

    if (spec.mobile_nuclei) {
        const std::vector<Nucleus> nuclei = spec.system.nuclei();
        const BasisSet basis = build_basis(spec.system.effective_recipe(), nuclei);
        NuclearState state = NuclearState::at_rest(nuclei);
        const Vec3 axis = (nuclei[1].position - nuclei[0].position).normalized();
        state.velocities[0] = -0.5 * spec.distance_rate * axis;
        state.velocities[1] = 0.5 * spec.distance_rate * axis;
        const CMatrix a0 = MobileNucleiPropagator::ground_state(basis, nuclei, spec.pulse.field(0.0), pol);
        MobileNucleiPropagator prop(basis, state, spec.pulse, spec.absorber, spec.integrator, a0);
        TrajectoryRecord rec = prop.run(t_final, spec.sample_interval);
        RunResult r = finish_result(std::move(rec), t_final);
        r.statistics = prop.statistics();
        r.basis_size = basis.size();
        return r;
    }

    ScfSummary scf;
    const bool closed = electron_count(spec.system.kind) == 2;
    auto H = build_hamiltonian(spec.system, pol, closed ? &scf : nullptr);
    CMatrix b0;
    if (closed) {
        b0 = H->ground_state(0.0);
    } else {
        b0 = H->ground_state(spec.pulse.field(0.0));
    }
    FixedNucleiPropagator prop(H, spec.pulse, spec.absorber, spec.integrator, H->to_local(b0));
    TrajectoryRecord rec = prop.run(t_final, spec.sample_interval);
    RunResult r = finish_result(std::move(rec), t_final);
    if (closed) {
        r.scf = scf;
    }
    r.positive_energy_population = positive_energy_population(*H, prop.orthonormal_coefficients(), 0.0);
    r.statistics = prop.statistics();
    r.basis_size = H->dimension();
    return r;
}

PotentialCurve CurveTable::curve() const
{
    return PotentialCurve::tabulated(r_min, spacing, energies);
}

CurveTable ground_state_curve(const SystemSetup& setup, double r_min, double r_max, double spacing)
{
    if (electron_count(setup.kind) != 1 || setup.kind == SystemKind::H) {
        throw ValidationError("ground-state curves are computed for H2+ only");
    }
    if (!(r_min > 0.0 && r_max > r_min && spacing > 0.0)) {
        throw ValidationError("curve grid needs 0 < r_min < r_max and a positive spacing");
    }
    const int count = static_cast<int>(std::floor((r_max - r_min) / spacing + 1e-9)) + 1;
    CurveTable table;
    table.r_min = r_min;
    table.spacing = spacing;
    table.energies.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SystemSetup s = setup;
        s.distance = r_min + spacing * i;
        const auto H = build_hamiltonian(s, Vec3::UnitZ());
        Eigen::SelfAdjointEigenSolver<Matrix> es(H->core_orthonormal(), Eigen::EigenvaluesOnly);
        table.energies[static_cast<std::size_t>(i)] = es.eigenvalues()(0) + 1.0 / s.distance;
    }
    return table;
}

EnsembleSeries average_ensemble(const std::vector<TrajectoryRecord>& records, double r_dissociation)
{
    if (records.empty()) {
        throw ValidationError("ensemble average of no trajectories");
    }
    const std::vector<double>& time = records.front().time;
    for (const auto& r : records) {
        if (r.time.size() != time.size()) {
            throw ValidationError("ensemble trajectories must share one sampling grid");
        }
    }
    std::vector<FragmentationSeries> frag;
    frag.reserve(records.size());
    for (const auto& r : records) {
        frag.push_back(fragmentation_dissociation(r, r_dissociation));
    }
    EnsembleSeries out;
    out.time = time;
    std::vector<double> ion(records.size());
    std::vector<double> diss(records.size());
    std::vector<double> fr(records.size());
    for (std::size_t k = 0; k < time.size(); ++k) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            ion[i] = 1.0 - records[i].norm[k];
            diss[i] = frag[i].dissociation[k];
            fr[i] = frag[i].fragmentation[k];
        }
        const MeanError mi = ensemble_average(ion);
        const MeanError md = ensemble_average(diss);
        out.ionization.push_back(mi.mean);
        out.ionization_error.push_back(mi.standard_error);
        out.dissociation.push_back(md.mean);
        out.dissociation_error.push_back(md.standard_error);
        out.fragmentation.push_back(ensemble_average(fr).mean);
    }
    return out;
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job)
{
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed) {
            const std::size_t i = next++;
            if (i >= count) {
                return;
            }
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

unsigned default_worker_count()
{
    if (const char* env = std::getenv("NAQMD_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) {
                return static_cast<unsigned>(n);
            }
        } catch (const std::exception&) {
        }
        spdlog::warn("ignoring invalid NAQMD_WORKERS value '{}'", env);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace naqmd
