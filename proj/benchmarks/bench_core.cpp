#include <naqmd/dynamics.hpp>
#include <naqmd/integrals.hpp>
#include <naqmd/meanfield.hpp>
#include <naqmd/simulation.hpp>

#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include <numbers>

using namespace naqmd;

namespace {

BasisSet molecular_ion_basis()
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, 2.0, 0.0);
    return build_basis(default_recipe(SystemKind::H2plus_aligned), nuclei);
}

} // namespace

static void BM_OneElectronMatrices(benchmark::State& state)
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, 2.0, 0.0);
    const BasisSet basis = molecular_ion_basis();
    for (auto _ : state) {
        benchmark::DoNotOptimize(one_electron_matrices(basis, nuclei));
    }
    state.counters["functions"] = static_cast<double>(basis.size());
}
BENCHMARK(BM_OneElectronMatrices)->Unit(benchmark::kMillisecond);

static void BM_ElectronRepulsionIntegral(benchmark::State& state)
{
    const BasisSet basis = molecular_ion_basis();
    const auto& f = basis.functions();
    const std::size_t n = f.size();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eri(f[i % n], f[(i + 1) % n], f[(i + 7) % n], f[(i + 13) % n]));
        ++i;
    }
}
BENCHMARK(BM_ElectronRepulsionIntegral);

static void BM_CoulombExchangeBuild(benchmark::State& state)
{
    spdlog::set_level(spdlog::level::warn);
    const auto nuclei = system_nuclei(SystemKind::H2_3d, 1.4, 0.0);
    BasisRecipe recipe;
    recipe.nuclear = hydrogen_nuclear_shells();
    const BasisSet basis = build_basis(recipe, nuclei);
    const FockContext context = FockContext::build(basis, nuclei);
    const CVector a = scf_ground_state(context).orbital;
    for (auto _ : state) {
        benchmark::DoNotOptimize(context.fock_matrix(a));
    }
    state.counters["functions"] = static_cast<double>(basis.size());
}
BENCHMARK(BM_CoulombExchangeBuild)->Unit(benchmark::kMillisecond);

static void BM_PropagateOneFieldPeriod(benchmark::State& state)
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, 2.0, 0.0);
    const BasisSet basis = molecular_ion_basis();
    const auto H = std::make_shared<const ElectronicHamiltonian>(one_electron_matrices(basis, nuclei), nuclei,
                                                                 Vec3::UnitZ());
    LaserPulse pulse;
    pulse.envelope = Envelope::Sin2;
    pulse.omega = 0.171;
    pulse.amplitude = 0.05;
    pulse.duration = 1000.0;
    IntegratorOptions options;
    options.kind = static_cast<PropagatorKind>(state.range(0));
    const CMatrix a0 = H->to_local(H->ground_state());
    const double period = 2.0 * std::numbers::pi / pulse.omega;
    for (auto _ : state) {
        FixedNucleiPropagator P(H, pulse, AbsorberSpec{}, options, a0);
        P.step(period);
        benchmark::DoNotOptimize(P.local_coefficients());
    }
}
BENCHMARK(BM_PropagateOneFieldPeriod)
    ->Arg(static_cast<int>(PropagatorKind::Exponential))
    ->Arg(static_cast<int>(PropagatorKind::Lawson))
    ->Arg(static_cast<int>(PropagatorKind::RungeKutta))
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
