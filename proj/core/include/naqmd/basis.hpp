#pragma once

#include "naqmd/types.hpp"

#include <string>
#include <vector>

namespace naqmd {

/// Point nucleus with charge and mass in atomic units.
struct Nucleus {
    double charge = 1.0;
    double mass = units::proton_mass;
    Vec3 position = Vec3::Zero();
};

enum class FunctionKind { Gaussian, Hydrogenic };

/// One real basis function.
///
/// Gaussian: N r^l Y_lm exp(-|r - center|^2 / width^2) with real solid harmonics.
/// Hydrogenic: bound eigenfunction (n, l, m) of a point charge `charge` at `center`.
/// `nucleus` is the index of the anchoring nucleus, or -1 for a space-fixed function.
struct BasisFunction {
    FunctionKind kind = FunctionKind::Gaussian;
    Vec3 center = Vec3::Zero();
    int nucleus = -1;
    int l = 0;
    int m = 0;
    double width = 1.0;
    int n = 0;
    double charge = 1.0;

    double exponent() const { return 1.0 / (width * width); }
    bool anchored() const { return nucleus >= 0; }
};

/// Consecutive functions sharing center, kind, width and l. Gaussian shells hold all
/// 2l+1 functions (m = -l..l); hydrogenic shells hold a single function.
struct Shell {
    FunctionKind kind = FunctionKind::Gaussian;
    Vec3 center = Vec3::Zero();
    int nucleus = -1;
    int l = 0;
    double width = 1.0;
    Index first = 0;
    Index size = 1;

    double exponent() const { return 1.0 / (width * width); }
};

/// Ordered basis with a shell partition. Function order is shell by shell, m ascending.
class BasisSet {
public:
    BasisSet() = default;
    explicit BasisSet(std::vector<BasisFunction> functions);

    Index size() const { return static_cast<Index>(functions_.size()); }
    const std::vector<BasisFunction>& functions() const { return functions_; }
    const BasisFunction& operator[](Index i) const { return functions_[static_cast<std::size_t>(i)]; }
    const std::vector<Shell>& shells() const { return shells_; }

    bool has_hydrogenic() const;
    int max_l() const;

    /// Copy with anchored functions moved to the given nuclear positions.
    BasisSet moved_to(const std::vector<Vec3>& nuclear_positions) const;

private:
    std::vector<BasisFunction> functions_;
    std::vector<Shell> shells_;
};

/// Nucleus-centred geometric series of widths for one l.
struct NuclearShellRecipe {
    int l = 0;
    double sigma_first = 1.0;
    int count = 1;
    double ratio = 1.7;
};

/// Hexagonal lattice in the y-z plane centred on the origin.
struct HexGridRecipe {
    double sigma = 1.0;
    double spacing = 1.0;
    int n1 = 1;
    int n2 = 1;
};

/// Evenly spaced s-functions along z centred on the origin.
struct ChainRecipe {
    double sigma = 1.0;
    double spacing = 1.0;
    int count = 1;
};

/// Hydrogen-like eigenfunction placed on every nucleus (charge taken from the nucleus).
struct HydrogenicRecipe {
    int n = 1;
    int l = 0;
    int m = 0;
};

/// Complete description of a basis relative to a set of nuclei.
struct BasisRecipe {
    std::vector<NuclearShellRecipe> nuclear;
    std::vector<HydrogenicRecipe> hydrogenic;
    std::vector<HexGridRecipe> grids;
    std::vector<ChainRecipe> chains;
    /// Rotation applied to the space-fixed functions (grids and chains).
    Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
};

/// Widths sigma_i = sigma_first * ratio^(i-1), i = 1..count.
std::vector<double> nuclear_widths(const NuclearShellRecipe& recipe);

/// Hexagonal grid points (y, z). N1/2 and N2/2 use integer division.
std::vector<Eigen::Vector2d> hex_grid_points(double spacing, int n1, int n2);

/// Chain offsets along z: (k - (count-1)/2) * spacing.
std::vector<double> chain_points(double spacing, int count);

/// Assemble functions: nucleus-centred shells and hydrogenic functions per nucleus in
/// nucleus order, then grids, then chains. Throws ValidationError on bad parameters.
BasisSet build_basis(const BasisRecipe& recipe, const std::vector<Nucleus>& nuclei);

/// The nucleus-centred s/p/d series used for hydrogen in all molecular bases.
std::vector<NuclearShellRecipe> hydrogen_nuclear_shells();

enum class SystemKind { H, H2plus_aligned, H2plus_3d, H2_3d };

SystemKind parse_system_kind(const std::string& name);
std::string to_string(SystemKind kind);

/// Default basis recipe for a named system.
BasisRecipe default_recipe(SystemKind kind);

/// Number of electrons of a named system.
int electron_count(SystemKind kind);

/// Nuclei of a named system: the atom at the origin, or a diatomic with internuclear
/// distance `distance` whose axis lies in the y-z plane at `angle` (radians) from z.
std::vector<Nucleus> system_nuclei(SystemKind kind, double distance, double angle);

} // namespace naqmd
