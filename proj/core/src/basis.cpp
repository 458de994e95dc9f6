#include "naqmd/basis.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace naqmd {

namespace {

bool same_shell(const BasisFunction& a, const BasisFunction& b)
{
    return a.kind == FunctionKind::Gaussian && b.kind == FunctionKind::Gaussian && a.l == b.l &&
           a.width == b.width && a.nucleus == b.nucleus && a.center == b.center && b.m == a.m + 1;
}

void require(bool condition, const std::string& message)
{
    if (!condition) {
        throw ValidationError(message);
    }
}

void add_gaussian_shell(std::vector<BasisFunction>& out, const Vec3& center, int nucleus, int l,
                        double width)
{
    for (int m = -l; m <= l; ++m) {
        BasisFunction f;
        f.kind = FunctionKind::Gaussian;
        f.center = center;
        f.nucleus = nucleus;
        f.l = l;
        f.m = m;
        f.width = width;
        out.push_back(f);
    }
}

} // namespace

BasisSet::BasisSet(std::vector<BasisFunction> functions) : functions_(std::move(functions))
{
    Index i = 0;
    const Index n = size();
    while (i < n) {
        const BasisFunction& f = functions_[static_cast<std::size_t>(i)];
        Shell shell;
        shell.kind = f.kind;
        shell.center = f.center;
        shell.nucleus = f.nucleus;
        shell.l = f.l;
        shell.width = f.width;
        shell.first = i;
        if (f.kind == FunctionKind::Gaussian) {
            require(f.l >= 0 && f.l <= 2, fmt::format("Gaussian l = {} outside 0..2", f.l));
            require(f.width > 0.0, "Gaussian width must be positive");
            require(f.m == -f.l, "Gaussian shells must list m = -l..l in order");
            Index j = i + 1;
            while (j < n && j - i < 2 * f.l + 1 &&
                   same_shell(functions_[static_cast<std::size_t>(j - 1)],
                              functions_[static_cast<std::size_t>(j)])) {
                ++j;
            }
            require(j - i == 2 * f.l + 1, "incomplete Gaussian shell");
            shell.size = j - i;
        } else {
            require(f.n >= 1 && f.n <= 2 && f.l < f.n && std::abs(f.m) <= f.l,
                    "hydrogenic functions are limited to n <= 2");
            require(f.charge > 0.0, "hydrogenic charge must be positive");
            shell.size = 1;
        }
        shells_.push_back(shell);
        i += shell.size;
    }
}

bool BasisSet::has_hydrogenic() const
{
    return std::any_of(functions_.begin(), functions_.end(),
                       [](const BasisFunction& f) { return f.kind == FunctionKind::Hydrogenic; });
}

int BasisSet::max_l() const
{
    int l = 0;
    for (const auto& f : functions_) {
        l = std::max(l, f.l);
    }
    return l;
}

BasisSet BasisSet::moved_to(const std::vector<Vec3>& nuclear_positions) const
{
    std::vector<BasisFunction> moved = functions_;
    for (auto& f : moved) {
        if (f.anchored()) {
            require(static_cast<std::size_t>(f.nucleus) < nuclear_positions.size(),
                    "anchor index outside nuclear positions");
            f.center = nuclear_positions[static_cast<std::size_t>(f.nucleus)];
        }
    }
    BasisSet out;
    out.functions_ = std::move(moved);
    out.shells_ = shells_;
    for (auto& s : out.shells_) {
        s.center = out.functions_[static_cast<std::size_t>(s.first)].center;
    }
    return out;
}

std::vector<double> nuclear_widths(const NuclearShellRecipe& recipe)
{
    require(recipe.sigma_first > 0.0, "nuclear shell sigma must be positive");
    require(recipe.count >= 1, "nuclear shell count must be at least 1");
    require(recipe.ratio > 1.0, "nuclear shell ratio must exceed 1");
    require(recipe.l >= 0 && recipe.l <= 2, "nuclear shell l must be 0, 1 or 2");
    std::vector<double> widths;
    double sigma = recipe.sigma_first;
    for (int i = 0; i < recipe.count; ++i) {
        widths.push_back(sigma);
        sigma *= recipe.ratio;
    }
    return widths;
}

std::vector<Eigen::Vector2d> hex_grid_points(double spacing, int n1, int n2)
{
    require(spacing > 0.0, "grid spacing must be positive");
    require(n1 >= 1 && n2 >= 1, "grid dimensions must be positive");
    const double sqrt3 = std::sqrt(3.0);
    const int h1 = n1 / 2;
    const int h2 = n2 / 2;
    std::vector<Eigen::Vector2d> points;
    for (int i = 0; i < n1; ++i) {
        const int jmax = ((n1 + i) % 2 == 0) ? n2 - 1 : n2;
        const int shift = std::abs((i - h1) % 2);
        for (int j = 0; j < jmax; ++j) {
            const double y = (i - h1) * spacing / 2.0;
            const double z = (j - h2) * sqrt3 * spacing + shift * sqrt3 / 2.0 * spacing;
            points.emplace_back(y, z);
        }
    }
    return points;
}

std::vector<double> chain_points(double spacing, int count)
{
    require(spacing > 0.0, "chain spacing must be positive");
    require(count >= 1, "chain count must be positive");
    std::vector<double> z;
    for (int k = 0; k < count; ++k) {
        z.push_back((k - (count - 1) / 2.0) * spacing);
    }
    return z;
}

BasisSet build_basis(const BasisRecipe& recipe, const std::vector<Nucleus>& nuclei)
{
    std::vector<BasisFunction> out;
    for (std::size_t a = 0; a < nuclei.size(); ++a) {
        const auto& nucleus = nuclei[a];
        for (const auto& series : recipe.nuclear) {
            for (double width : nuclear_widths(series)) {
                add_gaussian_shell(out, nucleus.position, static_cast<int>(a), series.l, width);
            }
        }
        for (const auto& h : recipe.hydrogenic) {
            BasisFunction f;
            f.kind = FunctionKind::Hydrogenic;
            f.center = nucleus.position;
            f.nucleus = static_cast<int>(a);
            f.n = h.n;
            f.l = h.l;
            f.m = h.m;
            f.charge = nucleus.charge;
            out.push_back(f);
        }
    }
    for (const auto& grid : recipe.grids) {
        require(grid.sigma > 0.0, "grid sigma must be positive");
        for (const auto& p : hex_grid_points(grid.spacing, grid.n1, grid.n2)) {
            const Vec3 position = recipe.frame * Vec3(0.0, p.x(), p.y());
            add_gaussian_shell(out, position, -1, 0, grid.sigma);
        }
    }
    for (const auto& chain : recipe.chains) {
        require(chain.sigma > 0.0, "chain sigma must be positive");
        for (double z : chain_points(chain.spacing, chain.count)) {
            add_gaussian_shell(out, recipe.frame * Vec3(0.0, 0.0, z), -1, 0, chain.sigma);
        }
    }
    return BasisSet(std::move(out));
}

std::vector<NuclearShellRecipe> hydrogen_nuclear_shells()
{
    return {{0, 0.05, 9, 1.7}, {1, 0.8473, 4, 1.7}, {2, 1.7191, 3, 1.7}};
}

SystemKind parse_system_kind(const std::string& name)
{
    if (name == "H") {
        return SystemKind::H;
    }
    if (name == "H2plus_aligned") {
        return SystemKind::H2plus_aligned;
    }
    if (name == "H2plus_3d") {
        return SystemKind::H2plus_3d;
    }
    if (name == "H2_3d") {
        return SystemKind::H2_3d;
    }
    throw ValidationError(fmt::format("unknown system '{}'", name));
}

std::string to_string(SystemKind kind)
{
    switch (kind) {
    case SystemKind::H:
        return "H";
    case SystemKind::H2plus_aligned:
        return "H2plus_aligned";
    case SystemKind::H2plus_3d:
        return "H2plus_3d";
    case SystemKind::H2_3d:
        return "H2_3d";
    }
    return "unknown";
}

BasisRecipe default_recipe(SystemKind kind)
{
    BasisRecipe recipe;
    switch (kind) {
    case SystemKind::H:
        recipe.hydrogenic = {{1, 0, 0}, {2, 0, 0}, {2, 1, 0}};
        recipe.chains = {{5.54, 3.7, 37}};
        break;
    case SystemKind::H2plus_aligned:
        recipe.nuclear = hydrogen_nuclear_shells();
        recipe.chains = {{5.54, 3.7, 21}};
        break;
    case SystemKind::H2plus_3d:
    case SystemKind::H2_3d:
        recipe.nuclear = hydrogen_nuclear_shells();
        recipe.grids = {{5.74, 5.2, 9, 7}, {7.81, 10.38, 5, 3}};
        recipe.chains = {{16.62, 18.68, 3}};
        break;
    }
    return recipe;
}

int electron_count(SystemKind kind)
{
    return kind == SystemKind::H2_3d ? 2 : 1;
}

std::vector<Nucleus> system_nuclei(SystemKind kind, double distance, double angle)
{
    if (kind == SystemKind::H) {
        return {Nucleus{1.0, units::proton_mass, Vec3::Zero()}};
    }
    require(distance > 0.0, "internuclear distance must be positive");
    const Vec3 axis(0.0, std::sin(angle), std::cos(angle));
    return {Nucleus{1.0, units::proton_mass, -0.5 * distance * axis},
            Nucleus{1.0, units::proton_mass, 0.5 * distance * axis}};
}

} // namespace naqmd
