#include "oracle.hpp"

#include <naqmd/basis.hpp>
#include <naqmd/integrals.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace naqmd;

TEST(EvenTemperedWidths, LargestSWidthOfHydrogenSet)
{
    const auto w = nuclear_widths({0, 0.05, 9, 1.7});
    ASSERT_EQ(w.size(), 9u);
    EXPECT_NEAR(w.back(), 3.487, 1e-3);
}

TEST(EvenTemperedWidths, LargestPWidthOfHydrogenSet)
{
    const auto w = nuclear_widths({1, 0.8473, 4, 1.7});
    EXPECT_NEAR(w.back(), 4.162, 1e-3);
}

TEST(EvenTemperedWidths, SingleTermIsTheFirstWidth)
{
    const auto w = nuclear_widths({0, 0.37, 1, 2.3});
    ASSERT_EQ(w.size(), 1u);
    EXPECT_DOUBLE_EQ(w[0], 0.37);
}

TEST(EvenTemperedWidths, RatioIsGeometricAndIncreasing)
{
    for (const auto& recipe : hydrogen_nuclear_shells()) {
        const auto w = nuclear_widths(recipe);
        for (std::size_t i = 1; i < w.size(); ++i) {
            EXPECT_GT(w[i], w[i - 1]);
            EXPECT_NEAR(w[i] / w[i - 1], recipe.ratio, 1e-14);
        }
        EXPECT_NEAR(w.back(), recipe.sigma_first * std::pow(recipe.ratio, recipe.count - 1), 1e-12);
    }
}

TEST(EvenTemperedWidths, RejectsBadRecipes)
{
    EXPECT_THROW(nuclear_widths({0, 0.0, 3, 1.7}), ValidationError);
    EXPECT_THROW(nuclear_widths({0, -1.0, 3, 1.7}), ValidationError);
    EXPECT_THROW(nuclear_widths({0, 0.1, 0, 1.7}), ValidationError);
    EXPECT_THROW(nuclear_widths({3, 0.1, 2, 1.7}), ValidationError);
}

TEST(ChainCenters, TwentyOnePointsReachThirtySeven)
{
    const auto z = chain_points(3.7, 21);
    ASSERT_EQ(z.size(), 21u);
    EXPECT_NEAR(*std::min_element(z.begin(), z.end()), -37.0, 1e-12);
    EXPECT_NEAR(*std::max_element(z.begin(), z.end()), 37.0, 1e-12);
}

TEST(ChainCenters, SinglePointAtOrigin)
{
    const auto z = chain_points(12.3, 1);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_DOUBLE_EQ(z[0], 0.0);
}

TEST(ChainCenters, ThreeWideSpacedPoints)
{
    const auto z = chain_points(18.68, 3);
    ASSERT_EQ(z.size(), 3u);
    EXPECT_NEAR(z[0], -18.68, 1e-12);
    EXPECT_NEAR(z[1], 0.0, 1e-12);
    EXPECT_NEAR(z[2], 18.68, 1e-12);
}

TEST(ChainCenters, SymmetricAboutOrigin)
{
    for (int n = 1; n <= 40; ++n) {
        const auto z = chain_points(1.3, n);
        double sum = 0.0;
        for (double v : z) {
            sum += v;
        }
        EXPECT_NEAR(sum, 0.0, 1e-10) << n;
    }
}

TEST(HexGrid, NineBySevenHasFiftyNinePoints)
{
    EXPECT_EQ(oracle::hex_grid_count(9, 7), 59);
    EXPECT_EQ(hex_grid_points(5.2, 9, 7).size(), 59u);
}

TEST(HexGrid, OneByOne)
{
    // N1 + i = 1 is odd for i = 0, so j runs over {0}.
    EXPECT_EQ(oracle::hex_grid_count(1, 1), 1);
    EXPECT_EQ(hex_grid_points(1.0, 1, 1).size(), 1u);
}

TEST(HexGrid, CountMatchesEnumerationUpToTwelve)
{
    for (int n1 = 1; n1 <= 12; ++n1) {
        for (int n2 = 1; n2 <= 12; ++n2) {
            EXPECT_EQ(static_cast<int>(hex_grid_points(1.0, n1, n2).size()), oracle::hex_grid_count(n1, n2))
                << n1 << "x" << n2;
        }
    }
}

TEST(HexGrid, FiveByThreeExtentUsesIntegerHalf)
{
    // (i - N1/2) d/2 with N1/2 = 2 gives y = -10.38 at i = 0 and +10.38 at i = 4.
    const auto p = hex_grid_points(10.38, 5, 3);
    double ymin = 1e9;
    double ymax = -1e9;
    for (const auto& v : p) {
        ymin = std::min(ymin, v(0));
        ymax = std::max(ymax, v(0));
    }
    EXPECT_NEAR(ymin, -10.38, 1e-12);
    EXPECT_NEAR(ymax, 10.38, 1e-12);
}

TEST(HexGrid, NearestNeighbourDistanceIsSpacing)
{
    const double d = 5.2;
    const auto p = hex_grid_points(d, 9, 7);
    for (std::size_t a = 0; a < p.size(); ++a) {
        double best = 1e9;
        for (std::size_t b = 0; b < p.size(); ++b) {
            if (a != b) {
                best = std::min(best, (p[a] - p[b]).norm());
            }
        }
        EXPECT_NEAR(best, d, 1e-10);
    }
}

TEST(AssembleBasis, AlignedMoleculeHasNinetyThreeFunctions)
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_aligned, 2.0, 0.0);
    const BasisSet basis = build_basis(default_recipe(SystemKind::H2plus_aligned), nuclei);
    EXPECT_EQ(basis.size(), 2 * (9 + 3 * 4 + 5 * 3) + 21);
}

TEST(AssembleBasis, HydrogenAtomHasFortyFunctions)
{
    const auto nuclei = system_nuclei(SystemKind::H, 0.0, 0.0);
    const BasisSet basis = build_basis(default_recipe(SystemKind::H), nuclei);
    EXPECT_EQ(basis.size(), 40);
    EXPECT_TRUE(basis.has_hydrogenic());
}

TEST(AssembleBasis, ThreeDimensionalMoleculeSize)
{
    // Per-nucleus set plus grids of 59 and 13 points and a 3-point chain.
    const auto nuclei = system_nuclei(SystemKind::H2_3d, 1.4, 0.3);
    const BasisSet basis = build_basis(default_recipe(SystemKind::H2_3d), nuclei);
    EXPECT_EQ(basis.size(), 2 * 36 + 59 + 13 + 3);
    EXPECT_EQ(basis.size(), 147);
}

TEST(AssembleBasis, AnchorsFollowNuclei)
{
    const auto nuclei = system_nuclei(SystemKind::H2plus_3d, 2.0, 0.7);
    const BasisSet basis = build_basis(default_recipe(SystemKind::H2plus_3d), nuclei);
    for (const auto& f : basis.functions()) {
        if (f.anchored()) {
            EXPECT_NEAR((f.center - nuclei[static_cast<std::size_t>(f.nucleus)].position).norm(), 0.0, 1e-14);
        } else {
            EXPECT_EQ(f.l, 0);
            EXPECT_NEAR(f.center(0), 0.0, 1e-14);
        }
    }
    std::vector<Vec3> moved = {Vec3(0.1, 0.2, -1.0), Vec3(0.0, -0.3, 1.2)};
    const BasisSet shifted = basis.moved_to(moved);
    for (Index i = 0; i < basis.size(); ++i) {
        const auto& f = shifted[i];
        if (f.anchored()) {
            EXPECT_EQ(f.center, moved[static_cast<std::size_t>(f.nucleus)]);
        } else {
            EXPECT_EQ(f.center, basis[i].center);
        }
    }
}

TEST(AssembleBasis, UnitSelfOverlap)
{
    for (auto kind : {SystemKind::H, SystemKind::H2plus_aligned, SystemKind::H2_3d}) {
        const auto nuclei = system_nuclei(kind, 2.0, 0.4);
        const BasisSet basis = build_basis(default_recipe(kind), nuclei);
        const Matrix S = overlap_matrix(basis);
        for (Index i = 0; i < basis.size(); ++i) {
            EXPECT_NEAR(S(i, i), 1.0, 1e-12) << to_string(kind) << " function " << i;
        }
    }
}

TEST(AssembleBasis, UnknownSystemRejected)
{
    EXPECT_THROW(parse_system_kind("He2"), ValidationError);
    EXPECT_EQ(parse_system_kind("H2plus_3d"), SystemKind::H2plus_3d);
}

TEST(AssembleBasis, BadGridRecipeRejected)
{
    BasisRecipe recipe;
    recipe.grids = {{1.0, 2.0, 0, 3}};
    EXPECT_THROW(build_basis(recipe, system_nuclei(SystemKind::H, 0.0, 0.0)), ValidationError);
    recipe.grids = {{-1.0, 2.0, 3, 3}};
    EXPECT_THROW(build_basis(recipe, system_nuclei(SystemKind::H, 0.0, 0.0)), ValidationError);
    recipe.grids.clear();
    recipe.chains = {{1.0, 2.0, 0}};
    EXPECT_THROW(build_basis(recipe, system_nuclei(SystemKind::H, 0.0, 0.0)), ValidationError);
}
