#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "ncosc/fockspace.hpp"
#include "ncosc/spectrum.hpp"

using namespace ncosc;

TEST(EnergyClosedForm, HandValues) {
  const OscParams osc(1, 1);
  const NCParams nc(0.1, 0.1);
  EXPECT_NEAR(energy_closed_form(1, 0, osc, nc, Coupling::unit), 1.905, 1e-14);
  EXPECT_NEAR(energy_closed_form(0, 1, osc, nc, Coupling::unit), 2.105, 1e-14);
  EXPECT_NEAR(energy_closed_form(0, 0, osc, nc), 1.0025, 1e-15);
  EXPECT_THROW(energy_closed_form(-1, 0, osc, nc), invalid_parameter);
}

TEST(EnergyClosedForm, CommutativeReductionIsExact) {
  const OscParams osc(1.7, 0.3);
  const NCParams nc(0, 0, 1.9);
  for (int g = 0; g < 6; ++g)
    for (int d = 0; d < 6; ++d)
      EXPECT_EQ(energy_closed_form(g, d, osc, nc), nc.hbar * osc.omega * (g + d + 1));
}

TEST(SpectrumTable, CommutativeDegeneracy) {
  const OscParams osc(1, 0.5);
  const auto table = spectrum_table(osc, {0, 0}, 5);
  std::map<double, int> multiplicity;
  for (const auto& l : table) ++multiplicity[l.energy];
  ASSERT_EQ(multiplicity.size(), 6u);
  int k = 0;
  for (const auto& [e, mult] : multiplicity) {
    EXPECT_EQ(e, 0.5 * (k + 1));
    EXPECT_EQ(mult, k + 1);
    ++k;
  }
}

TEST(SpectrumTable, SortedWithLexicographicTies) {
  const auto table = spectrum_table({1, 1}, {0, 0}, 3);
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& a = table[i - 1];
    const auto& b = table[i];
    ASSERT_LE(a.energy, b.energy);
    if (a.energy == b.energy) {
      EXPECT_LT(std::make_pair(a.n_g, a.n_d), std::make_pair(b.n_g, b.n_d));
    }
  }
  const auto again = spectrum_table({1, 1}, {0, 0}, 3);
  ASSERT_EQ(again.size(), table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    EXPECT_EQ(again[i].n_g, table[i].n_g);
    EXPECT_EQ(again[i].energy, table[i].energy);
  }
}

TEST(SpectrumTable, MultipletsSplitEvenly) {
  const OscParams osc(1.2, 0.9);
  const NCParams nc(0.1, 0.05);
  const double split = level_splitting(osc, nc, 1);
  for (int k = 1; k <= 5; ++k) {
    for (int g = 1; g <= k; ++g) {
      const double gap = energy_closed_form(g - 1, k - g + 1, osc, nc) - energy_closed_form(g, k - g, osc, nc);
      EXPECT_NEAR(gap, 2.0 * split, 1e-13);
    }
  }
}

TEST(LevelSplitting, Values) {
  const OscParams osc(1, 1);
  EXPECT_EQ(level_splitting(osc, {0, 0}, 3), 0.0);
  EXPECT_NEAR(level_splitting(osc, {0.1, 0.1}, 1, Coupling::unit), 0.1, 1e-15);
  for (int k = 1; k < 6; ++k) {
    const double half_gap = 0.5 * (energy_closed_form(k - 1, 1, osc, {0.1, 0.1}) -
                                   energy_closed_form(k, 0, osc, {0.1, 0.1}));
    EXPECT_NEAR(level_splitting(osc, {0.1, 0.1}, k), half_gap, 1e-14);
  }
  EXPECT_THROW(level_splitting(osc, {0.1, 0.1}, 0), invalid_parameter);
}

TEST(Diagonalize, DiagonalAndNonHermitian) {
  const FockBasis b(2, 1);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = -1;
  d(2, 2) = 2;
  const auto ev = diagonalize(OperatorMatrix(b, d));
  EXPECT_EQ(ev, (std::vector<double>{-1, 2, 3}));
  d(0, 1) = 1.0;
  EXPECT_THROW(diagonalize(OperatorMatrix(b, d)), invalid_parameter);
}

TEST(Diagonalize, LadderMatchesTableOnInteriorShells) {
  const FockBasis b(12);
  const OscParams osc(1, 1);
  const NCParams nc(0.1, 0.1);
  // Complete shells are exact; only levels below the first incomplete-shell
  // intruder are compared, since truncated shells interleave above it.
  const auto ladder = diagonalize(hamiltonian_ladder(osc, nc, b));
  const double cutoff = energy_closed_form(b.n_max() - 5, 0, osc, nc);
  std::size_t compared = 0;
  for (const auto& lvl : spectrum_table(osc, nc, b.n_max() - 6)) {
    if (lvl.energy >= cutoff) break;
    EXPECT_NEAR(ladder[compared], lvl.energy, 1e-10);
    ++compared;
  }
  EXPECT_GE(compared, 15u);
}

TEST(Diagonalize, DirectMatchesClosedForm) {
  const FockBasis b(14);
  const OscParams osc(1, 1);
  const NCParams nc(0.1, 0.1);
  const auto direct = diagonalize(hamiltonian_direct(osc, nc, b));
  const auto table = spectrum_table(osc, nc, 8);
  for (int i = 0; i < 6; ++i)
    EXPECT_LE(std::abs(direct[i] - table[i].energy) / table[i].energy, 1e-6);
}

TEST(Spectrum, GroundStateIsMinimumWhenCouplingIsSmall) {
  for (double th : {0.0, 0.1, 0.3, 0.8}) {
    const OscParams osc(1, 1);
    const NCParams nc(th, th);
    ASSERT_LT(level_splitting(osc, nc, 1), effective_frequency(osc, nc));
    const auto table = spectrum_table(osc, nc, 6);
    EXPECT_EQ(table.front().n_g, 0);
    EXPECT_EQ(table.front().n_d, 0);
    EXPECT_GT(table.front().energy, 0.0);
  }
}
