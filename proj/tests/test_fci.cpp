// Copyright 2026 The hqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hqsim/error.hpp"
#include "hqsim/fci.hpp"

namespace {

using namespace hqsim;
using namespace hqsim::fci;

constexpr double kMeV = 241.799;  // h*GHz per meV

// Small anisotropic oscillator: no accidental orbital degeneracy.
PotentialGrid small_well(int n = 12) { return harmonic_well(n, n, 45.0, 55.0, 3.0, 2.4); }

// --------------------------------------------------------------- grid & H1

TEST(FciGrid, Validation) {
  auto g = small_well();
  EXPECT_TRUE(g.errors().empty());
  g.nx = 6;
  EXPECT_FALSE(g.errors().empty());
  g = small_well();
  g.values[3] = std::nan("");
  EXPECT_THROW(g.validate(), ConfigError);
  g = small_well();
  g.hy = 0.0;
  EXPECT_THROW(discretize_h1(g), ConfigError);
}

TEST(FciGrid, FiveDiagonalsSymmetric) {
  const auto g = small_well();
  const Eigen::MatrixXd h(discretize_h1(g));
  EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
  std::vector<int> offsets;
  for (int i = 0; i < h.rows(); ++i)
    for (int j = 0; j < h.cols(); ++j)
      if (h(i, j) != 0.0 && std::find(offsets.begin(), offsets.end(), j - i) == offsets.end())
        offsets.push_back(j - i);
  std::sort(offsets.begin(), offsets.end());
  EXPECT_EQ(offsets, (std::vector<int>{-g.nx, -1, 0, 1, g.nx}));
}

// Zero potential on a strip: separable closed form of the discrete Laplacian.
TEST(FciGrid, FreeStripMatchesDiscreteLaplacian) {
  PotentialGrid g;
  g.nx = 40;
  g.ny = 8;
  g.hx = 2.0;
  g.hy = 1.5;
  g.values.assign(std::size_t(g.nx) * g.ny, 0.0);
  const auto b = solve_basis(g, 12);
  const double t = 38.0998212 / 0.067;
  std::vector<double> oracle;
  for (int kx = 1; kx <= g.nx; ++kx)
    for (int ky = 1; ky <= g.ny; ++ky)
      oracle.push_back(t * (2.0 / (g.hx * g.hx)) * (1.0 - std::cos(kx * M_PI / (g.nx + 1))) +
                       t * (2.0 / (g.hy * g.hy)) * (1.0 - std::cos(ky * M_PI / (g.ny + 1))));
  std::sort(oracle.begin(), oracle.end());
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(b.energies[i] / kMeV, oracle[i], 1e-10 * oracle[i]) << i;
}

TEST(FciGrid, ConstantShift) {
  auto g = small_well();
  const auto b0 = solve_basis(g, 8);
  for (auto& v : g.values) v += 1.25;
  const auto b1 = solve_basis(g, 8);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(b1.energies[i] - b0.energies[i], 1.25 * kMeV, 1e-8) << i;
}

// --------------------------------------------------------- single particle

TEST(FciBasis, ContractHolds) {
  const auto g = gaussian_well(32, 32, 120.0, 80.0, 2.0, 45.0, 20.0);
  const auto b = solve_basis(g, 20);
  EXPECT_LT(b.orthonormality_error(), 1e-8);
  EXPECT_LT(basis_residual(g, b), 1e-6);
  for (int i = 1; i < 20; ++i) EXPECT_GE(b.energies[i], b.energies[i - 1]);
}

TEST(FciBasis, HarmonicOscillatorLevels) {
  const double hw = 3.0;
  const auto g = harmonic_well(96, 96, 110.0, 110.0, hw, hw);
  const auto b = solve_basis(g, 10);
  // 2D oscillator: hbar w (n + 1), degeneracy n + 1
  const double expected[10] = {1, 2, 2, 3, 3, 3, 4, 4, 4, 4};
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(b.energies[i] / kMeV / hw, expected[i], 0.01 * expected[i]) << i;
}

TEST(FciBasis, AnisotropicOscillatorLevels) {
  const double wx = 2.0, wy = 3.3;
  const auto g = harmonic_well(80, 80, 140.0, 110.0, wx, wy);
  const auto b = solve_basis(g, 8);
  std::vector<double> oracle;
  for (int n = 0; n < 8; ++n)
    for (int m = 0; m < 8; ++m) oracle.push_back(wx * (n + 0.5) + wy * (m + 0.5));
  std::sort(oracle.begin(), oracle.end());
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(b.energies[i] / kMeV, oracle[i], 0.01 * oracle[i]) << i;
}

TEST(FciBasis, SecondOrderGridConvergence) {
  // Fixed box, h -> h/2 ... error of the ground level scales as h^2.
  std::vector<double> lh, le;
  for (int n : {24, 36, 54, 81}) {
    const auto g = harmonic_well(n, n, 110.0, 110.0, 3.0, 3.0);
    const auto b = solve_basis(g, 1);
    lh.push_back(std::log(g.hx));
    le.push_back(std::log(std::abs(b.energies[0] / kMeV - 3.0)));
  }
  const double mx = (lh[0] + lh[1] + lh[2] + lh[3]) / 4, my = (le[0] + le[1] + le[2] + le[3]) / 4;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (lh[i] - mx) * (le[i] - my);
    sxx += (lh[i] - mx) * (lh[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, 2.0, 0.2);
}

TEST(FciBasis, Preconditions) {
  const auto g = small_well();
  EXPECT_THROW(solve_basis(g, 40), ConfigError);  // >= G/4 and not complete
  EXPECT_THROW(solve_basis(g, 0), ConfigError);
  EXPECT_EQ(solve_basis(g, g.size()).n_spatial, g.size());
  BasisOptions o;
  o.dense_limit = 100;
  EXPECT_THROW(solve_basis(g, g.size(), o), CapacityError);
}

TEST(FciBasis, Deterministic) {
  const auto g = small_well(20);
  const auto a = solve_basis(g, 10), b = solve_basis(g, 10);
  EXPECT_EQ(a.energies, b.energies);
  EXPECT_EQ(a.wavefunctions, b.wavefunctions);
}

// --------------------------------------------------------------- integrals

TEST(FciIntegrals, OneElectronDiagonal) {
  const auto g = small_well(16);
  const auto b = solve_basis(g, 10);
  const auto t = build_integrals(g, b);
  const double emax = b.energies.cwiseAbs().maxCoeff();
  for (int p = 0; p < 20; ++p)
    for (int q = 0; q < 20; ++q) {
      if ((p & 1) != (q & 1)) {
        EXPECT_EQ(t.h(p, q), 0.0);
      } else if (p == q) {
        EXPECT_NEAR(t.h(p, q), b.energies[p >> 1], 1e-6 * std::abs(b.energies[p >> 1]));
      } else {
        EXPECT_LT(std::abs(t.h(p, q)), 1e-6 * emax);
      }
    }
}

// Direct O(G^2) quadrature of single elements.
double direct_eri(const PotentialGrid& g, const SingleParticleBasis& b, int i, int j, int k, int l, double a) {
  const double c = 1439.96448 / g.material.kappa;
  double s = 0.0;
  for (int r1 = 0; r1 < g.size(); ++r1) {
    const double x1 = g.x(r1 % g.nx), y1 = g.y(r1 / g.nx);
    const double d1 = b.wavefunctions(r1, i) * b.wavefunctions(r1, k);
    for (int r2 = 0; r2 < g.size(); ++r2) {
      const double dx = x1 - g.x(r2 % g.nx), dy = y1 - g.y(r2 / g.nx);
      s += d1 * c / std::sqrt(dx * dx + dy * dy + a * a) * b.wavefunctions(r2, j) * b.wavefunctions(r2, l);
    }
  }
  return s * g.cell_area() * g.cell_area() * kMeV;
}

TEST(FciIntegrals, MatchesDirectQuadratureAndSymmetries) {
  const auto g = small_well(14);
  const auto b = solve_basis(g, 6);
  const auto t = two_electron_integrals(g, b);
  const double a = 0.5 * std::min(g.hx, g.hy);
  const int quads[][4] = {{0, 0, 0, 0}, {0, 1, 0, 1}, {0, 1, 1, 0}, {2, 3, 4, 5}, {1, 4, 3, 2}, {5, 5, 0, 0}};
  for (const auto& q : quads) {
    const double ref = direct_eri(g, b, q[0], q[1], q[2], q[3], a);
    EXPECT_NEAR(t(q[0], q[1], q[2], q[3]), ref, 1e-10 * std::max(1.0, std::abs(ref)));
  }
  double scale = t.pair_matrix().cwiseAbs().maxCoeff();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k)
        for (int l = 0; l < 6; ++l) {
          const double v = t(i, j, k, l);
          ASSERT_NEAR(v, t(j, i, l, k), 1e-10 * scale);
          ASSERT_NEAR(v, t(k, j, i, l), 1e-10 * scale);
          ASSERT_NEAR(v, t(i, l, k, j), 1e-10 * scale);
          if (i == k && j == l) {
            ASSERT_GE(v, -1e-12);
          }
        }
}

TEST(FciIntegrals, PointChargeLimit) {
  // Two narrow orbitals 150 nm apart on a fine grid.
  PotentialGrid g;
  g.nx = 100;
  g.ny = 40;
  g.hx = g.hy = 2.5;
  g.values.assign(std::size_t(g.nx) * g.ny, 0.0);
  SingleParticleBasis b;
  b.n_spatial = 2;
  b.cell_area = g.cell_area();
  b.wavefunctions = Eigen::MatrixXd::Zero(g.size(), 2);
  const double d = 150.0, w = 6.0;
  for (int r = 0; r < g.size(); ++r) {
    const double x = g.x(r % g.nx), y = g.y(r / g.nx);
    b.wavefunctions(r, 0) = std::exp(-((x + d / 2) * (x + d / 2) + y * y) / (2 * w * w));
    b.wavefunctions(r, 1) = std::exp(-((x - d / 2) * (x - d / 2) + y * y) / (2 * w * w));
  }
  for (int i = 0; i < 2; ++i) b.wavefunctions.col(i) /= std::sqrt(b.wavefunctions.col(i).squaredNorm() * b.cell_area);
  b.energies = Eigen::VectorXd::Zero(2);
  const auto t = two_electron_integrals(g, b);
  const double oracle = 1439.96448 / 12.9 / d * kMeV;
  EXPECT_NEAR(t(0, 1, 0, 1), oracle, 0.05 * oracle);
}

TEST(FciIntegrals, RegularizationConvergesWithGrid) {
  // J_00 with a = h/2 on refining grids; log the effect of halving a.
  std::vector<double> j, dj;
  for (int n : {16, 24, 36, 54}) {
    const auto g = harmonic_well(n, n, 60.0, 60.0, 3.0, 3.0);
    const auto b = solve_basis(g, 1);
    IntegralOptions o;
    const double j_default = two_electron_integrals(g, b, o)(0, 0, 0, 0);
    o.regularization = 0.25 * g.hx;
    const double j_half = two_electron_integrals(g, b, o)(0, 0, 0, 0);
    RecordProperty("J00_n" + std::to_string(n), std::to_string(j_default));
    std::printf("[ regularization ] n=%d h=%.3f nm J00=%.6f h*GHz, halving a changes it by %.4f\n", n, g.hx,
                j_default, j_half - j_default);
    j.push_back(j_default);
    dj.push_back(std::abs(j_half - j_default));
  }
  for (std::size_t i = 2; i < j.size(); ++i)
    EXPECT_LT(std::abs(j[i] - j[i - 1]), std::abs(j[i - 1] - j[i - 2]));
  for (std::size_t i = 1; i < dj.size(); ++i) EXPECT_LT(dj[i], dj[i - 1]);
}

TEST(FciIntegrals, SerialParallelIdentical) {
  const auto g = small_well(16);
  const auto b = solve_basis(g, 8);
  IntegralOptions o;
  o.pair_block = 5;
  const auto s = two_electron_integrals(g, b, o, Execution::serial);
  for (int threads : {1, 2, 4}) {
    parallel::set_thread_limit(threads);
    EXPECT_EQ(two_electron_integrals(g, b, o, Execution::parallel).pair_matrix(), s.pair_matrix());
  }
  parallel::set_thread_limit(0);
}

TEST(FciIntegrals, CapacityError) {
  const auto g = small_well(16);
  const auto b = solve_basis(g, 8);
  IntegralOptions o;
  o.memory_cap = 8 * 8 * 8 * 8 * 8 - 1;
  EXPECT_THROW(two_electron_integrals(g, b, o), CapacityError);
}

// ------------------------------------------------------------ determinants

TEST(FciDeterminants, Counts) {
  const auto c100 = build_determinant_basis(100).counts();
  EXPECT_EQ(c100.ground, 1);
  EXPECT_EQ(c100.single, 396);
  EXPECT_EQ(c100.double_, 19503);
  const auto c2 = build_determinant_basis(2).counts();
  EXPECT_EQ(c2.ground, 1);
  EXPECT_EQ(c2.single, 4);
  EXPECT_EQ(c2.double_, 1);
  for (int n : {2, 3, 7, 20}) {
    const auto a = build_determinant_basis(n).counts(), b = determinant_counts(n);
    EXPECT_EQ(a.ground, b.ground);
    EXPECT_EQ(a.single, b.single);
    EXPECT_EQ(a.double_, b.double_);
  }
  EXPECT_THROW(build_determinant_basis(1), ConfigError);
}

TEST(FciDeterminants, OrderedUnique) {
  const auto b = build_determinant_basis(9);
  for (std::size_t i = 0; i < b.dets.size(); ++i) {
    EXPECT_LT(b.dets[i].p, b.dets[i].q);
    if (i > 0) {
      EXPECT_TRUE(std::pair(b.dets[i - 1].p, b.dets[i - 1].q) < std::pair(b.dets[i].p, b.dets[i].q));
    }
  }
  EXPECT_EQ(b.spin_block(0).dets.size(), 81u);
  EXPECT_EQ(b.spin_block(2).dets.size(), 36u);
  EXPECT_EQ(b.spin_block(-2).dets.size(), 36u);
}

// -------------------------------------------------------------- assembly

struct Small {
  PotentialGrid grid;
  SingleParticleBasis basis;
  IntegralTables ints;
  DeterminantBasis dets;
};

Small small_problem(int n_spatial, int n = 12) {
  Small s;
  s.grid = small_well(n);
  s.basis = solve_basis(s.grid, n_spatial);
  s.ints = build_integrals(s.grid, s.basis);
  s.dets = build_determinant_basis(n_spatial);
  return s;
}

TEST(FciAssembly, NonInteractingIsDiagonal) {
  const auto s = small_problem(6);
  const auto h = assemble_fci(s.ints, s.dets, 0.0);
  for (std::size_t a = 0; a < s.dets.dets.size(); ++a)
    for (std::size_t b = 0; b < s.dets.dets.size(); ++b) {
      const auto& d = s.dets.dets[a];
      const double want = a == b ? s.basis.energies[d.p >> 1] + s.basis.energies[d.q >> 1] : 0.0;
      EXPECT_NEAR(h(a, b), want, 1e-9 * std::max(1.0, std::abs(want)));
    }
}

TEST(FciAssembly, SymmetricAndThreadIndependent) {
  const auto s = small_problem(8);
  const auto h = assemble_fci(s.ints, s.dets, 1.0, Execution::serial);
  EXPECT_EQ((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0);
  for (int threads : {2, 3}) {
    parallel::set_thread_limit(threads);
    EXPECT_EQ(assemble_fci(s.ints, s.dets, 1.0), h);
  }
  parallel::set_thread_limit(0);
  EXPECT_THROW(assemble_fci(s.ints, s.dets, 1.5), ConfigError);
}

// <D_a|H|D_b> by explicit antisymmetrized two-particle quadrature over
// (r1 s1, r2 s2): an oracle for every sign and spin rule.
TEST(FciAssembly, MatchesAntisymmetrizedQuadrature) {
  const int ns = 3;
  const auto s = small_problem(ns, 10);
  const auto& g = s.grid;
  const int G = g.size();
  const Eigen::MatrixXd h1 = Eigen::MatrixXd(discretize_h1(g)) * kMeV;
  const double c = 1439.96448 / 12.9 * kMeV, a = 0.5 * std::min(g.hx, g.hy);
  Eigen::MatrixXd kern(G, G);
  for (int r1 = 0; r1 < G; ++r1)
    for (int r2 = 0; r2 < G; ++r2) {
      const double dx = g.x(r1 % g.nx) - g.x(r2 % g.nx), dy = g.y(r1 / g.nx) - g.y(r2 / g.nx);
      kern(r1, r2) = c / std::sqrt(dx * dx + dy * dy + a * a);
    }
  // Psi[s1 s2] is a G x G array over (r1, r2); unit-normalized grid vectors.
  auto orbital = [&](int p) { return Eigen::VectorXd(s.basis.wavefunctions.col(p >> 1) * std::sqrt(g.cell_area())); };
  auto psi = [&](const Determinant& d) {
    std::array<Eigen::MatrixXd, 4> w;
    for (auto& m : w) m = Eigen::MatrixXd::Zero(G, G);
    const auto fp = orbital(d.p), fq = orbital(d.q);
    w[(d.p & 1) * 2 + (d.q & 1)] += fp * fq.transpose() / std::sqrt(2.0);
    w[(d.q & 1) * 2 + (d.p & 1)] -= fq * fp.transpose() / std::sqrt(2.0);
    return w;
  };
  const double lambda = 0.7;
  const auto h = assemble_fci(s.ints, s.dets, lambda);
  const int dim = static_cast<int>(s.dets.dets.size());
  std::vector<std::array<Eigen::MatrixXd, 4>> states;
  for (const auto& d : s.dets.dets) states.push_back(psi(d));
  for (int b = 0; b < dim; ++b) {
    std::array<Eigen::MatrixXd, 4> hpsi;
    for (int sp = 0; sp < 4; ++sp) {
      const auto& w = states[b][sp];
      hpsi[sp] = h1 * w + w * h1 + lambda * kern.cwiseProduct(w);
    }
    for (int a2 = 0; a2 < dim; ++a2) {
      double v = 0.0;
      for (int sp = 0; sp < 4; ++sp) v += states[a2][sp].cwiseProduct(hpsi[sp]).sum();
      EXPECT_NEAR(h(a2, b), v, 1e-8 * std::max(1.0, std::abs(v))) << a2 << "," << b;
    }
  }
}

// ------------------------------------------------------------ spectrum

TEST(FciSpectrum, NonInteractingPairSums) {
  const auto s = small_problem(6);
  const auto r = diagonalize_fci(assemble_fci(s.ints, s.dets, 0.0), static_cast<int>(s.dets.dets.size()));
  std::vector<double> sums;
  for (int p = 0; p < 12; ++p)
    for (int q = p + 1; q < 12; ++q) sums.push_back(s.basis.energies[p >> 1] + s.basis.energies[q >> 1]);
  std::sort(sums.begin(), sums.end());
  ASSERT_EQ(sums.size(), r.eigenvalues.size());
  for (std::size_t i = 0; i < sums.size(); ++i) EXPECT_NEAR(r.eigenvalues[i], sums[i], 1e-9 * std::max(1.0, std::abs(sums[i])));
  EXPECT_NEAR(r.levels[0], 2 * s.basis.energies[0], 1e-9 * std::abs(r.levels[0]));
  EXPECT_NEAR(r.levels[1], s.basis.energies[0] + s.basis.energies[1], 1e-9 * std::abs(r.levels[1]));
  EXPECT_EQ(r.degeneracies[0], 1);
  EXPECT_EQ(r.degeneracies[1], 4);
}

TEST(FciSpectrum, SingletGroundTripletExcited) {
  FciProblem p;
  const auto s = small_problem(10, 16);
  p.grid = s.grid;
  p.basis = s.basis;
  p.integrals = s.ints;
  p.dets = s.dets;
  const auto r = solve(p, 1.0, 8);
  EXPECT_EQ(r.degeneracies[0], 1);
  EXPECT_EQ(r.degeneracies[1], 3);
  EXPECT_LT(r.max_residual, 1e-8);
  // same answer from the unblocked matrix
  const auto full = diagonalize_fci(assemble_fci(p.integrals, p.dets, 1.0), 8, 1.0);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(full.eigenvalues[i], r.eigenvalues[i], 1e-9 * std::abs(r.eigenvalues[i]));
}

TEST(FciSpectrum, VariationalInNSpatial) {
  const auto g = gaussian_well(24, 24, 100.0, 70.0, 2.0, 40.0, 22.0);
  const auto full = solve_basis(g, 14);
  double e0 = 1e300, e1 = 1e300;
  for (int n : {4, 6, 9, 14}) {
    FciProblem p;
    p.grid = g;
    p.basis = full.truncated(n);
    p.integrals = build_integrals(g, p.basis);
    p.dets = build_determinant_basis(n);
    const auto r = solve(p, 1.0, 8);
    EXPECT_LE(r.eigenvalues[0], e0 + 1e-9 * std::abs(e0));
    EXPECT_LE(r.levels[1], e1 + 1e-9 * std::abs(e1));
    e0 = r.eigenvalues[0];
    e1 = r.levels[1];
  }
}

// Complete basis on an 8 x 8 grid: FCI equals the product-grid Hamiltonian.
TEST(FciSpectrum, CompleteBasisMatchesProductGrid) {
  const auto g = harmonic_well(8, 8, 40.0, 50.0, 3.0, 2.5);
  const auto p = FciProblem::build(g, g.size());
  for (double lambda : {0.0, 1.0}) {
    const auto r = solve(p, lambda, 10);
    const auto singlet = product_grid_spectrum(g, lambda, false, 10);
    const auto triplet = product_grid_spectrum(g, lambda, true, 10);
    std::vector<double> all(singlet);
    for (double e : triplet) all.insert(all.end(), 3, e);
    std::sort(all.begin(), all.end());
    for (int i = 0; i < 10; ++i) EXPECT_NEAR(r.eigenvalues[i], all[i], 1e-8 * std::abs(all[i])) << lambda << " " << i;
  }
}

TEST(FciSpectrum, LevelGrouping) {
  FciResult r;
  r.eigenvalues = {1.0, 2.0, 2.0 + 1e-12, 2.0 + 2e-12, 5.0};
  group_levels(r);
  EXPECT_EQ(r.degeneracies, (std::vector<int>{1, 3, 1}));
  EXPECT_DOUBLE_EQ(r.splitting_01, 1.0);
}

// ----------------------------------------------------- quenching & Wigner

TEST(FciQuenching, EndpointsAndMonotone) {
  const auto g = gaussian_well(24, 24, 100.0, 70.0, 2.0, 40.0, 22.0);
  const auto p = FciProblem::build(g, 8);
  const std::vector<double> lam = {0.0, 0.25, 0.5, 0.75, 1.0};
  const auto rows = splitting_vs_lambda(p, lam);
  EXPECT_NEAR(rows[0].splitting, p.basis.energies[1] - p.basis.energies[0], 1e-9 * p.basis.energies.cwiseAbs().maxCoeff());
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i].splitting, rows[i - 1].splitting + 1e-9);
  const auto csv = splitting_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,E0_hghz,E1_hghz,splitting_hghz");
  const auto j = summary_json(p, rows);
  EXPECT_EQ(j["determinants"]["total"], 120);
  EXPECT_TRUE(j.contains("quench_factor"));
}

TEST(FciQuenching, StrongConfinementWeakQuench) {
  const auto g = gaussian_well(40, 40, 50.0, 50.0, 40.0, 12.5, 12.5);
  EXPECT_LT(wigner_parameter(g).r_w, 1.0);
  const auto p = FciProblem::build(g, 12);
  const std::vector<double> lam = {0.0, 1.0};
  const auto rows = splitting_vs_lambda(p, lam);
  EXPECT_LT(rows[0].splitting / rows[1].splitting, 3.0);
}

TEST(FciWigner, GaAsArithmetic) {
  // SI constants, independent of the toolkit's unit table.
  const double hbar = 1.054571817e-34, me = 9.1093837015e-31, e = 1.602176634e-19, eps0 = 8.8541878128e-12;
  const double hw = 1e-3 * e;
  const double l0 = std::sqrt(hbar * hbar / (0.067 * me * hw));
  const double rw = e * e / (4 * M_PI * eps0 * 12.9 * l0) / hw;
  const auto w = wigner_parameter(1.0, Material{});
  EXPECT_NEAR(w.l0_nm, l0 * 1e9, 1e-4 * l0 * 1e9);
  EXPECT_NEAR(w.l0_nm, 33.7, 0.05);
  EXPECT_NEAR(w.r_w, rw, 1e-4 * rw);
  EXPECT_TRUE(w.strongly_correlated);
  Material doubled;
  doubled.kappa *= 2.0;
  EXPECT_NEAR(wigner_parameter(1.0, doubled).r_w, 0.5 * w.r_w, 1e-12);
}

TEST(FciWigner, FromGridUsesSoftAxis) {
  const auto g = harmonic_well(41, 41, 200.0, 200.0, 1.0, 2.0);
  const auto w = wigner_parameter(g);
  EXPECT_NEAR(w.hbar_omega_mev, 1.0, 1e-9);
  EXPECT_NEAR(w.r_w, wigner_parameter(1.0, Material{}).r_w, 1e-9);
  auto inverted = g;
  for (auto& v : inverted.values) v = -v;
  EXPECT_THROW(wigner_parameter(inverted), FitError);
  EXPECT_THROW(wigner_parameter(0.0, Material{}), FitError);
}

TEST(FciIo, PotentialCsvRoundTrip) {
  const auto g = gaussian_well(9, 8, 30.0, 25.0, 2.0, 10.0, 7.0);
  std::stringstream ss;
  write_potential_csv(ss, g);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "# nx,ny,hx_nm,hy_nm");
  const auto back = read_potential_csv(ss);
  EXPECT_EQ(back.nx, 9);
  EXPECT_EQ(back.ny, 8);
  EXPECT_DOUBLE_EQ(back.hx, g.hx);
  EXPECT_EQ(back.values, g.values);
  std::string zeros = "0";
  for (int i = 1; i < 64; ++i) zeros += i % 8 ? ",0" : "\n0";
  std::stringstream compact("# 8,8,1.5,2\n" + zeros + "\n");
  EXPECT_EQ(read_potential_csv(compact).size(), 64);
  std::stringstream short_grid("# 8,8,1.5,2\n" + zeros.substr(2) + "\n");
  EXPECT_THROW(read_potential_csv(short_grid), ConfigError);
  std::stringstream bad("nx,ny\n");
  EXPECT_THROW(read_potential_csv(bad), ConfigError);
}

}  // namespace
