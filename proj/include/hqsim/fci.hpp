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

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hqsim/parallel.hpp"
#include "hqsim/units.hpp"
#include "json.hpp"

/// Two-electron full configuration interaction in a 2D confinement potential.
/// Lengths in nm. Grid potentials are electron potential energies in meV;
/// every energy leaving this namespace is in h*GHz.
namespace hqsim::fci {

struct Material {
  double m_star = units::kGaAsEffectiveMass;  ///< in electron masses
  double kappa = units::kGaAsDielectric;

  /// hbar^2 / 2m* in meV nm^2.
  double kinetic_prefactor() const { return units::kHbar2Over2MeMeVNm2 / m_star; }
  /// e^2 / (4 pi eps0 kappa) in meV nm.
  double coulomb_prefactor() const { return units::kCoulombMeVNm / kappa; }
};

/// Interior points of a Dirichlet box: the wavefunction vanishes one spacing
/// beyond the outermost row and column. Point (ix, iy) sits at
/// x = (ix - (nx - 1) / 2) hx, y likewise; values are row-major in y.
struct PotentialGrid {
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  std::vector<double> values;
  Material material;

  int size() const { return nx * ny; }
  int index(int ix, int iy) const { return iy * nx + ix; }
  double x(int ix) const { return (ix - 0.5 * (nx - 1)) * hx; }
  double y(int iy) const { return (iy - 0.5 * (ny - 1)) * hy; }
  double cell_area() const { return hx * hy; }

  std::vector<std::string> errors() const;
  void validate() const;
};

/// -V0 exp(-x^2/2 sx^2 - y^2/2 sy^2) on an nx x ny grid of extent
/// half_width_x/y (the Dirichlet walls sit at +-half_width).
PotentialGrid gaussian_well(int nx, int ny, double half_width_x, double half_width_y, double v0_mev,
                            double sigma_x_nm, double sigma_y_nm, Material material = {});

/// Parabolic well with confinement energies hbar*omega_x/y in meV.
PotentialGrid harmonic_well(int nx, int ny, double half_width_x, double half_width_y, double hw_x_mev,
                            double hw_y_mev, Material material = {});

/// `# nx,ny,hx_nm,hy_nm` header line, then row-major values in meV
/// (comma or whitespace separated, any line breaks).
PotentialGrid read_potential_csv(std::istream& is, Material material = {});
void write_potential_csv(std::ostream& os, const PotentialGrid& grid);

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Five-point-stencil single-particle Hamiltonian in meV.
SparseMatrix discretize_h1(const PotentialGrid& grid);

struct SingleParticleBasis {
  int n_spatial = 0;
  Eigen::VectorXd energies;      ///< ascending, h*GHz
  Eigen::MatrixXd wavefunctions;  ///< column i = psi_i on the grid, sum psi^2 hx hy = 1
  double cell_area = 0.0;
  double h1_norm = 0.0;  ///< infinity norm of H1 in h*GHz

  /// First n states; nesting keeps variational comparisons exact.
  SingleParticleBasis truncated(int n) const;
  /// max |<i|j> - delta_ij|
  double orthonormality_error() const;
};

struct BasisOptions {
  double tolerance = 1e-13;  ///< ARPACK relative tolerance
  int max_restarts = 3000;
  /// Above this grid size the complete-basis path (dense LAPACK) is refused.
  int dense_limit = 4096;
};

/// Lowest n_spatial eigenpairs. n_spatial < G/4 uses ARPACK in shift-invert
/// mode with a sparse LDL^T factorization; n_spatial == G (complete basis,
/// small grids only) uses dense LAPACK. Eigenvector signs are fixed so the
/// largest-magnitude component is positive.
SingleParticleBasis solve_basis(const PotentialGrid& grid, int n_spatial, const BasisOptions& options = {});

/// Residual max_i ||H1 psi_i - e_i psi_i|| / ||H1|| (grid-vector norms).
double basis_residual(const PotentialGrid& grid, const SingleParticleBasis& basis);

/// Spatial two-electron integrals (ij|kl) = <ij|V|kl>, stored once per
/// unordered pair of pair indices: (ik) x (jl) with ik = pair(i, k). The
/// 8-fold permutation group maps onto the same slot.
class TwoElectronTensor {
 public:
  TwoElectronTensor() = default;
  TwoElectronTensor(int n, Eigen::MatrixXd pair_matrix);

  int n_spatial() const { return n_; }
  static std::int64_t pair(int i, int k) {
    const int a = i < k ? k : i;
    const int b = i < k ? i : k;
    return std::int64_t(a) * (a + 1) / 2 + b;
  }
  /// <ij|V|kl> = integral psi_i(1) psi_j(2) V psi_k(1) psi_l(2), h*GHz.
  double operator()(int i, int j, int k, int l) const { return m_(pair(i, k), pair(j, l)); }
  const Eigen::MatrixXd& pair_matrix() const { return m_; }

 private:
  int n_ = 0;
  Eigen::MatrixXd m_;
};

struct IntegralOptions {
  /// Kernel softening length in nm; <= 0 selects min(hx, hy) / 2.
  double regularization = 0.0;
  /// Cap on n_s^4 * 8 bytes and on the G x G kernel, in bytes.
  std::int64_t memory_cap = std::int64_t(4) << 30;
  /// Pair densities per kernel application.
  int pair_block = 32;
};

struct IntegralTables {
  Eigen::MatrixXd one_electron;  ///< spatial <i|H1|j>, h*GHz
  TwoElectronTensor two_electron;
  double regularization = 0.0;

  int n_spatial() const { return static_cast<int>(one_electron.rows()); }
  /// Spin-orbital one-electron element; p = 2 i + s with s = 0 up, 1 down.
  double h(int p, int q) const {
    return (p & 1) == (q & 1) ? one_electron(p >> 1, q >> 1) : 0.0;
  }
  /// Spin-orbital <pq|V|rs> with the spin deltas applied.
  double v(int p, int q, int r, int s) const {
    if ((p & 1) != (r & 1) || (q & 1) != (s & 1)) return 0.0;
    return two_electron(p >> 1, q >> 1, r >> 1, s >> 1);
  }
};

/// <psi_i|H1|psi_j> by grid quadrature.
Eigen::MatrixXd one_electron_integrals(const PotentialGrid& grid, const SingleParticleBasis& basis);

/// Pair densities rho_ik = psi_i psi_k, kernel applied as a dense G x G
/// operator per block of pair densities, then contracted:
/// (ij|kl) = dA^2 rho_ik^T K rho_jl. Blocks run in parallel; every output
/// element is produced by exactly one block, so the result does not depend
/// on the thread count.
TwoElectronTensor two_electron_integrals(const PotentialGrid& grid, const SingleParticleBasis& basis,
                                         const IntegralOptions& options = {},
                                         Execution exec = Execution::parallel);

IntegralTables build_integrals(const PotentialGrid& grid, const SingleParticleBasis& basis,
                               const IntegralOptions& options = {}, Execution exec = Execution::parallel);

enum class Excitation : std::uint8_t { ground = 0, single = 1, double_ = 2 };

struct Determinant {
  int p = 0;  ///< spin-orbital indices, p < q
  int q = 0;
  Excitation rank = Excitation::ground;

  /// 2 S_z / hbar: +2, 0 or -2.
  int two_sz() const { return ((p & 1) ? -1 : 1) + ((q & 1) ? -1 : 1); }
};

struct DeterminantCounts {
  std::int64_t ground = 0;
  std::int64_t single = 0;
  std::int64_t double_ = 0;
  std::int64_t total() const { return ground + single + double_; }
};

struct DeterminantBasis {
  int n_spatial = 0;
  std::vector<Determinant> dets;

  DeterminantCounts counts() const;
  /// Determinants with the given 2 S_z, in the original order.
  DeterminantBasis spin_block(int two_sz) const;
};

/// All two-electron determinants over 2 n_spatial spin orbitals, ranked by
/// excitation relative to the ground determinant (0 up, 0 down).
DeterminantBasis build_determinant_basis(int n_spatial);

/// Closed-form counts (1, 2(2n-2), C(2n-2, 2)).
DeterminantCounts determinant_counts(int n_spatial);

/// Slater-Condon matrix over `dets`. For two electrons every rule collapses
/// to <pq|H|rs> = h_pr d_qs - h_ps d_qr - h_qr d_ps + h_qs d_pr
///               + lambda (<pq|rs> - <pq|sr>),
/// which vanishes beyond rank 2. Row blocks run in parallel.
Eigen::MatrixXd assemble_fci(const IntegralTables& integrals, const DeterminantBasis& dets, double lambda,
                             Execution exec = Execution::parallel);

struct FciResult {
  std::vector<double> eigenvalues;   ///< ascending, h*GHz
  std::vector<int> degeneracies;     ///< multiplicity of each distinct level
  std::vector<double> levels;        ///< distinct levels
  double splitting_01 = 0.0;         ///< second distinct level minus ground
  double lambda = 0.0;
  double max_residual = 0.0;         ///< max ||H v - e v|| / ||H||
};

/// Relative gap below which eigenvalues count as one level.
inline constexpr double kDegeneracyTolerance = 1e-7;

/// k lowest eigenpairs via LAPACKE dsyevr; residual checked.
FciResult diagonalize_fci(const Eigen::MatrixXd& matrix, int k_lowest, double lambda = 0.0);

/// Groups an ascending spectrum into levels with multiplicities.
void group_levels(FciResult& result);

struct FciProblem {
  PotentialGrid grid;
  SingleParticleBasis basis;
  IntegralTables integrals;
  DeterminantBasis dets;

  static FciProblem build(const PotentialGrid& grid, int n_spatial, const IntegralOptions& options = {},
                          Execution exec = Execution::parallel);
};

/// Lowest k states of the full space, solved per S_z block (2S_z = 0 and +2;
/// the -2 block mirrors +2). Multiplicities include all three blocks.
FciResult solve(const FciProblem& problem, double lambda, int k_lowest = 8,
                Execution exec = Execution::parallel);

struct SplittingRow {
  double lambda = 0.0;
  double e0 = 0.0;
  double e1 = 0.0;
  double splitting = 0.0;
};

std::vector<SplittingRow> splitting_vs_lambda(const FciProblem& problem, std::span<const double> lambda_grid,
                                              Execution exec = Execution::parallel);

/// `lambda,E0_hghz,E1_hghz,splitting_hghz`
std::string splitting_csv(std::span<const SplittingRow> rows);

struct WignerEstimate {
  double r_w = 0.0;
  double l0_nm = 0.0;
  double hbar_omega_mev = 0.0;
  bool strongly_correlated = false;  ///< R_w > 2
};

/// R_w = (e^2 / 4 pi eps0 kappa l0) / hbar omega0, l0 = sqrt(hbar / m* omega0).
WignerEstimate wigner_parameter(double hbar_omega_mev, const Material& material);

/// Parabolic fit at the grid minimum. omega0 is taken along the soft axis,
/// which sets the extent of the ground orbital in an elongated well.
WignerEstimate wigner_parameter(const PotentialGrid& grid);

nlohmann::json summary_json(const FciProblem& problem, std::span<const SplittingRow> rows);

/// Brute-force reference: the two-particle Hamiltonian on the product grid,
/// H1 x 1 + 1 x H1 + lambda K(r1, r2), restricted to spatially symmetric
/// (singlet) or antisymmetric (triplet) wavefunctions. Lowest k eigenvalues in
/// h*GHz. Dense, for grids up to 16 x 16 only.
std::vector<double> product_grid_spectrum(const PotentialGrid& grid, double lambda, bool triplet, int k_lowest,
                                          double regularization = 0.0);

}  // namespace hqsim::fci
