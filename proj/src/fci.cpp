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

#include "hqsim/fci.hpp"

#include <Eigen/SparseCholesky>
#include <arpack/arpack.h>
#include <fmt/format.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hqsim/error.hpp"

namespace hqsim::fci {
namespace {

using units::kHGhzPerMeV;

// Eigen's own GEMM threading is switched off while our kernels run so that
// the only parallelism is the block split we control.
class EigenSerialScope {
 public:
  EigenSerialScope() : saved_(Eigen::nbThreads()) { Eigen::setNbThreads(1); }
  ~EigenSerialScope() { Eigen::setNbThreads(saved_); }
  EigenSerialScope(const EigenSerialScope&) = delete;
  EigenSerialScope& operator=(const EigenSerialScope&) = delete;

 private:
  int saved_;
};

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

double regularization_for(const PotentialGrid& grid, double requested) {
  return requested > 0.0 ? requested : 0.5 * std::min(grid.hx, grid.hy);
}

double sparse_inf_norm(const SparseMatrix& h) {
  double norm = 0.0;
  for (int k = 0; k < h.outerSize(); ++k) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) s += std::abs(it.value());
    norm = std::max(norm, s);
  }
  return norm;  // symmetric: column sums equal row sums
}

struct Eigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

// Lowest k eigenpairs of a dense symmetric matrix (only the upper triangle is
// read). The input is copied because dsyevr overwrites it.
Eigenpairs dense_lowest(const Eigen::MatrixXd& a, int k, bool want_vectors) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Eigen::MatrixXd work = a;
  Eigenpairs out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, k);
  std::vector<lapack_int> isuppz(2 * std::max<lapack_int>(k, 1));
  lapack_int found = 0;
  const double abstol = LAPACKE_dlamch('S');
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', 'U', n, work.data(), n, 0.0, 0.0, 1, k,
                     abstol, &found, out.values.data(), want_vectors ? out.vectors.data() : nullptr,
                     want_vectors ? n : 1, isuppz.data());
  if (info != 0 || found != k)
    throw SolverError(fmt::format("dsyevr failed (info {}, {} of {} eigenvalues)", info, found, k),
                      std::numeric_limits<double>::quiet_NaN());
  out.values.conservativeResize(k);
  return out;
}

// Gershgorin lower bound of a symmetric matrix, plus the largest |diagonal|.
template <class RowVisitor>
std::pair<double, double> gershgorin(Eigen::Index n, RowVisitor&& row) {
  double lower = std::numeric_limits<double>::infinity(), diag_max = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    double diag = 0.0, off = 0.0;
    row(k, diag, off);
    lower = std::min(lower, diag - off);
    diag_max = std::max(diag_max, std::abs(diag));
  }
  return {lower, diag_max};
}

// Shift-invert Lanczos (ARPACK mode 3). `solve` applies (A - sigma)^-1; with
// sigma below the spectrum the wanted states are the largest eigenvalues of
// the inverse.
template <class Solve>
Eigenpairs arpack_shift_invert(a_int n, int nev, double sigma, Solve&& solve, double tol, int max_restarts) {
  const a_int ncv = std::min<a_int>(n, std::max<a_int>(2 * nev + 1, nev + 32));
  std::vector<double> resid(n), v(std::size_t(n) * ncv), workd(3 * std::size_t(n));
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(lworkl);
  // Fixed, generic start vector: ARPACK's internal random start keeps state
  // between calls and would make results depend on call history.
  for (a_int i = 0; i < n; ++i) resid[i] = 1.0 + 0.5 * std::sin(0.7381 * i + 0.25);
  a_int iparam[11] = {1, 0, max_restarts, 1, 0, 0, 3, 0, 0, 0, 0};
  a_int ipntr[11] = {};
  a_int ido = 0, info = 1;

  while (true) {
    dsaupd_c(&ido, "I", n, "LM", nev, tol, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
             workl.data(), lworkl, &info);
    if (ido != -1 && ido != 1) break;
    const Eigen::Map<const Eigen::VectorXd> in(workd.data() + ipntr[0] - 1, n);
    Eigen::Map<Eigen::VectorXd> out(workd.data() + ipntr[1] - 1, n);
    out = solve(in);
  }
  if (info < 0 || info == 1)
    throw SolverError(fmt::format("ARPACK dsaupd did not converge (info {}, {} of {} Ritz values)", info,
                                  iparam[4], nev),
                      std::numeric_limits<double>::quiet_NaN());

  std::vector<a_int> select(ncv);
  Eigen::VectorXd d(nev);
  Eigen::MatrixXd z(n, nev);
  a_int einfo = 0;
  dseupd_c(1, "A", select.data(), d.data(), z.data(), n, sigma, "I", n, "LM", nev, tol, resid.data(), ncv,
           v.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, &einfo);
  if (einfo != 0)
    throw SolverError(fmt::format("ARPACK dseupd failed (info {})", einfo),
                      std::numeric_limits<double>::quiet_NaN());

  std::vector<int> order(nev);
  for (int i = 0; i < nev; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
  Eigenpairs out;
  out.values.resize(nev);
  out.vectors.resize(n, nev);
  for (int i = 0; i < nev; ++i) {
    out.values[i] = d[order[i]];
    out.vectors.col(i) = z.col(order[i]);
  }
  return out;
}

Eigenpairs sparse_lowest(const SparseMatrix& h, int nev, const BasisOptions& options) {
  const auto [lower, diag_max] = gershgorin(h.outerSize(), [&](Eigen::Index k, double& diag, double& off) {
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) {
      if (it.row() == k)
        diag = it.value();
      else
        off += std::abs(it.value());
    }
  });
  const double sigma = lower - 1e-2 * diag_max;
  SparseMatrix shifted = h;
  for (int k = 0; k < h.rows(); ++k) shifted.coeffRef(k, k) -= sigma;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("sparse factorization of the shifted Hamiltonian failed",
                      std::numeric_limits<double>::quiet_NaN());
  return arpack_shift_invert(
      static_cast<a_int>(h.rows()), nev, sigma, [&](const auto& x) { return Eigen::VectorXd(ldlt.solve(x)); },
      options.tolerance, options.max_restarts);
}

// Dense matrices up to this size go to LAPACK directly.
constexpr Eigen::Index kDenseDirectLimit = 1200;

// Lowest k eigenpairs of a dense symmetric matrix: LAPACK for small
// matrices, shift-invert Lanczos on a Cholesky factor for large ones.
Eigenpairs symmetric_lowest(const Eigen::MatrixXd& a, int k) {
  if (a.rows() <= kDenseDirectLimit || 3 * k >= a.rows()) return dense_lowest(a, k, true);
  EigenSerialScope serial_eigen;
  const auto [lower, diag_max] = gershgorin(a.rows(), [&](Eigen::Index r, double& diag, double& off) {
    diag = a(r, r);
    off = a.col(r).cwiseAbs().sum() - std::abs(diag);
  });
  const double sigma = lower - 1e-2 * diag_max;
  Eigen::MatrixXd shifted = a;
  shifted.diagonal().array() -= sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw SolverError("Cholesky factorization of the shifted matrix failed", std::numeric_limits<double>::quiet_NaN());
  return arpack_shift_invert(
      static_cast<a_int>(a.rows()), k, sigma, [&](const auto& x) { return Eigen::VectorXd(llt.solve(x)); },
      1e-14, 5000);
}

std::vector<double> split_numbers(const std::string& line) {
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("potential CSV: '{}' is not a number", tok));
    }
    if (used != tok.size()) throw ConfigError(fmt::format("potential CSV: '{}' is not a number", tok));
    out.push_back(v);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- grids

std::vector<std::string> PotentialGrid::errors() const {
  std::vector<std::string> e;
  if (nx < 8 || ny < 8) e.push_back(fmt::format("grid must be at least 8 x 8 (got {} x {})", nx, ny));
  if (!(hx > 0.0) || !(hy > 0.0)) e.push_back("grid spacings must be positive");
  if (nx > 0 && ny > 0 && values.size() != std::size_t(nx) * std::size_t(ny))
    e.push_back(fmt::format("potential has {} values, expected {}", values.size(), std::size_t(nx) * ny));
  if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }))
    e.push_back("potential values must be finite");
  if (!(material.m_star > 0.0)) e.push_back("effective mass must be positive");
  if (!(material.kappa > 0.0)) e.push_back("dielectric constant must be positive");
  return e;
}

void PotentialGrid::validate() const {
  const auto e = errors();
  if (!e.empty()) throw ConfigError("invalid potential grid: " + e.front());
}

namespace {
PotentialGrid empty_grid(int nx, int ny, double half_x, double half_y, Material material) {
  PotentialGrid g;
  g.nx = nx;
  g.ny = ny;
  g.hx = 2.0 * half_x / (nx + 1);
  g.hy = 2.0 * half_y / (ny + 1);
  g.material = material;
  g.values.assign(std::size_t(std::max(nx, 0)) * std::max(ny, 0), 0.0);
  return g;
}
}  // namespace

PotentialGrid gaussian_well(int nx, int ny, double half_width_x, double half_width_y, double v0_mev,
                            double sigma_x_nm, double sigma_y_nm, Material material) {
  if (!(sigma_x_nm > 0.0) || !(sigma_y_nm > 0.0)) throw ConfigError("well widths must be positive");
  auto g = empty_grid(nx, ny, half_width_x, half_width_y, material);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const double x = g.x(ix) / sigma_x_nm, y = g.y(iy) / sigma_y_nm;
      g.values[g.index(ix, iy)] = -v0_mev * std::exp(-0.5 * (x * x + y * y));
    }
  g.validate();
  return g;
}

PotentialGrid harmonic_well(int nx, int ny, double half_width_x, double half_width_y, double hw_x_mev,
                            double hw_y_mev, Material material) {
  auto g = empty_grid(nx, ny, half_width_x, half_width_y, material);
  // (1/2) m w^2 x^2 = (hbar w)^2 x^2 / (4 hbar^2/2m)
  const double t = material.kinetic_prefactor();
  const double kx = hw_x_mev * hw_x_mev / (4.0 * t), ky = hw_y_mev * hw_y_mev / (4.0 * t);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) g.values[g.index(ix, iy)] = kx * g.x(ix) * g.x(ix) + ky * g.y(iy) * g.y(iy);
  g.validate();
  return g;
}

PotentialGrid read_potential_csv(std::istream& is, Material material) {
  std::string line;
  if (!std::getline(is, line) || line.empty() || line[0] != '#')
    throw ConfigError("potential CSV must start with '# nx,ny,hx_nm,hy_nm'");
  std::vector<double> head;
  try {
    head = split_numbers(line.substr(1));
  } catch (const ConfigError&) {
    // named header; dimensions follow on the next line
    if (!std::getline(is, line)) throw ConfigError("potential CSV: missing grid dimensions");
    if (!line.empty() && line[0] == '#') line = line.substr(1);
    head = split_numbers(line);
  }
  if (head.size() != 4) throw ConfigError("potential CSV header needs nx,ny,hx_nm,hy_nm");
  PotentialGrid g;
  g.nx = static_cast<int>(head[0]);
  g.ny = static_cast<int>(head[1]);
  g.hx = head[2];
  g.hy = head[3];
  g.material = material;
  if (g.nx != head[0] || g.ny != head[1]) throw ConfigError("potential CSV: nx, ny must be integers");
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto v = split_numbers(line);
    g.values.insert(g.values.end(), v.begin(), v.end());
  }
  g.validate();
  return g;
}

void write_potential_csv(std::ostream& os, const PotentialGrid& grid) {
  os << "# nx,ny,hx_nm,hy_nm\n" << fmt::format("{},{},{},{}\n", grid.nx, grid.ny, grid.hx, grid.hy);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) os << (ix ? "," : "") << fmt::format("{}", grid.values[grid.index(ix, iy)]);
    os << '\n';
  }
  if (!os) throw IoError("failed writing potential CSV");
}

// --------------------------------------------------------- single particle

SparseMatrix discretize_h1(const PotentialGrid& grid) {
  grid.validate();
  const double t = grid.material.kinetic_prefactor();
  const double cx = t / (grid.hx * grid.hx), cy = t / (grid.hy * grid.hy);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(grid.size()) * 5);
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix) {
      const int k = grid.index(ix, iy);
      trip.emplace_back(k, k, 2.0 * cx + 2.0 * cy + grid.values[k]);
      if (ix > 0) trip.emplace_back(k, grid.index(ix - 1, iy), -cx);
      if (ix + 1 < grid.nx) trip.emplace_back(k, grid.index(ix + 1, iy), -cx);
      if (iy > 0) trip.emplace_back(k, grid.index(ix, iy - 1), -cy);
      if (iy + 1 < grid.ny) trip.emplace_back(k, grid.index(ix, iy + 1), -cy);
    }
  SparseMatrix h(grid.size(), grid.size());
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

SingleParticleBasis SingleParticleBasis::truncated(int n) const {
  if (n < 1 || n > n_spatial) throw ConfigError(fmt::format("cannot truncate {} states to {}", n_spatial, n));
  SingleParticleBasis b = *this;
  b.n_spatial = n;
  b.energies = energies.head(n);
  b.wavefunctions = wavefunctions.leftCols(n);
  return b;
}

double SingleParticleBasis::orthonormality_error() const {
  const Eigen::MatrixXd s = cell_area * (wavefunctions.transpose() * wavefunctions);
  return (s - Eigen::MatrixXd::Identity(n_spatial, n_spatial)).cwiseAbs().maxCoeff();
}

SingleParticleBasis solve_basis(const PotentialGrid& grid, int n_spatial, const BasisOptions& options) {
  grid.validate();
  const int g = grid.size();
  const SparseMatrix h = discretize_h1(grid);
  Eigenpairs ep;
  if (n_spatial == g) {
    if (g > options.dense_limit)
      throw CapacityError(fmt::format("complete basis needs a dense {} x {} solve; limit is {}", g, g,
                                      options.dense_limit));
    ep = dense_lowest(Eigen::MatrixXd(h), g, true);
  } else {
    if (n_spatial < 1 || 4 * n_spatial >= g)
      throw ConfigError(fmt::format("n_spatial must be in [1, {}) or equal the grid size {}", (g + 3) / 4, g));
    ep = sparse_lowest(h, n_spatial, options);
  }
  SingleParticleBasis b;
  b.n_spatial = n_spatial;
  b.cell_area = grid.cell_area();
  b.energies = ep.values * kHGhzPerMeV;
  b.h1_norm = sparse_inf_norm(h) * kHGhzPerMeV;
  b.wavefunctions = ep.vectors;
  for (int i = 0; i < n_spatial; ++i) {
    b.wavefunctions.col(i).normalize();
    fix_sign(b.wavefunctions.col(i));
  }
  b.wavefunctions /= std::sqrt(b.cell_area);
  return b;
}

double basis_residual(const PotentialGrid& grid, const SingleParticleBasis& basis) {
  const SparseMatrix h = discretize_h1(grid);
  const double norm = sparse_inf_norm(h);
  double worst = 0.0;
  for (int i = 0; i < basis.n_spatial; ++i) {
    const Eigen::VectorXd v = basis.wavefunctions.col(i).normalized();
    const Eigen::VectorXd r = h * v - (basis.energies[i] / kHGhzPerMeV) * v;
    worst = std::max(worst, r.norm() / norm);
  }
  return worst;
}

// --------------------------------------------------------------- integrals

Eigen::MatrixXd one_electron_integrals(const PotentialGrid& grid, const SingleParticleBasis& basis) {
  const SparseMatrix h = discretize_h1(grid);
  const Eigen::MatrixXd hpsi = h * basis.wavefunctions;
  Eigen::MatrixXd m = basis.cell_area * (basis.wavefunctions.transpose() * hpsi) * kHGhzPerMeV;
  // quadrature of a symmetric operator; remove rounding asymmetry
  return 0.5 * (m + m.transpose());
}

TwoElectronTensor::TwoElectronTensor(int n, Eigen::MatrixXd pair_matrix) : n_(n), m_(std::move(pair_matrix)) {
  const std::int64_t np = std::int64_t(n) * (n + 1) / 2;
  if (m_.rows() != np || m_.cols() != np)
    throw ConfigError(fmt::format("pair matrix must be {} x {}", np, np));
}

TwoElectronTensor two_electron_integrals(const PotentialGrid& grid, const SingleParticleBasis& basis,
                                         const IntegralOptions& options, Execution exec) {
  grid.validate();
  const int g = grid.size();
  const int n = basis.n_spatial;
  if (basis.wavefunctions.rows() != g) throw ConfigError("basis does not belong to this grid");
  const double tensor_bytes = 8.0 * std::pow(double(n), 4);
  const double kernel_bytes = 8.0 * double(g) * double(g);
  if (tensor_bytes > double(options.memory_cap))
    throw CapacityError(fmt::format("two-electron tensor for n_s = {} needs {:.3g} GB, cap is {:.3g} GB; "
                                    "use fewer spatial states",
                                    n, tensor_bytes / 1e9, double(options.memory_cap) / 1e9));
  if (kernel_bytes > double(options.memory_cap))
    throw CapacityError(fmt::format("Coulomb kernel for a {}-point grid needs {:.3g} GB, cap is {:.3g} GB; "
                                    "use a coarser grid",
                                    g, kernel_bytes / 1e9, double(options.memory_cap) / 1e9));
  if (options.pair_block < 1) throw ConfigError("pair_block must be positive");

  EigenSerialScope serial_eigen;
  const double a = regularization_for(grid, options.regularization);
  const double c = grid.material.coulomb_prefactor();
  const int np = n * (n + 1) / 2;

  Eigen::MatrixXd rho(g, np);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= i; ++k)
      rho.col(TwoElectronTensor::pair(i, k)) = basis.wavefunctions.col(i).cwiseProduct(basis.wavefunctions.col(k));

  Eigen::MatrixXd kernel(g, g);
  parallel::for_tasks(g, exec, [&](int r2) {
    const double x2 = grid.x(r2 % grid.nx), y2 = grid.y(r2 / grid.nx);
    for (int r1 = 0; r1 < g; ++r1) {
      const double dx = grid.x(r1 % grid.nx) - x2, dy = grid.y(r1 / grid.nx) - y2;
      kernel(r1, r2) = c / std::sqrt(dx * dx + dy * dy + a * a);
    }
  });

  Eigen::MatrixXd m(np, np);
  const int nblocks = (np + options.pair_block - 1) / options.pair_block;
  parallel::for_tasks(nblocks, exec, [&](int b) {
    const int c0 = b * options.pair_block;
    const int w = std::min(options.pair_block, np - c0);
    const Eigen::MatrixXd potential = kernel * rho.middleCols(c0, w);
    m.middleCols(c0, w).noalias() = rho.transpose() * potential;
  });
  const double scale = basis.cell_area * basis.cell_area * kHGhzPerMeV;
  Eigen::MatrixXd sym = 0.5 * scale * (m + m.transpose());
  return TwoElectronTensor(n, std::move(sym));
}

IntegralTables build_integrals(const PotentialGrid& grid, const SingleParticleBasis& basis,
                               const IntegralOptions& options, Execution exec) {
  IntegralTables t;
  t.one_electron = one_electron_integrals(grid, basis);
  t.two_electron = two_electron_integrals(grid, basis, options, exec);
  t.regularization = regularization_for(grid, options.regularization);
  return t;
}

// ------------------------------------------------------------ determinants

DeterminantCounts DeterminantBasis::counts() const {
  DeterminantCounts c;
  for (const auto& d : dets) {
    switch (d.rank) {
      case Excitation::ground: ++c.ground; break;
      case Excitation::single: ++c.single; break;
      case Excitation::double_: ++c.double_; break;
    }
  }
  return c;
}

DeterminantBasis DeterminantBasis::spin_block(int two_sz) const {
  DeterminantBasis b;
  b.n_spatial = n_spatial;
  for (const auto& d : dets)
    if (d.two_sz() == two_sz) b.dets.push_back(d);
  return b;
}

DeterminantBasis build_determinant_basis(int n_spatial) {
  if (n_spatial < 2) throw ConfigError("need at least two spatial orbitals");
  DeterminantBasis b;
  b.n_spatial = n_spatial;
  const int ns = 2 * n_spatial;
  b.dets.reserve(std::size_t(ns) * (ns - 1) / 2);
  for (int p = 0; p < ns; ++p)
    for (int q = p + 1; q < ns; ++q) {
      const int excited = (p > 1) + (q > 1);
      b.dets.push_back({p, q, static_cast<Excitation>(excited)});
    }
  return b;
}

DeterminantCounts determinant_counts(int n_spatial) {
  const std::int64_t m = 2 * std::int64_t(n_spatial) - 2;
  return {1, 2 * m, m * (m - 1) / 2};
}

Eigen::MatrixXd assemble_fci(const IntegralTables& in, const DeterminantBasis& basis, double lambda,
                             Execution exec) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
  if (basis.n_spatial > in.n_spatial())
    throw ConfigError("determinants reference more orbitals than the integral tables hold");
  const int dim = static_cast<int>(basis.dets.size());
  Eigen::MatrixXd h(dim, dim);
  constexpr int kRowBlock = 64;
  const int nblocks = (dim + kRowBlock - 1) / kRowBlock;
  parallel::for_tasks(nblocks, exec, [&](int blk) {
    const int r_end = std::min(dim, (blk + 1) * kRowBlock);
    for (int a = blk * kRowBlock; a < r_end; ++a) {
      const int p = basis.dets[a].p, q = basis.dets[a].q;
      for (int b = 0; b < dim; ++b) {
        const int r = basis.dets[b].p, s = basis.dets[b].q;
        double one = 0.0;
        if (q == s) one += in.h(p, r);
        if (q == r) one -= in.h(p, s);
        if (p == s) one -= in.h(q, r);
        if (p == r) one += in.h(q, s);
        const double two = lambda == 0.0 ? 0.0 : lambda * (in.v(p, q, r, s) - in.v(p, q, s, r));
        h(a, b) = one + two;
      }
    }
  });
  return h;
}

// ---------------------------------------------------------- diagonalization

void group_levels(FciResult& r) {
  r.levels.clear();
  r.degeneracies.clear();
  for (double e : r.eigenvalues) {
    if (!r.levels.empty() &&
        std::abs(e - r.levels.back()) <= kDegeneracyTolerance * std::max(1.0, std::abs(e))) {
      ++r.degeneracies.back();
    } else {
      r.levels.push_back(e);
      r.degeneracies.push_back(1);
    }
  }
  r.splitting_01 = r.levels.size() > 1 ? r.levels[1] - r.levels[0] : std::numeric_limits<double>::quiet_NaN();
}

FciResult diagonalize_fci(const Eigen::MatrixXd& matrix, int k_lowest, double lambda) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) throw ConfigError("FCI matrix must be square");
  const int k = std::min<int>(k_lowest, static_cast<int>(matrix.rows()));
  if (k < 1) throw ConfigError("k_lowest must be positive");
  const auto ep = symmetric_lowest(matrix, k);
  FciResult r;
  r.lambda = lambda;
  r.eigenvalues.assign(ep.values.data(), ep.values.data() + k);
  const double norm = std::max(matrix.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const Eigen::MatrixXd res = matrix.selfadjointView<Eigen::Upper>() * ep.vectors - ep.vectors * ep.values.asDiagonal();
  r.max_residual = res.colwise().norm().maxCoeff() / norm;
  if (!(r.max_residual < 1e-8))
    throw SolverError(fmt::format("FCI eigenpair residual {:.3g} exceeds 1e-8", r.max_residual), r.max_residual);
  group_levels(r);
  return r;
}

FciProblem FciProblem::build(const PotentialGrid& grid, int n_spatial, const IntegralOptions& options,
                             Execution exec) {
  FciProblem p;
  p.grid = grid;
  p.basis = solve_basis(grid, n_spatial);
  p.integrals = build_integrals(grid, p.basis, options, exec);
  p.dets = build_determinant_basis(n_spatial);
  return p;
}

FciResult solve(const FciProblem& problem, double lambda, int k_lowest, Execution exec) {
  FciResult out;
  out.lambda = lambda;
  for (int two_sz : {0, 2}) {
    const auto block = problem.dets.spin_block(two_sz);
    const auto h = assemble_fci(problem.integrals, block, lambda, exec);
    const auto r = diagonalize_fci(h, k_lowest, lambda);
    out.max_residual = std::max(out.max_residual, r.max_residual);
    for (double e : r.eigenvalues) {
      out.eigenvalues.push_back(e);
      if (two_sz == 2) out.eigenvalues.push_back(e);  // mirrored -2 block
    }
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
  if (static_cast<int>(out.eigenvalues.size()) > k_lowest) out.eigenvalues.resize(k_lowest);
  group_levels(out);
  return out;
}

std::vector<SplittingRow> splitting_vs_lambda(const FciProblem& problem, std::span<const double> lambda_grid,
                                              Execution exec) {
  std::vector<SplittingRow> rows;
  for (double lambda : lambda_grid) {
    const auto r = solve(problem, lambda, 8, exec);
    if (r.levels.size() < 2) throw AnalysisError("fewer than two distinct levels in the lowest eight states");
    rows.push_back({lambda, r.levels[0], r.levels[1], r.splitting_01});
  }
  return rows;
}

std::string splitting_csv(std::span<const SplittingRow> rows) {
  std::string s = "lambda,E0_hghz,E1_hghz,splitting_hghz\n";
  for (const auto& r : rows) s += fmt::format("{},{:.12g},{:.12g},{:.12g}\n", r.lambda, r.e0, r.e1, r.splitting);
  return s;
}

// ---------------------------------------------------------------- Wigner

WignerEstimate wigner_parameter(double hbar_omega_mev, const Material& material) {
  if (!(hbar_omega_mev > 0.0)) throw FitError("confinement energy must be positive");
  WignerEstimate w;
  w.hbar_omega_mev = hbar_omega_mev;
  w.l0_nm = std::sqrt(2.0 * material.kinetic_prefactor() / hbar_omega_mev);
  w.r_w = material.coulomb_prefactor() / w.l0_nm / hbar_omega_mev;
  w.strongly_correlated = w.r_w > 2.0;
  return w;
}

WignerEstimate wigner_parameter(const PotentialGrid& grid) {
  grid.validate();
  const auto it = std::min_element(grid.values.begin(), grid.values.end());
  const int k = static_cast<int>(it - grid.values.begin());
  const int ix = k % grid.nx, iy = k / grid.nx;
  if (ix == 0 || iy == 0 || ix == grid.nx - 1 || iy == grid.ny - 1)
    throw FitError("potential minimum lies on the grid edge");
  const auto& v = grid.values;
  const double kx = (v[grid.index(ix + 1, iy)] + v[grid.index(ix - 1, iy)] - 2.0 * v[k]) / (grid.hx * grid.hx);
  const double ky = (v[grid.index(ix, iy + 1)] + v[grid.index(ix, iy - 1)] - 2.0 * v[k]) / (grid.hy * grid.hy);
  if (!(kx > 0.0) || !(ky > 0.0)) throw FitError("potential minimum is not parabolic (non-positive curvature)");
  // V = k x^2 / 2 => hbar omega = sqrt(hbar^2 k / m*) = sqrt(2 T k)
  const double soft = std::min(kx, ky);
  return wigner_parameter(std::sqrt(2.0 * grid.material.kinetic_prefactor() * soft), grid.material);
}

nlohmann::json summary_json(const FciProblem& problem, std::span<const SplittingRow> rows) {
  nlohmann::json j;
  const auto c = problem.dets.counts();
  j["grid"] = {{"nx", problem.grid.nx}, {"ny", problem.grid.ny}, {"hx_nm", problem.grid.hx},
               {"hy_nm", problem.grid.hy}};
  j["material"] = {{"m_star", problem.grid.material.m_star}, {"kappa", problem.grid.material.kappa}};
  j["n_spatial"] = problem.basis.n_spatial;
  j["determinants"] = {{"ground", c.ground}, {"single", c.single}, {"double", c.double_}, {"total", c.total()}};
  j["regularization_nm"] = problem.integrals.regularization;
  try {
    const auto w = wigner_parameter(problem.grid);
    j["wigner"] = {{"r_w", w.r_w},
                   {"l0_nm", w.l0_nm},
                   {"hbar_omega_mev", w.hbar_omega_mev},
                   {"strongly_correlated", w.strongly_correlated}};
  } catch (const FitError& e) {
    j["wigner"] = {{"error", e.what()}};
  }
  j["diagnostics"] = {{"orthonormality_error", problem.basis.orthonormality_error()},
                      {"basis_residual", basis_residual(problem.grid, problem.basis)}};
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows)
    table.push_back({{"lambda", r.lambda}, {"E0_hghz", r.e0}, {"E1_hghz", r.e1}, {"splitting_hghz", r.splitting}});
  j["splitting"] = table;
  if (rows.size() >= 2 && rows.back().splitting > 0.0)
    j["quench_factor"] = rows.front().splitting / rows.back().splitting;
  return j;
}

// ---------------------------------------------------------------- oracle

std::vector<double> product_grid_spectrum(const PotentialGrid& grid, double lambda, bool triplet, int k_lowest,
                                          double regularization) {
  grid.validate();
  const int g = grid.size();
  if (g > 144) throw CapacityError("product-grid reference is limited to 144 grid points");
  const SparseMatrix h1 = discretize_h1(grid);
  const double a = regularization_for(grid, regularization);
  const double c = grid.material.coulomb_prefactor();

  // (Anti)symmetrized pair states |ab> +- |ba>, a <= b (a < b for triplets).
  std::vector<int> index(std::size_t(g) * g, -1);
  int dim = 0;
  for (int b = 0; b < g; ++b)
    for (int a2 = 0; a2 <= b; ++a2) {
      if (triplet && a2 == b) continue;
      index[std::size_t(a2) * g + b] = dim++;
    }
  const double sgn = triplet ? -1.0 : 1.0;
  auto norm = [&](int x, int y) { return x == y ? 1.0 : std::sqrt(0.5); };
  // Component of the full product vector at (x, y) in the (anti)symmetric basis.
  auto add = [&](Eigen::MatrixXd& m, int col, int x, int y, double amp, double col_norm) {
    if (x == y && triplet) return;
    const int lo = std::min(x, y), hi = std::max(x, y);
    const double s = (x <= y) ? 1.0 : sgn;
    m(index[std::size_t(lo) * g + hi], col) += amp * s * norm(lo, hi) * col_norm;
  };

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int b = 0; b < g; ++b)
    for (int a2 = 0; a2 <= b; ++a2) {
      const int col = index[std::size_t(a2) * g + b];
      if (col < 0) continue;
      const double cn = norm(a2, b);
      // column vector = cn (|a2 b> + sgn |b a2>); apply H1 x 1 + 1 x H1, project.
      const int xs[2] = {a2, b};
      const int ys[2] = {b, a2};
      const double amps[2] = {1.0, sgn};
      const int terms = (a2 == b) ? 1 : 2;
      for (int t = 0; t < terms; ++t) {
        const int x = xs[t], y = ys[t];
        for (SparseMatrix::InnerIterator it(h1, x); it; ++it)
          add(h, col, static_cast<int>(it.row()), y, amps[t] * it.value(), cn);
        for (SparseMatrix::InnerIterator it(h1, y); it; ++it)
          add(h, col, x, static_cast<int>(it.row()), amps[t] * it.value(), cn);
      }
      if (lambda != 0.0) {
        const double dx = grid.x(a2 % grid.nx) - grid.x(b % grid.nx);
        const double dy = grid.y(a2 / grid.nx) - grid.y(b / grid.nx);
        h(col, col) += lambda * c / std::sqrt(dx * dx + dy * dy + a * a);
      }
    }
  const int k = std::min(k_lowest, dim);
  const auto ep = symmetric_lowest(h, k);
  std::vector<double> out(k);
  for (int i = 0; i < k; ++i) out[i] = ep.values[i] * kHGhzPerMeV;
  return out;
}

}  // namespace hqsim::fci
