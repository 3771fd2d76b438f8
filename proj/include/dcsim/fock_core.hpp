#pragma once

// Single-excitation sector of a trilinear down/up-conversion crystal.
//
// The sector basis is {UV photon} followed by the M signal-idler pair modes.
// One crystal is fully described by its dimensionless couplings eta(m); the
// closed-form transformation coefficients (beta, alpha, gamma) follow from
// the resummed exponential series. A dense matrix-exponential oracle is kept
// alongside as an independent route to the same unitary.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dcsim/errors.hpp"

namespace dcsim {

using Complex = std::complex<double>;

// Pair modes are dense indices 0..M-1; the UV channel is row/column 0 of the
// sector matrices and is not a mode index.
using ModeId = std::size_t;

namespace detail {

// sin(x)/x with the removable singularity patched below the switchover.
inline double sinc(double x) {
  if (std::abs(x) < 1e-7) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

// (1 - cos(x))/x^2, same treatment.
inline double versinc2(double x) {
  if (std::abs(x) < 1e-7) return 0.5 - x * x / 24.0;
  const double s = std::sin(0.5 * x);
  return 2.0 * s * s / (x * x);
}

}  // namespace detail

struct CouplingTable {
  std::vector<Complex> eta;  // per-mode coupling, input order preserved
  double xi = 0.0;           // sqrt(sum |eta|^2)
  ModeId selected = 0;

  std::size_t mode_count() const { return eta.size(); }
};

inline CouplingTable build_coupling_table(std::vector<Complex> etas,
                                          ModeId selected_index) {
  if (etas.empty()) throw InvalidModeSet("coupling table needs at least one mode");
  if (selected_index >= etas.size())
    throw InvalidSelection("selected index " + std::to_string(selected_index) +
                           " out of range for " + std::to_string(etas.size()) +
                           " modes");
  double sum_sq = 0.0;
  for (const Complex& e : etas) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
      throw InvalidCoupling("non-finite coupling value");
    sum_sq += std::norm(e);
  }
  CouplingTable table;
  table.eta = std::move(etas);
  table.xi = std::sqrt(sum_sq);
  table.selected = selected_index;
  return table;
}

// Closed-form transformation coefficients of one crystal:
//   beta      UV survival amplitude, cos(xi)
//   alpha(m)  pair-creation amplitude, (i/xi) eta(m) sin(xi)
//   gamma(m)  pair-redistribution amplitude, eta*(sel) eta(m) (1-cos xi)/xi^2
struct DcCoefficients {
  double beta = 1.0;
  std::vector<Complex> alpha;
  std::vector<Complex> gamma;
  double xi = 0.0;
  ModeId selected = 0;

  std::size_t mode_count() const { return alpha.size(); }
  const Complex& alpha_selected() const { return alpha[selected]; }
  const Complex& gamma_selected() const { return gamma[selected]; }
};

inline DcCoefficients dc_coefficients(const CouplingTable& table) {
  DcCoefficients c;
  c.xi = table.xi;
  c.selected = table.selected;
  c.beta = std::cos(table.xi);
  const double s = detail::sinc(table.xi);
  const double v = detail::versinc2(table.xi);
  const Complex eta_sel_conj = std::conj(table.eta[table.selected]);
  c.alpha.reserve(table.mode_count());
  c.gamma.reserve(table.mode_count());
  for (const Complex& e : table.eta) {
    c.alpha.push_back(Complex(0.0, 1.0) * e * s);
    c.gamma.push_back(eta_sel_conj * e * v);
  }
  return c;
}

// Amplitude vector over the sector basis. Norm may exceed 1; nothing here
// renormalizes.
struct SectorState {
  Complex uv_amp{0.0, 0.0};
  std::vector<Complex> pair_amps;

  double norm_sq() const {
    double n = std::norm(uv_amp);
    for (const Complex& a : pair_amps) n += std::norm(a);
    return n;
  }
};

// Column 0 of the sector unitary: the crystal acting on one UV photon.
inline SectorState apply_to_uv(const DcCoefficients& coeffs) {
  SectorState s;
  s.uv_amp = coeffs.beta;
  s.pair_amps = coeffs.alpha;
  return s;
}

// Column (input_mode+1): the crystal acting on one incoming pair. For the
// selected mode this is exactly (-alpha*, 1-gamma(sel), -gamma(m)); the
// general-mode column has the same structure with eta*(input) in place of
// eta*(selected). Written via alpha and (1-beta)/sin^2 xi = 1/(1+beta),
// which is regular for all xi < pi.
inline SectorState apply_to_pair(const DcCoefficients& coeffs,
                                 ModeId input_mode) {
  if (input_mode >= coeffs.mode_count())
    throw InvalidSelection("input mode " + std::to_string(input_mode) +
                           " out of range");
  const std::size_t m = coeffs.mode_count();
  const Complex a_in_conj = std::conj(coeffs.alpha[input_mode]);
  const double inv_one_plus_beta = 1.0 / (1.0 + coeffs.beta);
  SectorState s;
  s.uv_amp = -a_in_conj;
  s.pair_amps.resize(m);
  for (std::size_t n = 0; n < m; ++n) {
    s.pair_amps[n] = -a_in_conj * coeffs.alpha[n] * inv_one_plus_beta;
    if (n == input_mode) s.pair_amps[n] += 1.0;
  }
  return s;
}

// Dense (1+M)x(1+M) unitary on the sector; row/column 0 is the UV channel.
using SectorUnitary = Eigen::MatrixXcd;

// Independent oracle: exponentiate the sector Hamiltonian numerically.
// K[m+1][0] = eta(m) so that exp(iK)|UV> creates pairs with amplitude
// proportional to eta(m), matching the trilinear Hamiltonian. Uses a
// Hermitian eigendecomposition; never touches the closed forms above.
inline SectorUnitary brute_force_unitary(const CouplingTable& table) {
  const Eigen::Index m = static_cast<Eigen::Index>(table.mode_count());
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(m + 1, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    k(i + 1, 0) = table.eta[static_cast<std::size_t>(i)];
    k(0, i + 1) = std::conj(table.eta[static_cast<std::size_t>(i)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k);
  const Eigen::VectorXd& lambda = es.eigenvalues();
  Eigen::VectorXcd phases(m + 1);
  for (Eigen::Index i = 0; i <= m; ++i)
    phases(i) = std::exp(Complex(0.0, lambda(i)));
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

// Assembles the unitary from the closed-form columns.
inline SectorUnitary closed_form_unitary(const DcCoefficients& coeffs) {
  const Eigen::Index m = static_cast<Eigen::Index>(coeffs.mode_count());
  SectorUnitary u(m + 1, m + 1);
  const SectorState uv_col = apply_to_uv(coeffs);
  u(0, 0) = uv_col.uv_amp;
  for (Eigen::Index n = 0; n < m; ++n)
    u(n + 1, 0) = uv_col.pair_amps[static_cast<std::size_t>(n)];
  for (Eigen::Index c = 0; c < m; ++c) {
    const SectorState col = apply_to_pair(coeffs, static_cast<ModeId>(c));
    u(0, c + 1) = col.uv_amp;
    for (Eigen::Index n = 0; n < m; ++n)
      u(n + 1, c + 1) = col.pair_amps[static_cast<std::size_t>(n)];
  }
  return u;
}

inline SectorState apply_unitary(const SectorUnitary& u,
                                 const SectorState& s) {
  const Eigen::Index dim = u.rows();
  if (dim != static_cast<Eigen::Index>(s.pair_amps.size()) + 1)
    throw DimensionMismatch("unitary is " + std::to_string(dim) +
                            "-dimensional, state has " +
                            std::to_string(s.pair_amps.size()) + " pair modes");
  Eigen::VectorXcd v(dim);
  v(0) = s.uv_amp;
  for (Eigen::Index i = 1; i < dim; ++i)
    v(i) = s.pair_amps[static_cast<std::size_t>(i - 1)];
  Eigen::VectorXcd w = u * v;
  SectorState out;
  out.uv_amp = w(0);
  out.pair_amps.resize(static_cast<std::size_t>(dim - 1));
  for (Eigen::Index i = 1; i < dim; ++i)
    out.pair_amps[static_cast<std::size_t>(i - 1)] = w(i);
  return out;
}

}  // namespace dcsim
