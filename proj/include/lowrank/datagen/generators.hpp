#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "lowrank/core/alignment.hpp"
#include "lowrank/core/rng.hpp"
#include "lowrank/core/types.hpp"
#include "lowrank/operators/hankel.hpp"
#include "lowrank/operators/truncation.hpp"

namespace lowrank {

/// r values spaced linearly from 1 down to 1/kappa; r = 1 gives [1].
inline RealVector linear_spectrum(Index r, double kappa) {
  if (r < 1) throw DimensionError("linear_spectrum: r must be positive");
  if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw ArgumentError("condition number must be >= 1");
  RealVector sigma(r);
  for (Index i = 0; i < r; ++i) {
    const double t = r == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(r - 1);
    sigma(i) = 1.0 + t * (1.0 / kappa - 1.0);
  }
  return sigma;
}

namespace detail {

inline RealMatrix orthonormal_sign_matrix(Rng rng, Index n, Index r) {
  RealMatrix signs(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) signs(i, j) = (rng.next_u64() >> 63) ? 1.0 : -1.0;
  Eigen::HouseholderQR<RealMatrix> qr(signs);
  return qr.householderQ() * RealMatrix::Identity(n, r);
}

}  // namespace detail

/// Planted n1 x n2 rank-r matrix: U and V orthonormalize i.i.d. random-sign
/// matrices, singular values from linear_spectrum(r, kappa).
inline GroundTruth<double> make_ground_truth(Index n1, Index n2, Index r, double kappa,
                                             std::uint64_t seed) {
  if (r < 1 || r > std::min(n1, n2)) throw DimensionError("make_ground_truth: rank out of range");
  GroundTruth<double> truth;
  truth.sigma = linear_spectrum(r, kappa);
  const Rng rng(seed);
  truth.U = detail::orthonormal_sign_matrix(rng.split(0), n1, r);
  truth.V = detail::orthonormal_sign_matrix(rng.split(1), n2, r);
  truth.kappa = truth.sigma(0) / truth.sigma(r - 1);
  truth.mu = incoherence_of(truth.U, truth.V);
  return truth;
}

/// S = T_alpha[G] for G with i.i.d. N(0, 1) entries.
inline RealMatrix make_sparse_corruption(Index n1, Index n2, double alpha, std::uint64_t seed) {
  if (n1 < 1 || n2 < 1) throw DimensionError("make_sparse_corruption: empty dimensions");
  RealMatrix g(n1, n2);
  fill_normal<double>(seed, std::span<double>(g.data(), static_cast<std::size_t>(g.size())));
  return truncate_top_fraction(g, alpha);
}

/// Spectrally sparse signal arranged as an n x n complex Hankel matrix.
struct HankelTruth {
  ComplexMatrix X;
  RealVector sigma;
  RealVector freqs;
  GroundTruth<Complex> truth;
};

/// X_ij = sum_l (sigma_l / n) exp(2 pi i (i + j - 2) f_l) for 1-based i, j.
/// Frequencies must lie on the grid {1/n, ..., 1} and be distinct, which makes
/// the Vandermonde factors exactly orthonormal: U = a_l, V = conj(a_l) with
/// (a_l)_t = exp(2 pi i t f_l) / sqrt(n).
inline HankelTruth make_hankel_ground_truth(Index n, const RealVector& sigma, const RealVector& freqs) {
  const Index r = sigma.size();
  if (r < 1 || r > n || freqs.size() != r) throw DimensionError("make_hankel_ground_truth: rank out of range");
  std::vector<long long> grid;
  for (Index l = 0; l < r; ++l) {
    const double scaled = freqs(l) * static_cast<double>(n);
    const long long g = std::llround(scaled);
    if (std::abs(scaled - static_cast<double>(g)) > 1e-9 || g < 1 || g > n) {
      throw ArgumentError("make_hankel_ground_truth: frequency off the grid {1/n, ..., 1}");
    }
    for (long long other : grid) {
      if (other == g) throw ArgumentError("make_hankel_ground_truth: repeated frequency");
    }
    grid.push_back(g);
  }
  HankelTruth out;
  out.sigma = sigma;
  out.freqs = freqs;
  ComplexMatrix a(n, r);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index l = 0; l < r; ++l) {
    for (Index t = 0; t < n; ++t) {
      // Reduce t * g mod n before forming the angle to keep it exact.
      const long long phase = (static_cast<long long>(t) * grid[l]) % n;
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n);
      a(t, l) = norm * Complex(std::cos(angle), std::sin(angle));
    }
  }
  out.truth.U = a;
  out.truth.V = a.conjugate();
  out.truth.sigma = sigma;
  out.truth.kappa = sigma.maxCoeff() / sigma.minCoeff();
  out.truth.mu = incoherence_of(out.truth.U, out.truth.V);
  out.X = out.truth.matrix();
  return out;
}

/// Random frequencies drawn without replacement from {1/n, ..., 1} and
/// amplitudes from linear_spectrum(r, kappa).
inline HankelTruth make_hankel_ground_truth(Index n, Index r, double kappa, std::uint64_t seed) {
  if (r < 1 || r > n) throw DimensionError("make_hankel_ground_truth: rank out of range");
  Rng rng(seed);
  std::vector<Index> pool(n);
  for (Index i = 0; i < n; ++i) pool[i] = i + 1;
  RealVector freqs(r);
  for (Index l = 0; l < r; ++l) {
    const Index pick = l + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - l)));
    std::swap(pool[l], pool[pick]);
    freqs(l) = static_cast<double>(pool[l]) / static_cast<double>(n);
  }
  return make_hankel_ground_truth(n, linear_spectrum(r, kappa), freqs);
}

enum class NoiseStructure { dense, hankel };

/// Exactly one of snr_db and sigma_w is set.
struct NoiseSpec {
  std::optional<double> snr_db;
  std::optional<double> sigma_w;
  std::uint64_t seed = 0;
  NoiseStructure structure = NoiseStructure::dense;
};

/// sigma_w = ||X||_F / (sqrt(n1 n2) 10^(snr_db / 20)), i.e.
/// 10 log10(||X||_F^2 / (n1 n2 sigma_w^2)) = snr_db.
inline double resolve_sigma_w(const NoiseSpec& spec, double signal_norm, Index n1, Index n2) {
  if (spec.snr_db.has_value() == spec.sigma_w.has_value()) {
    throw ArgumentError("noise spec needs exactly one of snr_db and sigma_w");
  }
  if (spec.sigma_w) {
    if (!(*spec.sigma_w >= 0.0)) throw ArgumentError("noise level must be non-negative");
    return *spec.sigma_w;
  }
  const double cells = static_cast<double>(n1) * static_cast<double>(n2);
  return signal_norm / (std::sqrt(cells) * std::pow(10.0, *spec.snr_db / 20.0));
}

/// N(0, sigma^2) draws; complex values are circular with total variance sigma^2.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gaussian_noise(Index count, double sigma, std::uint64_t seed) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(count);
  if constexpr (is_complex_v<Scalar>) {
    std::vector<double> raw(static_cast<std::size_t>(2 * count));
    fill_normal<double>(seed, std::span<double>(raw), sigma / std::sqrt(2.0));
    for (Index i = 0; i < count; ++i) w(i) = Scalar(raw[2 * i], raw[2 * i + 1]);
  } else {
    fill_normal<double>(seed, std::span<double>(w.data(), static_cast<std::size_t>(count)), sigma);
  }
  return w;
}

/// X + W with W dense i.i.d. or Hankel with i.i.d. values per skew diagonal.
/// The SNR is measured against ||X||_F.
template <typename Scalar>
Matrix<Scalar> add_noise(const Matrix<Scalar>& x, const NoiseSpec& spec) {
  const double sigma = resolve_sigma_w(spec, x.norm(), x.rows(), x.cols());
  if (sigma == 0.0) return x;
  if (spec.structure == NoiseStructure::hankel) {
    if (x.rows() != x.cols()) throw DimensionError("Hankel noise needs a square matrix");
    return x + hankel_from_diagonals<Scalar>(gaussian_noise<Scalar>(2 * x.rows() - 1, sigma, spec.seed));
  }
  const auto w = gaussian_noise<Scalar>(x.size(), sigma, spec.seed);
  return x + Eigen::Map<const Matrix<Scalar>>(w.data(), x.rows(), x.cols());
}

}  // namespace lowrank
