#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <new>
#include <vector>

#if defined(__linux__)
#include <sys/mman.h>
#endif

#include "lowrank/core/kernels.hpp"
#include "lowrank/core/rng.hpp"
#include "lowrank/core/types.hpp"

namespace lowrank {

/// Linear measurement map A(X) = {<A_k, X>}_{k=1..m} on real n1 x n2 matrices.
class SensingOperator {
 public:
  virtual ~SensingOperator() = default;

  virtual Index measurements() const = 0;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// y_k = sum_ij (A_k)_ij X_ij.
  virtual RealVector apply(const RealMatrix& x) const = 0;

  /// sum_k y_k A_k.
  virtual RealMatrix adjoint(const RealVector& y) const = 0;

  /// A^*(A(X) - y). The default composes apply and adjoint; operators that
  /// stream their matrices override it to make one pass.
  virtual RealMatrix residual_adjoint(const RealMatrix& x, const RealVector& y) const {
    check_vector(y);
    return adjoint(apply(x) - y);
  }

  /// A_k as a dense n1 x n2 matrix, 0-based k.
  virtual RealMatrix measurement(Index k) const = 0;

 protected:
  void check_matrix(const RealMatrix& x) const {
    if (x.rows() != rows() || x.cols() != cols()) {
      throw DimensionError("sensing operator: matrix shape mismatch");
    }
  }
  void check_vector(const RealVector& y) const {
    if (y.size() != measurements()) throw DimensionError("sensing operator: length mismatch");
  }
};

namespace detail {

// Large blocks are 2 MiB aligned and flagged for transparent huge pages:
// the ensemble is streamed once per product and 4 KiB pages cost TLB misses
// and prefetch restarts at every page boundary.
template <typename T>
struct HugePageAllocator {
  using value_type = T;
  static constexpr std::size_t kHuge = std::size_t{1} << 21;

  HugePageAllocator() = default;
  template <typename U>
  HugePageAllocator(const HugePageAllocator<U>&) noexcept {}

  static bool huge(std::size_t n) { return n * sizeof(T) >= kHuge; }

  T* allocate(std::size_t n) {
    if (!huge(n)) return static_cast<T*>(::operator new(n * sizeof(T)));
    const std::size_t bytes = (n * sizeof(T) + kHuge - 1) / kHuge * kHuge;
    void* p = std::aligned_alloc(kHuge, bytes);
    if (p == nullptr) throw std::bad_alloc();
#if defined(__linux__) && defined(MADV_HUGEPAGE)
    madvise(p, bytes, MADV_HUGEPAGE);  // advisory; failure is harmless
#endif
    return static_cast<T*>(p);
  }

  void deallocate(T* p, std::size_t n) noexcept {
    if (huge(n)) {
      std::free(p);
    } else {
      ::operator delete(p);
    }
  }

  template <typename U>
  bool operator==(const HugePageAllocator<U>&) const noexcept { return true; }
};

}  // namespace detail

/// m i.i.d. Gaussian matrices with N(0, 1/m) entries.
///
/// Entry (k, i, j) is the draw at position k*n1*n2 + i*n2 + j of the stream
/// `seed`, so the ensemble is a function of (seed, m, n1, n2) only. The
/// standard normal draws are rounded to IEEE half precision and the operator
/// is defined by those stored values times 1/sqrt(m); all products
/// accumulate in double.
class GaussianSensing final : public SensingOperator {
 public:
  GaussianSensing(Index m, Index n1, Index n2, std::uint64_t seed)
      : m_(m), n1_(n1), n2_(n2), seed_(seed), scale_(1.0 / std::sqrt(static_cast<double>(m))) {
    if (m < 1 || n1 < 1 || n2 < 1) throw DimensionError("GaussianSensing: empty dimensions");
    const std::size_t total = static_cast<std::size_t>(m) * size();
    data_.resize(total);
    for (std::size_t i = 0; i < total; i += 2) {
      double a, b;
      normal_pair_at(seed, i / 2, a, b);
      data_[i] = Eigen::half(static_cast<float>(a));
      if (i + 1 < total) data_[i + 1] = Eigen::half(static_cast<float>(b));
    }
  }

  Index measurements() const override { return m_; }
  Index rows() const override { return n1_; }
  Index cols() const override { return n2_; }
  std::uint64_t seed() const { return seed_; }

  RealVector apply(const RealMatrix& x) const override {
    check_matrix(x);
    const RealVector flat = row_major(x);
    RealVector y(m_);
    for_groups([&]<int K>(Index k0, const Eigen::half* const* a, const Eigen::half* const*) {
      detail::dot_half_double<K>(a, flat.data(), size(), y.data() + k0);
    });
    return scale_ * y;
  }

  RealMatrix adjoint(const RealVector& y) const override {
    check_vector(y);
    RealVector acc = RealVector::Zero(block());
    for_groups([&]<int K>(Index k0, const Eigen::half* const* a, const Eigen::half* const*) {
      detail::axpy_half_double<K>(y.data() + k0, a, acc.data(), size());
    });
    return from_row_major(scale_ * acc);
  }

  RealMatrix residual_adjoint(const RealMatrix& x, const RealVector& y) const override {
    check_matrix(x);
    check_vector(y);
    const RealVector flat = row_major(x);
    RealVector acc = RealVector::Zero(block());
    for_groups([&]<int K>(Index k0, const Eigen::half* const* a, const Eigen::half* const* next) {
      double residual[K];
      detail::dot_half_double<K>(a, flat.data(), size(), residual, {next, 0});
      for (int q = 0; q < K; ++q) residual[q] = scale_ * residual[q] - y(k0 + q);
      detail::axpy_half_double<K>(residual, a, acc.data(), size(), {next, size() / 2});
    });
    return from_row_major(scale_ * acc);
  }

  RealMatrix measurement(Index k) const override {
    if (k < 0 || k >= m_) throw DimensionError("GaussianSensing: measurement index out of range");
    return from_row_major(scale_ * Eigen::Map<const Eigen::Matrix<Eigen::half, Eigen::Dynamic, 1>>(ptr(k), block())
                                              .cast<float>()
                                              .cast<double>());
  }

 private:
  Index block() const { return n1_ * n2_; }

  std::size_t size() const { return static_cast<std::size_t>(block()); }
  const Eigen::half* ptr(Index k) const { return data_.data() + static_cast<std::size_t>(k) * size(); }

  // Calls body.template operator()<K>(k0, rows, next) over consecutive pairs
  // of measurements, then a single one for odd m. `next` holds K rows to
  // prefetch (the start of the following group, clamped to the last row).
  template <typename Body>
  void for_groups(Body&& body) const {
    constexpr int group = 2;
    auto clamp = [this](Index k) { return ptr(std::min(k, m_ - 1)); };
    Index k = 0;
    for (; k + group <= m_; k += group) {
      const Eigen::half* rows[group] = {ptr(k), ptr(k + 1)};
      const Eigen::half* next[group] = {clamp(k + 2), clamp(k + 3)};
      body.template operator()<group>(k, rows, next);
    }
    for (; k < m_; ++k) {
      const Eigen::half* rows[1] = {ptr(k)};
      const Eigen::half* next[1] = {clamp(k + 1)};
      body.template operator()<1>(k, rows, next);
    }
  }

  RealVector row_major(const RealMatrix& x) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor rm = x;
    return Eigen::Map<const RealVector>(rm.data(), block());
  }

  RealMatrix from_row_major(const RealVector& v) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(v.data(), n1_, n2_);
  }

  Index m_, n1_, n2_;
  std::uint64_t seed_;
  double scale_;
  std::vector<Eigen::half, detail::HugePageAllocator<Eigen::half>> data_;
};

/// Coordinate functionals: m = n1*n2 and A_k = e_i e_j^T with k = i*n2 + j.
/// A^* A is the identity, which makes it a convenient diagnostic operator.
class BasisSensing final : public SensingOperator {
 public:
  BasisSensing(Index n1, Index n2) : n1_(n1), n2_(n2) {
    if (n1 < 1 || n2 < 1) throw DimensionError("BasisSensing: empty dimensions");
  }

  Index measurements() const override { return n1_ * n2_; }
  Index rows() const override { return n1_; }
  Index cols() const override { return n2_; }

  RealVector apply(const RealMatrix& x) const override {
    check_matrix(x);
    RealVector y(measurements());
    for (Index i = 0; i < n1_; ++i)
      for (Index j = 0; j < n2_; ++j) y(i * n2_ + j) = x(i, j);
    return y;
  }

  RealMatrix adjoint(const RealVector& y) const override {
    check_vector(y);
    RealMatrix x(n1_, n2_);
    for (Index i = 0; i < n1_; ++i)
      for (Index j = 0; j < n2_; ++j) x(i, j) = y(i * n2_ + j);
    return x;
  }

  RealMatrix measurement(Index k) const override {
    if (k < 0 || k >= measurements()) {
      throw DimensionError("BasisSensing: measurement index out of range");
    }
    RealMatrix a = RealMatrix::Zero(n1_, n2_);
    a(k / n2_, k % n2_) = 1.0;
    return a;
  }

 private:
  Index n1_, n2_;
};

}  // namespace lowrank
