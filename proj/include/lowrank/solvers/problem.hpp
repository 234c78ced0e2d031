#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "lowrank/core/types.hpp"
#include "lowrank/operators/hankel.hpp"
#include "lowrank/operators/mask.hpp"
#include "lowrank/operators/sensing.hpp"

namespace lowrank {

enum class ProblemKind { factorization, sensing, rpca, completion, hankel, general };

inline const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::factorization: return "factorization";
    case ProblemKind::sensing: return "sensing";
    case ProblemKind::rpca: return "rpca";
    case ProblemKind::completion: return "completion";
    case ProblemKind::hankel: return "hankel";
    case ProblemKind::general: return "general";
  }
  return "unknown";
}

/// Smooth loss f on n1 x n2 matrices. The gradient G is taken with respect to
/// the real inner product, df = Re <G, dX>.
template <typename Scalar>
struct GeneralLoss {
  std::string name;
  std::function<double(const Matrix<Scalar>&)> value;
  std::function<Matrix<Scalar>(const Matrix<Scalar>&)> gradient;
};

namespace problems {

/// f(X) = 1/2 ||X - target||_F^2.
template <typename Scalar>
struct Factorization {
  Matrix<Scalar> target;
};

/// f(X) = 1/2 ||A(X) - y||_2^2.
struct Sensing {
  std::shared_ptr<const SensingOperator> op;
  RealVector y;
};

/// Y = X + S with S sparse; alpha is the corruption fraction.
struct Rpca {
  RealMatrix observed;
  double alpha = 0.0;
};

/// f(X) = 1/(2p) ||P_Omega(X) - observed||_F^2 with observed = P_Omega(Y).
struct Completion {
  std::shared_ptr<const BernoulliMask> mask;
  RealMatrix observed;
  double p = 1.0;
};

/// f(X) = 1/(2p) ||H_Omega(X) - observed||_F^2 + 1/2 ||(I - H)(X)||_F^2 with
/// observed = H_Omega(Y).
struct Hankel {
  HankelSubset subset;
  ComplexMatrix observed;
  double p = 1.0;
};

/// Arbitrary loss; `observation` is the matrix used as spectral surrogate.
template <typename Scalar>
struct General {
  GeneralLoss<Scalar> loss;
  Matrix<Scalar> observation;
};

}  // namespace problems

/// Tagged union of the supported recovery problems plus the optional planted
/// truth used for error tracking. The Hankel problem lives over the complex
/// field, all others over the reals.
template <typename Scalar>
struct ProblemInstance {
  using Data = std::variant<problems::Factorization<Scalar>, problems::Sensing, problems::Rpca,
                            problems::Completion, problems::Hankel, problems::General<Scalar>>;

  Data data;
  Index n1 = 0;
  Index n2 = 0;
  std::optional<GroundTruth<Scalar>> truth;

  ProblemKind kind() const { return static_cast<ProblemKind>(data.index()); }

  template <typename T>
  const T& as() const {
    const T* payload = std::get_if<T>(&data);
    if (payload == nullptr) throw ArgumentError("problem payload of the wrong kind");
    return *payload;
  }
};

namespace detail {

template <typename Scalar>
void check_field(ProblemKind kind) {
  if constexpr (is_complex_v<Scalar>) {
    if (kind != ProblemKind::factorization && kind != ProblemKind::general && kind != ProblemKind::hankel) {
      throw ArgumentError(std::string(to_string(kind)) + " problems are defined over the reals");
    }
  } else {
    if (kind == ProblemKind::hankel) throw ArgumentError("hankel problems are defined over the complex field");
  }
}

}  // namespace detail

/// Gradient of the problem loss at the matrix X.
template <typename Scalar>
Matrix<Scalar> loss_gradient(const ProblemInstance<Scalar>& problem, const Matrix<Scalar>& x) {
  if (x.rows() != problem.n1 || x.cols() != problem.n2) throw DimensionError("loss_gradient: shape mismatch");
  detail::check_field<Scalar>(problem.kind());
  switch (problem.kind()) {
    case ProblemKind::factorization:
      return x - problem.template as<problems::Factorization<Scalar>>().target;
    case ProblemKind::general:
      return problem.template as<problems::General<Scalar>>().loss.gradient(x);
    case ProblemKind::rpca:
      throw ArgumentError("rpca has no stand-alone gradient; use rpca_iterate");
    default:
      break;
  }
  if constexpr (is_complex_v<Scalar>) {
    if (problem.kind() != ProblemKind::hankel) throw ArgumentError("unsupported problem over complex field");
    const auto& h = problem.template as<problems::Hankel>();
    return (hankel_project<Complex>(x, h.subset) - h.observed) / h.p + (x - hankel_project<Complex>(x));
  } else {
    switch (problem.kind()) {
      case ProblemKind::sensing: {
        const auto& s = problem.template as<problems::Sensing>();
        return s.op->residual_adjoint(x, s.y);
      }
      case ProblemKind::completion: {
        const auto& c = problem.template as<problems::Completion>();
        return (mask_project(*c.mask, x) - c.observed) / c.p;
      }
      default:
        throw ArgumentError("hankel problems are defined over the complex field");
    }
  }
}

/// Loss value at the matrix X.
template <typename Scalar>
double loss_value(const ProblemInstance<Scalar>& problem, const Matrix<Scalar>& x) {
  if (x.rows() != problem.n1 || x.cols() != problem.n2) throw DimensionError("loss_value: shape mismatch");
  detail::check_field<Scalar>(problem.kind());
  switch (problem.kind()) {
    case ProblemKind::factorization:
      return 0.5 * (x - problem.template as<problems::Factorization<Scalar>>().target).squaredNorm();
    case ProblemKind::general:
      return problem.template as<problems::General<Scalar>>().loss.value(x);
    case ProblemKind::rpca:
      throw ArgumentError("rpca loss depends on the sparse estimate");
    default:
      break;
  }
  if constexpr (is_complex_v<Scalar>) {
    if (problem.kind() != ProblemKind::hankel) throw ArgumentError("unsupported problem over complex field");
    const auto& h = problem.template as<problems::Hankel>();
    return 0.5 / h.p * (hankel_project<Complex>(x, h.subset) - h.observed).squaredNorm() +
           0.5 * (x - hankel_project<Complex>(x)).squaredNorm();
  } else {
    switch (problem.kind()) {
      case ProblemKind::sensing: {
        const auto& s = problem.template as<problems::Sensing>();
        return 0.5 * (s.op->apply(x) - s.y).squaredNorm();
      }
      case ProblemKind::completion: {
        const auto& c = problem.template as<problems::Completion>();
        return 0.5 / c.p * (mask_project(*c.mask, x) - c.observed).squaredNorm();
      }
      default:
        throw ArgumentError("hankel problems are defined over the complex field");
    }
  }
}

/// Factor gradients (grad f(L R^H) R, grad f(L R^H)^H L).
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> problem_gradients(const ProblemInstance<Scalar>& problem,
                                                            const FactorPair<Scalar>& f) {
  const Matrix<Scalar> g = loss_gradient(problem, f.product());
  return {g * f.right, g.adjoint() * f.left};
}

template <typename Scalar>
double problem_loss(const ProblemInstance<Scalar>& problem, const FactorPair<Scalar>& f) {
  return loss_value(problem, f.product());
}

}  // namespace lowrank
