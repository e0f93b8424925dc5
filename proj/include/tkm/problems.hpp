#pragma once

// Builders for the two function-space experiments and a small family of
// finite-dimensional problems with closed-form solutions, together with
// oracles that compute the solutions independently of the iteration drivers.
//
// Reconstruction: min_u  lambda/2 ||Ku - b||^2 + 1/2 ||u||^2 on L^2(0, 1),
// K the Volterra operator, run either as a pure gradient method (f = 0) or
// as a proximal-gradient method (f = 1/2 ||.||^2).
//
// Split feasibility: find x in C with Lx in Q on L^2(0, 2pi), written as
// min_x  delta_C(x) + 1/2 ||Lx - P_Q(Lx)||^2.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tkm/error.hpp"
#include "tkm/hilbert.hpp"
#include "tkm/operators.hpp"

namespace tkm {

struct OracleSolution {
  Element minimizer;
  double residual;
  std::string method;
};

// ---------------------------------------------------------------------------
// Reconstruction

enum class ReconstructionMode { full_gradient, prox_gradient };

inline const char* to_string(ReconstructionMode m) {
  return m == ReconstructionMode::full_gradient ? "full-gradient" : "prox-gradient";
}

struct ReconstructionProblem {
  double weight = 1.0;
  std::string data = "x";
  std::size_t grid_n = kDefaultGridNodes;
  ReconstructionMode mode = ReconstructionMode::prox_gradient;
};

struct ReconstructionSetup {
  SpacePtr space;
  Element data;
  double weight;
  Resolvent<Element> prox;
  Operator<Element> grad;
  // lambda/2 ||Ku - b||^2 + 1/2 ||u||^2
  std::function<double(const Element&)> objective;
  // The part handled by the gradient step.
  std::function<double(const Element&)> smooth_objective;

  double cocoercivity() const { return grad.cocoercivity(); }
};

inline SpacePtr unit_interval_space(std::size_t n) { return Space::l2(QuadratureGrid::midpoint(0.0, 1.0, n)); }

inline SpacePtr sfp_space(std::size_t n) {
  return Space::l2(QuadratureGrid::midpoint(0.0, 2.0 * std::numbers::pi, n));
}

inline double reconstruction_objective(const Element& u, double weight, const Element& b) {
  const double fit = norm(combine(1.0, volterra_apply(u), -1.0, b));
  const double size = norm(u);
  return 0.5 * weight * fit * fit + 0.5 * size * size;
}

// Cocoercivity constants come from ||K||^2 <= 1/2 (Baillon-Haddad):
// full gradient 1/(lambda/2 + 1), data term 2/lambda.
inline ReconstructionSetup build_reconstruction(const ReconstructionProblem& p, SpacePtr space = nullptr) {
  if (!(p.weight > 0.0)) throw DomainError("reconstruction weight must be positive");
  if (!space) space = unit_interval_space(p.grid_n);
  if (space->kind() != Space::Kind::l2 || !space->grid()->spans(0.0, 1.0))
    throw DomainError("reconstruction lives on L2(0, 1)");
  Element b = sample_catalog_function(p.data, space);
  const double w = p.weight;
  auto objective = [w, b](const Element& u) { return reconstruction_objective(u, w, b); };
  if (p.mode == ReconstructionMode::full_gradient) {
    return ReconstructionSetup{
        space,
        b,
        w,
        identity_resolvent<Element>(),
        Operator<Element>{[w, b](const Element& u) { return gradient_reconstruction_full(u, w, b); },
                          Regularity::cocoercive(1.0 / (w / 2.0 + 1.0)), "reconstruction-full-gradient"},
        objective,
        objective};
  }
  return ReconstructionSetup{
      space,
      b,
      w,
      scaled_squared_norm_prox(),
      Operator<Element>{[w, b](const Element& u) { return gradient_reconstruction_data(u, w, b); },
                        Regularity::cocoercive(2.0 / w), "reconstruction-data-gradient"},
      objective,
      [w, b](const Element& u) {
        const double fit = norm(combine(1.0, volterra_apply(u), -1.0, b));
        return 0.5 * w * fit * fit;
      }};
}

// Dense solve of the normal equations (Id + lambda K*K) u = lambda K*b.
// The system matrix is assembled column by column from the matrix-free
// operators and factored once, so several data functions can share it.
class ReconstructionOracle {
 public:
  ReconstructionOracle(SpacePtr space, double weight) : space_(std::move(space)), weight_(weight) {
    if (!(weight_ > 0.0)) throw DomainError("reconstruction weight must be positive");
    if (space_->kind() != Space::Kind::l2 || !space_->grid()->spans(0.0, 1.0))
      throw DomainError("reconstruction lives on L2(0, 1)");
    const std::size_t n = space_->dim();
    const auto w = space_->grid()->weights();
    // W (Id + lambda K*K) is symmetric positive definite because the operator
    // is self-adjoint in the weighted inner product.
    Eigen::MatrixXd system(n, n);
    std::vector<double> unit(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      unit[j] = 1.0;
      const Element e(space_, unit);
      const Element col = apply_normal_operator(e);
      for (std::size_t i = 0; i < n; ++i) system(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[i] * col[i];
      unit[j] = 0.0;
    }
    factor_.compute(system);
    if (factor_.info() != Eigen::Success) throw Error("reconstruction oracle: Cholesky factorization failed");
  }

  Element apply_normal_operator(const Element& u) const {
    return combine(1.0, u, weight_, volterra_adjoint_apply(volterra_apply(u)));
  }

  OracleSolution solve(const Element& b) const {
    if (!b.same_space(Element::zero(space_))) throw SpaceMismatch("reconstruction oracle: data lives elsewhere");
    const std::size_t n = space_->dim();
    const auto w = space_->grid()->weights();
    const Element rhs = scale(weight_, volterra_adjoint_apply(b));
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) r(static_cast<Eigen::Index>(i)) = w[i] * rhs[i];
    const Eigen::VectorXd u = factor_.solve(r);
    Element minimizer(space_, std::vector<double>(u.data(), u.data() + u.size()));
    const double residual = norm(combine(1.0, apply_normal_operator(minimizer), -1.0, rhs));
    if (!(residual <= 1e-10 * (1.0 + norm(b))))
      throw Error("reconstruction oracle: normal-equation residual " + std::to_string(residual) + " too large");
    return {std::move(minimizer), residual, "dense-cholesky"};
  }

  const SpacePtr& space() const { return space_; }

 private:
  SpacePtr space_;
  double weight_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

inline OracleSolution oracle_reconstruction(const ReconstructionProblem& p, SpacePtr space = nullptr) {
  if (!space) space = unit_interval_space(p.grid_n);
  const ReconstructionOracle oracle(space, p.weight);
  return oracle.solve(sample_catalog_function(p.data, space));
}

// ---------------------------------------------------------------------------
// Split feasibility

struct SfpProblem {
  std::size_t grid_n = kDefaultGridNodes;
  std::string start = "t";
};

// 1/2 ||P_C x - x||^2 + 1/2 ||P_Q(Lx) - Lx||^2
inline double sfp_feasibility_residual(const Element& x) {
  const double dc = norm(combine(1.0, project_integral_constraint(x), -1.0, x));
  const Element lx = sfp_L_apply(x);
  const double dq = norm(combine(1.0, project_ray(lx), -1.0, lx));
  return 0.5 * dc * dc + 0.5 * dq * dq;
}

// g(x) = 1/2 ||Lx - P_Q(Lx)||^2
inline double sfp_objective(const Element& x) {
  const Element lx = sfp_L_apply(x);
  const double dq = norm(combine(1.0, lx, -1.0, project_ray(lx)));
  return 0.5 * dq * dq;
}

struct SfpSetup {
  SpacePtr space;
  Element start;
  Resolvent<Element> projection;
  // grad g, 1-cocoercive from ||L||^2 <= 1.
  Operator<Element> grad;
  std::function<double(const Element&)> feasibility;

  double cocoercivity() const { return grad.cocoercivity(); }
};

inline SfpSetup build_sfp(const SfpProblem& p, SpacePtr space = nullptr) {
  if (!space) space = sfp_space(p.grid_n);
  if (space->kind() != Space::Kind::l2 || !space->grid()->spans(0.0, 2.0 * std::numbers::pi))
    throw DomainError("split feasibility lives on L2(0, 2pi)");
  return SfpSetup{space, sample_catalog_function(p.start, space), integral_constraint_resolvent(),
                  Operator<Element>{gradient_sfp, Regularity::cocoercive(1.0), "sfp-gradient"},
                  sfp_feasibility_residual};
}

// 0 lies in C and L0 = 0 lies in Q, so 0 is the minimum-norm solution.
inline OracleSolution oracle_sfp_min_norm(const SpacePtr& space) {
  Element zero = Element::zero(space);
  const double residual = sfp_feasibility_residual(zero);
  return {std::move(zero), residual, "closed-form"};
}

// ---------------------------------------------------------------------------
// Finite-dimensional problems with known minimum-norm solutions

enum class FiniteDimKind { identity, constant, hyperplane, box };

inline const char* to_string(FiniteDimKind k) {
  switch (k) {
    case FiniteDimKind::identity: return "identity";
    case FiniteDimKind::constant: return "constant";
    case FiniteDimKind::hyperplane: return "hyperplane";
    case FiniteDimKind::box: return "box";
  }
  return "?";
}

struct FiniteDimProblem {
  FiniteDimKind kind = FiniteDimKind::identity;
  std::vector<double> start;
  // constant: the map's value; box: B = Id - target.
  std::vector<double> target;
  // hyperplane {<normal, x> = offset}
  std::vector<double> normal;
  double offset = 0.0;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct FiniteDimSetup {
  SpacePtr space;
  Element start;
  // identity / constant / hyperplane run the KM driver on this family.
  std::optional<OperatorFamily<Element>> family;
  // box runs the forward-backward driver.
  std::optional<Resolvent<Element>> resolvent;
  std::optional<Operator<Element>> forward;
  Element solution;
};

inline FiniteDimSetup build_finite_dim(const FiniteDimProblem& p) {
  if (p.start.empty()) throw DomainError("finite-dimensional problem needs a start point");
  const auto space = Space::euclidean(p.start.size());
  const auto vec = [&](const std::vector<double>& v, const char* what) {
    if (v.size() != p.start.size()) throw DomainError(std::string(what) + " must match the start dimension");
    return Element(space, v);
  };
  Element start(space, p.start);
  switch (p.kind) {
    case FiniteDimKind::identity:
      return {space, start, OperatorFamily<Element>::constant(identity_operator<Element>()), std::nullopt,
              std::nullopt, Element::zero(space)};
    case FiniteDimKind::constant: {
      Element c = vec(p.target, "target");
      return {space, start, OperatorFamily<Element>::constant(constant_operator(c)), std::nullopt, std::nullopt, c};
    }
    case FiniteDimKind::hyperplane: {
      Element a = vec(p.normal, "normal");
      const double nn = inner(a, a);
      Element solution = scale(p.offset / nn, a);
      return {space, start, OperatorFamily<Element>::constant(hyperplane_projection(a, p.offset)), std::nullopt,
              std::nullopt, solution};
    }
    case FiniteDimKind::box: {
      const Element target = p.target.empty() ? Element::zero(space) : vec(p.target, "target");
      vec(p.lower, "lower");
      vec(p.upper, "upper");
      auto projection = box_projection(p.lower, p.upper);
      // zer(N_box + Id - target) = {P_box(target)}
      Element solution = projection(target);
      return {space,
              start,
              std::nullopt,
              projection_resolvent<Element>(projection.apply, "normal-cone-box"),
              shifted_identity(target),
              solution};
    }
  }
  throw DomainError("unknown finite-dimensional problem kind");
}

}  // namespace tkm
