#pragma once

// Operator handles and the catalog of concrete operators: projections,
// proximal maps, the Volterra integral operator and its adjoint, the rank-one
// operator of the split feasibility experiment, gradient maps, and the
// forward-backward composition J_{gA}(Id - gB).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tkm/error.hpp"
#include "tkm/hilbert.hpp"

namespace tkm {

struct Regularity {
  enum class Kind { nonexpansive, firmly_nonexpansive, averaged, cocoercive, linear };

  Kind kind = Kind::nonexpansive;
  // alpha for averaged, beta for cocoercive, operator-norm bound for linear.
  double parameter = 0.0;

  static Regularity nonexpansive() { return {Kind::nonexpansive, 1.0}; }
  static Regularity firmly_nonexpansive() { return {Kind::firmly_nonexpansive, 0.5}; }
  static Regularity averaged(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("averagedness constant must lie in (0, 1)");
    return {Kind::averaged, alpha};
  }
  static Regularity cocoercive(double beta) {
    if (!(beta > 0.0)) throw DomainError("cocoercivity constant must be positive");
    return {Kind::cocoercive, beta};
  }
  static Regularity linear(double norm_bound) { return {Kind::linear, norm_bound}; }
};

template <class V>
struct Operator {
  std::function<V(const V&)> apply;
  Regularity regularity;
  std::string label;

  V operator()(const V& x) const { return apply(x); }

  double cocoercivity() const {
    if (regularity.kind != Regularity::Kind::cocoercive)
      throw DomainError("operator '" + label + "' is not declared cocoercive");
    return regularity.parameter;
  }
};

// J_{gA} for a maximally monotone A, evaluated at (point, step g > 0).
template <class V>
struct Resolvent {
  std::function<V(const V&, double)> apply;
  std::string label;

  V operator()(const V& x, double step) const {
    if (!(step > 0.0)) throw DomainError("resolvent step must be positive");
    return apply(x, step);
  }
};

// T_n, indexed by iteration number.
template <class V>
struct OperatorFamily {
  std::function<V(std::size_t, const V&)> apply;
  Regularity regularity;
  bool index_dependent = true;
  std::string label;

  V operator()(std::size_t n, const V& x) const { return apply(n, x); }

  static OperatorFamily constant(Operator<V> op) {
    const auto label = op.label;
    const auto reg = op.regularity;
    return {[op = std::move(op)](std::size_t, const V& x) { return op(x); }, reg, false, label};
  }
};

// ---------------------------------------------------------------------------
// Generic operators

template <HilbertVector V>
Operator<V> identity_operator() {
  return {[](const V& x) { return x; }, Regularity::firmly_nonexpansive(), "identity"};
}

template <HilbertVector V>
Operator<V> constant_operator(V c) {
  return {[c = std::move(c)](const V&) { return c; }, Regularity::firmly_nonexpansive(), "constant"};
}

template <HilbertVector V>
Operator<V> zero_operator(V zero) {
  return {[z = std::move(zero)](const V&) { return z; }, Regularity::cocoercive(1.0), "zero"};
}

// x - p, the gradient of 1/2 ||x - p||^2; 1-cocoercive.
template <HilbertVector V>
Operator<V> shifted_identity(V p) {
  return {[p = std::move(p)](const V& x) { return combine(1.0, x, -1.0, p); }, Regularity::cocoercive(1.0),
          "identity-minus-point"};
}

// Resolvent of A = 0.
template <HilbertVector V>
Resolvent<V> identity_resolvent() {
  return {[](const V& x, double) { return x; }, "zero-operator"};
}

// Resolvent of a normal cone: the projection, independent of the step.
template <HilbertVector V>
Resolvent<V> projection_resolvent(std::function<V(const V&)> projection, std::string label) {
  return {[p = std::move(projection)](const V& x, double) { return p(x); }, std::move(label)};
}

template <HilbertVector V>
double fixed_point_residual(const std::function<V(const V&)>& op, const V& x) {
  return norm(combine(1.0, x, -1.0, op(x)));
}

template <HilbertVector V>
double fixed_point_residual(const Operator<V>& op, const V& x) {
  return norm(combine(1.0, x, -1.0, op(x)));
}

template <HilbertVector V>
double fixed_point_residual(const OperatorFamily<V>& family, std::size_t n, const V& x) {
  return norm(combine(1.0, x, -1.0, family(n, x)));
}

template <class V>
struct ForwardBackwardValue {
  V value;
  // False when step >= 2 beta, where averagedness is no longer guaranteed.
  bool step_admissible;
};

// J_{gA}(x - g Bx).
template <HilbertVector V>
ForwardBackwardValue<V> forward_backward_map(const V& x, double step, const Resolvent<V>& resolvent,
                                             const Operator<V>& b) {
  if (!(step > 0.0)) throw DomainError("forward-backward step must be positive");
  const double beta = b.cocoercivity();
  const V forward = combine(1.0, x, -step, b(x));
  return {resolvent(forward, step), step < 2.0 * beta};
}

struct StepSizeInequality {
  double lhs;
  double rhs;
  double slack() const { return rhs - lhs; }
};

// ||J_{gn A}(x - gn Bx) - J_{gm A}(x - gm Bx)|| against
// |1 - gm/gn| ||J_{gn A}(x - gn Bx) - x||.
template <HilbertVector V>
StepSizeInequality resolvent_stepsize_inequality(const V& x, double step_n, double step_m,
                                                 const Resolvent<V>& resolvent, const Operator<V>& b) {
  if (!(step_n > 0.0) || !(step_m > 0.0)) throw DomainError("step sizes must be positive");
  const V bx = b(x);
  const V jn = resolvent(combine(1.0, x, -step_n, bx), step_n);
  const V jm = resolvent(combine(1.0, x, -step_m, bx), step_m);
  return {norm(combine(1.0, jn, -1.0, jm)),
          std::abs(1.0 - step_m / step_n) * norm(combine(1.0, jn, -1.0, x))};
}

// ---------------------------------------------------------------------------
// Finite-dimensional catalog

// Projection onto the hyperplane {x : <a, x> = c}.
inline Operator<Element> hyperplane_projection(Element normal, double offset) {
  const double nn = inner(normal, normal);
  if (!(nn > 0.0)) throw DomainError("hyperplane normal must be nonzero");
  return {[a = std::move(normal), offset, nn](const Element& x) {
            return combine(1.0, x, (offset - inner(a, x)) / nn, a);
          },
          Regularity::firmly_nonexpansive(), "hyperplane-projection"};
}

// Projection onto the box [lower, upper] in coordinates.
inline Operator<Element> box_projection(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size()) throw DomainError("box bounds must have equal length");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (!(lower[i] <= upper[i])) throw DomainError("box needs lower <= upper");
  return {[lo = std::move(lower), hi = std::move(upper)](const Element& x) {
            if (x.size() != lo.size()) throw SpaceMismatch("box projection: dimension mismatch");
            std::vector<double> out(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], lo[i], hi[i]);
            return Element(x.space(), std::move(out));
          },
          Regularity::firmly_nonexpansive(), "box-projection"};
}

// ---------------------------------------------------------------------------
// Function-space catalog

namespace detail {

inline const QuadratureGrid& require_interval(const Element& x, double a, double b, const char* what) {
  if (x.space()->kind() != Space::Kind::l2 || !x.space()->grid()->spans(a, b))
    throw DomainError(std::string(what) + ": element must live on L2(" + std::to_string(a) + ", " +
                      std::to_string(b) + ")");
  return *x.space()->grid();
}

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Below this magnitude the ray-projection coefficient takes the zero branch.
inline constexpr double kRayBranchTolerance = 1e-14;

}  // namespace detail

// (Ku)(x) = int_0^x u(y) dy. At node i the cell containing the node
// contributes half its weight, which makes the discrete adjoint exact.
inline Element volterra_apply(const Element& u) {
  const auto& grid = detail::require_interval(u, 0.0, 1.0, "volterra_apply");
  const auto w = grid.weights();
  const auto uv = u.values();
  std::vector<double> out(uv.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < uv.size(); ++i) {
    const double cell = w[i] * uv[i];
    out[i] = acc + 0.5 * cell;
    acc += cell;
  }
  return Element(u.space(), std::move(out));
}

// (K*u)(x) = int_x^1 u(y) dy.
inline Element volterra_adjoint_apply(const Element& u) {
  const auto& grid = detail::require_interval(u, 0.0, 1.0, "volterra_adjoint_apply");
  const auto w = grid.weights();
  const auto uv = u.values();
  std::vector<double> out(uv.size());
  double acc = 0.0;
  for (std::size_t k = uv.size(); k-- > 0;) {
    const double cell = w[k] * uv[k];
    out[k] = acc + 0.5 * cell;
    acc += cell;
  }
  return Element(u.space(), std::move(out));
}

// (Lx)(t) = 3t / (8 pi^3) * int_0^{2pi} s x(s) ds. Self-adjoint, ||L|| <= 1.
inline Element sfp_L_apply(const Element& x) {
  const auto& grid = detail::require_interval(x, 0.0, detail::kTwoPi, "sfp_L_apply");
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const auto xv = x.values();
  double moment = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) moment += w[i] * nodes[i] * xv[i];
  const double c = 3.0 / (8.0 * std::pow(std::numbers::pi, 3)) * moment;
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = c * nodes[i];
  return Element(x.space(), std::move(out));
}

// Projection onto C = {x : int_0^{2pi} x <= 1}.
inline Element project_integral_constraint(const Element& x) {
  detail::require_interval(x, 0.0, detail::kTwoPi, "project_integral_constraint");
  const double total = integrate(x);
  if (!(total > 1.0)) return x;
  const double shift = (1.0 - total) / detail::kTwoPi;
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] + shift;
  return Element(x.space(), std::move(out));
}

// Projection onto the ray Q = R_+ v, v(t) = t^2. The coefficient uses the
// quadrature value of ||v||^2 (32 pi^5 / 5 in the continuum) so the map is an
// exact projection in the discrete inner product.
inline Element project_ray(const Element& y) {
  const auto& grid = detail::require_interval(y, 0.0, detail::kTwoPi, "project_ray");
  const auto nodes = grid.nodes();
  const auto w = grid.weights();
  const auto yv = y.values();
  double moment = 0.0;
  double vv = 0.0;
  for (std::size_t i = 0; i < yv.size(); ++i) {
    const double v = nodes[i] * nodes[i];
    moment += w[i] * v * yv[i];
    vv += w[i] * v * v;
  }
  std::vector<double> out(yv.size(), 0.0);
  if (moment > detail::kRayBranchTolerance) {
    const double c = moment / vv;
    for (std::size_t i = 0; i < yv.size(); ++i) out[i] = c * nodes[i] * nodes[i];
  }
  return Element(y.space(), std::move(out));
}

// prox of g * (1/2)||.||^2.
inline Element prox_scaled_squared_norm(const Element& u, double step) {
  if (!(step > 0.0)) throw DomainError("prox step must be positive");
  return scale(1.0 / (1.0 + step), u);
}

// lambda K*(Ku - b) + u
inline Element gradient_reconstruction_full(const Element& u, double weight, const Element& b) {
  if (!(weight > 0.0)) throw DomainError("regularization weight must be positive");
  const Element residual = combine(1.0, volterra_apply(u), -1.0, b);
  return combine(weight, volterra_adjoint_apply(residual), 1.0, u);
}

// lambda K*(Ku - b)
inline Element gradient_reconstruction_data(const Element& u, double weight, const Element& b) {
  if (!(weight > 0.0)) throw DomainError("regularization weight must be positive");
  const Element residual = combine(1.0, volterra_apply(u), -1.0, b);
  return scale(weight, volterra_adjoint_apply(residual));
}

// L*(Id - P_Q)(Lx) with L self-adjoint.
inline Element gradient_sfp(const Element& x) {
  const Element lx = sfp_L_apply(x);
  return sfp_L_apply(combine(1.0, lx, -1.0, project_ray(lx)));
}

// ---------------------------------------------------------------------------
// Handles for the catalog

inline Resolvent<Element> scaled_squared_norm_prox() {
  return {[](const Element& u, double step) { return prox_scaled_squared_norm(u, step); },
          "prox-half-squared-norm"};
}

inline Resolvent<Element> integral_constraint_resolvent() {
  return projection_resolvent<Element>(project_integral_constraint, "normal-cone-integral-constraint");
}

}  // namespace tkm
