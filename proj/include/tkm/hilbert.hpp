#pragma once

// Real Hilbert spaces used by the iteration drivers: coordinate spaces R^d
// and L^2(a, b) discretized by a positive-weight quadrature rule. Elements
// carry a handle to their space and refuse to mix with elements of another
// space.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tkm/error.hpp"

namespace tkm {

inline constexpr std::size_t kDefaultGridNodes = 4096;

class QuadratureGrid {
 public:
  // Composite midpoint rule: t_i = a + (i + 1/2) h, w_i = h, h = (b - a) / n.
  // Nodes stay strictly inside (a, b), so log and sqrt can be sampled on
  // grids starting at 0.
  static std::shared_ptr<const QuadratureGrid> midpoint(double a, double b,
                                                        std::size_t n = kDefaultGridNodes) {
    if (!(a < b)) throw DomainError("quadrature grid needs a < b");
    if (n < 2) throw DomainError("quadrature grid needs at least 2 nodes");
    const double h = (b - a) / static_cast<double>(n);
    std::vector<double> nodes(n), weights(n, h);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = a + (static_cast<double>(i) + 0.5) * h;
    return std::make_shared<const QuadratureGrid>(a, b, std::move(nodes), std::move(weights));
  }

  QuadratureGrid(double a, double b, std::vector<double> nodes, std::vector<double> weights)
      : a_(a), b_(b), nodes_(std::move(nodes)), weights_(std::move(weights)) {
    if (!(a_ < b_)) throw DomainError("quadrature grid needs a < b");
    if (nodes_.size() < 2 || nodes_.size() != weights_.size())
      throw DomainError("quadrature grid needs >= 2 nodes and one weight per node");
    double total = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!(weights_[i] > 0.0)) throw DomainError("quadrature weights must be positive");
      if (!(nodes_[i] > a_ && nodes_[i] < b_)) throw DomainError("quadrature nodes must lie in (a, b)");
      if (i > 0 && !(nodes_[i] > nodes_[i - 1]))
        throw DomainError("quadrature nodes must be strictly increasing");
      total += weights_[i];
    }
    if (std::abs(total - (b_ - a_)) > 1e-12 * (b_ - a_))
      throw DomainError("quadrature weights must sum to b - a");
  }

  double lower() const { return a_; }
  double upper() const { return b_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  bool spans(double a, double b) const {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a_ - a) <= 1e-12 * scale && std::abs(b_ - b) <= 1e-12 * scale;
  }

 private:
  double a_;
  double b_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const QuadratureGrid>;

class Space {
 public:
  enum class Kind { euclidean, l2 };

  static std::shared_ptr<const Space> euclidean(std::size_t dim) {
    if (dim == 0) throw DomainError("euclidean space needs dimension >= 1");
    return std::shared_ptr<const Space>(new Space(Kind::euclidean, dim, nullptr));
  }
  static std::shared_ptr<const Space> l2(GridPtr grid) {
    if (!grid) throw DomainError("L2 space needs a grid");
    const auto n = grid->size();
    return std::shared_ptr<const Space>(new Space(Kind::l2, n, std::move(grid)));
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  // Null for euclidean spaces.
  const GridPtr& grid() const { return grid_; }

  friend bool operator==(const Space& x, const Space& y) {
    return x.kind_ == y.kind_ && x.dim_ == y.dim_ && x.grid_ == y.grid_;
  }

 private:
  Space(Kind kind, std::size_t dim, GridPtr grid) : kind_(kind), dim_(dim), grid_(std::move(grid)) {}

  Kind kind_;
  std::size_t dim_;
  GridPtr grid_;
};

using SpacePtr = std::shared_ptr<const Space>;

class Element {
 public:
  Element(SpacePtr space, std::vector<double> values) : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw DomainError("element needs a space");
    if (values_.size() != space_->dim()) throw DomainError("element length does not match space dimension");
    for (double v : values_)
      if (!std::isfinite(v)) throw NonFiniteValue("element entries must be finite");
  }

  static Element zero(const SpacePtr& space) { return Element(space, std::vector<double>(space->dim(), 0.0)); }

  static Element sampled(const SpacePtr& space, const std::function<double(double)>& f) {
    if (space->kind() != Space::Kind::l2) throw DomainError("sampling needs an L2 space");
    const auto nodes = space->grid()->nodes();
    std::vector<double> values(nodes.size());
    std::transform(nodes.begin(), nodes.end(), values.begin(), f);
    return Element(space, std::move(values));
  }

  const SpacePtr& space() const { return space_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

  bool same_space(const Element& other) const {
    return space_ == other.space_ || *space_ == *other.space_;
  }

 private:
  SpacePtr space_;
  std::vector<double> values_;
};

namespace detail {

inline void require_same_space(const Element& x, const Element& y, const char* what) {
  if (!x.same_space(y)) throw SpaceMismatch(std::string(what) + ": elements belong to different spaces");
}

}  // namespace detail

// <x, y>; the quadrature-weighted sum on L2 spaces.
inline double inner(const Element& x, const Element& y) {
  detail::require_same_space(x, y, "inner");
  const auto xv = x.values();
  const auto yv = y.values();
  double s = 0.0;
  if (x.space()->kind() == Space::Kind::l2) {
    const auto w = x.space()->grid()->weights();
    for (std::size_t i = 0; i < xv.size(); ++i) s += w[i] * xv[i] * yv[i];
  } else {
    for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i] * yv[i];
  }
  return s;
}

inline double norm(const Element& x) { return std::sqrt(std::max(0.0, inner(x, x))); }

inline Element combine(double a, const Element& x, double b, const Element& y) {
  detail::require_same_space(x, y, "combine");
  const auto xv = x.values();
  const auto yv = y.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = a * xv[i] + b * yv[i];
  return Element(x.space(), std::move(out));
}

inline Element scale(double a, const Element& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = a * xv[i];
  return Element(x.space(), std::move(out));
}

inline Element operator+(const Element& x, const Element& y) { return combine(1.0, x, 1.0, y); }
inline Element operator-(const Element& x, const Element& y) { return combine(1.0, x, -1.0, y); }
inline Element operator*(double a, const Element& x) { return scale(a, x); }

inline double distance(const Element& x, const Element& y) { return norm(x - y); }

// Integral of an L2 element over its interval.
inline double integrate(const Element& x) {
  if (x.space()->kind() != Space::Kind::l2) throw DomainError("integrate needs an L2 element");
  const auto w = x.space()->grid()->weights();
  const auto xv = x.values();
  double s = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += w[i] * xv[i];
  return s;
}

// Interface the iteration drivers need from a vector type.
template <class V>
concept HilbertVector = std::copy_constructible<V> && requires(const V& x, const V& y, double a) {
  { inner(x, y) } -> std::convertible_to<double>;
  { norm(x) } -> std::convertible_to<double>;
  { combine(a, x, a, y) } -> std::convertible_to<V>;
};

static_assert(HilbertVector<Element>);

// Named functions used as starting points and data in the experiments.
// Both the t- and x-spellings are accepted since the tables use both.
inline const std::map<std::string, std::function<double(double)>>& function_catalog() {
  static const std::map<std::string, std::function<double(double)>> catalog = [] {
    std::map<std::string, std::function<double(double)>> c;
    const auto id = [](double t) { return t; };
    const auto sq = [](double t) { return t * t; };
    const auto cube = [](double t) { return t * t * t; };
    const auto sine = [](double t) { return std::sin(t); };
    const auto cosine = [](double t) { return std::cos(t); };
    const auto expo = [](double t) { return std::exp(t); };
    const auto loga = [](double t) { return std::log(t); };
    const auto root = [](double t) { return std::sqrt(t); };
    for (const char* n : {"t", "x"}) c[n] = id;
    for (const char* n : {"t^2", "x^2", "t2", "x2"}) c[n] = sq;
    for (const char* n : {"t^3", "x^3", "t3", "x3"}) c[n] = cube;
    for (const char* n : {"sin", "sin(t)", "sin(x)"}) c[n] = sine;
    for (const char* n : {"cos", "cos(t)", "cos(x)"}) c[n] = cosine;
    for (const char* n : {"exp", "exp(t)", "exp(x)"}) c[n] = expo;
    for (const char* n : {"log", "log(t)", "log(x)"}) c[n] = loga;
    for (const char* n : {"sqrt", "sqrt(t)", "sqrt(x)"}) c[n] = root;
    for (const char* n : {"x^2/10", "t^2/10"}) c[n] = [](double t) { return t * t / 10.0; };
    for (const char* n : {"2^x/16", "2^t/16"}) c[n] = [](double t) { return std::exp2(t) / 16.0; };
    for (const char* n : {"0", "zero"}) c[n] = [](double) { return 0.0; };
    for (const char* n : {"1", "one"}) c[n] = [](double) { return 1.0; };
    return c;
  }();
  return catalog;
}

inline bool is_catalog_function(const std::string& name) { return function_catalog().contains(name); }

inline Element sample_catalog_function(const std::string& name, const SpacePtr& space) {
  const auto& catalog = function_catalog();
  const auto it = catalog.find(name);
  if (it == catalog.end()) throw DomainError("unknown catalog function '" + name + "'");
  return Element::sampled(space, it->second);
}

}  // namespace tkm
