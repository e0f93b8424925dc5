#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "tkm/hilbert.hpp"

namespace tkm::test_support {

// Random smooth-ish element: low-order trigonometric combination plus noise.
inline Element random_element(const SpacePtr& space, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(space->dim());
  if (space->kind() == Space::Kind::l2) {
    const auto nodes = space->grid()->nodes();
    const double a = normal(rng), b = normal(rng), c = normal(rng), d = normal(rng);
    const double len = space->grid()->upper() - space->grid()->lower();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double s = (nodes[i] - space->grid()->lower()) / len;
      v[i] = amplitude * (a + b * s + c * std::sin(6.283185307179586 * s) + d * std::cos(12.566370614359172 * s) +
                          0.3 * normal(rng));
    }
  } else {
    for (auto& x : v) x = amplitude * normal(rng);
  }
  return Element(space, std::move(v));
}

inline Element random_unit(const SpacePtr& space, std::mt19937_64& rng) {
  const Element e = random_element(space, rng);
  return scale(1.0 / norm(e), e);
}

}  // namespace tkm::test_support
