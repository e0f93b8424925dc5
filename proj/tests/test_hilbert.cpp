#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tkm/hilbert.hpp"

using namespace tkm;

TEST(QuadratureGrid, MidpointNodesAndWeights) {
  const auto g = QuadratureGrid::midpoint(0.0, 1.0, 4);
  ASSERT_EQ(g->size(), 4u);
  EXPECT_DOUBLE_EQ(g->nodes()[0], 0.125);
  EXPECT_DOUBLE_EQ(g->nodes()[3], 0.875);
  for (double w : g->weights()) EXPECT_DOUBLE_EQ(w, 0.25);
  EXPECT_TRUE(g->spans(0.0, 1.0));
  EXPECT_FALSE(g->spans(0.0, 2.0));
}

TEST(QuadratureGrid, RejectsBadInput) {
  EXPECT_THROW(QuadratureGrid::midpoint(1.0, 0.0, 8), DomainError);
  EXPECT_THROW(QuadratureGrid::midpoint(0.0, 1.0, 1), DomainError);
  EXPECT_THROW(QuadratureGrid(0.0, 1.0, {0.2, 0.1}, {0.5, 0.5}), DomainError);
  EXPECT_THROW(QuadratureGrid(0.0, 1.0, {0.2, 0.7}, {0.5, 0.4}), DomainError);
  EXPECT_THROW(QuadratureGrid(0.0, 1.0, {0.0, 0.7}, {0.5, 0.5}), DomainError);
}

TEST(QuadratureGrid, IntegratesSmoothFunctionsAccurately) {
  const auto space = Space::l2(QuadratureGrid::midpoint(0.0, std::numbers::pi, 4096));
  EXPECT_NEAR(integrate(Element::sampled(space, [](double t) { return std::sin(t); })), 2.0, 1e-7);
  const auto unit = Space::l2(QuadratureGrid::midpoint(0.0, 1.0, 4096));
  const Element t = sample_catalog_function("t", unit);
  EXPECT_NEAR(inner(t, t), 1.0 / 3.0, 1e-7);
}

TEST(Element, ValidatesLengthAndFiniteness) {
  const auto s = Space::euclidean(2);
  EXPECT_THROW(Element(s, {1.0}), DomainError);
  EXPECT_THROW(Element(s, {1.0, NAN}), NonFiniteValue);
  EXPECT_THROW(Element(s, {INFINITY, 0.0}), NonFiniteValue);
  EXPECT_NO_THROW(Element(s, {1.0, 2.0}));
}

TEST(Element, MixingSpacesThrows) {
  const Element a(Space::euclidean(2), {1.0, 0.0});
  const Element b(Space::euclidean(3), {1.0, 0.0, 0.0});
  EXPECT_THROW(inner(a, b), SpaceMismatch);
  EXPECT_THROW(a + b, SpaceMismatch);
  const auto g = QuadratureGrid::midpoint(0.0, 1.0, 2);
  const Element c(Space::l2(g), {1.0, 0.0});
  EXPECT_THROW(inner(a, c), SpaceMismatch);
  // Two spaces over the same grid are interchangeable.
  const Element d(Space::l2(g), {0.0, 1.0});
  EXPECT_NO_THROW(inner(c, d));
}

TEST(Element, EuclideanArithmetic) {
  const auto s = Space::euclidean(2);
  const Element x(s, {3.0, 4.0});
  const Element y(s, {1.0, -1.0});
  EXPECT_DOUBLE_EQ(norm(x), 5.0);
  EXPECT_DOUBLE_EQ(inner(x, y), -1.0);
  const Element z = combine(2.0, x, -1.0, y);
  EXPECT_DOUBLE_EQ(z[0], 5.0);
  EXPECT_DOUBLE_EQ(z[1], 9.0);
  EXPECT_DOUBLE_EQ(distance(x, x), 0.0);
  EXPECT_THROW(integrate(x), DomainError);
}

TEST(Element, InnerProductAxioms) {
  std::mt19937_64 rng(7);
  const auto space = Space::l2(QuadratureGrid::midpoint(0.0, 2.0, 257));
  for (int k = 0; k < 100; ++k) {
    const Element x = test_support::random_element(space, rng);
    const Element y = test_support::random_element(space, rng);
    const Element z = test_support::random_element(space, rng);
    EXPECT_NEAR(inner(x, y), inner(y, x), 1e-12 * (1 + norm(x) * norm(y)));
    EXPECT_NEAR(inner(combine(2.0, x, -3.0, y), z), 2.0 * inner(x, z) - 3.0 * inner(y, z),
                1e-10 * (1 + norm(x) + norm(y)) * (1 + norm(z)));
    EXPECT_LE(std::abs(inner(x, y)), norm(x) * norm(y) * (1 + 1e-12));
    EXPECT_LE(norm(x + y), norm(x) + norm(y) + 1e-12);
  }
}

TEST(Catalog, KnowsPaperFunctions) {
  for (const char* name : {"t", "t^2", "t^3", "sin", "cos", "exp", "log", "sqrt", "x", "x^2", "sin(x)", "x^2/10",
                           "2^x/16", "0"})
    EXPECT_TRUE(is_catalog_function(name)) << name;
  EXPECT_FALSE(is_catalog_function("tan"));
  const auto space = Space::l2(QuadratureGrid::midpoint(0.0, 1.0, 16));
  EXPECT_THROW(sample_catalog_function("tan", space), DomainError);
  // log is sampled at interior nodes only, so it stays finite.
  EXPECT_NO_THROW(sample_catalog_function("log", space));
  EXPECT_THROW(sample_catalog_function("t", Space::euclidean(3)), DomainError);
}
