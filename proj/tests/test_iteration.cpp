#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"
#include "tkm/iteration.hpp"
#include "tkm/problems.hpp"

using namespace tkm;

namespace {

Sequence paper_beta() { return Sequence::harmonic_approach(1.0, 1.0, 1.0, 0.25); }

StoppingRule step_rule(double eps, std::size_t max_it = 100000) {
  StoppingRule s;
  s.step_tolerance = eps;
  s.max_iterations = max_it;
  return s;
}

StoppingRule fixed_count(std::size_t m) {
  StoppingRule s;
  s.max_iterations = m;
  return s;
}

Element vec(std::vector<double> v) {
  const auto space = Space::euclidean(v.size());
  return Element(space, std::move(v));
}

}  // namespace

TEST(KmFamily, IdentityShrinksByBetaProduct) {
  const auto x0 = vec({2.0, -1.0});
  const auto id = OperatorFamily<Element>::constant(identity_operator<Element>());
  const auto beta = paper_beta();
  const auto r = km_tikhonov_family(id, beta, Sequence::constant(0.9), x0, fixed_count(50));
  double prod = 1.0;
  for (std::size_t n = 0; n < 50; ++n) prod *= beta(n);
  EXPECT_NEAR(r.final[0], 2.0 * prod, 1e-15);
  EXPECT_NEAR(r.final[1], -prod, 1e-15);
  EXPECT_EQ(r.trace.iterations(), 50u);
  EXPECT_EQ(r.trace.records.size(), 51u);
  EXPECT_EQ(r.trace.reason, Termination::max_iterations);
}

TEST(KmFamily, ConstantMapConvergesToValue) {
  const auto c = vec({0.3, -0.7, 1.1});
  const auto fam = OperatorFamily<Element>::constant(constant_operator(c));
  const auto r = km_tikhonov_family(fam, paper_beta(), Sequence::constant(0.9), vec({5.0, 5.0, 5.0}), step_rule(1e-8));
  EXPECT_LT(distance(r.final, c), 1e-3);
  EXPECT_TRUE(converged(r.trace.reason));
}

TEST(KmFamily, LineProjectionConvergesToMinimumNorm) {
  const auto fam = OperatorFamily<Element>::constant(hyperplane_projection(vec({1.0, 0.0}), 1.0));
  const auto r = km_tikhonov_family(fam, paper_beta(), Sequence::constant(0.9), vec({3.0, -2.0}), step_rule(1e-7));
  EXPECT_LT(distance(r.final, vec({1.0, 0.0})), 1e-3);
}

TEST(KmFamily, IndexDependentFamily) {
  // T_n = projection onto {x1 = 1 + 1/(n+1)}; the fixed-point sets shrink to
  // the line x1 = 1.
  const OperatorFamily<Element> fam{[](std::size_t n, const Element& x) {
                                      return hyperplane_projection(vec({1.0, 0.0}), 1.0 + 1.0 / (n + 1.0))(x);
                                    },
                                    Regularity::firmly_nonexpansive(), true, "moving-line"};
  const auto r = km_tikhonov_family(fam, paper_beta(), Sequence::constant(0.9), vec({3.0, 4.0}), step_rule(1e-8));
  EXPECT_LT(distance(r.final, vec({1.0, 0.0})), 1e-3);
}

TEST(KmFamily, RejectsBadSchedulesUnlessForced) {
  const auto id = OperatorFamily<Element>::constant(identity_operator<Element>());
  try {
    km_tikhonov_family(id, Sequence::constant(0.5), Sequence::constant(0.9), vec({1.0}), fixed_count(5));
    FAIL() << "expected ScheduleError";
  } catch (const ScheduleError& e) {
    EXPECT_NE(std::string(e.what()).find("(i)"), std::string::npos);
  }
  RunOptions<Element> opts;
  opts.force = true;
  const auto r = km_tikhonov_family(id, Sequence::constant(0.5), Sequence::constant(0.9), vec({1.0}), fixed_count(5), opts);
  ASSERT_EQ(r.trace.warnings.size(), 1u);
  EXPECT_NE(r.trace.warnings[0].find("forced"), std::string::npos);
}

TEST(KmFamily, DivergenceGuard) {
  const OperatorFamily<Element> blowup{[](std::size_t, const Element& x) { return scale(3.0, x); },
                                       Regularity::nonexpansive(), false, "not-nonexpansive"};
  EXPECT_THROW(km_tikhonov_family(blowup, paper_beta(), Sequence::constant(1.0), vec({1.0}), fixed_count(1000)),
               DivergenceError);
}

TEST(Averaged, ConvergesToFixedPointOfAveragedMap) {
  const auto c = vec({1.0, 2.0});
  const OperatorFamily<Element> r_half{[c](std::size_t, const Element& x) { return combine(0.5, x, 0.5, c); },
                                       Regularity::averaged(0.5), false, "average-with-constant"};
  const auto r = km_tikhonov_averaged(r_half, Sequence::constant(0.5), paper_beta(), Sequence::constant(1.8),
                                      vec({-4.0, 0.0}), step_rule(1e-8));
  EXPECT_LT(distance(r.final, c), 1e-3);
}

TEST(Averaged, RelaxationBoundary) {
  const auto c = vec({1.0});
  const OperatorFamily<Element> r_half{[c](std::size_t, const Element& x) { return combine(0.5, x, 0.5, c); },
                                       Regularity::averaged(0.5), false, "average-with-constant"};
  EXPECT_NO_THROW(km_tikhonov_averaged(r_half, Sequence::constant(0.5), paper_beta(), Sequence::constant(2.0),
                                       vec({0.0}), fixed_count(10)));
  EXPECT_THROW(km_tikhonov_averaged(r_half, Sequence::constant(0.5), paper_beta(), Sequence::constant(2.0 + 1e-6),
                                    vec({0.0}), fixed_count(10)),
               ScheduleError);
}

// With T_n = (R_n - (1 - a_n) Id) / a_n and lambda'_n = a_n lambda_n the
// family driver reproduces the averaged driver.
TEST(Averaged, EquivalentToFamilyDriver) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto space = Space::euclidean(3);
    const Element c = test_support::random_element(space, rng);
    const Element x0 = test_support::random_element(space, rng, 4.0);
    const Sequence alpha = Sequence::harmonic_approach(0.6, 0.2, 2.0);
    const Sequence lambda = Sequence::constant(1.5);
    // R_n = (1 - a_n) Id + a_n P_box, P_box firmly nonexpansive.
    const auto box = box_projection({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5});
    const OperatorFamily<Element> r_fam{
        [&](std::size_t n, const Element& x) { return combine(1.0 - alpha(n), x, alpha(n), box(x + c) - c); },
        Regularity::averaged(0.8), true, "averaged"};
    const OperatorFamily<Element> t_fam{[&](std::size_t n, const Element& x) {
                                          return scale(1.0 / alpha(n), combine(1.0, r_fam(n, x), -(1.0 - alpha(n)), x));
                                        },
                                        Regularity::nonexpansive(), true, "unaveraged"};
    const Sequence scaled = Sequence::table([&] {
      std::vector<double> v(41);
      for (std::size_t n = 0; n < v.size(); ++n) v[n] = alpha(n) * lambda(n);
      return v;
    }());
    std::vector<Element> a_iter, t_iter;
    RunOptions<Element> oa, ot;
    oa.observer = [&](std::size_t, const Element&, const Element& x) { a_iter.push_back(x); };
    ot.observer = [&](std::size_t, const Element&, const Element& x) { t_iter.push_back(x); };
    ot.force = true;  // the table-valued lambda' cannot be certified analytically
    km_tikhonov_averaged(r_fam, alpha, paper_beta(), lambda, x0, fixed_count(40), oa);
    km_tikhonov_family(t_fam, paper_beta(), scaled, x0, fixed_count(40), ot);
    ASSERT_EQ(a_iter.size(), t_iter.size());
    for (std::size_t k = 0; k < a_iter.size(); ++k) EXPECT_LT(distance(a_iter[k], t_iter[k]), 1e-12);
  }
}

TEST(ForwardBackward, ShiftedIdentityConvergesToPoint) {
  const auto p = vec({0.5, -1.5});
  const auto r = forward_backward_var(identity_resolvent<Element>(), shifted_identity(p), Sequence::constant(0.5),
                                      paper_beta(), Sequence::constant(0.9), vec({4.0, 4.0}), step_rule(1e-8));
  EXPECT_LT(distance(r.final, p), 1e-3);
}

TEST(ForwardBackward, BoxNormalConePlusIdentity) {
  const auto setup = build_finite_dim(FiniteDimProblem{FiniteDimKind::box, {5.0, -3.0}, {}, {}, 0.0, {1.0, 1.0}, {2.0, 2.0}});
  EXPECT_EQ(setup.solution[0], 1.0);
  const auto r = forward_backward_var(*setup.resolvent, *setup.forward, Sequence::constant(0.5), paper_beta(),
                                      Sequence::constant(0.9), setup.start, step_rule(1e-8));
  EXPECT_LT(distance(r.final, vec({1.0, 1.0})), 1e-3);
}

TEST(ForwardBackward, RejectsStepAboveTwoBeta) {
  EXPECT_THROW(forward_backward_var(identity_resolvent<Element>(), shifted_identity(vec({0.0})), Sequence::constant(2.5),
                                    paper_beta(), Sequence::constant(0.5), vec({1.0}), fixed_count(3)),
               ScheduleError);
  EXPECT_THROW(forward_backward_var(identity_resolvent<Element>(), identity_operator<Element>(), Sequence::constant(0.5),
                                    paper_beta(), Sequence::constant(0.5), vec({1.0}), fixed_count(3)),
               DomainError);
}

// With prox = Id the driver is the Tikhonov-regularized gradient step
//   u_{n+1} = beta_n u_n - lambda_n gamma_n grad F(beta_n u_n).
TEST(ProximalGradient, IdentityProxMatchesExplicitGradientStep) {
  const auto setup = build_reconstruction(ReconstructionProblem{1.0, "x", 256, ReconstructionMode::full_gradient});
  const auto space = setup.space;
  const auto w = space->grid()->weights();
  const auto beta = paper_beta();
  const double gamma = 1.3, lambda = 0.9;
  std::vector<Element> iterates;
  RunOptions<Element> opts;
  opts.observer = [&](std::size_t, const Element&, const Element& x) { iterates.push_back(x); };
  const Element u0 = sample_catalog_function("x^2/10", space);
  proximal_gradient_var(setup.prox, setup.grad, Sequence::constant(gamma), beta, Sequence::constant(lambda), u0,
                        fixed_count(30), opts);
  // Independent plain-vector implementation.
  const std::size_t n = space->dim();
  std::vector<double> u(u0.values().begin(), u0.values().end()), b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = space->grid()->nodes()[i];
  for (std::size_t k = 0; k < 30; ++k) {
    std::vector<double> y(n), ky(n), r(n), adj(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = beta(k) * u[i];
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ky[i] = acc + 0.5 * w[i] * y[i];
      acc += w[i] * y[i];
    }
    for (std::size_t i = 0; i < n; ++i) r[i] = ky[i] - b[i];
    acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      adj[i] = acc + 0.5 * w[i] * r[i];
      acc += w[i] * r[i];
    }
    for (std::size_t i = 0; i < n; ++i) u[i] = y[i] - lambda * gamma * (adj[i] + y[i]);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(iterates[k][i], u[i], 1e-12);
  }
}

TEST(ProximalGradient, ZeroDataGoesToZero) {
  const auto setup = build_reconstruction(ReconstructionProblem{1.0, "0", 256, ReconstructionMode::prox_gradient});
  const auto r = proximal_gradient_var(setup.prox, setup.grad, Sequence::constant(1.3), paper_beta(),
                                       Sequence::constant(0.9), sample_catalog_function("t^2", setup.space),
                                       step_rule(1e-10));
  EXPECT_LT(norm(r.final), 1e-8);
}

TEST(Stopping, FeasibleStartStopsAfterOneIteration) {
  const auto setup = build_sfp(SfpProblem{1024, "cos"});
  RunOptions<Element> opts;
  opts.monitor = setup.feasibility;
  StoppingRule stop;
  stop.residual_tolerance = 1e-3;
  const auto r = proximal_gradient_var(setup.projection, setup.grad, Sequence::constant(0.5), paper_beta(),
                                       Sequence::constant(0.4), setup.start, stop, opts);
  EXPECT_EQ(r.trace.iterations(), 1u);
  EXPECT_EQ(r.trace.reason, Termination::residual_tolerance);
  EXPECT_EQ(trace_summary(r.trace).iterations, 1u);
}

TEST(Stopping, Rules) {
  const auto id = OperatorFamily<Element>::constant(identity_operator<Element>());
  StoppingRule bad;
  bad.step_tolerance = 0.0;
  EXPECT_THROW(km_tikhonov_family(id, paper_beta(), Sequence::constant(0.9), vec({1.0}), bad), DomainError);
  StoppingRule residual;
  residual.residual_tolerance = 1e-3;
  EXPECT_THROW(km_tikhonov_family(id, paper_beta(), Sequence::constant(0.9), vec({1.0}), residual), DomainError);
  StoppingRule clock;
  clock.wall_seconds = 1e-9;
  const auto r = km_tikhonov_family(id, paper_beta(), Sequence::constant(0.9), vec({1.0}), clock);
  EXPECT_EQ(r.trace.reason, Termination::wall_clock);
  EXPECT_EQ(r.trace.iterations(), 1u);
  EXPECT_FALSE(converged(Termination::wall_clock));
  EXPECT_EQ(StoppingRule{}.max_iterations, kDefaultMaxIterations);
}

TEST(Trace, RecordsAndSummary) {
  const auto fam = OperatorFamily<Element>::constant(hyperplane_projection(vec({1.0, 1.0}), 2.0));
  const auto r = km_tikhonov_family(fam, paper_beta(), Sequence::constant(0.9), vec({3.0, 0.0}), fixed_count(1));
  EXPECT_EQ(trace_summary(r.trace).iterations, 1u);
  const auto full = km_tikhonov_family(fam, paper_beta(), Sequence::constant(0.9), vec({3.0, 0.0}), step_rule(1e-6));
  const auto s = trace_summary(full.trace);
  EXPECT_EQ(s.final_step_norm, full.trace.records.back().step_norm);
  EXPECT_EQ(s.residual_series.size(), full.trace.records.size());
  for (std::size_t k = 0; k < full.trace.records.size(); ++k) {
    const auto& rec = full.trace.records[k];
    EXPECT_EQ(rec.n, k);
    EXPECT_TRUE(std::isfinite(rec.iterate_norm) && std::isfinite(rec.step_norm) && std::isfinite(rec.fp_residual));
    EXPECT_EQ(rec.beta, paper_beta()(k));
    EXPECT_FALSE(rec.gamma.has_value());
  }
  EXPECT_EQ(full.trace.records[0].step_norm, 0.0);
  EXPECT_THROW(trace_summary(IterationTrace{}), DomainError);
}

TEST(Determinism, IdenticalRunsAreBitIdentical) {
  const auto setup = build_sfp(SfpProblem{1024, "exp"});
  RunOptions<Element> opts;
  opts.monitor = setup.feasibility;
  const auto run = [&] {
    return proximal_gradient_var(setup.projection, setup.grad, Sequence::harmonic_approach(1.0, 0.5), paper_beta(),
                                 Sequence::constant(0.4), setup.start, fixed_count(60), opts);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.trace.records.size(), b.trace.records.size());
  for (std::size_t k = 0; k < a.trace.records.size(); ++k) {
    EXPECT_EQ(a.trace.records[k].iterate_norm, b.trace.records[k].iterate_norm);
    EXPECT_EQ(a.trace.records[k].fp_residual, b.trace.records[k].fp_residual);
    EXPECT_EQ(a.trace.records[k].monitor, b.trace.records[k].monitor);
  }
  for (std::size_t i = 0; i < a.final.size(); ++i) EXPECT_EQ(a.final[i], b.final[i]);
}

// Per-step contraction toward a known fixed point and the boundedness
// estimate, on randomized finite-dimensional runs.
TEST(Invariants, ContractionAndBoundedness) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> lam(0.05, 1.0), gam(0.05, 1.95), coord(-5.0, 5.0);
  const auto beta = paper_beta();
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = Space::euclidean(3);
    const Element x0 = test_support::random_element(space, rng, 5.0);
    FiniteDimSetup setup = [&] {
      switch (trial % 3) {
        case 0: {
          std::vector<double> a{coord(rng), coord(rng), coord(rng)};
          return build_finite_dim(FiniteDimProblem{FiniteDimKind::hyperplane, {0, 0, 0}, {}, a, coord(rng), {}, {}});
        }
        case 1:
          return build_finite_dim(
              FiniteDimProblem{FiniteDimKind::constant, {0, 0, 0}, {coord(rng), coord(rng), coord(rng)}, {}, 0.0, {}, {}});
        default: {
          const double l = coord(rng);
          return build_finite_dim(FiniteDimProblem{FiniteDimKind::box, {0, 0, 0}, {coord(rng), coord(rng), coord(rng)},
                                                   {}, 0.0, {l, l - 1, l - 2}, {l + 1, l + 3, l}});
        }
      }
    }();
    const Element& xs = setup.solution;
    const double bound = std::max(distance(x0, xs), norm(xs));
    const double l = lam(rng), g = gam(rng);
    RunOptions<Element> opts;
    opts.observer = [&](std::size_t n, const Element& x, const Element& next) {
      EXPECT_LE(distance(next, xs), distance(scale(beta(n), x), xs) + 1e-10);
      EXPECT_LE(distance(next, xs), bound + 1e-8);
    };
    if (setup.family)
      km_tikhonov_family(*setup.family, beta, Sequence::constant(l), x0, fixed_count(200), opts);
    else
      forward_backward_var(*setup.resolvent, *setup.forward, Sequence::constant(g), beta,
                           Sequence::constant(std::min(l, (4.0 - g) / 2.0)), x0, fixed_count(200), opts);
  }
}

// The fixed-point residual vanishes as the step tolerance shrinks. Under a
// step-norm rule the Tikhonov term makes ||x_{n+1} - x_n|| = O(1/n^2) while
// ||x_n - T x_n|| = O(1/n), so the residual at termination scales like
// sqrt(eps) rather than eps.
TEST(Invariants, FixedPointResidualVanishes) {
  const auto line = OperatorFamily<Element>::constant(hyperplane_projection(vec({1.0, 2.0}), 1.0));
  const auto setup = build_finite_dim(FiniteDimProblem{FiniteDimKind::box, {5.0, -3.0}, {}, {}, 0.0, {1.0, 1.0}, {2.0, 2.0}});
  double prev_km = INFINITY, prev_fb = INFINITY;
  for (const double eps : {1e-4, 1e-6, 1e-8}) {
    const auto r = km_tikhonov_family(line, paper_beta(), Sequence::constant(0.9), vec({3.0, -2.0}), step_rule(eps));
    ASSERT_TRUE(converged(r.trace.reason));
    const double km_res = r.trace.records.back().fp_residual;
    EXPECT_LT(km_res, 10.0 * std::sqrt(eps));
    EXPECT_LT(km_res, prev_km);
    prev_km = km_res;
    const auto fb = forward_backward_var(*setup.resolvent, *setup.forward, Sequence::constant(0.5), paper_beta(),
                                         Sequence::constant(0.9), setup.start, step_rule(eps));
    ASSERT_TRUE(converged(fb.trace.reason));
    const double fb_res = fb.trace.records.back().fp_residual;
    EXPECT_LT(fb_res, 10.0 * std::sqrt(eps));
    EXPECT_LT(fb_res, prev_fb);
    prev_fb = fb_res;
  }
}
