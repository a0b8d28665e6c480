#include "accretive/evolution.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace accretive;
using namespace accretive::evolution;
using accretive::derivative::BoundaryFunction;
using accretive::derivative::Context;
using accretive::derivative::Realization;

TEST_CASE("scheme configuration is validated") {
  CHECK_NOTHROW(SchemeConfig{}.validate());
  CHECK_THROWS_AS((SchemeConfig{0.0, 10, 1e-8}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SchemeConfig{-0.1, 10, 1e-8}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SchemeConfig{0.1, 0, 1e-8}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((SchemeConfig{0.1, 10, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("eigenfunction benchmark for the derivative") {
  const Context ctx(0.0, 1.0);
  const Interval& I = ctx.interval();
  const Realization R(ctx, BoundaryFunction::linear(0.0));
  const SchemeConfig cfg{0.1, 10, 1e-8};
  const auto rec = evolve(scalar_resolvent(R), ExpPoly::exponential(1.0), cfg, l2_norm_fn(I));
  REQUIRE(rec.states.size() == 11);
  REQUIRE(rec.norms.size() == 11);
  REQUIRE(rec.timestamps.size() == 11);
  for (std::size_t k = 0; k <= 10; ++k) {
    const ExpPoly expected = ExpPoly::exponential(1.0, std::pow(1.1, -static_cast<double>(k)));
    CHECK(l2_norm(rec.states[k] - expected, I) < 1e-12);
    CHECK(rec.timestamps[k] == doctest::Approx(0.1 * k));
    CHECK(rec.norms[k] == doctest::Approx(l2_norm(expected, I)).epsilon(1e-12));
  }

  const auto zero = evolve(scalar_resolvent(R), ExpPoly{}, cfg, l2_norm_fn(I));
  for (const ExpPoly& s : zero.states) CHECK(s.is_zero());

  // one step of evolve is the resolvent applied once, coefficient for coefficient
  const ExpPoly u0 = ExpPoly::monomial(0.5, 2, 1.3) + ExpPoly::exponential(-1.0, 0.4);
  const auto one = evolve(scalar_resolvent(R), u0, SchemeConfig{0.3, 1, 1e-8}, l2_norm_fn(I));
  CHECK(one.states[1] == scalar_resolvent(R)(u0, 0.3));
}

TEST_CASE("eigenstate benchmark for the block operator") {
  const Context ctx(0.0, 1.0);
  const Interval& I = ctx.interval();
  const InnerSpace X = blockop::bd_space(ctx);
  const auto R = blockop::BlockRealization::from_relation(ctx, LinearRelation::graph(X, Mat::Identity(2, 2)));
  const ExpPoly ep = ExpPoly::exponential(1.0);
  const double tau = 0.2;
  const auto rec = evolve(block_resolvent(R), blockop::BlockState{ep, ep}, SchemeConfig{tau, 8, 1e-8},
                          state_norm_fn(ctx));
  for (std::size_t k = 0; k < rec.states.size(); ++k) {
    const double s = std::pow(1.0 + tau, -static_cast<double>(k));
    CHECK(l2_norm(rec.states[k].u - s * ep, I) < 1e-10);
    CHECK(l2_norm(rec.states[k].v - s * ep, I) < 1e-10);
  }
}

TEST_CASE("contraction of trajectories for admissible realisations") {
  Rng rng(51);
  std::uniform_real_distribution<double> ut(0.05, 0.5);
  for (const auto& [a, b] : {std::pair{0.0, 1.0}, std::pair{-0.7, 0.9}}) {
    const Context ctx(a, b);
    const Interval& I = ctx.interval();
    const double L = ctx.lipschitz_bound();
    for (const BoundaryFunction& g :
         {BoundaryFunction::linear(0.0), BoundaryFunction::linear(0.9 * L, 0.3), BoundaryFunction::linear(-L),
          BoundaryFunction::scaled_sin(0.8 * L),
          BoundaryFunction::table({-2.0, 0.0, 1.0, 3.0}, {0.5, -0.5 * L, 0.2 * L, 0.0})}) {
      const Realization R(ctx, g);
      REQUIRE(R.admissible());
      for (int trial = 0; trial < 4; ++trial) {
        const SchemeConfig cfg{ut(rng), 20, 1e-8};
        const ExpPoly u0 = oracle::random_exppoly(rng, 3);
        const ExpPoly v0 = oracle::random_exppoly(rng, 3);
        INFO(g.description << " tau=" << cfg.tau);
        std::vector<double> d;
        CHECK_NOTHROW(d = contraction_report(scalar_resolvent(R), u0, v0, cfg, l2_distance_fn(I)));
        for (std::size_t k = 1; k < d.size(); ++k) CHECK(d[k] <= d[k - 1] + 1e-8);
      }
      const ExpPoly u0 = oracle::random_exppoly(rng, 3);
      const auto same = contraction_report(scalar_resolvent(R), u0, u0, SchemeConfig{0.1, 5, 1e-8}, l2_distance_fn(I));
      for (double x : same) CHECK(x == 0.0);
    }
  }
}

TEST_CASE("block trajectories contract for random linear contractions") {
  const Context ctx(-0.7, 0.9);
  const InnerSpace X = blockop::bd_space(ctx);
  Rng rng(52);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    Mat A(2, 2);
    A << nd(rng), nd(rng), nd(rng), nd(rng);
    const Mat F = A / X.operator_norm(A);
    const auto R = blockop::BlockRealization::from_contraction(ctx, ContractionMap::linear(X, F));
    const blockop::BlockState u0{oracle::random_exppoly(rng, 2), oracle::random_exppoly(rng, 2)};
    const blockop::BlockState v0{oracle::random_exppoly(rng, 2), oracle::random_exppoly(rng, 2)};
    CHECK_NOTHROW(contraction_report(block_resolvent(R), u0, v0, SchemeConfig{0.25, 12, 1e-8}, state_distance_fn(ctx)));
  }
}

TEST_CASE("an accretivity witness is expanded by the first step") {
  const Context ctx(0.0, 1.0);
  const Interval& I = ctx.interval();
  const BoundaryFunction g = BoundaryFunction::linear(4.0);
  const Realization R(ctx, g);
  CHECK_FALSE(R.admissible());
  const auto w = derivative::accretivity_witness(ctx, g, 1.0, 0.0);
  REQUIRE(w.pairing < 0.0);
  try {
    contraction_report(scalar_resolvent(R), w.u, w.v, SchemeConfig{0.01, 5, 1e-8}, l2_distance_fn(I));
    FAIL("expected a contraction violation");
  } catch (const ContractionViolated& e) {
    CHECK(e.step() == 1);
    CHECK(e.after() > e.before());
  }
}

TEST_CASE("resolvent failures carry the step index") {
  const Context ctx(0.0, 1.0);
  int calls = 0;
  const Resolvent<ExpPoly> flaky = [&calls](const ExpPoly& u, double) {
    if (++calls == 3) throw RootNotFound("synthetic");
    return u;
  };
  try {
    evolve(flaky, ExpPoly::constant(1.0), SchemeConfig{0.1, 5, 1e-8}, l2_norm_fn(ctx.interval()));
    FAIL("expected StepFailed");
  } catch (const StepFailed& e) {
    CHECK(e.step() == 3);
  }
}

TEST_CASE("first-order convergence on the eigenfunction benchmark") {
  const Context ctx(0.0, 1.0);
  const Interval& I = ctx.interval();
  const Realization R(ctx, BoundaryFunction::linear(0.0));
  const double T = 1.0;
  const std::vector<double> taus{0.1, 0.05, 0.025, 0.0125};
  const ExpPoly exact = ExpPoly::exponential(1.0, std::exp(-T));
  const OrderEstimate est =
      convergence_order(scalar_resolvent(R), ExpPoly::exponential(1.0), taus, T, l2_distance_fn(I), exact);
  REQUIRE(est.orders.size() == 2);
  CHECK(est.estimate >= 0.8);
  CHECK(est.estimate <= 1.2);
  for (double p : est.orders) CHECK(std::abs(p - 1.0) < 0.2);
  REQUIRE(est.errors.size() == taus.size());
  for (std::size_t i = 0; i + 1 < est.errors.size(); ++i) {
    // closed form of the scheme: (1 + τ)^{-T/τ} e^t
    const double ref = std::abs(std::pow(1.0 + taus[i], -T / taus[i]) - std::exp(-T)) * l2_norm(ExpPoly::exponential(1.0), I);
    CHECK(est.errors[i] == doctest::Approx(ref).epsilon(1e-9));
    const double ratio = est.errors[i] / est.errors[i + 1];
    CHECK(ratio >= 2.0 * 0.75);
    CHECK(ratio <= 2.0 * 1.25);
  }

  const OrderEstimate z = convergence_order(scalar_resolvent(R), ExpPoly{}, taus, T, l2_distance_fn(I),
                                            std::optional<ExpPoly>(ExpPoly{}));
  for (double err : z.errors) CHECK(err == 0.0);

  CHECK_THROWS_AS(convergence_order(scalar_resolvent(R), ExpPoly{}, {0.1, 0.2, 0.05}, T, l2_distance_fn(I)),
                  std::invalid_argument);
  CHECK_THROWS_AS(convergence_order(scalar_resolvent(R), ExpPoly{}, {0.3, 0.2, 0.1}, T, l2_distance_fn(I)),
                  std::invalid_argument);
}

TEST_CASE("wave energy with impedance boundary conditions") {
  const Context ctx(0.0, 1.0);
  const ExpPoly ep = ExpPoly::exponential(1.0);
  const ExpPoly em = ExpPoly::exponential(-1.0);
  const blockop::BlockState initial{ep + 0.5 * em, ep - 0.5 * em};
  const SchemeConfig cfg{0.05, 50, 1e-10};
  Rng rng(53);
  for (const Mat& K : {Mat(Mat::Identity(2, 2)), Mat(Mat::Zero(2, 2)), Mat((Mat(2, 2) << 0, 1, -1, 0).finished()),
                       Mat((Mat(2, 2) << 2, 1, 0, 0.5).finished())}) {
    REQUIRE(impedance1d::is_K_accretive(impedance1d::ImpedanceK(K)));
    const WaveReport rep = wave_energy_run(ctx, impedance1d::ImpedanceK(K), initial, cfg);
    INFO("K=" << K);
    CHECK(rep.nonincreasing());
    CHECK(rep.energies.size() == cfg.steps + 1);
  }
  TrajectoryRecord<blockop::BlockState> rec;
  const WaveReport bad = wave_energy_run(ctx, impedance1d::ImpedanceK(-Mat::Identity(2, 2)), initial, cfg, &rec);
  REQUIRE(bad.first_increase);
  CHECK(*bad.first_increase <= 50);
  CHECK(bad.energies[*bad.first_increase] > bad.energies[*bad.first_increase - 1]);
  CHECK(rec.states.size() == cfg.steps + 1);
}

TEST_CASE("pruning keeps degree bounded and values intact") {
  const Interval I(0.0, 1.0);
  ExpPoly f;
  for (std::size_t k = 0; k <= 80; ++k) f += ExpPoly::monomial(-3.0, k, std::pow(0.5, static_cast<double>(k)) / std::tgamma(k + 1.0));
  const ExpPoly p = maybe_prune(f, I);
  CHECK(p.max_degree() < f.max_degree());
  for (double t : {0.0, 0.3, 0.7, 1.0}) CHECK(std::abs(p(t) - f(t)) <= 1e-12 * std::abs(f(t)));
  const ExpPoly small = ExpPoly::monomial(0.0, 3, 1e-20) + ExpPoly::constant(1.0);
  CHECK(maybe_prune(small, I) == small);

  // a long run at the resonant rate keeps the degree under the cap
  const Context ctx(0.0, 1.0);
  const Realization R(ctx, BoundaryFunction::linear(0.5));
  const auto rec = evolve(scalar_resolvent(R), ExpPoly::exponential(-10.0), SchemeConfig{0.1, 120, 1e-8},
                          l2_norm_fn(ctx.interval()));
  for (const ExpPoly& s : rec.states) CHECK(s.max_degree() <= kPruneThreshold + 1);
  for (std::size_t k = 1; k < rec.norms.size(); ++k) CHECK(rec.norms[k] <= rec.norms[k - 1] + 1e-9);
}

TEST_CASE("csv output") {
  std::ostringstream os;
  const std::vector<double> t{0.0, 0.1}, n{1.0, 0.5}, d{2.0, 1.0}, en{1.0, 0.25};
  write_csv(os, t, n, &d, &en);
  CHECK(os.str() == "step,time,norm,distance,energy\n0,0,1,2,1\n1,0.10000000000000001,0.5,1,0.25\n");
  std::ostringstream plain;
  write_csv(plain, t, n);
  CHECK(plain.str() == "step,time,norm\n0,0,1\n1,0.10000000000000001,0.5\n");
  const std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(write_csv(plain, t, shorter), std::invalid_argument);
}
