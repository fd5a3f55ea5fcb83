#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "tcilab/metric_space.hpp"
#include "tcilab/rng.hpp"
#include "tcilab/transport.hpp"

using namespace tci;

namespace {

SpacePtr planar_space(NormalStream& rng, std::size_t n) {
  std::vector<double> px(n), py(n);
  for (std::size_t i = 0; i < n; ++i) {
    px[i] = rng.next_uniform(0.0, 4.0);
    py[i] = rng.next_uniform(0.0, 4.0);
  }
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      dist[i][j] = std::hypot(px[i] - px[j], py[i] - py[j]);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("p" + std::to_string(i));
  // Coincident points would break positivity; nudge duplicates apart.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && dist[i][j] <= 0.0) dist[i][j] = dist[j][i] = 1e-9;
  return make_space(std::move(labels), std::move(dist));
}

std::vector<double> random_weights(NormalStream& rng, std::size_t n) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (double& v : w) {
    v = rng.next_uniform();
    sum += v;
  }
  for (double& v : w) v /= sum;
  return w;
}

}  // namespace

TEST_CASE("degenerate and two-point instances") {
  SpacePtr s = line_space({"a", "b"}, {0.0, 3.0});
  DiscreteMeasure da(s, {1.0, 0.0});
  DiscreteMeasure db(s, {0.0, 1.0});
  CHECK(w2_squared_exact(da, da).value == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w2_squared_exact(da, db).value == doctest::Approx(9.0).epsilon(1e-13));

  // Moving half the mass across distance 3 costs 4.5.
  DiscreteMeasure half(s, {0.5, 0.5});
  CHECK(w2_squared_exact(da, half).value == doctest::Approx(4.5).epsilon(1e-13));
}

TEST_CASE("exact solver matches the quantile coupling on the line") {
  NormalStream rng(20240901, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.next_index(7);
    std::vector<double> coords(n);
    double x = rng.next_uniform(-2.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      coords[i] = x;
      x += rng.next_uniform(0.05, 1.0);
    }
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("x" + std::to_string(i));
    SpacePtr s = line_space(labels, coords);
    DiscreteMeasure nu(s, random_weights(rng, n));
    DiscreteMeasure mu(s, random_weights(rng, n));

    const W2Result result = w2_squared_exact(nu, mu);
    const double reference = oracle::line_w2_squared(nu, mu, coords);
    CHECK(result.value == doctest::Approx(reference).epsilon(1e-10));
    CHECK(oracle::certificate_gaps(result, nu, mu).worst() <= 1e-9);
  }
}

TEST_CASE("exact solver matches permutation search on uniform instances") {
  NormalStream rng(77, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t atoms = 8;
    SpacePtr s = planar_space(rng, atoms);
    const std::size_t n = 2 + rng.next_index(5);  // up to 6 sample points
    std::vector<std::size_t> src(n), dst(n);
    for (std::size_t k = 0; k < n; ++k) {
      src[k] = rng.next_index(atoms);
      dst[k] = rng.next_index(atoms);
    }
    DiscreteMeasure nu = empirical_measure(src, s);
    DiscreteMeasure mu = empirical_measure(dst, s);

    const W2Result result = w2_squared_exact(nu, mu);
    const double brute = oracle::permutation_w2_squared(*s, src, dst);
    CHECK(result.value == doctest::Approx(brute).epsilon(1e-9));
    CHECK(oracle::certificate_gaps(result, nu, mu).worst() <= 1e-9);
  }
}

TEST_CASE("dual certificates on general random instances") {
  NormalStream rng(5150, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.next_index(6);
    SpacePtr s = planar_space(rng, n);
    DiscreteMeasure nu(s, random_weights(rng, n));
    DiscreteMeasure mu(s, random_weights(rng, n));
    const W2Result result = w2_squared_exact(nu, mu);
    const auto gaps = oracle::certificate_gaps(result, nu, mu);
    CHECK(gaps.marginal <= 1e-9);
    CHECK(gaps.dual_feasibility <= 1e-9);
    CHECK(gaps.duality_gap <= 1e-9 * (1.0 + s->max_dist() * s->max_dist()));
    CHECK(gaps.negativity <= 0.0);
  }
}

TEST_CASE("entropic cost upper-bounds the exact cost and converges") {
  SpacePtr s = line_space({"a", "b", "c", "d"}, {0.0, 0.7, 1.9, 3.0});
  DiscreteMeasure nu(s, {0.4, 0.1, 0.3, 0.2});
  DiscreteMeasure mu(s, {0.1, 0.4, 0.2, 0.3});
  const double exact = w2_squared_exact(nu, mu).value;

  // Moderate regularization sits in a slow-mixing regime on this instance
  // (the pre-rounding residual decays like 1/iters at reg = 0.1), so that
  // rung gets a looser stopping tolerance; the rounded cost is a feasible
  // upper bound regardless of how early the iteration stops.
  struct Rung {
    double reg;
    int max_iters;
    double tol;
  };
  const Rung ladder[] = {{0.5, 20000, 1e-10},
                         {0.1, 400000, 1e-6},
                         {0.02, 20000, 1e-10},
                         {0.004, 20000, 1e-10}};
  double previous = std::numeric_limits<double>::infinity();
  for (const Rung& rung : ladder) {
    const double entropic =
        w2_squared_sinkhorn(nu, mu, rung.reg, rung.max_iters, rung.tol);
    CHECK(entropic >= exact - 1e-12);  // rounded plan is feasible
    CHECK(entropic <= previous + 1e-9);
    previous = entropic;
  }
  CHECK(previous - exact <= 5e-3);  // small regularization is near-exact
}

TEST_CASE("plan gluing mixes point masses by plan weights") {
  SpacePtr s = line_space({"a", "b"}, {0.0, 1.0});
  DiscreteMeasure nu(s, {0.3, 0.7});
  DiscreteMeasure mu(s, {0.6, 0.4});
  const W2Result result = w2_squared_exact(nu, mu);

  // Glue point masses delta_j indexed by the target: the mixture must
  // reproduce the target marginal exactly.
  std::map<std::pair<std::size_t, std::size_t>, DiscreteMeasure> blocks;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      std::vector<double> w(2, 0.0);
      w[j] = 1.0;
      blocks.emplace(std::make_pair(i, j), DiscreteMeasure(s, std::move(w)));
    }
  DiscreteMeasure glued = optimal_coupling_glue(result.plan, blocks);
  CHECK(glued.weight(0) == doctest::Approx(mu.weight(0)).epsilon(1e-12));
  CHECK(glued.weight(1) == doctest::Approx(mu.weight(1)).epsilon(1e-12));
}
