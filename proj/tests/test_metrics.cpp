#include <doctest.h>

#include <numeric>
#include <random>

#include "envelope/metrics.hpp"
#include "oracles.hpp"

using namespace envelope;

namespace {

// PageRank as the solution of (I - d M - d u z^T) p = (1 - d)/n 1, where M
// holds the column-stochastic transitions and z marks dangling vertices.
std::vector<double> pagerank_solve(const Digraph& g, double d) {
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto out = g.out_degrees();
  Matrix m = Matrix::Identity(n, n);
  for (const auto& e : g.edges()) m(e.dst, e.src) -= d / static_cast<double>(out[e.src]);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (out[j] == 0) m.col(j).array() -= d / static_cast<double>(n);
  }
  const Vector rhs = Vector::Constant(n, (1.0 - d) / static_cast<double>(n));
  const Vector p = m.fullPivLu().solve(rhs);
  return {p.data(), p.data() + n};
}

}  // namespace

TEST_CASE("pagerank") {
  for (double v : pagerank(cycle_digraph(5))) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));

  const Digraph star(4, {{1, 0, 1.0}, {2, 0, 1.0}, {3, 0, 1.0}});
  const auto pr = pagerank(star);
  for (std::size_t i = 1; i < 4; ++i) CHECK(pr[0] > pr[i]);

  const Digraph chain(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto got = pagerank(chain);
  const auto expect = pagerank_solve(chain, 0.85);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(got[i] - expect[i]) < 1e-10);
}

TEST_CASE("pagerank matches the linear solve on random digraphs") {
  std::mt19937 rng(21);
  for (int t = 0; t < 30; ++t) {
    const Digraph g = oracle::random_digraph(rng, 2 + rng() % 10, 0.25);
    const auto got = pagerank(g);
    const auto expect = pagerank_solve(g, 0.85);
    CHECK(std::accumulate(got.begin(), got.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - expect[i]) < 1e-10);
  }
}

TEST_CASE("kendall tau") {
  const std::vector<double> a{1, 2, 3, 4};
  CHECK(kendall_tau(a, a) == 1.0);
  CHECK(kendall_tau(a, {4, 3, 2, 1}) == -1.0);
  CHECK(kendall_tau(a, {1, 3, 2, 4}) == 2.0 / 3.0);
  CHECK(kendall_tau(a, {5, 5, 5, 5}) == 0.0);
  CHECK_THROWS_AS(kendall_tau(a, {1, 2}), ValidationError);
}

TEST_CASE("kendall tau-b with ties") {
  // a = (1,1,2,3), b = (1,2,2,3): 4 concordant, 0 discordant, one tie in
  // each ranking and none shared, so tau = 4 / sqrt(5 * 5).
  CHECK(kendall_tau({1, 1, 2, 3}, {1, 2, 2, 3}) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("motif densities") {
  CHECK(motif_density(cycle_digraph(3), Motif::cycle3) == 1.0);
  CHECK(motif_density(cycle_digraph(3), Motif::feed_forward) == 0.0);
  CHECK(motif_density(Digraph(5), Motif::cycle3) == 0.0);
  CHECK(motif_density(Digraph(5), Motif::feed_forward) == 0.0);
  const Digraph ffl(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  CHECK(motif_density(ffl, Motif::feed_forward) == 1.0);
  CHECK(motif_from_string("ffl") == Motif::feed_forward);
  CHECK_THROWS_AS(motif_from_string("square"), ValidationError);
}

TEST_CASE("motif counts match the triad census") {
  std::mt19937 rng(22);
  for (int t = 0; t < 30; ++t) {
    const Digraph g = oracle::random_digraph(rng, 7, 0.3, true);
    const auto [cyc, ffl] = oracle::triad_census(g);
    CHECK(motif_count(g, Motif::cycle3) == cyc);
    CHECK(motif_count(g, Motif::feed_forward) == ffl);
    CHECK(motif_count(g, Motif::cycle3, false) >= cyc);
  }
}

TEST_CASE("core periphery") {
  const auto regular = core_periphery_counts(cycle_digraph(6));
  CHECK(regular.core == 0);
  CHECK(regular.periphery == 6);
  for (double s : regular.scores) CHECK(s == 0.0);

  // undirected star: center total degree 6, leaves 2, mean 3
  const Digraph star(4, {{0, 1, 1.0}, {1, 0, 1.0}, {0, 2, 1.0}, {2, 0, 1.0}, {0, 3, 1.0}, {3, 0, 1.0}});
  const auto cp = core_periphery_counts(star);
  CHECK(cp.core == 1);
  CHECK(cp.periphery == 3);
  CHECK(cp.scores[0] == doctest::Approx(1.0 / 3.0));
  CHECK(cp.scores[1] == doctest::Approx(-0.2));

  const Digraph iso(3, {{1, 2, 1.0}, {2, 1, 1.0}});
  const auto ci = core_periphery_counts(iso);
  CHECK(ci.scores[0] < 0.0);
  CHECK(ci.periphery == 1);
}

TEST_CASE("local clustering") {
  const Digraph tri(3, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}, {0, 2, 1.0}, {2, 0, 1.0}});
  for (double c : local_clustering(tri)) CHECK(c == 1.0);
  const Digraph path(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  CHECK(local_clustering(path)[1] == 0.0);

  std::mt19937 rng(23);
  for (int t = 0; t < 30; ++t) {
    const Digraph g = oracle::random_digraph(rng, 8, 0.3, true);
    const auto got = local_clustering(g);
    const auto expect = oracle::clustering(g);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(expect[i]));
  }
}

TEST_CASE("structural report") {
  const Digraph g = cycle_digraph(5);
  const auto r = structural_report(g, pagerank(g));
  CHECK(r.core_count == 0);
  CHECK(r.mean_clustering == 0.0);
  CHECK(r.motif_densities.at("3cycle") == 0.0);
  const auto j = to_json(r);
  CHECK(j["pagerank"].size() == 5);
}
