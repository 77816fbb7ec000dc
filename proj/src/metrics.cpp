#include "envelope/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace envelope {

std::vector<double> pagerank(const Digraph& g, double damping, double tol, int max_iter) {
  const std::size_t n = g.size();
  if (!(damping >= 0.0 && damping <= 1.0)) throw ValidationError("damping must lie in [0, 1]");
  const auto out_deg = g.out_degrees();
  const double dn = static_cast<double>(n);
  std::vector<double> pr(n, 1.0 / dn);
  std::vector<double> next(n);
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out_deg[i] == 0) dangling += pr[i];
    }
    const double base = (1.0 - damping) / dn + damping * dangling / dn;
    std::fill(next.begin(), next.end(), base);
    for (const auto& e : g.edges()) {
      next[e.dst] += damping * pr[e.src] / static_cast<double>(out_deg[e.src]);
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff += std::abs(next[i] - pr[i]);
    pr.swap(next);
    if (diff < tol) {
      const double sum = std::accumulate(pr.begin(), pr.end(), 0.0);
      for (auto& v : pr) v /= sum;
      return pr;
    }
  }
  throw NumericalError("pagerank did not converge within " + std::to_string(max_iter) +
                       " iterations");
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("kendall_tau: length mismatch");
  if (a.size() < 2) throw ValidationError("kendall_tau needs at least two observations");
  long long concordant = 0;
  long long discordant = 0;
  long long ties_a = 0;
  long long ties_b = 0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) continue;
      if (da == 0.0) {
        ++ties_a;
      } else if (db == 0.0) {
        ++ties_b;
      } else if ((da > 0) == (db > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + ties_a) *
                                 static_cast<double>(concordant + discordant + ties_b));
  if (denom == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / denom;
}

std::string to_string(Motif m) { return m == Motif::cycle3 ? "3cycle" : "ffl"; }

Motif motif_from_string(const std::string& s) {
  if (s == "3cycle" || s == "directed-3-cycle" || s == "cycle3") return Motif::cycle3;
  if (s == "ffl" || s == "feed-forward-loop" || s == "feed_forward") return Motif::feed_forward;
  throw ValidationError("unknown motif '" + s + "' (expected 3cycle or ffl)");
}

namespace {

// Does the 3-vertex edge pattern contain (or equal) the motif under some
// labelling of the vertices? `adj[x][y]` is the x -> y edge.
bool matches(const std::array<std::array<bool, 3>, 3>& adj, Motif m, bool induced) {
  int edges = 0;
  for (int x = 0; x < 3; ++x) {
    for (int y = 0; y < 3; ++y) {
      if (x != y && adj[x][y]) ++edges;
    }
  }
  if (induced && edges != 3) return false;
  if (edges < 3) return false;
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (const auto& p : perms) {
    const int u = p[0], v = p[1], w = p[2];
    const bool hit = m == Motif::cycle3 ? (adj[u][v] && adj[v][w] && adj[w][u])
                                        : (adj[u][v] && adj[v][w] && adj[u][w]);
    if (hit) return true;
  }
  return false;
}

}  // namespace

std::size_t motif_count(const Digraph& g, Motif m, bool induced) {
  const std::size_t n = g.size();
  if (n < 3) return 0;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges()) adj[e.src][e.dst] = true;
  std::size_t count = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      for (std::size_t c = b + 1; c < n; ++c) {
        const std::array<std::size_t, 3> vs{a, b, c};
        std::array<std::array<bool, 3>, 3> local{};
        for (int x = 0; x < 3; ++x) {
          for (int y = 0; y < 3; ++y) local[x][y] = adj[vs[x]][vs[y]];
        }
        if (matches(local, m, induced)) ++count;
      }
    }
  }
  return count;
}

double motif_density(const Digraph& g, Motif m) {
  const auto n = static_cast<double>(g.size());
  if (g.size() < 3) return 0.0;
  const double placements = n * (n - 1.0) * (n - 2.0) / 6.0;
  return static_cast<double>(motif_count(g, m, true)) / placements;
}

CorePeriphery core_periphery_counts(const Digraph& g) {
  const std::size_t n = g.size();
  const auto in = g.in_degrees();
  const auto out = g.out_degrees();
  std::vector<double> k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = static_cast<double>(in[i] + out[i]);
  const double mean = std::accumulate(k.begin(), k.end(), 0.0) / static_cast<double>(n);
  CorePeriphery cp;
  cp.scores.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = k[i] + mean;
    cp.scores[i] = denom == 0.0 ? 0.0 : (k[i] - mean) / denom;
    if (cp.scores[i] > 0.0) {
      ++cp.core;
    } else {
      ++cp.periphery;
    }
  }
  return cp;
}

std::vector<double> local_clustering(const Digraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<bool>> und(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges()) {
    if (e.src == e.dst) continue;
    und[e.src][e.dst] = und[e.dst][e.src] = true;
  }
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> nb;
    for (std::size_t j = 0; j < n; ++j) {
      if (und[i][j]) nb.push_back(j);
    }
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t x = 0; x < k; ++x) {
      for (std::size_t y = x + 1; y < k; ++y) {
        if (und[nb[x]][nb[y]]) ++links;
      }
    }
    c[i] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return c;
}

StructuralReport structural_report(const Digraph& g, const std::vector<double>& reference_pagerank) {
  StructuralReport r;
  r.pagerank = pagerank(g);
  if (!reference_pagerank.empty()) r.kendall_tau = kendall_tau(reference_pagerank, r.pagerank);
  r.motif_densities[to_string(Motif::cycle3)] = motif_density(g, Motif::cycle3);
  r.motif_densities[to_string(Motif::feed_forward)] = motif_density(g, Motif::feed_forward);
  const auto cp = core_periphery_counts(g);
  r.core_count = cp.core;
  r.periphery_count = cp.periphery;
  r.local_clustering = local_clustering(g);
  r.mean_clustering = std::accumulate(r.local_clustering.begin(), r.local_clustering.end(), 0.0) /
                      static_cast<double>(g.size());
  return r;
}

nlohmann::json to_json(const StructuralReport& r) {
  return {
      {"pagerank", r.pagerank},
      {"kendall_tau", r.kendall_tau},
      {"motif_densities", r.motif_densities},
      {"core", r.core_count},
      {"periphery", r.periphery_count},
      {"local_clustering", r.local_clustering},
      {"mean_clustering", r.mean_clustering},
  };
}

}  // namespace envelope
