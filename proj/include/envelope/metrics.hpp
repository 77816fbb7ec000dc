// Structural metrics used to compare an envelope with its base digraph.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "envelope/graph.hpp"

namespace envelope {

/// Power iteration of PR(i) = (1-d)/N + d sum_{j -> i} PR(j) / L(j).
/// Mass of dangling vertices (zero out-degree) is spread uniformly. Edge
/// weights are ignored. Throws NumericalError without convergence.
std::vector<double> pagerank(const Digraph& g, double damping = 0.85, double tol = 1e-12,
                             int max_iter = 1000);

/// Tau-b rank correlation over all pairs. Returns 0 when either input is
/// constant.
double kendall_tau(const std::vector<double>& a, const std::vector<double>& b);

enum class Motif { cycle3, feed_forward };

std::string to_string(Motif m);
Motif motif_from_string(const std::string& s);

/// Number of 3-vertex sets whose induced subgraph (loops ignored) is exactly
/// the motif; with `induced == false`, sets that contain it as a subgraph.
std::size_t motif_count(const Digraph& g, Motif m, bool induced = true);

/// Induced count divided by C(n, 3). Zero for n < 3.
double motif_density(const Digraph& g, Motif m);

struct CorePeriphery {
  std::size_t core = 0;
  std::size_t periphery = 0;
  std::vector<double> scores;  // S_i = (k_i - <k>) / (k_i + <k>)
};

/// k_i is total degree (in + out); core iff S_i > 0.
CorePeriphery core_periphery_counts(const Digraph& g);

/// Local clustering on the simple undirected graph underlying g (loops and
/// edge direction dropped). C_i = 0 when fewer than two neighbors.
std::vector<double> local_clustering(const Digraph& g);

struct StructuralReport {
  std::vector<double> pagerank;
  double kendall_tau = 1.0;
  std::map<std::string, double> motif_densities;
  std::size_t core_count = 0;
  std::size_t periphery_count = 0;
  std::vector<double> local_clustering;
  double mean_clustering = 0.0;
};

/// All metrics for g; kendall_tau compares g's PageRank with
/// `reference_pagerank` (or is 1 when that is empty).
StructuralReport structural_report(const Digraph& g,
                                   const std::vector<double>& reference_pagerank = {});

nlohmann::json to_json(const StructuralReport& r);

}  // namespace envelope
