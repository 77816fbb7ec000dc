// Directed graph storage, edge-list ingestion and basic matrix views.
//
// Orientation convention used throughout the library: the adjacency matrix
// has A(src, dst) = weight, i.e. row = source vertex, column = destination.

#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace envelope {

using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using complex = std::complex<double>;

/// A graph signal: one complex sample per vertex.
using Signal = Eigen::VectorXcd;

/// Bad input: malformed files, out-of-range indices, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (eigensolver, inversion of a singular basis).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable weighted digraph on vertices 0..n-1. Edges are kept sorted by
/// (src, dst); at most one edge per ordered pair, never with zero weight.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t n, std::vector<Edge> edges = {},
                   std::vector<std::string> labels = {});

  /// Every nonzero entry becomes an edge.
  static Digraph from_adjacency(const Matrix& a);

  std::size_t size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::string>& labels() const { return labels_; }

  bool has_edge(std::size_t src, std::size_t dst) const;
  /// 0 when the edge is absent.
  double weight(std::size_t src, std::size_t dst) const;

  std::vector<std::size_t> out_degrees() const;
  std::vector<std::size_t> in_degrees() const;

  /// Returns a copy with `extra` edges inserted. A collision with an existing
  /// edge throws unless `allow_multi`, in which case the weights are summed.
  Digraph with_edges(std::span<const Edge> extra, bool allow_multi) const;

  friend bool operator==(const Digraph&, const Digraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
};

/// Dense n x n adjacency with A(src, dst) = weight.
Matrix adjacency(const Digraph& g);

enum class EdgeListFormat { plain, csv };

/// Plain: whitespace separated `src dst [weight]`, `#` starts a comment.
/// CSV: header `src,dst,weight` (weight column optional per row).
/// Vertex count is max index + 1 unless `n` is given.
Digraph parse_edge_list(const std::string& text, EdgeListFormat format,
                        std::optional<std::size_t> n = std::nullopt);
Digraph load_edge_list(const std::filesystem::path& path, EdgeListFormat format,
                       std::optional<std::size_t> n = std::nullopt);

/// Writes the plain edge-list format (always with a weight column).
std::string format_edge_list(const Digraph& g);

/// Canonical form {"n": int, "edges": [[src, dst, weight], ...]}.
nlohmann::json to_json(const Digraph& g);
Digraph digraph_from_json(const nlohmann::json& j);

struct RankProfile {
  std::size_t rank = 0;
  std::size_t nullity = 0;
  double tolerance = 0.0;
};

/// Numerical rank from singular values. Default tolerance is
/// n * machine-epsilon * largest singular value.
RankProfile rank_profile(const Matrix& a, std::optional<double> tol = std::nullopt);

/// Directed path 0 -> 1 -> ... -> n-1; its adjacency is the backward shift.
Digraph line_digraph(std::size_t n);
/// Directed cycle 0 -> 1 -> ... -> n-1 -> 0.
Digraph cycle_digraph(std::size_t n);

/// Shortest round-trip decimal representation, locale independent.
std::string format_double(double v);

}  // namespace envelope
