// Construction of non-singular and admissible envelope extensions.
//
// A singular digraph with nullity g is made non-singular by adding g edges
// placed by a pseudo-permutation between a row dependency list and a column
// dependency list. A cycle cover of the result is then chained into a
// Hamiltonian cycle, which embeds the digraph into a Cayley digraph on Z_n.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envelope/graph.hpp"
#include "envelope/spectral.hpp"

namespace envelope {

enum class ListKind { row, column };

std::string to_string(ListKind k);

/// g rows (or columns) whose removal leaves the rank unchanged.
struct DependencyList {
  ListKind kind = ListKind::row;
  std::vector<std::size_t> indices;  // sorted

  friend bool operator==(const DependencyList&, const DependencyList&) = default;
};

struct DependencyEnumeration {
  RankProfile rank;
  std::vector<DependencyList> lists;
  /// Indices present in every list (e.g. zero rows for the row kind).
  std::vector<std::size_t> mandatory;
  std::string note;
};

/// Every size-g index set S, in lexicographic order, such that deleting the
/// rows (columns) in S preserves the rank. When `required` is given only sets
/// containing all of those indices are returned. For g = 0 the list is empty
/// and `note` says the matrix is already non-singular.
///
/// Works on the dual matroid: with N a g x n basis of the left (right) null
/// space, S is valid iff the g x g minor N[:, S] is non-singular.
DependencyEnumeration enumerate_dependency_lists(
    const Matrix& a, ListKind kind, const std::vector<std::size_t>& required = {},
    std::optional<double> rank_tol = std::nullopt);

/// Rows that duplicate an earlier nonzero row.
std::vector<std::size_t> duplicate_rows(const Matrix& a);

/// Rank-g 0/1 pattern with one entry per row of a row list and per column of
/// a column list. Entries are sorted by row.
struct PseudoPermutation {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> entries;

  Matrix matrix(double weight = 1.0) const;
  friend bool operator==(const PseudoPermutation&, const PseudoPermutation&) = default;
};

/// All g! bijections rows -> cols, lexicographic in the image sequence.
std::vector<PseudoPermutation> pseudo_permutations(const DependencyList& rows,
                                                   const DependencyList& cols, std::size_t n);

/// The index-th (0-based, lexicographic) bijection without materializing the
/// others.
PseudoPermutation pseudo_permutation_at(const DependencyList& rows, const DependencyList& cols,
                                        std::size_t n, std::size_t index);

std::size_t factorial(std::size_t g);

struct Provenance {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<std::pair<std::size_t, std::size_t>> q;
  std::vector<Edge> added;
};

nlohmann::json to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::json& j);

struct EnvelopeExtension {
  Digraph base;
  std::vector<Edge> added;
  Digraph extended;
  Provenance provenance;
};

/// A + weight * Q, verified non-singular. Throws ValidationError on a
/// multi-edge collision without `allow_multi`, NumericalError when the result
/// is singular (the dependency lists were not valid).
EnvelopeExtension nonsingular_extension(const Digraph& base, const PseudoPermutation& q,
                                        double weight = 1.0, bool allow_multi = false,
                                        const std::vector<std::size_t>& rows = {},
                                        const std::vector<std::size_t>& cols = {});

struct CycleCover {
  std::vector<std::size_t> sigma;
  /// Orbits of sigma; each starts at its minimum vertex, ordered by it.
  std::vector<std::vector<std::size_t>> cycles;
};

/// Permutation supported on nonzero entries, found as a perfect matching of
/// the bipartite support graph (Hopcroft-Karp, ascending vertex scan).
/// Throws ValidationError when no perfect matching exists.
CycleCover find_cycle_cover(const Matrix& a);

/// Orbit decomposition of a permutation.
std::vector<std::vector<std::size_t>> permutation_cycles(const std::vector<std::size_t>& sigma);

struct HamiltonianChain {
  std::vector<std::size_t> cycle;  // starts at vertex 0
  std::vector<Edge> added;
  std::vector<Edge> removed;
};

/// Joins the cycles of a cover into one Hamiltonian cycle. On each cycle the
/// edge leaving its minimum vertex is cut; cycle m's cut source is rerouted
/// to cycle m+1's cut destination (cyclically).
HamiltonianChain chain_cycles(const CycleCover& cover);

/// Residue set of Cay(Z_n, gamma). Residue 0 appears only when the embedded
/// digraph has self-loops.
struct ConnectionSet {
  std::size_t n = 0;
  std::vector<std::size_t> gamma;  // sorted, distinct, in [0, n)

  friend bool operator==(const ConnectionSet&, const ConnectionSet&) = default;
};

struct CayleyEmbedding {
  /// relabel[v] is the Cayley vertex of original vertex v.
  std::vector<std::size_t> relabel;
  ConnectionSet gamma;
};

/// Relabels so `ham` becomes 0 -> 1 -> ... -> n-1 -> 0 and collects forward
/// differences (b - a) mod n of the remaining edges, plus 1.
CayleyEmbedding cayley_embedding(const Digraph& g, const std::vector<std::size_t>& ham);

/// Edge m -> (m + k) mod n for each k in gamma.
Digraph cayley_adjacency(const ConnectionSet& gamma);

/// lambda_j = sum_{k in gamma} exp(2 pi i j k / n); eigenvectors are the
/// columns of inverse_dft(n).
std::vector<complex> cayley_spectrum(const ConnectionSet& gamma);

/// Cover, chain and embed in one go. `chain_edges` are the Hamiltonian edges
/// missing from `g`.
struct CayleyEnvelope {
  CycleCover cover;
  HamiltonianChain chain;
  std::vector<Edge> chain_edges;
  CayleyEmbedding embedding;
};

CayleyEnvelope cayley_envelope(const Digraph& g);

struct SearchOptions {
  std::vector<std::size_t> restrict_rows;
  double weight = 1.0;
  bool allow_multi = false;
  std::optional<std::size_t> limit;
  Tolerances tol;
};

enum class CandidateStatus { extended, multi_edge, singular, eigen_failure };

std::string to_string(CandidateStatus s);

struct Candidate {
  std::size_t index = 0;
  CandidateStatus status = CandidateStatus::extended;
  Provenance provenance;
  std::optional<EnvelopeExtension> extension;
  std::optional<EigenSystem> eigen;
  Admissibility verdict = Admissibility::singular;
  /// Cayley embedding of the extension when it is not admissible: marks where
  /// further edges could go.
  std::optional<CayleyEnvelope> fallback;
  std::string message;
};

/// Canonical-order enumeration of all (rows, cols, Q) triples. Candidates are
/// addressable by index, so evaluation can be split across workers while the
/// output order stays fixed.
class ExtensionSearch {
 public:
  ExtensionSearch(Digraph base, SearchOptions opts = {});

  const Digraph& base() const { return base_; }
  const Matrix& base_adjacency() const { return adjacency_; }
  const SearchOptions& options() const { return opts_; }
  const RankProfile& rank() const { return row_enum_.rank; }
  const DependencyEnumeration& row_lists() const { return row_enum_; }
  const DependencyEnumeration& column_lists() const { return col_enum_; }

  /// beta_col * beta_row * g!, or 1 when the base is already non-singular.
  std::size_t total() const;
  /// min(total, limit).
  std::size_t size() const;

  Candidate evaluate(std::size_t index) const;

  /// Stream interface: next candidate in canonical order, nullopt at the end.
  std::optional<Candidate> next();

 private:
  Digraph base_;
  SearchOptions opts_;
  Matrix adjacency_;
  DependencyEnumeration row_enum_;
  DependencyEnumeration col_enum_;
  std::size_t cursor_ = 0;
};

}  // namespace envelope
