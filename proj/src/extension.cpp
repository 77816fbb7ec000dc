#include "envelope/extension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>
#include <set>

namespace envelope {

namespace {

// |det| threshold for g x g minors of an orthonormal null-space basis. By
// Cauchy-Binet the squared minors sum to 1, so genuine bases sit far above
// rounding noise (~1e-15).
constexpr double kMinorTol = 1e-9;
// An element whose null-space column has norm ~1 is a coloop of the dual
// matroid and therefore belongs to every dependency list.
constexpr double kMandatoryTol = 1e-9;
constexpr double kForbiddenTol = 1e-10;

double small_det_abs(std::vector<double>& m, std::size_t g) {
  double det = 1.0;
  for (std::size_t c = 0; c < g; ++c) {
    std::size_t pivot = c;
    double best = std::abs(m[c * g + c]);
    for (std::size_t r = c + 1; r < g; ++r) {
      const double v = std::abs(m[r * g + c]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best == 0.0) return 0.0;
    if (pivot != c) {
      for (std::size_t k = 0; k < g; ++k) std::swap(m[c * g + k], m[pivot * g + k]);
    }
    const double d = m[c * g + c];
    det *= d;
    for (std::size_t r = c + 1; r < g; ++r) {
      const double f = m[r * g + c] / d;
      if (f == 0.0) continue;
      for (std::size_t k = c; k < g; ++k) m[r * g + k] -= f * m[c * g + k];
    }
  }
  return std::abs(det);
}

std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw ValidationError("candidate count overflows");
  }
  return a * b;
}

}  // namespace

std::string to_string(ListKind k) { return k == ListKind::row ? "row" : "column"; }

std::size_t factorial(std::size_t g) {
  std::size_t f = 1;
  for (std::size_t i = 2; i <= g; ++i) f = checked_mul(f, i);
  return f;
}

DependencyEnumeration enumerate_dependency_lists(const Matrix& a, ListKind kind,
                                                 const std::vector<std::size_t>& required,
                                                 std::optional<double> rank_tol) {
  if (a.rows() != a.cols()) throw ValidationError("dependency lists need a square matrix");
  const auto n = static_cast<std::size_t>(a.rows());
  for (auto r : required) {
    if (r >= n) throw ValidationError("required index " + std::to_string(r) + " out of range");
  }

  DependencyEnumeration out;
  out.rank = rank_profile(a, rank_tol);
  const std::size_t g = out.rank.nullity;
  if (g == 0) {
    out.note = "already non-singular";
    return out;
  }

  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix basis = kind == ListKind::row ? svd.matrixU() : svd.matrixV();
  // Rows of `null` span the left (row kind) or right (column kind) null space.
  const Matrix null = basis.rightCols(static_cast<Eigen::Index>(g)).transpose();

  std::vector<bool> forbidden(n, false);
  std::vector<bool> fixed(n, false);
  for (std::size_t e = 0; e < n; ++e) {
    const double sq = null.col(static_cast<Eigen::Index>(e)).squaredNorm();
    if (sq < kForbiddenTol * kForbiddenTol) forbidden[e] = true;
    if (1.0 - sq < kMandatoryTol) {
      fixed[e] = true;
      out.mandatory.push_back(e);
    }
  }
  for (auto r : required) {
    if (forbidden[r]) {
      out.note = "required index " + std::to_string(r) + " cannot appear in any dependency list";
      return out;
    }
    fixed[r] = true;
  }

  std::vector<std::size_t> fixed_idx;
  std::vector<std::size_t> free_idx;
  for (std::size_t e = 0; e < n; ++e) {
    if (fixed[e]) {
      fixed_idx.push_back(e);
    } else if (!forbidden[e]) {
      free_idx.push_back(e);
    }
  }
  if (fixed_idx.size() > g || fixed_idx.size() + free_idx.size() < g) {
    out.note = "no index set satisfies the constraints";
    return out;
  }

  const std::size_t pick = g - fixed_idx.size();
  std::vector<std::size_t> choice(pick);
  std::iota(choice.begin(), choice.end(), std::size_t{0});
  std::vector<std::size_t> subset(g);
  std::vector<double> minor(g * g);
  const std::size_t m = free_idx.size();

  while (true) {
    std::copy(fixed_idx.begin(), fixed_idx.end(), subset.begin());
    for (std::size_t i = 0; i < pick; ++i) subset[fixed_idx.size() + i] = free_idx[choice[i]];
    for (std::size_t r = 0; r < g; ++r) {
      for (std::size_t c = 0; c < g; ++c) {
        minor[r * g + c] = null(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(subset[c]));
      }
    }
    if (small_det_abs(minor, g) > kMinorTol) {
      DependencyList list{kind, subset};
      std::sort(list.indices.begin(), list.indices.end());
      out.lists.push_back(std::move(list));
    }
    // Advance to the next combination in lexicographic order.
    std::size_t i = pick;
    while (i > 0 && choice[i - 1] == m - pick + (i - 1)) --i;
    if (i == 0) break;
    ++choice[i - 1];
    for (std::size_t j = i; j < pick; ++j) choice[j] = choice[j - 1] + 1;
  }
  std::sort(out.lists.begin(), out.lists.end(),
            [](const DependencyList& x, const DependencyList& y) { return x.indices < y.indices; });
  return out;
}

std::vector<std::size_t> duplicate_rows(const Matrix& a) {
  std::vector<std::size_t> dups;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (a.row(i).isZero(0.0)) continue;
    for (Eigen::Index j = 0; j < i; ++j) {
      if (a.row(j) == a.row(i)) {
        dups.push_back(static_cast<std::size_t>(i));
        break;
      }
    }
  }
  return dups;
}

Matrix PseudoPermutation::matrix(double weight) const {
  const auto size = static_cast<Eigen::Index>(n);
  Matrix q = Matrix::Zero(size, size);
  for (const auto& [r, c] : entries) {
    q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = weight;
  }
  return q;
}

namespace {

void check_pair(const DependencyList& rows, const DependencyList& cols, std::size_t n) {
  if (rows.kind != ListKind::row || cols.kind != ListKind::column) {
    throw ValidationError("pseudo-permutation needs a row list and a column list");
  }
  if (rows.indices.size() != cols.indices.size()) {
    throw ValidationError("row and column dependency lists differ in length");
  }
  for (auto i : rows.indices) {
    if (i >= n) throw ValidationError("row index out of range");
  }
  for (auto i : cols.indices) {
    if (i >= n) throw ValidationError("column index out of range");
  }
}

}  // namespace

std::vector<PseudoPermutation> pseudo_permutations(const DependencyList& rows,
                                                   const DependencyList& cols, std::size_t n) {
  check_pair(rows, cols, n);
  std::vector<std::size_t> image = cols.indices;
  std::sort(image.begin(), image.end());
  std::vector<PseudoPermutation> out;
  do {
    PseudoPermutation q{n, {}};
    for (std::size_t i = 0; i < image.size(); ++i) q.entries.emplace_back(rows.indices[i], image[i]);
    out.push_back(std::move(q));
  } while (std::next_permutation(image.begin(), image.end()));
  return out;
}

PseudoPermutation pseudo_permutation_at(const DependencyList& rows, const DependencyList& cols,
                                        std::size_t n, std::size_t index) {
  check_pair(rows, cols, n);
  const std::size_t g = rows.indices.size();
  if (index >= factorial(g)) throw ValidationError("permutation index out of range");
  std::vector<std::size_t> pool = cols.indices;
  std::sort(pool.begin(), pool.end());
  PseudoPermutation q{n, {}};
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t block = factorial(g - 1 - i);
    const std::size_t pos = index / block;
    index %= block;
    q.entries.emplace_back(rows.indices[i], pool[pos]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return q;
}

nlohmann::json to_json(const Provenance& p) {
  nlohmann::json q = nlohmann::json::array();
  for (const auto& [r, c] : p.q) q.push_back({r, c});
  nlohmann::json added = nlohmann::json::array();
  for (const auto& e : p.added) added.push_back({e.src, e.dst, e.weight});
  return {{"rows", p.rows}, {"cols", p.cols}, {"q", std::move(q)}, {"added", std::move(added)}};
}

Provenance provenance_from_json(const nlohmann::json& j) {
  try {
    Provenance p;
    p.rows = j.at("rows").get<std::vector<std::size_t>>();
    p.cols = j.at("cols").get<std::vector<std::size_t>>();
    for (const auto& e : j.at("q")) p.q.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
    for (const auto& e : j.at("added")) {
      p.added.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
    }
    return p;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed provenance JSON: ") + ex.what());
  }
}

EnvelopeExtension nonsingular_extension(const Digraph& base, const PseudoPermutation& q,
                                        double weight, bool allow_multi,
                                        const std::vector<std::size_t>& rows,
                                        const std::vector<std::size_t>& cols) {
  if (q.n != base.size()) throw ValidationError("pseudo-permutation size does not match digraph");
  if (weight == 0.0 || !std::isfinite(weight)) throw ValidationError("added-edge weight must be nonzero");
  std::vector<Edge> added;
  for (const auto& [r, c] : q.entries) added.push_back({r, c, weight});

  EnvelopeExtension ext{base, added, base.with_edges(added, allow_multi), {}};
  ext.provenance.rows = rows;
  ext.provenance.cols = cols;
  ext.provenance.q = q.entries;
  ext.provenance.added = added;
  if (rank_profile(adjacency(ext.extended)).nullity != 0) {
    throw NumericalError("extension is singular: the dependency lists are not valid for this graph");
  }
  return ext;
}

CycleCover find_cycle_cover(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("cycle cover needs a square matrix");
  const auto n = static_cast<std::size_t>(a.rows());
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0) adj[i].push_back(j);
    }
  }

  // Hopcroft-Karp: left = rows, right = columns.
  std::vector<std::size_t> match_left(n, kNone);
  std::vector<std::size_t> match_right(n, kNone);
  std::vector<std::size_t> dist(n);

  auto bfs = [&]() {
    std::queue<std::size_t> q;
    bool found = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (match_left[u] == kNone) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = kNone;
      }
    }
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        const auto w = match_right[v];
        if (w == kNone) {
          found = true;
        } else if (dist[w] == kNone) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  };

  std::vector<std::size_t> next_edge(n);
  auto dfs = [&](auto&& self, std::size_t u) -> bool {
    for (auto& i = next_edge[u]; i < adj[u].size(); ++i) {
      const auto v = adj[u][i];
      const auto w = match_right[v];
      if (w == kNone || (dist[w] == dist[u] + 1 && self(self, w))) {
        match_left[u] = v;
        match_right[v] = u;
        ++i;
        return true;
      }
    }
    dist[u] = kNone;
    return false;
  };

  std::size_t matched = 0;
  while (bfs()) {
    std::fill(next_edge.begin(), next_edge.end(), 0);
    for (std::size_t u = 0; u < n; ++u) {
      if (match_left[u] == kNone && dfs(dfs, u)) ++matched;
    }
  }
  if (matched != n) {
    throw ValidationError("support graph has no perfect matching (matrix is structurally singular)");
  }
  return {match_left, permutation_cycles(match_left)};
}

std::vector<std::vector<std::size_t>> permutation_cycles(const std::vector<std::size_t>& sigma) {
  const std::size_t n = sigma.size();
  std::vector<bool> seen(n, false);
  std::vector<std::vector<std::size_t>> cycles;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    std::vector<std::size_t> cyc;
    for (std::size_t v = start; !seen[v]; v = sigma[v]) {
      if (v >= n) throw ValidationError("sigma is not a permutation");
      seen[v] = true;
      cyc.push_back(v);
    }
    if (sigma[cyc.back()] != start) throw ValidationError("sigma is not a permutation");
    cycles.push_back(std::move(cyc));
  }
  return cycles;
}

HamiltonianChain chain_cycles(const CycleCover& cover) {
  HamiltonianChain out;
  const auto& cycles = cover.cycles;
  if (cycles.empty()) return out;
  if (cycles.size() == 1) {
    out.cycle = cycles.front();
    return out;
  }
  const std::size_t k = cycles.size();
  // Cycle m is [a_m, b_m, ..., last]; the cut edge is a_m -> b_m.
  auto cut_dst = [&](std::size_t m) { return cycles[m].size() > 1 ? cycles[m][1] : cycles[m][0]; };
  for (std::size_t m = 0; m < k; ++m) {
    out.removed.push_back({cycles[m][0], cut_dst(m), 1.0});
    out.added.push_back({cycles[m][0], cut_dst((m + 1) % k), 1.0});
  }
  // Walk b_m, ..., a_m along each cycle, then jump to b_{m+1}.
  std::vector<std::size_t> walk;
  for (std::size_t m = 0; m < k; ++m) {
    const auto& c = cycles[m];
    for (std::size_t i = 1; i < c.size(); ++i) walk.push_back(c[i]);
    walk.push_back(c[0]);
  }
  const auto zero = std::find(walk.begin(), walk.end(), std::size_t{0});
  if (zero != walk.end()) std::rotate(walk.begin(), zero, walk.end());
  out.cycle = std::move(walk);
  return out;
}

CayleyEmbedding cayley_embedding(const Digraph& g, const std::vector<std::size_t>& ham) {
  const std::size_t n = g.size();
  if (ham.size() != n) throw ValidationError("Hamiltonian cycle must visit every vertex once");
  CayleyEmbedding out;
  out.relabel.assign(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ham[i] >= n || out.relabel[ham[i]] != n) {
      throw ValidationError("Hamiltonian cycle must visit every vertex exactly once");
    }
    out.relabel[ham[i]] = i;
  }
  std::set<std::pair<std::size_t, std::size_t>> on_cycle;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = ham[i];
    const auto b = ham[(i + 1) % n];
    if (!g.has_edge(a, b)) {
      throw ValidationError("Hamiltonian cycle uses missing edge (" + std::to_string(a) + ", " +
                            std::to_string(b) + ")");
    }
    on_cycle.emplace(a, b);
  }
  std::set<std::size_t> gamma{1 % n};
  for (const auto& e : g.edges()) {
    if (on_cycle.count({e.src, e.dst})) continue;
    gamma.insert((out.relabel[e.dst] + n - out.relabel[e.src]) % n);
  }
  out.gamma = {n, {gamma.begin(), gamma.end()}};

  const Digraph cay = cayley_adjacency(out.gamma);
  for (const auto& e : g.edges()) {
    if (!cay.has_edge(out.relabel[e.src], out.relabel[e.dst])) {
      throw NumericalError("internal error: embedding does not contain the input digraph");
    }
  }
  return out;
}

Digraph cayley_adjacency(const ConnectionSet& gamma) {
  const std::size_t n = gamma.n;
  if (n == 0) throw ValidationError("connection set modulus must be positive");
  std::set<std::size_t> distinct;
  for (auto k : gamma.gamma) {
    if (k >= n) throw ValidationError("connection set residue out of range");
    distinct.insert(k);
  }
  std::vector<Edge> edges;
  for (std::size_t m = 0; m < n; ++m) {
    for (auto k : distinct) edges.push_back({m, (m + k) % n, 1.0});
  }
  return Digraph(n, std::move(edges));
}

std::vector<complex> cayley_spectrum(const ConnectionSet& gamma) {
  const std::size_t n = gamma.n;
  const double dn = static_cast<double>(n);
  std::vector<complex> values(n, complex(0.0, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (auto k : gamma.gamma) {
      const auto r = static_cast<double>((j * k) % n);
      values[j] += std::polar(1.0, 2.0 * std::numbers::pi * r / dn);
    }
  }
  return values;
}

CayleyEnvelope cayley_envelope(const Digraph& g) {
  CayleyEnvelope out;
  out.cover = find_cycle_cover(adjacency(g));
  out.chain = chain_cycles(out.cover);
  for (const auto& e : out.chain.added) {
    if (!g.has_edge(e.src, e.dst)) out.chain_edges.push_back(e);
  }
  const Digraph chained = g.with_edges(out.chain_edges, false);
  out.embedding = cayley_embedding(chained, out.chain.cycle);
  return out;
}

std::string to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::extended:
      return "extended";
    case CandidateStatus::multi_edge:
      return "multi_edge";
    case CandidateStatus::singular:
      return "singular";
    case CandidateStatus::eigen_failure:
      return "eigen_failure";
  }
  return "unknown";
}

ExtensionSearch::ExtensionSearch(Digraph base, SearchOptions opts)
    : base_(std::move(base)), opts_(std::move(opts)), adjacency_(adjacency(base_)) {
  if (opts_.weight == 0.0 || !std::isfinite(opts_.weight)) {
    throw ValidationError("added-edge weight must be nonzero");
  }
  row_enum_ = enumerate_dependency_lists(adjacency_, ListKind::row, opts_.restrict_rows);
  col_enum_ = enumerate_dependency_lists(adjacency_, ListKind::column);
}

std::size_t ExtensionSearch::total() const {
  const std::size_t g = rank().nullity;
  if (g == 0) return 1;
  return checked_mul(checked_mul(row_enum_.lists.size(), col_enum_.lists.size()), factorial(g));
}

std::size_t ExtensionSearch::size() const {
  const std::size_t t = total();
  return opts_.limit ? std::min(t, *opts_.limit) : t;
}

Candidate ExtensionSearch::evaluate(std::size_t index) const {
  if (index >= total()) throw ValidationError("candidate index out of range");
  Candidate cand;
  cand.index = index;
  const std::size_t g = rank().nullity;

  if (g == 0) {
    cand.extension = EnvelopeExtension{base_, {}, base_, {}};
  } else {
    const std::size_t perms = factorial(g);
    const std::size_t ncol = col_enum_.lists.size();
    const std::size_t pi = index % perms;
    const std::size_t ci = (index / perms) % ncol;
    const std::size_t ri = index / perms / ncol;
    const auto& rows = row_enum_.lists[ri];
    const auto& cols = col_enum_.lists[ci];
    const auto q = pseudo_permutation_at(rows, cols, base_.size(), pi);
    cand.provenance.rows = rows.indices;
    cand.provenance.cols = cols.indices;
    cand.provenance.q = q.entries;
    for (const auto& [r, c] : q.entries) cand.provenance.added.push_back({r, c, opts_.weight});

    if (!opts_.allow_multi) {
      for (const auto& [r, c] : q.entries) {
        if (base_.has_edge(r, c)) {
          cand.status = CandidateStatus::multi_edge;
          cand.message = "edge (" + std::to_string(r) + ", " + std::to_string(c) + ") already exists";
          return cand;
        }
      }
    }
    try {
      cand.extension = nonsingular_extension(base_, q, opts_.weight, opts_.allow_multi,
                                             rows.indices, cols.indices);
    } catch (const NumericalError& ex) {
      cand.status = CandidateStatus::singular;
      cand.message = ex.what();
      return cand;
    }
  }

  try {
    cand.eigen = eigendecompose(adjacency(cand.extension->extended));
  } catch (const NumericalError& ex) {
    cand.status = CandidateStatus::eigen_failure;
    cand.message = ex.what();
    return cand;
  }
  cand.verdict = is_admissible(*cand.eigen, opts_.tol);
  if (cand.verdict != Admissibility::admissible) {
    try {
      cand.fallback = cayley_envelope(cand.extension->extended);
    } catch (const std::exception& ex) {
      cand.message = std::string("no Cayley fallback: ") + ex.what();
    }
  }
  return cand;
}

std::optional<Candidate> ExtensionSearch::next() {
  if (cursor_ >= size()) return std::nullopt;
  return evaluate(cursor_++);
}

}  // namespace envelope
