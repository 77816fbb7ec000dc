#include "envelope/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace envelope {

namespace {

bool edge_key_less(const Edge& a, const Edge& b) {
  return a.src != b.src ? a.src < b.src : a.dst < b.dst;
}

std::string edge_str(std::size_t s, std::size_t d) {
  return "(" + std::to_string(s) + ", " + std::to_string(d) + ")";
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_index(const std::string& tok, std::size_t line) {
  std::size_t v = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw ValidationError("line " + std::to_string(line) + ": invalid vertex index '" +
                          tok + "'");
  }
  return v;
}

double parse_weight(const std::string& tok, std::size_t line) {
  double v = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ValidationError("line " + std::to_string(line) + ": invalid weight '" + tok + "'");
  }
  return v;
}

struct Record {
  std::size_t line;
  Edge edge;
};

Digraph build(std::vector<Record> records, std::optional<std::size_t> n) {
  std::size_t count = n.value_or(0);
  if (!n) {
    for (const auto& r : records) count = std::max({count, r.edge.src + 1, r.edge.dst + 1});
  }
  std::vector<Edge> edges;
  edges.reserve(records.size());
  for (const auto& r : records) {
    if (r.edge.src >= count || r.edge.dst >= count) {
      throw ValidationError("line " + std::to_string(r.line) + ": vertex index out of range for n=" +
                            std::to_string(count));
    }
    if (r.edge.weight == 0.0) {
      throw ValidationError("line " + std::to_string(r.line) + ": zero weight");
    }
    edges.push_back(r.edge);
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const Record& a, const Record& b) { return edge_key_less(a.edge, b.edge); });
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!edge_key_less(records[i - 1].edge, records[i].edge)) {
      throw ValidationError("line " + std::to_string(records[i].line) + ": duplicate edge " +
                            edge_str(records[i].edge.src, records[i].edge.dst));
    }
  }
  if (count == 0) throw ValidationError("edge list defines no vertices");
  return Digraph(count, std::move(edges));
}

}  // namespace

Digraph::Digraph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> labels)
    : n_(n), edges_(std::move(edges)), labels_(std::move(labels)) {
  if (n_ == 0) throw ValidationError("digraph must have at least one vertex");
  if (!labels_.empty() && labels_.size() != n_) {
    throw ValidationError("label count does not match vertex count");
  }
  for (const auto& e : edges_) {
    if (e.src >= n_ || e.dst >= n_) {
      throw ValidationError("edge " + edge_str(e.src, e.dst) + " out of range for n=" +
                            std::to_string(n_));
    }
    if (e.weight == 0.0 || !std::isfinite(e.weight)) {
      throw ValidationError("edge " + edge_str(e.src, e.dst) + " has zero or non-finite weight");
    }
  }
  std::sort(edges_.begin(), edges_.end(), edge_key_less);
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!edge_key_less(edges_[i - 1], edges_[i])) {
      throw ValidationError("duplicate edge " + edge_str(edges_[i].src, edges_[i].dst));
    }
  }
}

Digraph Digraph::from_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("adjacency matrix must be square");
  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) {
        edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), a(i, j)});
      }
    }
  }
  return Digraph(static_cast<std::size_t>(a.rows()), std::move(edges));
}

bool Digraph::has_edge(std::size_t src, std::size_t dst) const {
  return weight(src, dst) != 0.0;
}

double Digraph::weight(std::size_t src, std::size_t dst) const {
  const Edge key{src, dst, 0.0};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key, edge_key_less);
  if (it != edges_.end() && it->src == src && it->dst == dst) return it->weight;
  return 0.0;
}

std::vector<std::size_t> Digraph::out_degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for (const auto& e : edges_) ++d[e.src];
  return d;
}

std::vector<std::size_t> Digraph::in_degrees() const {
  std::vector<std::size_t> d(n_, 0);
  for (const auto& e : edges_) ++d[e.dst];
  return d;
}

Digraph Digraph::with_edges(std::span<const Edge> extra, bool allow_multi) const {
  std::vector<Edge> merged = edges_;
  for (const auto& e : extra) {
    auto it = std::lower_bound(merged.begin(), merged.end(), e, edge_key_less);
    if (it != merged.end() && it->src == e.src && it->dst == e.dst) {
      if (!allow_multi) {
        throw ValidationError("added edge " + edge_str(e.src, e.dst) +
                              " collides with an existing edge (multi-edges not allowed)");
      }
      it->weight += e.weight;
      if (it->weight == 0.0) merged.erase(it);
    } else {
      merged.insert(it, e);
    }
  }
  return Digraph(n_, std::move(merged), labels_);
}

Matrix adjacency(const Digraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : g.edges()) {
    a(static_cast<Eigen::Index>(e.src), static_cast<Eigen::Index>(e.dst)) = e.weight;
  }
  return a;
}

Digraph parse_edge_list(const std::string& text, EdgeListFormat format,
                        std::optional<std::size_t> n) {
  std::vector<Record> records;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (format == EdgeListFormat::plain) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string> tokens;
    if (format == EdgeListFormat::csv) {
      if (!header_seen) {
        header_seen = true;
        std::string header;
        for (char c : line) {
          if (c != ' ' && c != '\t') header.push_back(c);
        }
        if (header != "src,dst,weight" && header != "src,dst") {
          throw ValidationError("line " + std::to_string(line_no) +
                                ": expected CSV header 'src,dst,weight'");
        }
        continue;
      }
      std::stringstream fields(line);
      std::string field;
      while (std::getline(fields, field, ',')) tokens.push_back(trim(field));
      if (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
    } else {
      std::istringstream fields(line);
      std::string tok;
      while (fields >> tok) tokens.push_back(tok);
    }
    if (tokens.size() < 2 || tokens.size() > 3) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": expected 'src dst [weight]', got " + std::to_string(tokens.size()) +
                            " fields");
    }
    Edge e;
    e.src = parse_index(tokens[0], line_no);
    e.dst = parse_index(tokens[1], line_no);
    e.weight = tokens.size() == 3 ? parse_weight(tokens[2], line_no) : 1.0;
    records.push_back({line_no, e});
  }
  if (format == EdgeListFormat::csv && !header_seen) {
    throw ValidationError("line 1: missing CSV header 'src,dst,weight'");
  }
  return build(std::move(records), n);
}

Digraph load_edge_list(const std::filesystem::path& path, EdgeListFormat format,
                       std::optional<std::size_t> n) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open edge list " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str(), format, n);
}

std::string format_edge_list(const Digraph& g) {
  std::string out = "# n=" + std::to_string(g.size()) + "\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(e.src) + ' ' + std::to_string(e.dst) + ' ' + format_double(e.weight) +
           '\n';
  }
  return out;
}

nlohmann::json to_json(const Digraph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges()) edges.push_back({e.src, e.dst, e.weight});
  return {{"n", g.size()}, {"edges", std::move(edges)}};
}

Digraph digraph_from_json(const nlohmann::json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& row : j.at("edges")) {
      if (row.size() != 3) throw ValidationError("edge entries must be [src, dst, weight]");
      edges.push_back({row[0].get<std::size_t>(), row[1].get<std::size_t>(), row[2].get<double>()});
    }
    return Digraph(n, std::move(edges));
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed digraph JSON: ") + ex.what());
  }
}

RankProfile rank_profile(const Matrix& a, std::optional<double> tol) {
  if (a.rows() != a.cols()) throw ValidationError("rank_profile requires a square matrix");
  const auto n = static_cast<std::size_t>(a.rows());
  if (n == 0) return {0, 0, 0.0};
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double threshold =
      tol.value_or(static_cast<double>(n) * std::numeric_limits<double>::epsilon() * s(0));
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return {rank, n - rank, threshold};
}

Digraph line_digraph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Digraph(n, std::move(edges));
}

Digraph cycle_digraph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return Digraph(n, std::move(edges));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

}  // namespace envelope
