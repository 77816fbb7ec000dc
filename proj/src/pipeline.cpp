#include "envelope/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace envelope {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(v[i]);
  }
  return s;
}

std::string join_perm(const std::vector<std::pair<std::size_t, std::size_t>>& q) {
  std::string s;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(q[i].first) + '>' + std::to_string(q[i].second);
  }
  return s;
}

std::string join_edges(const std::vector<Edge>& edges) {
  std::string s;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(edges[i].src) + '>' + std::to_string(edges[i].dst) + '@' +
         format_double(edges[i].weight);
  }
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t to_index(const std::string& s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("aggregate CSV: invalid integer '" + s + "'");
  }
  return v;
}

double to_real(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("aggregate CSV: invalid number '" + s + "'");
  }
  return v;
}

Admissibility verdict_from_string(const std::string& s) {
  for (auto a : {Admissibility::admissible, Admissibility::nonsingular_only,
                 Admissibility::singular, Admissibility::defective}) {
    if (to_string(a) == s) return a;
  }
  throw ValidationError("aggregate CSV: unknown verdict '" + s + "'");
}

std::string csv_real(double v) { return std::isinf(v) ? std::string("inf") : format_double(v); }

std::vector<double> to_std(const Signal& s, bool imag) {
  std::vector<double> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    out[static_cast<std::size_t>(i)] = imag ? s(i).imag() : s(i).real();
  }
  return out;
}

}  // namespace

void validate(const FilterSpec& spec) {
  if (!(spec.tau_min >= -1.0 && spec.tau_min <= 1.0)) throw ValidationError("tau_min must lie in [-1, 1]");
  if (!(spec.cond_max >= 1.0)) throw ValidationError("cond_max must be at least 1");
  if (spec.weight == 0.0 || !std::isfinite(spec.weight)) {
    throw ValidationError("added-edge weight must be nonzero");
  }
}

std::string candidate_id(const Provenance& p) {
  const std::string text = to_json(p).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScoreDetail score_extension(const Digraph& base, const std::vector<double>& base_pagerank,
                            const Digraph& extended, const Provenance& provenance, double weight,
                            std::size_t ordinal) {
  ScoreDetail d;
  d.basis = make_gft(adjacency(extended));
  PseudoPermutation q{base.size(), provenance.q};
  d.card.ordinal = ordinal;
  d.card.provenance = provenance;
  d.card.candidate_id = candidate_id(provenance);
  d.card.verdict = Admissibility::admissible;
  d.card.scored = true;
  d.card.indices = compatibility_indices(q.matrix(weight), d.basis.inverse);
  d.card.cond = d.basis.cond;
  d.card.stability = d.basis.stability;
  d.structural = structural_report(extended, base_pagerank);
  d.card.tau = d.structural.kendall_tau;
  d.card.core = d.structural.core_count;
  d.card.periphery = d.structural.periphery_count;
  d.card.mean_clustering = d.structural.mean_clustering;
  d.card.motif_3cycle = d.structural.motif_densities.at(to_string(Motif::cycle3));
  d.card.motif_ffl = d.structural.motif_densities.at(to_string(Motif::feed_forward));
  Signal lambdas(static_cast<Eigen::Index>(d.basis.eigen.values.size()));
  for (std::size_t k = 0; k < d.basis.eigen.values.size(); ++k) {
    lambdas(static_cast<Eigen::Index>(k)) = d.basis.eigen.values[k];
  }
  d.system_impulse = d.basis.inverse * lambdas;
  return d;
}

nlohmann::json to_json(const ExtensionScorecard& c) {
  nlohmann::json j = {
      {"candidate_id", c.candidate_id},
      {"ordinal", c.ordinal},
      {"provenance", to_json(c.provenance)},
      {"admissible", to_string(c.verdict)},
  };
  if (c.scored) {
    j["delta"] = c.indices.delta;
    j["Delta"] = c.indices.big_delta;
    j["cond"] = c.cond;
    j["stability"] = {{"left", c.stability.left}, {"right", c.stability.right}};
    j["tau"] = c.tau;
    j["core"] = c.core;
    j["periphery"] = c.periphery;
    j["mean_clustering"] = c.mean_clustering;
    j["motif_3cycle"] = c.motif_3cycle;
    j["motif_ffl"] = c.motif_ffl;
  }
  return j;
}

nlohmann::json to_json(const ScoreDetail& d) {
  nlohmann::json j = to_json(d.card);
  j["structural"] = to_json(d.structural);
  j["system_impulse"] = to_json(d.system_impulse);
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : d.basis.eigen.values) values.push_back({v.real(), v.imag()});
  j["eigenvalues"] = std::move(values);
  return j;
}

nlohmann::json to_json(const RunSummary& s) {
  return {{"rank", s.rank},
          {"nullity", s.nullity},
          {"beta_row", s.beta_row},
          {"beta_col", s.beta_col},
          {"total_inv", s.total_inv},
          {"evaluated", s.evaluated},
          {"nonsingular", s.nonsingular},
          {"admissible", s.admissible},
          {"multi_edge", s.multi_edge},
          {"singular", s.singular},
          {"eigen_failures", s.eigen_failures},
          {"passing", s.passing}};
}

RunSummary run_enumeration(const Digraph& g, const FilterSpec& spec, const fs::path& out_dir,
                           const RunOptions& opts) {
  validate(spec);
  SearchOptions search_opts;
  search_opts.restrict_rows = spec.restrict_rows;
  search_opts.weight = spec.weight;
  search_opts.allow_multi = spec.allow_multi;
  search_opts.limit = opts.limit;
  search_opts.tol = opts.tol;
  const ExtensionSearch search(g, search_opts);

  RunSummary summary;
  summary.rank = search.rank().rank;
  summary.nullity = search.rank().nullity;
  summary.beta_row = search.row_lists().lists.size();
  summary.beta_col = search.column_lists().lists.size();
  summary.total_inv = search.total();

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    if (opts.write_scorecards && !opts.count_only) fs::create_directories(out_dir / "scorecards");
  }
  if (opts.count_only) {
    if (!out_dir.empty()) write_file(out_dir / "summary.json", to_json(summary).dump(2) + "\n");
    return summary;
  }

  const std::size_t count = search.size();
  const std::vector<double> base_pr = pagerank(g);
  std::vector<std::optional<ExtensionScorecard>> slots(count);
  std::vector<CandidateStatus> statuses(count, CandidateStatus::extended);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex error_mutex;
  std::string first_error;

  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const Candidate cand = search.evaluate(i);
        statuses[i] = cand.status;
        if (cand.status == CandidateStatus::extended) {
          ExtensionScorecard card;
          card.ordinal = i;
          card.provenance = cand.provenance;
          card.candidate_id = candidate_id(cand.provenance);
          card.verdict = cand.verdict;
          if (cand.verdict == Admissibility::admissible) {
            try {
              ScoreDetail detail = score_extension(g, base_pr, cand.extension->extended,
                                                   cand.provenance, spec.weight, i);
              card = detail.card;
              if (!out_dir.empty() && opts.write_scorecards) {
                write_file(out_dir / "scorecards" / (card.candidate_id + ".json"),
                           to_json(detail).dump(1) + "\n");
              }
            } catch (const NumericalError&) {
              statuses[i] = CandidateStatus::eigen_failure;
            }
          } else if (!out_dir.empty() && opts.write_scorecards) {
            write_file(out_dir / "scorecards" / (card.candidate_id + ".json"),
                       to_json(card).dump(1) + "\n");
          }
          if (statuses[i] == CandidateStatus::extended) slots[i] = std::move(card);
        }
      } catch (const std::exception& ex) {
        std::lock_guard lock(error_mutex);
        if (first_error.empty()) first_error = ex.what();
      }
      ++done;
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, std::max<std::size_t>(count, 1)));
  {
    std::vector<std::jthread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    if (opts.progress) {
      std::jthread last(worker);
      while (done.load() < count) {
        opts.progress(done.load(), count);
        std::this_thread::sleep_for(std::chrono::milliseconds(500));
      }
      opts.progress(count, count);
    } else {
      worker();
    }
  }
  if (!first_error.empty()) throw std::runtime_error(first_error);

  summary.evaluated = count;
  for (std::size_t i = 0; i < count; ++i) {
    switch (statuses[i]) {
      case CandidateStatus::multi_edge:
        ++summary.multi_edge;
        break;
      case CandidateStatus::singular:
        ++summary.singular;
        break;
      case CandidateStatus::eigen_failure:
        ++summary.nonsingular;
        ++summary.eigen_failures;
        break;
      case CandidateStatus::extended:
        ++summary.nonsingular;
        break;
    }
    if (slots[i]) {
      const auto& c = *slots[i];
      if (c.verdict == Admissibility::admissible) {
        ++summary.admissible;
        if (c.tau >= spec.tau_min && c.cond <= spec.cond_max) ++summary.passing;
      }
      summary.scorecards.push_back(c);
    }
  }

  if (!out_dir.empty()) {
    write_file(out_dir / "aggregate.csv", format_aggregate_csv(summary.scorecards));
    write_file(out_dir / "summary.json", to_json(summary).dump(2) + "\n");
  }
  return summary;
}

std::string format_aggregate_csv(const std::vector<ExtensionScorecard>& cards) {
  std::string out = std::string(kAggregateHeader) + "\n";
  for (const auto& c : cards) {
    std::vector<std::string> f{c.candidate_id,
                               join_indices(c.provenance.rows),
                               join_indices(c.provenance.cols),
                               join_perm(c.provenance.q),
                               join_edges(c.provenance.added),
                               to_string(c.verdict)};
    if (c.scored) {
      for (double v : {c.indices.delta, c.indices.big_delta, c.cond, c.stability.left,
                       c.stability.right, c.tau}) {
        f.push_back(csv_real(v));
      }
      f.push_back(std::to_string(c.core));
      f.push_back(std::to_string(c.periphery));
      for (double v : {c.mean_clustering, c.motif_3cycle, c.motif_ffl}) f.push_back(csv_real(v));
    } else {
      f.resize(17);
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) out += ',';
      out += f[i];
    }
    out += '\n';
  }
  return out;
}

std::vector<ExtensionScorecard> parse_aggregate_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kAggregateHeader) {
    throw ValidationError("aggregate CSV: unexpected header");
  }
  std::vector<ExtensionScorecard> cards;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split(line, ',');
    while (f.size() < 17) f.emplace_back();
    if (f.size() != 17) {
      throw ValidationError("aggregate CSV line " + std::to_string(line_no) + ": expected 17 fields");
    }
    ExtensionScorecard c;
    c.ordinal = cards.size();
    c.candidate_id = f[0];
    for (const auto& s : split(f[1], ';')) c.provenance.rows.push_back(to_index(s));
    for (const auto& s : split(f[2], ';')) c.provenance.cols.push_back(to_index(s));
    for (const auto& s : split(f[3], ';')) {
      const auto parts = split(s, '>');
      if (parts.size() != 2) throw ValidationError("aggregate CSV: malformed perm '" + s + "'");
      c.provenance.q.emplace_back(to_index(parts[0]), to_index(parts[1]));
    }
    for (const auto& s : split(f[4], ';')) {
      const auto gt = s.find('>');
      const auto at = s.find('@');
      if (gt == std::string::npos || at == std::string::npos || at < gt) {
        throw ValidationError("aggregate CSV: malformed edge '" + s + "'");
      }
      c.provenance.added.push_back({to_index(s.substr(0, gt)), to_index(s.substr(gt + 1, at - gt - 1)),
                                    to_real(s.substr(at + 1))});
    }
    c.verdict = verdict_from_string(f[5]);
    c.scored = !f[6].empty();
    if (c.scored) {
      c.indices.delta = to_real(f[6]);
      c.indices.big_delta = to_real(f[7]);
      c.cond = to_real(f[8]);
      c.stability.left = to_real(f[9]);
      c.stability.right = to_real(f[10]);
      c.tau = to_real(f[11]);
      c.core = to_index(f[12]);
      c.periphery = to_index(f[13]);
      c.mean_clustering = to_real(f[14]);
      c.motif_3cycle = to_real(f[15]);
      c.motif_ffl = to_real(f[16]);
    }
    cards.push_back(std::move(c));
  }
  return cards;
}

std::vector<ExtensionScorecard> load_aggregate_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_aggregate_csv(buf.str());
}

FilterResult apply_filters(const std::vector<ExtensionScorecard>& cards, const FilterSpec& spec) {
  if (cards.empty()) throw ValidationError("apply_filters: no scorecards");
  FilterResult r;
  for (const auto& c : cards) {
    if (!c.scored || c.verdict != Admissibility::admissible) continue;
    if (!r.max_tau || c.tau > r.max_tau->tau) r.max_tau = c;
    if (c.tau >= spec.tau_min) {
      ++r.tau_passing;
      if (c.cond <= spec.cond_max) r.selected.push_back(c);
    }
  }
  std::stable_sort(r.selected.begin(), r.selected.end(),
                   [](const ExtensionScorecard& a, const ExtensionScorecard& b) { return a.tau > b.tau; });
  r.status = r.selected.empty() ? "no candidates" : "ok";
  return r;
}

Digraph rebuild_extension(const Digraph& base, const ExtensionScorecard& card, bool allow_multi) {
  return base.with_edges(card.provenance.added, allow_multi);
}

std::vector<fs::path> emit_reports(const ReportInput& in, const fs::path& out_dir) {
  if (in.selection.empty()) throw ValidationError("emit_reports: empty selection");
  fs::create_directories(out_dir);
  std::vector<fs::path> manifest;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(out_dir / name, content);
    manifest.push_back(out_dir / name);
  };

  const auto base_pr = pagerank(in.base);
  const auto base_report = structural_report(in.base, base_pr);
  std::vector<ScoreDetail> details;
  for (const auto& card : in.selection) {
    details.push_back(score_extension(in.base, base_pr, rebuild_extension(in.base, card, in.allow_multi),
                                      card.provenance, card.provenance.added.empty()
                                                           ? 1.0
                                                           : card.provenance.added.front().weight,
                                      card.ordinal));
  }
  const std::size_t n = in.base.size();

  {
    std::string s = "candidate_id,delta,Delta,cond\n";
    for (const auto& c : in.all) {
      if (!c.scored) continue;
      s += c.candidate_id + ',' + csv_real(c.indices.delta) + ',' + csv_real(c.indices.big_delta) +
           ',' + csv_real(c.cond) + '\n';
    }
    emit("dist_indices.csv", s);
  }
  {
    std::string s = "candidate_id,tau\n";
    for (const auto& c : in.all) {
      if (c.scored) s += c.candidate_id + ',' + csv_real(c.tau) + '\n';
    }
    emit("dist_tau.csv", s);
  }
  auto per_node = [&](const std::string& name, const std::vector<double>& base_col,
                      auto&& column_of) {
    std::string s = "node,base";
    for (const auto& d : details) s += ',' + d.card.candidate_id;
    s += '\n';
    for (std::size_t i = 0; i < n; ++i) {
      s += std::to_string(i) + ',' + csv_real(base_col[i]);
      for (const auto& d : details) s += ',' + csv_real(column_of(d)[i]);
      s += '\n';
    }
    emit(name, s);
  };
  per_node("pagerank_compare.csv", base_pr, [](const ScoreDetail& d) { return d.structural.pagerank; });
  per_node("clustering.csv", base_report.local_clustering,
           [](const ScoreDetail& d) { return d.structural.local_clustering; });
  {
    std::string s = "graph,motif_3cycle,motif_ffl\n";
    s += "base," + csv_real(base_report.motif_densities.at("3cycle")) + ',' +
         csv_real(base_report.motif_densities.at("ffl")) + '\n';
    for (const auto& d : details) {
      s += d.card.candidate_id + ',' + csv_real(d.card.motif_3cycle) + ',' + csv_real(d.card.motif_ffl) + '\n';
    }
    emit("motif.csv", s);
  }
  {
    std::string s = "graph,core,periphery\n";
    s += "base," + std::to_string(base_report.core_count) + ',' +
         std::to_string(base_report.periphery_count) + '\n';
    for (const auto& d : details) {
      s += d.card.candidate_id + ',' + std::to_string(d.card.core) + ',' + std::to_string(d.card.periphery) + '\n';
    }
    emit("coreperiph.csv", s);
  }
  {
    std::string s = "candidate_id,stab_left,stab_right\n";
    for (const auto& d : details) {
      s += d.card.candidate_id + ',' + csv_real(d.card.stability.left) + ',' +
           csv_real(d.card.stability.right) + '\n';
    }
    emit("stability.csv", s);
  }
  {
    std::string s = "graph,r,c,weight\n";
    for (const auto& d : details) {
      for (const auto& e : d.card.provenance.added) {
        s += d.card.candidate_id + ',' + std::to_string(e.src) + ',' + std::to_string(e.dst) + ',' +
             csv_real(e.weight) + '\n';
      }
    }
    emit("added_edges.csv", s);
  }
  for (std::size_t i = 0; i < details.size(); ++i) {
    for (std::size_t j = i + 1; j < details.size(); ++j) {
      const Matrix diff = compare_bases(details[i].basis.inverse, details[j].basis.inverse);
      std::string s = "j,k,diff\n";
      for (Eigen::Index r = 0; r < diff.rows(); ++r) {
        for (Eigen::Index c = 0; c < diff.cols(); ++c) {
          s += std::to_string(r) + ',' + std::to_string(c) + ',' + csv_real(diff(r, c)) + '\n';
        }
      }
      emit("basis_diff_" + std::to_string(i) + "_" + std::to_string(j) + ".csv", s);
    }
  }
  {
    std::string s = "node";
    for (const auto& d : details) s += ',' + d.card.candidate_id + "_re," + d.card.candidate_id + "_im";
    s += '\n';
    std::vector<std::vector<double>> re, im;
    for (const auto& d : details) {
      re.push_back(to_std(d.system_impulse, false));
      im.push_back(to_std(d.system_impulse, true));
    }
    for (std::size_t i = 0; i < n; ++i) {
      s += std::to_string(i);
      for (std::size_t k = 0; k < details.size(); ++k) s += ',' + csv_real(re[k][i]) + ',' + csv_real(im[k][i]);
      s += '\n';
    }
    emit("system_signals.csv", s);
  }
  return manifest;
}

}  // namespace envelope
