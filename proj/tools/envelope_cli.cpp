// envelope: command-line driver for envelope extensions of directed graphs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "envelope/convolution.hpp"
#include "envelope/extension.hpp"
#include "envelope/graph.hpp"
#include "envelope/metrics.hpp"
#include "envelope/pipeline.hpp"
#include "envelope/spectral.hpp"

namespace fs = std::filesystem;
using namespace envelope;

namespace {

struct Globals {
  double tol_zero = 1e-10;
  double tol_gap = 1e-8;
  double weight = 1.0;
  bool allow_multi = false;
  std::string restrict_rows;
  std::size_t jobs = 1;
  std::string out;
  std::uint64_t seed = 0;

  Tolerances tolerances() const {
    Tolerances t;
    t.zero = tol_zero;
    t.gap = tol_gap;
    return t;
  }

  fs::path out_dir() const {
    if (!out.empty()) return out;
    if (const char* env = std::getenv("ENVELOPE_OUT")) return env;
    return "envelope_out";
  }
};

struct GraphArgs {
  std::string path;
  std::string format = "plain";

  Digraph load() const {
    if (path.empty()) throw ValidationError("--graph is required");
    const auto fmt = format == "csv" ? EdgeListFormat::csv : EdgeListFormat::plain;
    if (format != "csv" && format != "plain") throw ValidationError("--format must be plain or csv");
    return load_edge_list(path, fmt);
  }
};

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
  cmd->add_option("--graph", g.path, "Edge-list file");
  cmd->add_option("--format", g.format, "Edge-list format: plain or csv");
}

std::vector<std::size_t> read_index_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open --restrict-rows file " + path);
  std::vector<std::size_t> out;
  std::string tok;
  while (in >> tok) {
    if (tok.front() == '#') {
      std::getline(in, tok);
      continue;
    }
    try {
      out.push_back(std::stoul(tok));
    } catch (const std::exception&) {
      throw ValidationError("--restrict-rows: invalid index '" + tok + "'");
    }
  }
  return out;
}

std::string with_commas(std::size_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

FilterSpec make_spec(const Globals& g, double tau_min, double cond_max) {
  FilterSpec spec;
  spec.tau_min = tau_min;
  spec.cond_max = cond_max;
  spec.weight = g.weight;
  spec.allow_multi = g.allow_multi;
  if (!g.restrict_rows.empty()) spec.restrict_rows = read_index_file(g.restrict_rows);
  return spec;
}

void print_summary(const RunSummary& s) {
  std::cout << "rank " << s.rank << ", nullity " << s.nullity << "\n"
            << "row dependency lists " << s.beta_row << ", column dependency lists " << s.beta_col
            << "\n"
            << "Total_Inv = " << with_commas(s.total_inv) << "\n";
  if (s.evaluated > 0) {
    std::cout << "evaluated " << s.evaluated << ", non-singular " << s.nonsingular << ", admissible "
              << s.admissible << ", multi-edge rejected " << s.multi_edge << ", singular "
              << s.singular << ", eigensolver failures " << s.eigen_failures << ", passing filters "
              << s.passing << "\n";
  }
}

RunOptions run_options(const Globals& g, bool count_only, bool no_scorecards,
                       std::optional<std::size_t> limit) {
  RunOptions opts;
  opts.jobs = g.jobs;
  opts.count_only = count_only;
  opts.write_scorecards = !no_scorecards;
  opts.tol = g.tolerances();
  opts.limit = limit;
  return opts;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ValidationError("invalid number '" + tok + "' in list");
    }
  }
  return out;
}

// Singular 12-vertex digraph used when no dataset is supplied: a line with
// two branches, a sink and a duplicated row.
Digraph demo_graph() {
  return parse_edge_list(
      "0 1\n1 2\n2 3\n3 4\n4 5\n5 0\n6 7\n7 8\n8 6\n2 9\n9 10\n10 11\n"
      "6 2\n1 6\n11 4\n3 7\n",
      EdgeListFormat::plain);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Admissible envelope extensions and graph Fourier transforms for digraphs"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals glob;
  app.add_option("--tol-zero", glob.tol_zero, "Relative threshold for a zero eigenvalue");
  app.add_option("--tol-gap", glob.tol_gap, "Relative threshold for repeated eigenvalues");
  app.add_option("--weight", glob.weight, "Weight of added edges");
  app.add_flag("--allow-multi", glob.allow_multi, "Sum weights when an added edge already exists");
  app.add_option("--restrict-rows", glob.restrict_rows,
                 "File of row indices every row dependency list must contain");
  app.add_option("--jobs", glob.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", glob.out, "Output directory (default $ENVELOPE_OUT or ./envelope_out)");
  app.add_option("--seed", glob.seed,
                 "Accepted for interface stability; no subcommand draws random numbers");

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "Enumerate and score envelope extensions");
  GraphArgs enum_graph;
  bool count_only = false;
  bool no_scorecards = false;
  bool detect_dups = false;
  std::optional<std::size_t> limit;
  add_graph_options(enumerate, enum_graph);
  enumerate->add_flag("--count-only", count_only, "Only count candidates (Total_Inv)");
  enumerate->add_flag("--no-scorecards", no_scorecards, "Skip per-candidate JSON files");
  enumerate->add_flag("--detect-duplicate-rows", detect_dups,
                      "Restrict row lists to those containing the duplicated rows");
  enumerate->add_option("--limit", limit, "Evaluate at most this many candidates");

  // filter
  auto* filter = app.add_subcommand("filter", "Apply tau / condition-number filters");
  std::string filter_csv;
  double tau_min = 0.91;
  double cond_max = 80.0;
  filter->add_option("--aggregate", filter_csv, "Aggregate CSV (default <out>/aggregate.csv)");
  filter->add_option("--tau-min", tau_min, "Minimum Kendall tau");
  filter->add_option("--cond-max", cond_max, "Maximum condition number");

  // report
  auto* report = app.add_subcommand("report", "Write figure CSVs for the filtered selection");
  GraphArgs report_graph;
  std::string report_csv;
  add_graph_options(report, report_graph);
  report->add_option("--aggregate", report_csv, "Aggregate CSV (default <out>/aggregate.csv)");
  report->add_option("--tau-min", tau_min, "Minimum Kendall tau");
  report->add_option("--cond-max", cond_max, "Maximum condition number");

  // convolve
  auto* conv = app.add_subcommand("convolve", "Convolution product on an admissible digraph");
  GraphArgs conv_graph;
  std::string sig_x;
  std::string sig_y;
  std::string poly;
  add_graph_options(conv, conv_graph);
  conv->add_option("--x", sig_x, "First signal: delta:k or JSON [[re,im],...]")->required();
  conv->add_option("--y", sig_y, "Second signal (omit with --poly)");
  conv->add_option("--poly", poly, "Apply the system h(A) with comma-separated coefficients");

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Structural metrics of a digraph");
  GraphArgs metrics_graph;
  add_graph_options(metrics, metrics_graph);

  // cayley
  auto* cayley = app.add_subcommand("cayley", "Spectrum of Cay(Z_n, gamma)");
  std::size_t cay_n = 0;
  std::string cay_gamma;
  cayley->add_option("--n", cay_n, "Group order")->required()->check(CLI::PositiveNumber);
  cayley->add_option("--gamma", cay_gamma, "Comma-separated connection set")->required();

  // repro-line
  auto* line = app.add_subcommand("repro-line", "Weighted line-to-cycle closed forms");
  std::size_t line_n = 16;
  std::string line_weights = "1,0.5,0.01";
  line->add_option("--n", line_n, "Cycle length")->check(CLI::Range(2, 4096));
  line->add_option("--weights", line_weights, "Comma-separated edge weights");

  // repro-friendship
  auto* friendship = app.add_subcommand("repro-friendship", "Full pipeline on a digraph data set");
  GraphArgs fr_graph;
  bool demo = false;
  bool fr_dups = true;
  add_graph_options(friendship, fr_graph);
  friendship->add_flag("--demo", demo, "Use the bundled 12-vertex demo digraph");
  friendship->add_flag("!--no-duplicate-rows", fr_dups, "Do not restrict to duplicated rows");
  friendship->add_option("--tau-min", tau_min, "Minimum Kendall tau");
  friendship->add_option("--cond-max", cond_max, "Maximum condition number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*enumerate) {
      const Digraph g = enum_graph.load();
      FilterSpec spec = make_spec(glob, tau_min, cond_max);
      if (detect_dups) {
        const auto dups = duplicate_rows(adjacency(g));
        spec.restrict_rows.insert(spec.restrict_rows.end(), dups.begin(), dups.end());
        std::cout << "duplicate rows:";
        for (auto r : dups) std::cout << ' ' << r;
        std::cout << "\n";
      }
      const auto out = glob.out_dir();
      const auto summary = run_enumeration(g, spec, out, run_options(glob, count_only, no_scorecards, limit));
      print_summary(summary);
      if (!count_only) std::cout << "wrote " << (out / "aggregate.csv").string() << "\n";
      return 0;
    }

    if (*filter) {
      const fs::path csv = filter_csv.empty() ? glob.out_dir() / "aggregate.csv" : fs::path(filter_csv);
      const auto cards = load_aggregate_csv(csv);
      FilterSpec spec;
      spec.tau_min = tau_min;
      spec.cond_max = cond_max;
      const auto result = apply_filters(cards, spec);
      std::cout << "tau >= " << tau_min << ": " << result.tau_passing << "\n"
                << "tau >= " << tau_min << " and cond <= " << cond_max << ": "
                << result.selected.size() << " (" << result.status << ")\n";
      if (result.max_tau) {
        std::cout << "max tau overall: " << result.max_tau->candidate_id << " tau "
                  << format_double(result.max_tau->tau) << " cond " << format_double(result.max_tau->cond)
                  << "\n";
      }
      for (const auto& c : result.selected) {
        std::cout << "  " << c.candidate_id << " tau " << format_double(c.tau) << " cond "
                  << format_double(c.cond) << "\n";
      }
      fs::create_directories(glob.out_dir());
      std::ofstream(glob.out_dir() / "selection.csv", std::ios::binary) << format_aggregate_csv(result.selected);
      return 0;
    }

    if (*report) {
      const Digraph g = report_graph.load();
      const fs::path csv = report_csv.empty() ? glob.out_dir() / "aggregate.csv" : fs::path(report_csv);
      ReportInput input{g, load_aggregate_csv(csv), {}, glob.allow_multi};
      FilterSpec spec;
      spec.tau_min = tau_min;
      spec.cond_max = cond_max;
      input.selection = apply_filters(input.all, spec).selected;
      if (input.selection.empty()) throw ValidationError("no candidates pass the filters; nothing to report");
      for (const auto& p : emit_reports(input, glob.out_dir())) std::cout << p.string() << "\n";
      return 0;
    }

    if (*conv) {
      const Digraph g = conv_graph.load();
      const auto tol = glob.tolerances();
      const auto eigen = eigendecompose(adjacency(g));
      const auto verdict = is_admissible(eigen, tol);
      if (verdict != Admissibility::admissible) {
        throw ValidationError("digraph is not admissible (" + to_string(verdict) + ")");
      }
      const ConvolutionContext ctx(make_gft(eigen), tol);
      const Signal x = parse_signal(sig_x, g.size());
      Signal result;
      if (!poly.empty()) {
        SystemPolynomial h;
        for (double c : parse_list(poly)) h.coefficients.emplace_back(c, 0.0);
        result = apply_system(ctx, h, x);
      } else {
        if (sig_y.empty()) throw ValidationError("--y or --poly is required");
        result = convolve(ctx, x, parse_signal(sig_y, g.size()));
      }
      std::cout << to_json(result).dump() << "\n";
      return 0;
    }

    if (*metrics) {
      const Digraph g = metrics_graph.load();
      std::cout << to_json(structural_report(g)).dump(2) << "\n";
      return 0;
    }

    if (*cayley) {
      ConnectionSet gamma{cay_n, {}};
      for (double v : parse_list(cay_gamma)) {
        if (v < 0 || v != std::floor(v)) throw ValidationError("--gamma entries must be residues");
        gamma.gamma.push_back(static_cast<std::size_t>(v) % cay_n);
      }
      std::sort(gamma.gamma.begin(), gamma.gamma.end());
      gamma.gamma.erase(std::unique(gamma.gamma.begin(), gamma.gamma.end()), gamma.gamma.end());
      const auto values = cayley_spectrum(gamma);
      const CMatrix a = adjacency(cayley_adjacency(gamma)).cast<complex>();
      const CMatrix v = inverse_dft(cay_n);
      Eigen::VectorXcd d(static_cast<Eigen::Index>(cay_n));
      for (std::size_t j = 0; j < cay_n; ++j) d(static_cast<Eigen::Index>(j)) = values[j];
      const double residual = (a * v - v * d.asDiagonal()).norm();
      std::cout << std::setprecision(12);
      for (std::size_t j = 0; j < cay_n; ++j) {
        std::cout << "lambda[" << j << "] = " << values[j].real() << (values[j].imag() < 0 ? " - " : " + ")
                  << std::abs(values[j].imag()) << "i\n";
      }
      std::cout << "||A V - V D||_F = " << std::scientific << residual << "\n";
      if (residual > 1e-8 * std::max(1.0, a.norm())) {
        std::cerr << "DFT does not diagonalize the Cayley adjacency\n";
        return 2;
      }
      std::cout << "DFT diagonalization verified\n";
      return 0;
    }

    if (*line) {
      std::cout << "w,delta,Delta,cond,delta_closed,Delta_closed,cond_closed\n";
      std::cout << std::setprecision(10);
      for (double w : parse_list(line_weights)) {
        const Digraph base = line_digraph(line_n);
        PseudoPermutation q{line_n, {{line_n - 1, 0}}};
        const auto ext = nonsingular_extension(base, q, w, false, {line_n - 1}, {0});
        const auto basis = weighted_cycle_basis(line_n, w);
        const auto idx = compatibility_indices(q.matrix(w), basis.inverse);
        const double sqrt_n = std::sqrt(static_cast<double>(line_n));
        std::cout << w << ',' << idx.delta << ',' << idx.big_delta << ',' << basis.cond << ','
                  << w / sqrt_n << ',' << w << ',' << weighted_cycle_condition(line_n, w) << "\n";
        (void)ext;
      }
      return 0;
    }

    if (*friendship) {
      const Digraph g = demo ? demo_graph() : fr_graph.load();
      const Matrix a = adjacency(g);
      const auto out = glob.out_dir();
      FilterSpec spec = make_spec(glob, tau_min, cond_max);

      const auto rank = rank_profile(a);
      std::cout << "vertices " << g.size() << ", edges " << g.edges().size() << "\n";
      std::size_t zero_cols = 0;
      for (Eigen::Index j = 0; j < a.cols(); ++j) zero_cols += a.col(j).isZero(0.0) ? 1 : 0;
      std::cout << "zero columns " << zero_cols << "\n";

      RunOptions count_opts = run_options(glob, true, true, std::nullopt);
      FilterSpec unrestricted = spec;
      unrestricted.restrict_rows.clear();
      print_summary(run_enumeration(g, unrestricted, {}, count_opts));

      if (fr_dups && rank.nullity > 0) {
        const auto dups = duplicate_rows(a);
        std::cout << "duplicate rows:";
        for (auto r : dups) std::cout << ' ' << r;
        std::cout << "\n";
        spec.restrict_rows.insert(spec.restrict_rows.end(), dups.begin(), dups.end());
      }
      RunOptions opts = run_options(glob, false, false, std::nullopt);
      opts.progress = [](std::size_t done, std::size_t total) {
        std::cerr << "\r" << done << "/" << total << std::flush;
        if (done == total) std::cerr << "\n";
      };
      const auto summary = run_enumeration(g, spec, out / "enumeration", opts);
      print_summary(summary);

      double dmin = 0, dmax = 0, Dmin = 0, Dmax = 0, cmin = 0, cmax = 0;
      bool first = true;
      for (const auto& c : summary.scorecards) {
        if (!c.scored) continue;
        if (first) {
          dmin = dmax = c.indices.delta;
          Dmin = Dmax = c.indices.big_delta;
          cmin = cmax = c.cond;
          first = false;
        }
        dmin = std::min(dmin, c.indices.delta);
        dmax = std::max(dmax, c.indices.delta);
        Dmin = std::min(Dmin, c.indices.big_delta);
        Dmax = std::max(Dmax, c.indices.big_delta);
        cmin = std::min(cmin, c.cond);
        cmax = std::max(cmax, c.cond);
      }
      if (!first) {
        std::cout << "delta [" << dmin << ", " << dmax << "], Delta [" << Dmin << ", " << Dmax
                  << "], cond [" << cmin << ", " << cmax << "]\n";
      }
      if (summary.scorecards.empty()) throw ValidationError("no non-singular extensions found");
      const auto filtered = apply_filters(summary.scorecards, spec);
      std::cout << "tau-passing " << filtered.tau_passing << ", envelopes " << filtered.selected.size()
                << "\n";
      if (filtered.max_tau) {
        std::cout << "max tau " << format_double(filtered.max_tau->tau) << " (cond "
                  << format_double(filtered.max_tau->cond) << ")\n";
      }
      if (!filtered.selected.empty()) {
        const auto& best = filtered.selected.front();
        std::cout << "best envelope tau " << format_double(best.tau) << " cond " << format_double(best.cond)
                  << "\n";
        ReportInput input{g, summary.scorecards, filtered.selected, spec.allow_multi};
        for (const auto& p : emit_reports(input, out / "figures")) std::cout << p.string() << "\n";
      } else {
        std::cout << "no envelopes pass the filters; figure CSVs not written\n";
      }
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
