// End-to-end envelope search: enumerate, score, filter, report.

#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "envelope/convolution.hpp"
#include "envelope/extension.hpp"
#include "envelope/metrics.hpp"
#include "envelope/spectral.hpp"

namespace envelope {

struct FilterSpec {
  double tau_min = 0.91;
  double cond_max = 80.0;
  std::vector<std::size_t> restrict_rows;
  bool allow_multi = false;
  double weight = 1.0;
};

/// Throws ValidationError unless tau_min is in [-1, 1], cond_max >= 1 and
/// weight is nonzero.
void validate(const FilterSpec& spec);

/// Scalar summary of one candidate; the row type of the aggregate CSV.
/// Spectral and structural fields are set only for admissible candidates.
struct ExtensionScorecard {
  std::size_t ordinal = 0;
  std::string candidate_id;
  Provenance provenance;
  Admissibility verdict = Admissibility::singular;
  bool scored = false;
  CompatibilityIndices indices;
  double cond = 0.0;
  StabilityNorms stability;
  double tau = 0.0;
  std::size_t core = 0;
  std::size_t periphery = 0;
  double mean_clustering = 0.0;
  double motif_3cycle = 0.0;
  double motif_ffl = 0.0;
};

/// FNV-1a 64 of the provenance JSON, as 16 hex digits.
std::string candidate_id(const Provenance& p);

/// Full evaluation of an admissible candidate.
struct ScoreDetail {
  ExtensionScorecard card;
  GftBasis basis;
  StructuralReport structural;
  Signal system_impulse;  // F^-1 D 1
};

ScoreDetail score_extension(const Digraph& base, const std::vector<double>& base_pagerank,
                            const Digraph& extended, const Provenance& provenance, double weight,
                            std::size_t ordinal);

nlohmann::json to_json(const ScoreDetail& d);
nlohmann::json to_json(const ExtensionScorecard& c);

struct RunOptions {
  std::size_t jobs = 1;
  bool count_only = false;
  bool write_scorecards = true;
  Tolerances tol;
  std::optional<std::size_t> limit;
  /// Called from the collecting thread with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct RunSummary {
  std::size_t rank = 0;
  std::size_t nullity = 0;
  std::size_t beta_row = 0;
  std::size_t beta_col = 0;
  std::size_t total_inv = 0;
  std::size_t evaluated = 0;
  std::size_t nonsingular = 0;
  std::size_t admissible = 0;
  std::size_t multi_edge = 0;
  std::size_t singular = 0;
  std::size_t eigen_failures = 0;
  std::size_t passing = 0;
  std::vector<ExtensionScorecard> scorecards;  // canonical order
};

nlohmann::json to_json(const RunSummary& s);

inline constexpr const char* kAggregateHeader =
    "candidate_id,rows,cols,perm,added_edges,admissible,delta,Delta,cond,stab_left,stab_right,tau,"
    "core,periphery,mean_clustering,motif_3cycle,motif_ffl";

/// Evaluates every candidate of the search. When `out_dir` is non-empty,
/// writes `aggregate.csv`, `summary.json` and (unless disabled)
/// `scorecards/<candidate_id>.json`. Output is identical for any `jobs`.
RunSummary run_enumeration(const Digraph& g, const FilterSpec& spec,
                           const std::filesystem::path& out_dir, const RunOptions& opts = {});

std::string format_aggregate_csv(const std::vector<ExtensionScorecard>& cards);
std::vector<ExtensionScorecard> parse_aggregate_csv(const std::string& text);
std::vector<ExtensionScorecard> load_aggregate_csv(const std::filesystem::path& path);

struct FilterResult {
  std::vector<ExtensionScorecard> selected;  // descending tau
  std::size_t tau_passing = 0;
  std::optional<ExtensionScorecard> max_tau;
  std::string status;
};

/// Keeps admissible candidates with tau >= tau_min and cond <= cond_max.
/// Throws ValidationError on empty input.
FilterResult apply_filters(const std::vector<ExtensionScorecard>& cards, const FilterSpec& spec);

/// Extended digraph described by a scorecard's provenance.
Digraph rebuild_extension(const Digraph& base, const ExtensionScorecard& card, bool allow_multi);

struct ReportInput {
  Digraph base;
  std::vector<ExtensionScorecard> all;
  std::vector<ExtensionScorecard> selection;
  bool allow_multi = false;
};

/// Writes the figure CSVs; returns the files written.
std::vector<std::filesystem::path> emit_reports(const ReportInput& in,
                                                const std::filesystem::path& out_dir);

}  // namespace envelope
