#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seidr/log.hpp"

namespace seidr {

// Test pass rate: the fraction of tests passed exactly, no partial credit.
double tpr(const std::vector<double>& per_test_scores);

// True iff the run produced a validation-perfect candidate with id < k whose
// held-out pass rate is 1.
bool run_passes_at(const RunLog& log, int k);

// Id of the first validation-perfect candidate (the count of programs
// generated before it), from the terminal record when present, otherwise from
// the candidate records of a partial log.
std::optional<int> epg_of(const RunLog& log);

enum class ReportMode { per_run, mean_over_repeats, union_over_runs };

std::string to_string(ReportMode mode);
ReportMode report_mode_from_string(const std::string& text);

struct ReportRow {
  std::string model;
  std::string arity;      // n_draft, or "draft/debug" when they differ
  std::string selection;
  int repeat = -1;        // only set in per_run mode
  std::vector<double> pass_at;  // aligned with ReportTable.ks
  int flagged = 0;  // runs validation-perfect but failing held-out tests
};

struct ReportTable {
  std::string dataset;
  std::vector<int> ks;
  std::vector<ReportRow> rows;

  std::string to_csv() const;
  std::string to_json() const;
};

// Aggregates runs into a (model, arity, selection) table of pass@k counts.
// union mode marks a problem solved if any repeat solved it; mean averages
// per-problem solve counts over repeats. Throws MixedDatasetError when the
// logs span datasets.
ReportTable report(const std::vector<RunLog>& logs, ReportMode mode,
                   std::vector<int> ks = {1, 10, 100});

}  // namespace seidr
