#include "seidr/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seidr/errors.hpp"

namespace seidr {

double tpr(const std::vector<double>& per_test_scores) {
  if (per_test_scores.empty()) throw EmptyScores("test pass rate over an empty score list");
  std::size_t passed = 0;
  for (double score : per_test_scores) {
    if (score == 1.0) ++passed;
  }
  return static_cast<double>(passed) / static_cast<double>(per_test_scores.size());
}

std::optional<int> epg_of(const RunLog& log) {
  if (log.result && log.result->epg) return log.result->epg;
  if (log.result && !log.result->solved && log.result->status == "completed") return std::nullopt;
  for (const auto& candidate : log.candidates) {
    if (candidate.per_test_scores.empty()) continue;
    bool perfect = true;
    for (double score : candidate.per_test_scores) {
      if (score != 1.0) {
        perfect = false;
        break;
      }
    }
    if (perfect) return candidate.candidate_id;
  }
  return std::nullopt;
}

bool run_passes_at(const RunLog& log, int k) {
  if (k < 1) return false;
  auto epg = epg_of(log);
  if (!epg || *epg >= k) return false;
  return log.result && log.result->final_tpr && *log.result->final_tpr == 1.0;
}

std::string to_string(ReportMode mode) {
  switch (mode) {
    case ReportMode::per_run:
      return "per_run";
    case ReportMode::mean_over_repeats:
      return "mean";
    case ReportMode::union_over_runs:
      return "union";
  }
  return "per_run";
}

ReportMode report_mode_from_string(const std::string& text) {
  if (text == "per_run" || text == "per-run") return ReportMode::per_run;
  if (text == "mean" || text == "mean_over_repeats") return ReportMode::mean_over_repeats;
  if (text == "union" || text == "union_over_runs") return ReportMode::union_over_runs;
  throw ConfigError("unknown report mode: " + text);
}

namespace {

struct GroupKey {
  std::string model;
  std::string arity;
  std::string selection;

  bool operator<(const GroupKey& other) const {
    return std::tie(model, arity, selection) <
           std::tie(other.model, other.arity, other.selection);
  }
};

std::string arity_label(const RunRecord& record) {
  if (record.n_draft == record.n_debug) return std::to_string(record.n_draft);
  return std::to_string(record.n_draft) + "/" + std::to_string(record.n_debug);
}

std::string format_count(double value) {
  std::ostringstream out;
  if (value == static_cast<double>(static_cast<long long>(value))) {
    out << static_cast<long long>(value);
  } else {
    out << std::fixed;
    out.precision(2);
    out << value;
  }
  return out.str();
}

}  // namespace

ReportTable report(const std::vector<RunLog>& logs, ReportMode mode, std::vector<int> ks) {
  ReportTable table;
  table.ks = std::move(ks);

  // group -> problem -> (repeat -> passes per k), plus flags
  struct ProblemRuns {
    std::vector<const RunLog*> runs;
  };
  std::map<GroupKey, std::map<std::string, ProblemRuns>> groups;

  for (const auto& log : logs) {
    if (!log.result) continue;  // partial run without a terminal record
    const RunRecord& result = *log.result;
    if (table.dataset.empty()) {
      table.dataset = result.dataset;
    } else if (result.dataset != table.dataset) {
      throw MixedDatasetError("report mixes datasets " + table.dataset + " and " +
                              result.dataset);
    }
    GroupKey key{result.model, arity_label(result), result.selection};
    groups[key][result.problem_id].runs.push_back(&log);
  }

  for (const auto& [key, problems] : groups) {
    int flagged = 0;
    for (const auto& [problem_id, runs] : problems) {
      for (const RunLog* run : runs.runs) {
        if (run->result->solved &&
            (!run->result->final_tpr || *run->result->final_tpr != 1.0)) {
          ++flagged;
        }
      }
    }

    if (mode == ReportMode::per_run) {
      std::set<int> repeats;
      for (const auto& [problem_id, runs] : problems) {
        for (const RunLog* run : runs.runs) repeats.insert(run->result->repeat);
      }
      for (int repeat : repeats) {
        int repeat_flagged = 0;
        for (const auto& [problem_id, runs] : problems) {
          for (const RunLog* run : runs.runs) {
            if (run->result->repeat == repeat && run->result->solved &&
                (!run->result->final_tpr || *run->result->final_tpr != 1.0)) {
              ++repeat_flagged;
            }
          }
        }
        ReportRow row{key.model, key.arity, key.selection, repeat, {}, repeat_flagged};
        for (int k : table.ks) {
          double count = 0;
          for (const auto& [problem_id, runs] : problems) {
            for (const RunLog* run : runs.runs) {
              if (run->result->repeat == repeat && run_passes_at(*run, k)) {
                count += 1;
                break;
              }
            }
          }
          row.pass_at.push_back(count);
        }
        table.rows.push_back(std::move(row));
      }
    } else {
      ReportRow row{key.model, key.arity, key.selection, -1, {}, flagged};
      for (int k : table.ks) {
        double count = 0;
        for (const auto& [problem_id, runs] : problems) {
          int solved = 0;
          for (const RunLog* run : runs.runs) {
            if (run_passes_at(*run, k)) ++solved;
          }
          if (mode == ReportMode::union_over_runs) {
            count += solved > 0 ? 1.0 : 0.0;
          } else {
            count += static_cast<double>(solved) / static_cast<double>(runs.runs.size());
          }
        }
        row.pass_at.push_back(count);
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

std::string ReportTable::to_csv() const {
  std::ostringstream out;
  out << "model,arity,selection,repeat";
  for (int k : ks) out << ",pass@" << k;
  out << ",flagged\n";
  for (const auto& row : rows) {
    out << row.model << ',' << row.arity << ',' << row.selection << ',';
    if (row.repeat >= 0) out << row.repeat;
    else out << '-';
    for (double value : row.pass_at) out << ',' << format_count(value);
    out << ',' << row.flagged << '\n';
  }
  return out.str();
}

std::string ReportTable::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json entry{
        {"model", row.model},
        {"arity", row.arity},
        {"selection", row.selection},
        {"flagged", row.flagged},
    };
    if (row.repeat >= 0) entry["repeat"] = row.repeat;
    nlohmann::json pass;
    for (std::size_t i = 0; i < ks.size() && i < row.pass_at.size(); ++i) {
      pass["pass@" + std::to_string(ks[i])] = row.pass_at[i];
    }
    entry["pass"] = pass;
    rows_json.push_back(std::move(entry));
  }
  nlohmann::json doc{{"dataset", dataset}, {"rows", rows_json}};
  return doc.dump(2);
}

}  // namespace seidr
