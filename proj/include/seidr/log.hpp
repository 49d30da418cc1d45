#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "seidr/core.hpp"

namespace seidr {

inline constexpr int kLogSchemaVersion = 1;

// One line per created candidate.
struct CandidateRecord {
  std::string run_id;
  std::string problem_id;
  int candidate_id = 0;
  std::optional<int> parent_id;
  int generation = 0;
  std::string origin;  // draft | repair
  double temperature = 0.0;
  std::optional<std::string> instruction;
  std::string source_digest;
  std::vector<double> per_test_scores;
  double avg_score = 0.0;
  int seq = 0;
  std::string timestamp;
};

// One terminal line per run.
struct RunRecord {
  std::string run_id;
  std::string problem_id;
  std::string dataset;
  std::string language;
  std::string model;
  int beam_width = 1;
  int n_draft = 1;
  int n_explain = 1;
  int n_debug = 1;
  int max_programs = 1;
  std::string selection;
  std::uint64_t seed = 0;
  int repeat = 0;
  bool solved = false;
  std::optional<int> epg;
  int programs_generated = 0;
  int generations = 0;
  std::optional<double> final_tpr;
  double best_validation_score = 0.0;
  double last_validation_score = 0.0;
  std::string status = "completed";  // completed | aborted
  std::string error;
  int seq = 0;
  std::string timestamp;
};

struct RunLog {
  std::string run_id;
  std::vector<CandidateRecord> candidates;
  std::optional<RunRecord> result;
};

// Appends one JSON object per line, flushed per record so interrupted runs
// keep everything completed so far. With wall_clock=false timestamps are
// empty, making logs byte-identical across replays of the same seed.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path, bool wall_clock = true);

  void write(CandidateRecord record);
  void write(RunRecord record);

  const std::string& path() const { return path_; }

 private:
  std::string stamp();

  std::string path_;
  std::ofstream out_;
  bool wall_clock_;
  int seq_ = 0;
  std::mutex mutex_;
};

// Reads one or more log files and groups records by run_id, preserving
// first-seen order. Unknown record types are skipped; malformed lines throw
// DatasetError naming the file and line.
std::vector<RunLog> read_run_logs(const std::vector<std::string>& paths);

}  // namespace seidr
