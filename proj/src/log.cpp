#include "seidr/log.hpp"

#include <chrono>
#include <ctime>
#include <map>

#include <nlohmann/json.hpp>

#include "seidr/errors.hpp"

namespace seidr {

namespace {

using nlohmann::json;

json optional_int(const std::optional<int>& value) {
  if (value) return *value;
  return nullptr;
}

json optional_text(const std::optional<std::string>& value) {
  if (value) return *value;
  return nullptr;
}

json optional_real(const std::optional<double>& value) {
  if (value) return *value;
  return nullptr;
}

template <typename T>
std::optional<T> read_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return doc.at(key).get<T>();
}

}  // namespace

JsonlWriter::JsonlWriter(const std::string& path, bool wall_clock)
    : path_(path), out_(path, std::ios::app), wall_clock_(wall_clock) {
  if (!out_) throw SandboxError("cannot open log file for writing: " + path);
}

std::string JsonlWriter::stamp() {
  if (!wall_clock_) return "";
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

void JsonlWriter::write(CandidateRecord record) {
  std::lock_guard<std::mutex> lock(mutex_);
  record.seq = seq_++;
  record.timestamp = stamp();
  json doc{
      {"type", "candidate"},
      {"schema", kLogSchemaVersion},
      {"run_id", record.run_id},
      {"problem_id", record.problem_id},
      {"candidate_id", record.candidate_id},
      {"parent_id", optional_int(record.parent_id)},
      {"generation", record.generation},
      {"origin", record.origin},
      {"temperature", record.temperature},
      {"instruction", optional_text(record.instruction)},
      {"source_digest", record.source_digest},
      {"per_test_scores", record.per_test_scores},
      {"avg_score", record.avg_score},
      {"seq", record.seq},
      {"ts", record.timestamp},
  };
  out_ << doc.dump() << '\n';
  out_.flush();
}

void JsonlWriter::write(RunRecord record) {
  std::lock_guard<std::mutex> lock(mutex_);
  record.seq = seq_++;
  record.timestamp = stamp();
  json doc{
      {"type", "result"},
      {"schema", kLogSchemaVersion},
      {"run_id", record.run_id},
      {"problem_id", record.problem_id},
      {"dataset", record.dataset},
      {"language", record.language},
      {"model", record.model},
      {"config",
       {{"beam_width", record.beam_width},
        {"n_draft", record.n_draft},
        {"n_explain", record.n_explain},
        {"n_debug", record.n_debug},
        {"max_programs", record.max_programs},
        {"selection", record.selection},
        {"seed", record.seed},
        {"repeat", record.repeat}}},
      {"solved", record.solved},
      {"epg", optional_int(record.epg)},
      {"programs_generated", record.programs_generated},
      {"generations", record.generations},
      {"final_tpr", optional_real(record.final_tpr)},
      {"best_validation_score", record.best_validation_score},
      {"last_validation_score", record.last_validation_score},
      {"status", record.status},
      {"error", record.error},
      {"seq", record.seq},
      {"ts", record.timestamp},
  };
  out_ << doc.dump() << '\n';
  out_.flush();
}

std::vector<RunLog> read_run_logs(const std::vector<std::string>& paths) {
  std::vector<RunLog> logs;
  std::map<std::string, std::size_t> index;

  auto slot = [&](const std::string& run_id) -> RunLog& {
    auto it = index.find(run_id);
    if (it == index.end()) {
      index.emplace(run_id, logs.size());
      logs.push_back(RunLog{run_id, {}, std::nullopt});
      return logs.back();
    }
    return logs[it->second];
  };

  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open log file: " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json doc;
      try {
        doc = json::parse(line);
      } catch (const json::exception& e) {
        throw DatasetError(path + ":" + std::to_string(line_no) + ": malformed log line: " +
                           e.what());
      }
      try {
        const std::string type = doc.value("type", "");
        if (type == "candidate") {
          CandidateRecord record;
          record.run_id = doc.at("run_id").get<std::string>();
          record.problem_id = doc.value("problem_id", "");
          record.candidate_id = doc.at("candidate_id").get<int>();
          record.parent_id = read_optional<int>(doc, "parent_id");
          record.generation = doc.value("generation", 0);
          record.origin = doc.value("origin", "");
          record.temperature = doc.value("temperature", 0.0);
          record.instruction = read_optional<std::string>(doc, "instruction");
          record.source_digest = doc.value("source_digest", "");
          if (doc.contains("per_test_scores") && !doc.at("per_test_scores").is_null()) {
            record.per_test_scores = doc.at("per_test_scores").get<std::vector<double>>();
          }
          record.avg_score = doc.value("avg_score", 0.0);
          record.seq = doc.value("seq", 0);
          record.timestamp = doc.value("ts", "");
          slot(record.run_id).candidates.push_back(std::move(record));
        } else if (type == "result") {
          RunRecord record;
          record.run_id = doc.at("run_id").get<std::string>();
          record.problem_id = doc.value("problem_id", "");
          record.dataset = doc.value("dataset", "");
          record.language = doc.value("language", "");
          record.model = doc.value("model", "");
          if (doc.contains("config")) {
            const json& config = doc.at("config");
            record.beam_width = config.value("beam_width", 1);
            record.n_draft = config.value("n_draft", 1);
            record.n_explain = config.value("n_explain", 1);
            record.n_debug = config.value("n_debug", 1);
            record.max_programs = config.value("max_programs", 1);
            record.selection = config.value("selection", "");
            record.seed = config.value("seed", std::uint64_t{0});
            record.repeat = config.value("repeat", 0);
          }
          record.solved = doc.value("solved", false);
          record.epg = read_optional<int>(doc, "epg");
          record.programs_generated = doc.value("programs_generated", 0);
          record.generations = doc.value("generations", 0);
          record.final_tpr = read_optional<double>(doc, "final_tpr");
          record.best_validation_score = doc.value("best_validation_score", 0.0);
          record.last_validation_score = doc.value("last_validation_score", 0.0);
          record.status = doc.value("status", "completed");
          record.error = doc.value("error", "");
          record.seq = doc.value("seq", 0);
          record.timestamp = doc.value("ts", "");
          slot(record.run_id).result = std::move(record);
        }
      } catch (const json::exception& e) {
        throw DatasetError(path + ":" + std::to_string(line_no) + ": bad log record: " + e.what());
      }
    }
  }
  return logs;
}

}  // namespace seidr
