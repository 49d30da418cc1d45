#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "seidr/errors.hpp"

namespace seidr {

enum class ModelRole { synth, explain, debug };

std::string to_string(ModelRole role);

struct ModelRequest {
  std::string system_message;
  std::string user_message;
  double temperature = 0.0;
  int max_tokens = 1024;
  ModelRole role = ModelRole::synth;
};

struct ModelResponse {
  std::string text;  // may be empty; an empty completion scores 0 downstream
  std::string backend_id;
  double latency_seconds = 0.0;
};

// Default completion budgets: code-producing roles get more room than the
// one-paragraph bug summaries.
int default_max_tokens(ModelRole role);

// Spring sampling schedule: the i-th of n samples (1-based) is drawn at
// temperature (i-1)/n, so the first sample is always the greedy one and later
// samples are increasingly diverse.
double temperature_for(int i, int n);

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  // Issues one completion request. Throws BackendError after the retry budget
  // or TimeoutError when every attempt ran out of time. Implementations must
  // be safe for concurrent calls.
  virtual ModelResponse complete(const ModelRequest& request) = 0;

  virtual std::string id() const = 0;
};

// Issues n copies of `request` at the spring-schedule temperatures and returns
// the responses ordered by sample index. `limit` (when >= 0) caps how many of
// the n scheduled requests are actually issued; the schedule itself is still
// computed over n.
std::vector<ModelResponse> generate_batch(const ModelRequest& request, int n,
                                          ModelBackend& backend, int limit = -1);

// Deterministic backend for tests and replayable runs. A fixture maps
// (role, call index) to completion text; indices past the end of a role's
// list repeat the last entry. Response text may contain the placeholders
// {seed}, {index} and {digest}, substituted per call, so the output is a pure
// function of (request digest, call index, seed).
class ScriptedBackend : public ModelBackend {
 public:
  using Script = std::map<ModelRole, std::vector<std::string>>;

  ScriptedBackend(Script script, std::uint64_t seed);

  // Fixture file format: a JSON object with optional "synth", "explain" and
  // "debug" keys, each a list of completion strings.
  static Script load_script(const std::string& path);
  static ScriptedBackend from_file(const std::string& path, std::uint64_t seed);

  ModelResponse complete(const ModelRequest& request) override;
  std::string id() const override { return "scripted"; }

 private:
  Script script_;
  std::uint64_t seed_;
  std::map<ModelRole, int> counters_;
  std::mutex mutex_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:11434 or https://api.example.com
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;  // optional; sent as a bearer token when non-empty
  int max_attempts = 3;
  double initial_backoff_seconds = 1.0;
  double request_timeout_seconds = 120.0;
};

// Chat-completion client speaking the de-facto JSON wire protocol: POST
// {model, messages:[{role,content}...], temperature, max_tokens}, reply in
// choices[0].message.content. Works against any server exposing that shape,
// local or remote.
class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  ModelResponse complete(const ModelRequest& request) override;
  std::string id() const override;

 private:
  HttpBackendConfig config_;
};

// The three model roles of one run. They may share a single backend instance.
struct BackendSet {
  std::shared_ptr<ModelBackend> synth;
  std::shared_ptr<ModelBackend> explain;
  std::shared_ptr<ModelBackend> debug;

  static BackendSet shared(const std::shared_ptr<ModelBackend>& backend);
};

// Stable 64-bit FNV-1a digest, hex-encoded. Used for request digests and
// source digests in run logs.
std::string fnv1a64_hex(const std::string& text);

}  // namespace seidr
