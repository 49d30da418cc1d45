#include "seidr/llm.hpp"

#include <chrono>
#include <fstream>
#include <thread>
#include <utility>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace seidr {

std::string to_string(ModelRole role) {
  switch (role) {
    case ModelRole::synth:
      return "synth";
    case ModelRole::explain:
      return "explain";
    case ModelRole::debug:
      return "debug";
  }
  return "synth";
}

int default_max_tokens(ModelRole role) {
  return role == ModelRole::explain ? 256 : 1024;
}

double temperature_for(int i, int n) {
  if (n < 1 || i < 1 || i > n) {
    throw RangeError("sample index " + std::to_string(i) + " outside [1, " + std::to_string(n) +
                     "]");
  }
  return static_cast<double>(i - 1) / static_cast<double>(n);
}

std::vector<ModelResponse> generate_batch(const ModelRequest& request, int n,
                                          ModelBackend& backend, int limit) {
  if (n < 1) throw RangeError("batch size must be >= 1");
  int count = (limit >= 0 && limit < n) ? limit : n;
  std::vector<ModelResponse> responses;
  responses.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    ModelRequest scheduled = request;
    scheduled.temperature = temperature_for(i, n);
    responses.push_back(backend.complete(scheduled));
  }
  return responses;
}

std::string fnv1a64_hex(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

namespace {

void replace_all(std::string& text, const std::string& needle, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
}

}  // namespace

ScriptedBackend::ScriptedBackend(Script script, std::uint64_t seed)
    : script_(std::move(script)), seed_(seed) {}

ScriptedBackend::Script ScriptedBackend::load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("cannot open fixture file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("malformed fixture file " + path + ": " + e.what());
  }
  Script script;
  const std::pair<const char*, ModelRole> roles[] = {
      {"synth", ModelRole::synth}, {"explain", ModelRole::explain}, {"debug", ModelRole::debug}};
  for (const auto& [key, role] : roles) {
    if (!doc.contains(key)) continue;
    for (const auto& entry : doc.at(key)) {
      script[role].push_back(entry.get<std::string>());
    }
  }
  return script;
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path, std::uint64_t seed) {
  return ScriptedBackend(load_script(path), seed);
}

ModelResponse ScriptedBackend::complete(const ModelRequest& request) {
  int index = 0;
  std::string text;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    index = counters_[request.role]++;
    auto it = script_.find(request.role);
    if (it == script_.end() || it->second.empty()) {
      throw BackendError("scripted backend has no entries for role " + to_string(request.role));
    }
    const auto& entries = it->second;
    std::size_t slot = std::min<std::size_t>(static_cast<std::size_t>(index), entries.size() - 1);
    text = entries[slot];
  }
  replace_all(text, "{seed}", std::to_string(seed_));
  replace_all(text, "{index}", std::to_string(index));
  replace_all(text, "{digest}", fnv1a64_hex(request.system_message + "\n" + request.user_message));
  return ModelResponse{std::move(text), id(), 0.0};
}

BackendSet BackendSet::shared(const std::shared_ptr<ModelBackend>& backend) {
  return BackendSet{backend, backend, backend};
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("backend base_url must be set");
  if (config_.max_attempts < 1) throw ConfigError("backend max_attempts must be >= 1");
}

std::string HttpBackend::id() const {
  return "http:" + (config_.model.empty() ? config_.base_url : config_.model);
}

ModelResponse HttpBackend::complete(const ModelRequest& request) {
  nlohmann::json body{
      {"model", config_.model},
      {"messages",
       {{{"role", "system"}, {"content", request.system_message}},
        {{"role", "user"}, {"content", request.user_message}}}},
      {"temperature", request.temperature},
      {"max_tokens", request.max_tokens},
  };
  const std::string payload = body.dump();

  std::string last_error;
  bool last_was_timeout = false;
  double backoff = config_.initial_backoff_seconds;

  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    auto start = std::chrono::steady_clock::now();

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(config_.request_timeout_seconds)));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(config_.request_timeout_seconds)));
    client.set_follow_location(true);
    if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

    auto result = client.Post(config_.path, payload, "application/json");
    double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!result) {
      auto err = result.error();
      last_was_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                         err == httplib::Error::Write;
      last_error = httplib::to_string(err);
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last_was_timeout = false;
      last_error = "HTTP status " + std::to_string(result->status);
      // 4xx other than 429 will not get better on retry.
      if (result->status >= 400 && result->status < 500 && result->status != 429) break;
      continue;
    }
    try {
      auto doc = nlohmann::json::parse(result->body);
      std::string text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
      return ModelResponse{std::move(text), id(), latency};
    } catch (const nlohmann::json::exception& e) {
      last_was_timeout = false;
      last_error = std::string("malformed completion payload: ") + e.what();
      continue;
    }
  }

  if (last_was_timeout) {
    throw TimeoutError("backend " + id() + " timed out: " + last_error);
  }
  throw BackendError("backend " + id() + " failed after " +
                     std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

}  // namespace seidr
