#include "hgmem/http_providers.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "hgmem/errors.hpp"
#include "hgmem/prompts.hpp"
#include "hgmem/text.hpp"
#include "hgmem/vector_index.hpp"

namespace hgmem::http {

using nlohmann::json;

namespace {

int int_value(const KeyValueConfig& kv, const std::string& key, int fallback) {
  if (!kv.contains(key)) return fallback;
  try {
    return std::stoi(kv.get(key, ""));
  } catch (const std::exception&) {
    throw ValidationError("config key " + key + " must be an integer");
  }
}

/// Accumulates tokens across the requests of one provider invocation and
/// appends a single call-log record on scope exit.
class CallScope {
 public:
  CallScope(CallLog* log, std::string_view provider)
      : log_(log), provider_(provider), start_(std::chrono::steady_clock::now()) {}
  ~CallScope() {
    if (!log_) return;
    const auto elapsed = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::steady_clock::now() - start_);
    log_->append(CallRecord{provider_, input, output, elapsed});
  }
  CallScope(const CallScope&) = delete;
  CallScope& operator=(const CallScope&) = delete;

  std::uint64_t input = 0;
  std::uint64_t output = 0;

 private:
  CallLog* log_;
  std::string provider_;
  std::chrono::steady_clock::time_point start_;
};

std::uint64_t usage_field(const json& body, const char* key) {
  auto u = body.find("usage");
  if (u == body.end() || !u->is_object()) return 0;
  auto v = u->find(key);
  if (v == u->end() || !v->is_number_unsigned()) return 0;
  return v->get<std::uint64_t>();
}

}  // namespace

HttpConfig HttpConfig::from(const KeyValueConfig& kv) {
  HttpConfig c;
  c.base_url = kv.get("http.base_url", c.base_url);
  c.chat_path = kv.get("http.chat_path", c.chat_path);
  c.embeddings_path = kv.get("http.embeddings_path", c.embeddings_path);
  c.rerank_path = kv.get("http.rerank_path", c.rerank_path);
  c.chat_model = kv.get("http.chat_model", c.chat_model);
  c.embedding_model = kv.get("http.embedding_model", c.embedding_model);
  c.rerank_model = kv.get("http.rerank_model", c.rerank_model);
  c.api_key_env = kv.get("http.api_key_env", c.api_key_env);
  c.max_attempts = int_value(kv, "http.max_attempts", c.max_attempts);
  c.backoff = std::chrono::milliseconds(int_value(kv, "http.backoff_ms", static_cast<int>(c.backoff.count())));
  c.timeout = std::chrono::milliseconds(int_value(kv, "http.timeout_ms", static_cast<int>(c.timeout.count())));
  if (c.max_attempts < 1) throw ValidationError("http.max_attempts must be at least 1");
  return c;
}

std::optional<json> extract_json_object(std::string_view text) {
  const auto start = text.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      auto parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
      return parsed;
    }
  }
  return std::nullopt;
}

struct Client::Impl {
  explicit Impl(const HttpConfig& c) : http(c.base_url) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(c.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(c.timeout - secs);
    http.set_connection_timeout(secs.count(), usecs.count());
    http.set_read_timeout(secs.count(), usecs.count());
    http.set_write_timeout(secs.count(), usecs.count());
    if (!c.api_key_env.empty()) {
      if (const char* key = std::getenv(c.api_key_env.c_str()); key && *key) {
        http.set_bearer_token_auth(key);
      }
    }
  }
  std::mutex mutex;
  httplib::Client http;
};

Client::Client(HttpConfig config, std::shared_ptr<CallLog> log)
    : impl_(std::make_unique<Impl>(config)), config_(std::move(config)), log_(std::move(log)) {}

Client::~Client() = default;

Client::Reply Client::post(const std::string& path, const json& body) {
  const auto payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    httplib::Result res;
    {
      std::lock_guard lock(impl_->mutex);
      res = impl_->http.Post(path, payload, "application/json");
    }
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw ProviderError(path + ": HTTP " + std::to_string(res->status) + ": " + res->body, false);
    }
    auto parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw ParseError(path + ": response body is not JSON");
    Reply r;
    r.input_tokens = usage_field(parsed, "prompt_tokens");
    r.output_tokens = usage_field(parsed, "completion_tokens");
    r.body = std::move(parsed);
    return r;
  }
  throw ProviderError(path + ": gave up after " + std::to_string(config_.max_attempts) + " attempts: " + last_error);
}

Client::Reply Client::chat_once(const std::string& prompt) {
  const json body{{"model", config_.chat_model},
                  {"temperature", 0},
                  {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  auto reply = post(config_.chat_path, body);
  const auto& choices = reply.body.find("choices");
  if (choices == reply.body.end() || !choices->is_array() || choices->empty()) {
    throw ParseError("chat response has no choices");
  }
  const auto& msg = (*choices)[0].find("message");
  if (msg == (*choices)[0].end() || !msg->is_object() || !msg->contains("content") ||
      !(*msg)["content"].is_string()) {
    throw ParseError("chat response has no message content");
  }
  reply.body = (*msg)["content"];
  return reply;
}

json Client::chat_json(std::string_view provider, const std::string& prompt, const Validator& valid,
                       std::string_view expected_shape) {
  CallScope scope(log_.get(), provider);
  auto first = chat_once(prompt);
  scope.input += first.input_tokens;
  scope.output += first.output_tokens;
  const auto text = first.body.get<std::string>();
  if (auto obj = extract_json_object(text); obj && valid(*obj)) return *obj;

  auto second = chat_once(prompts::repair(prompt, text, expected_shape));
  scope.input += second.input_tokens;
  scope.output += second.output_tokens;
  const auto retry_text = second.body.get<std::string>();
  if (auto obj = extract_json_object(retry_text); obj && valid(*obj)) return *obj;
  throw ParseError(std::string(provider) + ": reply did not match " + std::string(expected_shape));
}

std::string Client::chat_text(std::string_view provider, const std::string& prompt) {
  CallScope scope(log_.get(), provider);
  auto reply = chat_once(prompt);
  scope.input += reply.input_tokens;
  scope.output += reply.output_tokens;
  return reply.body.get<std::string>();
}

std::vector<double> Client::embed(std::string_view text) {
  CallScope scope(log_.get(), provider_name::embedder);
  auto reply = post(config_.embeddings_path, json{{"model", config_.embedding_model}, {"input", std::string(text)}});
  scope.input += reply.input_tokens;
  const auto& data = reply.body.find("data");
  if (data == reply.body.end() || !data->is_array() || data->empty() || !(*data)[0].is_object() ||
      !(*data)[0].contains("embedding") || !(*data)[0]["embedding"].is_array()) {
    throw ParseError("embeddings response has no data[0].embedding");
  }
  std::vector<double> v;
  for (const auto& x : (*data)[0]["embedding"]) {
    if (!x.is_number()) throw ParseError("embedding contains a non-number");
    v.push_back(x.get<double>());
  }
  return v;
}

double Client::rerank_raw(std::string_view query, std::string_view text) {
  CallScope scope(log_.get(), provider_name::relevance_scorer);
  auto reply = post(config_.rerank_path, json{{"model", config_.rerank_model},
                                              {"query", std::string(query)},
                                              {"texts", json::array({std::string(text)})},
                                              {"raw_scores", true}});
  scope.input = text::estimate_tokens(query) + text::estimate_tokens(text);
  const auto& body = reply.body;
  if (!body.is_array() || body.empty() || !body[0].is_object() || !body[0].contains("score") ||
      !body[0]["score"].is_number()) {
    throw ParseError("rerank response is not [{\"index\", \"score\"}]");
  }
  return body[0]["score"].get<double>();
}

std::vector<double> HttpEmbedder::embed(std::string_view text) {
  auto v = client_->embed(text);
  if (v.size() != dim_) {
    throw ParseError("embedding has dimension " + std::to_string(v.size()) + ", expected " + std::to_string(dim_));
  }
  const double n = l2_norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw ParseError("embedding has zero or non-finite norm");
  for (auto& x : v) x /= n;
  return v;
}

std::vector<std::int64_t> HttpDiscriminator::detect(std::span<const EventNode> buffer) {
  const auto obj = client_->chat_json(
      provider_name::discriminator, prompts::boundary(buffer),
      [](const json& j) {
        auto b = j.find("boundaries");
        if (b == j.end() || !b->is_array()) return false;
        for (const auto& x : *b) {
          if (!x.is_number_integer()) return false;
        }
        return true;
      },
      R"({"boundaries": [array_of_indices]})");
  return obj["boundaries"].get<std::vector<std::int64_t>>();
}

Summary HttpSummarizer::summarize(std::string_view content) {
  const auto obj = client_->chat_json(
      provider_name::summarizer, prompts::summary(content),
      [](const json& j) {
        auto k = j.find("keywords");
        auto s = j.find("summary");
        if (k == j.end() || s == j.end() || !k->is_array() || !s->is_string()) return false;
        if (s->get<std::string>().empty()) return false;
        for (const auto& x : *k) {
          if (!x.is_string()) return false;
        }
        return true;
      },
      R"({"keywords": [...], "summary": "..."})");
  return Summary{obj["keywords"].get<std::vector<std::string>>(), obj["summary"].get<std::string>()};
}

bool HttpSummarizer::entails(std::string_view summary, std::string_view utterance) {
  const auto obj = client_->chat_json(
      provider_name::consistency, prompts::entailment(summary, utterance),
      [](const json& j) { return j.contains("entailed") && j["entailed"].is_boolean(); },
      R"({"entailed": true|false})");
  return obj["entailed"].get<bool>();
}

RelationScore HttpRelationScorer::score(std::string_view first, std::string_view second) {
  const auto obj = client_->chat_json(
      provider_name::relation_scorer, prompts::relation(first, second),
      [](const json& j) {
        auto r = j.find("relation");
        auto c = j.find("confidence");
        return r != j.end() && c != j.end() && r->is_string() && c->is_number() &&
               relation_from_string(r->get<std::string>()).has_value();
      },
      R"({"relation": "...", "confidence": 0-1})");
  return RelationScore{*relation_from_string(obj["relation"].get<std::string>()), obj["confidence"].get<double>()};
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double HttpRelevanceScorer::relevance(std::string_view query, std::string_view candidate) {
  const double raw = client_->rerank_raw(query, candidate);
  if (!std::isfinite(raw)) throw ParseError("rerank score is not finite");
  return logistic(raw);
}

bool HttpTemporalClassifier::time_sensitive(std::string_view query) {
  const auto obj = client_->chat_json(
      provider_name::temporal_classifier, prompts::temporal(query),
      [](const json& j) { return j.contains("time_sensitive") && j["time_sensitive"].is_boolean(); },
      R"({"time_sensitive": true|false})");
  return obj["time_sensitive"].get<bool>();
}

std::string HttpAnswerer::answer(std::string_view question, std::span<const std::string> context) {
  return client_->chat_text(provider_name::answerer, prompts::answer(question, context));
}

ProviderBundle make_bundle(const HttpConfig& config, std::size_t dim) {
  auto log = std::make_shared<CallLog>();
  auto client = std::make_shared<Client>(config, log);
  ProviderBundle b;
  b.embedder = std::make_shared<HttpEmbedder>(client, dim);
  b.discriminator = std::make_shared<HttpDiscriminator>(client);
  b.summarizer = std::make_shared<HttpSummarizer>(client);
  b.relation_scorer = std::make_shared<HttpRelationScorer>(client);
  b.relevance_scorer = std::make_shared<HttpRelevanceScorer>(client);
  b.temporal_classifier = std::make_shared<HttpTemporalClassifier>(client);
  b.answerer = std::make_shared<HttpAnswerer>(client);
  b.call_log = log;
  return b;
}

}  // namespace hgmem::http
