#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hgmem/config.hpp"
#include "hgmem/providers.hpp"

namespace hgmem::http {

/// Endpoint settings. Read from `http.*` keys of a KeyValueConfig.
struct HttpConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string chat_path = "/v1/chat/completions";
  std::string embeddings_path = "/v1/embeddings";
  std::string rerank_path = "/rerank";
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "all-MiniLM-L6-v2";
  std::string rerank_model = "cross-encoder/ms-marco-MiniLM-L-6-v2";
  /// Name of the environment variable holding the bearer token. Empty or
  /// unset sends no Authorization header.
  std::string api_key_env = "HGMEM_API_KEY";
  int max_attempts = 3;
  std::chrono::milliseconds backoff{250};
  std::chrono::milliseconds timeout{60000};

  static HttpConfig from(const KeyValueConfig& kv);
};

/// The JSON object starting at the first '{' whose braces balance,
/// skipping braces inside string literals.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

/// Chat, embedding and rerank calls over plain HTTP with bounded retry.
class Client {
 public:
  Client(HttpConfig config, std::shared_ptr<CallLog> log);
  ~Client();

  using Validator = std::function<bool(const nlohmann::json&)>;

  /// Sends `prompt`, extracts a JSON object and checks it with `valid`.
  /// One repair re-prompt, then ParseError. Appends one call-log entry
  /// under `provider` covering every request made.
  nlohmann::json chat_json(std::string_view provider, const std::string& prompt, const Validator& valid,
                           std::string_view expected_shape);

  /// Plain-text completion.
  std::string chat_text(std::string_view provider, const std::string& prompt);

  std::vector<double> embed(std::string_view text);

  /// Raw cross-encoder score for one (query, text) pair.
  double rerank_raw(std::string_view query, std::string_view text);

  const HttpConfig& config() const noexcept { return config_; }

 private:
  struct Reply {
    nlohmann::json body;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
  };
  Reply post(const std::string& path, const nlohmann::json& body);
  Reply chat_once(const std::string& prompt);

  struct Impl;
  std::unique_ptr<Impl> impl_;
  HttpConfig config_;
  std::shared_ptr<CallLog> log_;
};

class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::shared_ptr<Client> client, std::size_t dim) : client_(std::move(client)), dim_(dim) {}
  std::size_t dimension() const override { return dim_; }
  std::vector<double> embed(std::string_view text) override;

 private:
  std::shared_ptr<Client> client_;
  std::size_t dim_;
};

class HttpDiscriminator final : public BoundaryDiscriminator {
 public:
  explicit HttpDiscriminator(std::shared_ptr<Client> client) : client_(std::move(client)) {}
  std::vector<std::int64_t> detect(std::span<const EventNode> buffer) override;

 private:
  std::shared_ptr<Client> client_;
};

class HttpSummarizer final : public Summarizer {
 public:
  explicit HttpSummarizer(std::shared_ptr<Client> client) : client_(std::move(client)) {}
  Summary summarize(std::string_view content) override;
  bool entails(std::string_view summary, std::string_view utterance) override;

 private:
  std::shared_ptr<Client> client_;
};

class HttpRelationScorer final : public RelationScorer {
 public:
  explicit HttpRelationScorer(std::shared_ptr<Client> client) : client_(std::move(client)) {}
  RelationScore score(std::string_view first, std::string_view second) override;

 private:
  std::shared_ptr<Client> client_;
};

/// Cross-encoder logits squashed through the logistic function.
class HttpRelevanceScorer final : public RelevanceScorer {
 public:
  explicit HttpRelevanceScorer(std::shared_ptr<Client> client) : client_(std::move(client)) {}
  double relevance(std::string_view query, std::string_view candidate) override;

 private:
  std::shared_ptr<Client> client_;
};

class HttpTemporalClassifier final : public TemporalClassifier {
 public:
  explicit HttpTemporalClassifier(std::shared_ptr<Client> client) : client_(std::move(client)) {}
  bool time_sensitive(std::string_view query) override;

 private:
  std::shared_ptr<Client> client_;
};

class HttpAnswerer final : public Answerer {
 public:
  explicit HttpAnswerer(std::shared_ptr<Client> client) : client_(std::move(client)) {}
  std::string answer(std::string_view question, std::span<const std::string> context) override;

 private:
  std::shared_ptr<Client> client_;
};

ProviderBundle make_bundle(const HttpConfig& config, std::size_t dim);

double logistic(double x);

}  // namespace hgmem::http
