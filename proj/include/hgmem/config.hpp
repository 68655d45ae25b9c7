#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hgmem {

/// Tunables for buffering, consolidation and retrieval. Defaults are the
/// published operating point of the method; everything is overridable.
struct EngineConfig {
  std::int64_t buffer_token_limit = 2048;
  std::int64_t k_cand = 5;
  double tau = 0.5;
  std::int64_t retrieval_k = 10;
  double beta_time = 1.4;
  double beta_role = 1.4;
  double beta_conf = 1.2;
  std::int64_t embedding_dim = 64;
  double heuristic_cutoff = 0.35;
  std::int64_t pause_gap_minutes = 30;

  bool operator==(const EngineConfig&) const = default;

  /// Throws ValidationError on a hard violation (β < 1, τ outside (0,1),
  /// non-positive sizes).
  void validate() const;

  /// Soft findings, e.g. a β outside the [1, 2] range the factors were
  /// characterised on.
  std::vector<std::string> warnings() const;
};

nlohmann::json to_json(const EngineConfig& config);
EngineConfig engine_config_from_json(const nlohmann::json& j);

/// `key = value` configuration file. Blank lines and lines starting with
/// `#` are ignored; later keys override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::string& path);

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Applies every engine key present (buffer_token_limit, k_cand, tau, ...)
  /// on top of `base`. Unknown engine keys are an error.
  EngineConfig apply_to(EngineConfig base) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace hgmem
