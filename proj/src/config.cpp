#include "hgmem/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "hgmem/errors.hpp"

namespace hgmem {

void EngineConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("config: " + msg); };
  if (buffer_token_limit < 1) fail("buffer_token_limit must be >= 1");
  if (k_cand < 1) fail("k_cand must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0, 1)");
  if (retrieval_k < 1) fail("retrieval_k must be >= 1");
  if (!(beta_time >= 1.0)) fail("beta_time must be >= 1");
  if (!(beta_role >= 1.0)) fail("beta_role must be >= 1");
  if (!(beta_conf >= 1.0)) fail("beta_conf must be >= 1");
  if (embedding_dim < 1) fail("embedding_dim must be >= 1");
  if (!(heuristic_cutoff >= -1.0 && heuristic_cutoff <= 1.0)) fail("heuristic_cutoff must lie in [-1, 1]");
  if (pause_gap_minutes < 0) fail("pause_gap_minutes must be >= 0");
}

std::vector<std::string> EngineConfig::warnings() const {
  std::vector<std::string> out;
  auto check = [&](const char* name, double beta) {
    if (beta > 2.0) {
      out.push_back(std::string(name) + " = " + std::to_string(beta) +
                    " is outside the characterised range [1.0, 2.0]");
    }
  };
  check("beta_time", beta_time);
  check("beta_role", beta_role);
  check("beta_conf", beta_conf);
  return out;
}

nlohmann::json to_json(const EngineConfig& c) {
  return nlohmann::json{
      {"buffer_token_limit", c.buffer_token_limit},
      {"k_cand", c.k_cand},
      {"tau", c.tau},
      {"retrieval_k", c.retrieval_k},
      {"beta_time", c.beta_time},
      {"beta_role", c.beta_role},
      {"beta_conf", c.beta_conf},
      {"embedding_dim", c.embedding_dim},
      {"heuristic_cutoff", c.heuristic_cutoff},
      {"pause_gap_minutes", c.pause_gap_minutes},
  };
}

namespace {

const std::set<std::string>& engine_keys() {
  static const std::set<std::string> keys{
      "buffer_token_limit", "k_cand",        "tau",           "retrieval_k",
      "beta_time",          "beta_role",     "beta_conf",     "embedding_dim",
      "heuristic_cutoff",   "pause_gap_minutes"};
  return keys;
}

std::int64_t json_int(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ValidationError(std::string("config.") + key + " must be an integer");
  return v.get<std::int64_t>();
}

double json_real(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(std::string("config.") + key + " must be a number");
  return v.get<double>();
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ValidationError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ValidationError("config: " + key + " expects a number, got '" + v + "'");
  }
}

}  // namespace

EngineConfig engine_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!engine_keys().count(key)) throw ValidationError("config: unknown key '" + key + "'");
  }
  EngineConfig c;
  c.buffer_token_limit = json_int(j, "buffer_token_limit");
  c.k_cand = json_int(j, "k_cand");
  c.tau = json_real(j, "tau");
  c.retrieval_k = json_int(j, "retrieval_k");
  c.beta_time = json_real(j, "beta_time");
  c.beta_role = json_real(j, "beta_role");
  c.beta_conf = json_real(j, "beta_conf");
  c.embedding_dim = json_int(j, "embedding_dim");
  c.heuristic_cutoff = json_real(j, "heuristic_cutoff");
  c.pause_gap_minutes = json_int(j, "pause_gap_minutes");
  c.validate();
  return c;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig out;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(origin + ":" + std::to_string(row) + ": expected 'key = value'");
    }
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ValidationError(origin + ":" + std::to_string(row) + ": empty key");
    out.values_[key] = value;
  }
  return out;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

EngineConfig KeyValueConfig::apply_to(EngineConfig c) const {
  for (const auto& [key, value] : values_) {
    if (key.find('.') != std::string::npos || key == "provider" || key == "seed") continue;
    if (key == "buffer_token_limit") c.buffer_token_limit = parse_int(key, value);
    else if (key == "k_cand") c.k_cand = parse_int(key, value);
    else if (key == "tau") c.tau = parse_real(key, value);
    else if (key == "retrieval_k") c.retrieval_k = parse_int(key, value);
    else if (key == "beta_time") c.beta_time = parse_real(key, value);
    else if (key == "beta_role") c.beta_role = parse_real(key, value);
    else if (key == "beta_conf") c.beta_conf = parse_real(key, value);
    else if (key == "embedding_dim") c.embedding_dim = parse_int(key, value);
    else if (key == "heuristic_cutoff") c.heuristic_cutoff = parse_real(key, value);
    else if (key == "pause_gap_minutes") c.pause_gap_minutes = parse_int(key, value);
    else throw ValidationError("config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace hgmem
