#include "minkflow/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "minkflow/error.hpp"

namespace minkflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const std::string& source) {
  RunConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = source + ":" + std::to_string(line) + ": ";
    if (eq == std::string::npos) throw Error(ErrorCode::config, where + "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw Error(ErrorCode::config, where + "missing key before '='");
    if (value.empty()) throw Error(ErrorCode::config, where + "missing value for '" + key + "'");
    const auto prev = cfg.entries_.find(key);
    if (prev != cfg.entries_.end()) {
      throw Error(ErrorCode::config,
                  where + "duplicate key '" + key + "' (first set on line " + std::to_string(prev->second.line) + ")");
    }
    cfg.entries_[key] = Entry{value, line};
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::config, path + ": cannot read config file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str(), path);
}

std::optional<std::string> RunConfig::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get_string(key).value_or(fallback);
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get_string(key);
  if (!v) return fallback;
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) fail(key, "'" + key + "' expects a number, got '" + *v + "'");
  return out;
}

long RunConfig::get_long(const std::string& key, long fallback) const {
  const auto v = get_string(key);
  if (!v) return fallback;
  long out = 0;
  const auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) fail(key, "'" + key + "' expects an integer, got '" + *v + "'");
  return out;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get_string(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail(key, "'" + key + "' expects true or false, got '" + *v + "'");
}

int RunConfig::line_of(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

void RunConfig::fail(const std::string& key, const std::string& message) const {
  const int line = line_of(key);
  const std::string where = line > 0 ? source_ + ":" + std::to_string(line) + ": " : source_ + ": ";
  throw Error(ErrorCode::config, where + message);
}

std::set<std::string> RunConfig::keys_with_prefix(const std::string& prefix) const {
  std::set<std::string> out;
  for (const auto& [k, e] : entries_) {
    if (k.rfind(prefix, 0) == 0) out.insert(k);
  }
  return out;
}

void RunConfig::reject_unknown(const std::set<std::string>& known, const std::set<std::string>& prefixes) const {
  for (const auto& [k, e] : entries_) {
    if (known.count(k)) continue;
    bool ok = false;
    for (const auto& p : prefixes) ok = ok || k.rfind(p, 0) == 0;
    if (!ok) fail(k, "unknown key '" + k + "'");
  }
}

}  // namespace minkflow
