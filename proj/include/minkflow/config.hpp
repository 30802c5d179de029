#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

namespace minkflow {

/**
 * Run configuration: one `key = value` per line, `#` starts a comment, blank lines ignored.
 * Keys are case-sensitive; a repeated key is an error. Every error message is anchored to
 * `source:line:` so the offending line can be found directly.
 */
class RunConfig {
 public:
  static RunConfig parse(const std::string& text, const std::string& source);
  /// Throws Error(config) "path: cannot read" for unreadable files.
  static RunConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& source() const { return source_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::optional<std::string> get_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Line number of a key (0 when absent).
  int line_of(const std::string& key) const;

  /// Throws Error(config) with "source:line: message" for the line that set `key`
  /// (or "source: message" if the key is absent).
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  /// Keys that start with `prefix`.
  std::set<std::string> keys_with_prefix(const std::string& prefix) const;

  /// Throws for the first key that is neither in `known` nor starts with one of `prefixes`.
  void reject_unknown(const std::set<std::string>& known, const std::set<std::string>& prefixes = {}) const;

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::string source_;
  std::map<std::string, Entry> entries_;
};

}  // namespace minkflow
