#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mfnc/model.hpp"

namespace mfnc {

/// Flat `key = value` configuration. Every known key has a default, so the
/// canonical form (all keys, sorted) identifies an experiment completely.
class Config {
 public:
  Config();  // all defaults

  /// Parse `key = value` lines; `#` starts a comment. Throws ConfigError on
  /// unknown keys, malformed lines or unreadable files.
  static Config from_file(const std::string& path);
  static Config from_string(std::string_view text);

  /// Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  /// "key=value".
  void apply_override(const std::string& assignment);
  /// MFNC_SEED, if set, replaces the seed.
  void apply_environment();

  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// "key = value\n" for every key in sorted order.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string digest() const;

  ModelParams model() const;

  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;

  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> entries_;
};

std::uint64_t fnv1a64(std::string_view bytes);

RateKind parse_rate_kind(const std::string& s);
JumpKind parse_jump_kind(const std::string& s);
InitKind parse_init_kind(const std::string& s);
CouplerMethod parse_coupler(const std::string& s);
AuxFreeze parse_aux_freeze(const std::string& s);

}  // namespace mfnc
