#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

// Flat `key = value` experiment configs.
//
//   # comment
//   kind = gsm-curve
//   n = 256            repeated keys append to a list
//   n = 512, 1024      commas split a value into several entries
//   theta = 0.2:0.8:0.3     arithmetic range, stop inclusive
//   n = 2^8:2^14:*2         geometric range; a^b is accepted in any number
//
// Keys are case-sensitive. `out` and `workers` are run options, not part of
// the experiment's identity, and are excluded from the hash.
namespace lab::cli {

inline constexpr std::string_view kVersion = "1.0.0";

class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);

  const std::string& kind() const { return kind_; }
  void set_kind(std::string kind);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, std::vector<std::string> values);
  const std::vector<std::string>& raw(const std::string& key) const;

  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  /// All entries of `key` with ranges expanded. Missing key -> InputError.
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;

  /// Per-replicate seeds derive_seed(master, r), r < replicates, where
  /// master = `seed` (default 0). Distinctness is checked.
  std::vector<std::uint64_t> seeds(long default_replicates) const;

  /// Sorted `key=v1,v2` lines without run options.
  std::string canonical() const;
  /// FNV-1a 64 of canonical().
  std::uint64_t hash() const;

 private:
  std::string kind_;
  std::map<std::string, std::vector<std::string>> values_;
};

/// Parses one number, accepting a^b; throws InputError.
double parse_number(std::string_view s);

/// Expands `a:b:c` (arithmetic) and `a:b:*c` (geometric) ranges.
std::vector<double> expand_range(std::string_view s);

}  // namespace lab::cli
