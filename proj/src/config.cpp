#include "lab/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lab/error.hpp"
#include "lab/random.hpp"

namespace lab::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_plain(std::string_view s) {
  const std::string buf(trim(s));
  if (buf.empty()) throw InputError("config: empty number");
  if (buf == "inf" || buf == "+inf") return INFINITY;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE)
    throw InputError("config: not a number: '" + buf + "'");
  return v;
}

bool is_run_option(const std::string& key) { return key == "out" || key == "workers"; }

}  // namespace

double parse_number(std::string_view s) {
  s = trim(s);
  const auto caret = s.find('^');
  if (caret == std::string_view::npos) return parse_plain(s);
  return std::pow(parse_plain(s.substr(0, caret)), parse_plain(s.substr(caret + 1)));
}

std::vector<double> expand_range(std::string_view s) {
  s = trim(s);
  const auto c1 = s.find(':');
  if (c1 == std::string_view::npos) return {parse_number(s)};
  const auto c2 = s.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw InputError("config: range needs start:stop:step");
  const double start = parse_number(s.substr(0, c1));
  const double stop = parse_number(s.substr(c1 + 1, c2 - c1 - 1));
  std::string_view step_text = trim(s.substr(c2 + 1));
  std::vector<double> out;
  if (!step_text.empty() && step_text.front() == '*') {
    const double factor = parse_number(step_text.substr(1));
    if (!(factor > 1.0) || !(start > 0.0)) throw InputError("config: geometric range needs factor > 1");
    const double slack = 1.0 + 1e-12;
    for (double v = start; v <= stop * slack; v *= factor) out.push_back(v);
  } else {
    const double step = parse_number(step_text);
    if (!(step > 0.0)) throw InputError("config: range step must be > 0");
    const long count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    // Multiply rather than accumulate so entries do not drift.
    for (long k = 0; k <= count; ++k) out.push_back(start + k * step);
  }
  if (out.empty()) throw InputError("config: range '" + std::string(s) + "' is empty");
  if (out.size() > 1000000) throw InputError("config: range too long");
  return out;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key(trim(l.substr(0, eq)));
    std::string_view rest = trim(l.substr(eq + 1));
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    if (key == "kind") {
      cfg.set_kind(std::string(rest));
      continue;
    }
    auto& slot = cfg.values_[key];
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view item = trim(rest.substr(0, comma));
      if (item.empty())
        throw InputError("config line " + std::to_string(lineno) + ": empty value for " + key);
      slot.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::set_kind(std::string kind) {
  if (!kind_.empty() && !kind.empty() && kind_ != kind)
    throw InputError("config kind '" + kind_ + "' conflicts with '" + kind + "'");
  kind_ = std::move(kind);
}

void ExperimentConfig::set(const std::string& key, std::vector<std::string> values) {
  values_[key] = std::move(values);
}

const std::vector<std::string>& ExperimentConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("config: missing required key '" + key + "'");
  return it->second;
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const auto& v = raw(key);
  if (v.size() != 1) throw InputError("config: key '" + key + "' must have a single value");
  return v.front();
}

double ExperimentConfig::number(const std::string& key) const {
  const auto& v = raw(key);
  if (v.size() != 1) throw InputError("config: key '" + key + "' must have a single value");
  return parse_number(v.front());
}

double ExperimentConfig::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long ExperimentConfig::integer(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (!(std::abs(v) < 9e15) || v != std::floor(v))
    throw InputError("config: key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = text(key, "");
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config: key '" + key + "' must be true or false");
}

std::vector<double> ExperimentConfig::numbers(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : raw(key)) {
    const auto part = expand_range(item);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<double> ExperimentConfig::numbers(const std::string& key,
                                              std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

std::vector<std::uint64_t> ExperimentConfig::seeds(long default_replicates) const {
  const long reps = integer("replicates", default_replicates);
  if (reps < 1) throw InputError("config: replicates must be >= 1");
  const double master_d = number("seed", 0.0);
  if (!(master_d >= 0.0) || master_d != std::floor(master_d) || master_d > 9e15)
    throw InputError("config: seed must be a non-negative integer");
  const auto master = static_cast<std::uint64_t>(master_d);
  std::vector<std::uint64_t> out;
  for (long r = 0; r < reps; ++r) out.push_back(rng::derive_seed(master, static_cast<std::uint64_t>(r)));
  if (std::set<std::uint64_t>(out.begin(), out.end()).size() != out.size())
    throw InputError("config: derived seeds collide");
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::string s = "kind=" + kind_ + "\n";
  for (const auto& [key, vals] : values_) {
    if (is_run_option(key)) continue;
    s += key + "=";
    for (std::size_t i = 0; i < vals.size(); ++i) s += (i ? "," : "") + vals[i];
    s += "\n";
  }
  return s;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace lab::cli
