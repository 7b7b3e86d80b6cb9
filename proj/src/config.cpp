#include "mfnc/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mfnc/errors.hpp"

namespace mfnc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Lists are stored without blanks so that "1, 2" and "1,2" digest alike.
std::string canonical_value(const std::string& v) {
  std::string out;
  for (char c : v)
    if (c != ' ' && c != '\t') out.push_back(c);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() != '-') {
      const unsigned long long n = std::stoull(v, &used, 0);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("config: " + key + " expects a non-negative integer, got '" + v + "'");
}

enum class Kind { number, count, u64, numbers, counts, word, auto_number };

const std::map<std::string, Kind>& kinds() {
  static const std::map<std::string, Kind> k = {
      {"alpha", Kind::number},
      {"n_neurons", Kind::count},
      {"horizon", Kind::number},
      {"epsilon", Kind::number},
      {"delta", Kind::auto_number},
      {"substeps_per_delta", Kind::count},
      {"f.kind", Kind::word},
      {"f.min", Kind::number},
      {"f.max", Kind::number},
      {"nu.kind", Kind::word},
      {"nu.support", Kind::numbers},
      {"nu.probs", Kind::numbers},
      {"nu0.kind", Kind::word},
      {"nu0.scale", Kind::number},
      {"seed", Kind::u64},
      {"coupler", Kind::word},
      {"aux.freeze", Kind::word},
      {"replicates", Kind::count},
      {"study.n_values", Kind::counts},
      {"study.replicates", Kind::count},
      {"bench.n_values", Kind::counts},
      {"bench.replicates", Kind::count},
      {"bench.hierarchy_n", Kind::count},
      {"remainder.n_values", Kind::counts},
      {"remainder.replicates", Kind::count},
      {"checks.increment_deltas", Kind::numbers},
      {"checks.increment_n", Kind::count},
      {"checks.increment_replicates", Kind::count},
      {"checks.poisson_n", Kind::counts},
      {"checks.poisson_deltas", Kind::numbers},
      {"checks.poisson_samples", Kind::count},
  };
  return k;
}

void check_value(const std::string& key, const std::string& v) {
  switch (kinds().at(key)) {
    case Kind::number: to_double(key, v); break;
    case Kind::count:
    case Kind::u64: to_u64(key, v); break;
    case Kind::numbers:
      for (const auto& s : split(v, ',')) to_double(key, s);
      break;
    case Kind::counts:
      for (const auto& s : split(v, ',')) to_u64(key, s);
      break;
    case Kind::auto_number:
      if (v != "auto") to_double(key, v);
      break;
    case Kind::word:
      if (key == "f.kind") parse_rate_kind(v);
      else if (key == "nu.kind") parse_jump_kind(v);
      else if (key == "nu0.kind") parse_init_kind(v);
      else if (key == "coupler") parse_coupler(v);
      else if (key == "aux.freeze") parse_aux_freeze(v);
      break;
  }
}

}  // namespace

const std::map<std::string, std::string>& Config::defaults() {
  static const std::map<std::string, std::string> d = {
      {"alpha", "1"},
      {"n_neurons", "64"},
      {"horizon", "1"},
      {"epsilon", "1"},
      {"delta", "auto"},
      {"substeps_per_delta", "4"},
      {"f.kind", "cauchy-bump"},
      {"f.min", "1"},
      {"f.max", "2"},
      {"nu.kind", "rademacher"},
      {"nu.support", ""},
      {"nu.probs", ""},
      {"nu0.kind", "uniform"},
      {"nu0.scale", "1"},
      {"seed", "20240601"},
      {"coupler", "dyadic"},
      {"aux.freeze", "substep"},
      {"replicates", "1"},
      {"study.n_values", "64,128,256,512,1024"},
      {"study.replicates", "200"},
      {"bench.n_values", "1024,16384"},
      {"bench.replicates", "200"},
      {"bench.hierarchy_n", "256"},
      {"remainder.n_values", "64,256,1024"},
      {"remainder.replicates", "200"},
      {"checks.increment_deltas", "0.2,0.1,0.05,0.025"},
      {"checks.increment_n", "256"},
      {"checks.increment_replicates", "200"},
      {"checks.poisson_n", "256,512,1024"},
      {"checks.poisson_deltas", "0.1,0.2"},
      {"checks.poisson_samples", "10000"},
  };
  return d;
}

Config::Config() : entries_(defaults()) {}

Config Config::from_string(std::string_view text) {
  Config c;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    c.set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_string(text.str());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!kinds().contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  const std::string v = canonical_value(value);
  check_value(key, v);
  entries_[key] = v;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  set(trim(std::string_view(assignment).substr(0, eq)),
      trim(std::string_view(assignment).substr(eq + 1)));
}

void Config::apply_environment() {
  if (const char* seed = std::getenv("MFNC_SEED"); seed != nullptr && *seed != '\0')
    set("seed", seed);
}

const std::string& Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: unknown key '" + key + "'");
  return it->second;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Config::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

double Config::get_double(const std::string& key) const { return to_double(key, get(key)); }
std::size_t Config::get_size(const std::string& key) const { return to_u64(key, get(key)); }
std::uint64_t Config::get_u64(const std::string& key) const { return to_u64(key, get(key)); }

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split(get(key), ',')) out.push_back(to_double(key, s));
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : split(get(key), ',')) out.push_back(to_u64(key, s));
  return out;
}

ModelParams Config::model() const {
  ModelParams p;
  p.alpha = get_double("alpha");
  p.n_neurons = get_size("n_neurons");
  p.horizon = get_double("horizon");
  p.epsilon = get_double("epsilon");
  if (get("delta") != "auto") p.delta = get_double("delta");
  p.substeps_per_delta = get_size("substeps_per_delta");
  p.rate_fn.kind = parse_rate_kind(get("f.kind"));
  p.rate_fn.f_min = get_double("f.min");
  p.rate_fn.f_max = get_double("f.max");
  switch (parse_jump_kind(get("nu.kind"))) {
    case JumpKind::rademacher: p.jump_law = JumpLaw::rademacher(); break;
    case JumpKind::standard_gaussian: p.jump_law = JumpLaw::standard_gaussian(); break;
    case JumpKind::lattice:
      try {
        p.jump_law = JumpLaw::lattice(get_doubles("nu.support"), get_doubles("nu.probs"));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: nu.support/nu.probs: ") + e.what());
      }
      break;
  }
  p.init_law.kind = parse_init_kind(get("nu0.kind"));
  p.init_law.scale = get_double("nu0.scale");
  p.base_seed = get_u64("seed");
  p.coupler = parse_coupler(get("coupler"));
  p.aux_freeze = parse_aux_freeze(get("aux.freeze"));
  return p;
}

RateKind parse_rate_kind(const std::string& s) {
  for (RateKind k : {RateKind::constant, RateKind::cauchy_bump, RateKind::logistic})
    if (to_string(k) == s) return k;
  throw ConfigError("config: unknown f.kind '" + s + "'");
}

JumpKind parse_jump_kind(const std::string& s) {
  for (JumpKind k : {JumpKind::rademacher, JumpKind::standard_gaussian, JumpKind::lattice})
    if (to_string(k) == s) return k;
  throw ConfigError("config: unknown nu.kind '" + s + "'");
}

InitKind parse_init_kind(const std::string& s) {
  for (InitKind k : {InitKind::uniform, InitKind::gaussian, InitKind::point})
    if (to_string(k) == s) return k;
  throw ConfigError("config: unknown nu0.kind '" + s + "'");
}

CouplerMethod parse_coupler(const std::string& s) {
  for (CouplerMethod m :
       {CouplerMethod::independent, CouplerMethod::comonotone, CouplerMethod::dyadic})
    if (to_string(m) == s) return m;
  throw ConfigError("config: unknown coupler '" + s + "'");
}

AuxFreeze parse_aux_freeze(const std::string& s) {
  for (AuxFreeze f : {AuxFreeze::substep, AuxFreeze::interval})
    if (to_string(f) == s) return f;
  throw ConfigError("config: unknown aux.freeze '" + s + "'");
}

}  // namespace mfnc
