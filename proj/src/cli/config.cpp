#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>

#include "inversio/cli.hpp"
#include "inversio/errors.hpp"

namespace inversio {

namespace {

const std::set<std::string> kTests = {"ip",           "excessive",     "kelvin-exit", "generator",
                                      "potential",    "radial-bessel", "conjugation", "self-duality"};

const std::set<std::string> kGeneralKeys = {"family",   "test",   "x0",        "y",       "times",  "t_end",
                                            "dt",       "N",      "seed",      "output",  "format", "function",
                                            "annulus",  "threshold", "h_power", "expect", "target", "points",
                                            "permutations", "record_runtime"};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const std::string s = trim(text);
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (s.empty() || ec != std::errc() || ptr != end) throw ConfigError(key, "'" + s + "' is not a number");
  if (!std::isfinite(v)) throw ConfigError(key, "must be finite");
  return v;
}

std::vector<double> parse_list(const std::string& key, std::string text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ConfigError(key, "unbalanced brackets");
    text = text.substr(1, text.size() - 2);
  }
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    out.push_back(parse_number(key, text.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& text, double min) {
  const double v = parse_number(key, text);
  if (v < min || v != std::floor(v) || v > 9.0e15) throw ConfigError(key, "must be an integer >= " + std::to_string(static_cast<long long>(min)));
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key, "must be true or false");
}

// Family constructors name the offending parameter first or in quotes.
std::string blame(const std::string& message, const std::vector<std::string>& names, const std::string& prefix,
                  const std::string& fallback) {
  for (const auto& n : names) {
    if (message.rfind(n + " ", 0) == 0 || message.find("'" + n + "'") != std::string::npos) return prefix + n;
  }
  const auto q = message.find("parameter '");
  if (q != std::string::npos) {
    const auto start = q + 11;
    return prefix + message.substr(start, message.find('\'', start) - start);
  }
  return fallback;
}

Characteristics build_family(const std::string& id, const FamilyParams& params, const std::string& prefix,
                             const std::string& id_key) {
  std::vector<std::string> names;
  try {
    names = family_parameter_names(id);
  } catch (const InvalidArgument& e) {
    throw ConfigError(id_key, e.what());
  }
  try {
    return get_family(id, params);
  } catch (const InvalidArgument& e) {
    throw ConfigError(blame(e.what(), names, prefix, id_key), e.what());
  } catch (const Unsupported& e) {
    throw ConfigError(blame(e.what(), names, prefix, id_key), e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "line " + std::to_string(number) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(number) + " has an empty key");
    if (!entries.emplace(key, trim(line.substr(eq + 1))).second) throw ConfigError(key, "given twice");
  }

  ExperimentConfig c;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    std::string v = it->second;
    entries.erase(it);
    return v;
  };

  if (auto v = take("family")) c.family = *v;
  else throw ConfigError("family", "is required");
  if (auto v = take("test")) c.test = *v;
  else throw ConfigError("test", "is required");
  if (!kTests.count(c.test)) throw ConfigError("test", "unknown test kind '" + c.test + "'");
  if (auto v = take("seed")) c.seed = parse_count("seed", *v, 0);
  else throw ConfigError("seed", "is required");

  if (auto v = take("x0")) c.x0 = parse_list("x0", *v);
  if (auto v = take("y")) c.y = parse_list("y", *v);
  if (auto v = take("times")) {
    c.times = parse_list("times", *v);
    for (std::size_t k = 0; k < c.times.size(); ++k) {
      if (!(c.times[k] > 0.0)) throw ConfigError("times", "must be positive");
      if (k > 0 && !(c.times[k] > c.times[k - 1])) throw ConfigError("times", "must increase strictly");
    }
  }
  if (auto v = take("t_end")) {
    c.t_end = parse_number("t_end", *v);
    if (!(c.t_end > 0.0)) throw ConfigError("t_end", "must be positive");
  }
  if (auto v = take("dt")) {
    c.dt = parse_number("dt", *v);
    if (!(c.dt > 0.0)) throw ConfigError("dt", "must be positive");
  }
  if (auto v = take("N")) c.N = parse_count("N", *v, 2);
  if (auto v = take("output")) c.output = *v;
  if (auto v = take("format")) c.format = *v;
  if (c.format != "csv" && c.format != "json") throw ConfigError("format", "must be csv or json");
  if (auto v = take("function")) c.function = *v;
  if (auto v = take("annulus")) {
    c.annulus = parse_list("annulus", *v);
    if (c.annulus.size() != 2 || !(c.annulus[0] >= 0.0) || !(c.annulus[0] < c.annulus[1]))
      throw ConfigError("annulus", "must be two radii 0 <= a < b");
  }
  if (auto v = take("threshold")) {
    c.threshold = parse_number("threshold", *v);
    if (!(*c.threshold >= 0.0)) throw ConfigError("threshold", "must be nonnegative");
  }
  if (auto v = take("h_power")) c.h_power = parse_number("h_power", *v);
  if (auto v = take("expect")) c.expect = *v;
  if (c.expect != "harmonic" && c.expect != "defect") throw ConfigError("expect", "must be harmonic or defect");
  if (auto v = take("target")) c.target = *v;
  if (auto v = take("points")) c.points = parse_count("points", *v, 1);
  if (auto v = take("permutations")) c.permutations = parse_count("permutations", *v, 19);
  if (auto v = take("record_runtime")) c.record_runtime = parse_bool("record_runtime", *v);

  // Remaining keys are family parameters, or target.<parameter>.
  std::vector<std::string> names;
  try {
    names = family_parameter_names(c.family);
  } catch (const InvalidArgument& e) {
    throw ConfigError("family", e.what());
  }
  for (const auto& [key, value] : entries) {
    if (key.rfind("target.", 0) == 0) {
      if (c.test != "conjugation") throw ConfigError(key, "only used by conjugation tests");
      c.target_params.set(key.substr(7), parse_list(key, value));
    } else if (std::find(names.begin(), names.end(), key) != names.end()) {
      c.params.set(key, parse_list(key, value));
    } else {
      throw ConfigError(key, "unknown key");
    }
  }

  const Characteristics family = build_family(c.family, c.params, "", "family");
  if (c.test == "conjugation") {
    if (c.target.empty()) throw ConfigError("target", "is required for conjugation tests");
    build_family(c.target, c.target_params, "target.", "target");
  }
  if (c.x0.empty()) throw ConfigError("x0", "is required");
  if (c.x0.size() != family.n())
    throw ConfigError("x0", "needs " + std::to_string(family.n()) + " entries for " + family.name());
  if (!family.in_domain(family.make_state(c.x0))) throw ConfigError("x0", "lies outside the domain of " + family.name());
  if (c.test == "potential") {
    if (c.y.size() != family.n()) throw ConfigError("y", "needs " + std::to_string(family.n()) + " entries");
    if (!family.in_domain(family.make_state(c.y))) throw ConfigError("y", "lies outside the domain");
  }
  if ((c.test == "ip" || c.test == "excessive") && c.times.empty()) throw ConfigError("times", "is required");
  if ((c.test == "radial-bessel" || c.test == "conjugation") && c.times.empty() && !(c.t_end > 0.0))
    throw ConfigError("times", "is required (or t_end)");
  if (c.test == "kelvin-exit") {
    if (c.annulus.empty()) throw ConfigError("annulus", "is required for kelvin-exit");
    if (!(c.t_end > 0.0)) c.t_end = 50.0;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace inversio
