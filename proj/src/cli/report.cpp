#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "inversio/cli.hpp"
#include "inversio/errors.hpp"

namespace inversio {

namespace {

constexpr const char* kColumns[] = {"name", "statistic", "p_or_residual", "threshold", "pass",
                                    "n",    "dt",        "seed",          "runtime_s"};

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// JSON has no literal for non-finite numbers; they travel as strings.
nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return number(v);
}

double from_json_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  if (s == "nan") return NAN;
  throw Error("report field '" + s + "' is not a number");
}

}  // namespace

std::string format_reports(const std::vector<TestReport>& reports, const std::string& format) {
  if (format == "csv") {
    std::string out;
    for (std::size_t k = 0; k < std::size(kColumns); ++k) out += std::string(k ? "," : "") + kColumns[k];
    out += "\n";
    for (const auto& r : reports) {
      out += csv_field(r.name) + "," + number(r.statistic) + "," + number(r.value) + "," + number(r.threshold) + "," +
             (r.pass ? "true" : "false") + "," + std::to_string(r.n) + "," + number(r.dt) + "," +
             std::to_string(r.seed) + "," + number(r.runtime_s) + "\n";
    }
    return out;
  }
  if (format == "json") {
    auto array = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
      nlohmann::ordered_json o;
      o["name"] = r.name;
      o["statistic"] = json_number(r.statistic);
      o["p_or_residual"] = json_number(r.value);
      o["threshold"] = json_number(r.threshold);
      o["pass"] = r.pass;
      o["n"] = r.n;
      o["dt"] = json_number(r.dt);
      o["seed"] = r.seed;
      o["runtime_s"] = json_number(r.runtime_s);
      array.push_back(std::move(o));
    }
    return array.dump(2) + "\n";
  }
  throw InvalidArgument("unknown report format '" + format + "'");
}

void emit_report(const std::vector<TestReport>& reports, const std::string& format, const std::string& path) {
  const std::string text = format_reports(reports, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

std::vector<TestReport> parse_json_reports(const std::string& text) {
  std::vector<TestReport> out;
  const auto array = nlohmann::json::parse(text);
  if (!array.is_array()) throw Error("report JSON is not an array");
  for (const auto& o : array) {
    TestReport r;
    r.name = o.at("name").get<std::string>();
    r.statistic = from_json_number(o.at("statistic"));
    r.value = from_json_number(o.at("p_or_residual"));
    r.threshold = from_json_number(o.at("threshold"));
    r.pass = o.at("pass").get<bool>();
    r.n = o.at("n").get<std::size_t>();
    r.dt = from_json_number(o.at("dt"));
    r.seed = o.at("seed").get<std::uint64_t>();
    r.runtime_s = from_json_number(o.at("runtime_s"));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace inversio
