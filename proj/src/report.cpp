#include "cklab/report.hpp"

#include <cstdio>
#include <fstream>

#include "cklab/errors.hpp"

namespace cklab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void export_report_csv(const Report& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os << "check,value,tolerance,pass\n";
  for (const auto& c : report.checks) {
    os << c.name << ',' << format_double(c.value) << ','
       << format_double(c.tolerance) << ',' << (c.pass ? "true" : "false")
       << '\n';
  }
  if (!os) throw IoError("write failed: " + path);
}

std::string report_to_json_string(const Report& report) {
  nlohmann::json j;
  j["version"] = report.version;
  j["config"] = report.config;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back({{"check", c.name},
                           {"value", c.value},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass}});
  }
  return j.dump(2);
}

void export_report_json(const Report& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path);
  os << report_to_json_string(report) << '\n';
  if (!os) throw IoError("write failed: " + path);
}

Report report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report parse: ") + e.what());
  }
  Report r;
  r.version = j.value("version", std::string(kVersion));
  if (j.contains("config")) r.config = j["config"];
  for (const auto& c : j["checks"]) {
    r.checks.push_back({c["check"].get<std::string>(),
                        c["value"].get<double>(),
                        c["tolerance"].get<double>(), c["pass"].get<bool>()});
  }
  return r;
}

}  // namespace cklab
