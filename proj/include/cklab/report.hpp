#pragma once

#include <json.hpp>
#include <string>
#include <vector>

namespace cklab {

inline constexpr const char* kVersion = "cklab 0.1.0";

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string version = kVersion;
  nlohmann::json config;
  std::vector<CheckRecord> checks;

  void add(const std::string& name, double value, double tolerance) {
    checks.push_back({name, value, tolerance, value <= tolerance});
  }
  void add_flag(const std::string& name, bool ok) {
    checks.push_back({name, ok ? 0.0 : 1.0, 0.5, ok});
  }
  bool all_pass() const {
    for (const auto& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }
};

/// CSV with header check,value,tolerance,pass.
void export_report_csv(const Report& report, const std::string& path);

/// JSON with the same records plus the config echo and version string.
void export_report_json(const Report& report, const std::string& path);

Report report_from_json(const std::string& text);

std::string report_to_json_string(const Report& report);

}  // namespace cklab
