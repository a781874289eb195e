#pragma once

// Machine-readable check reports (JSON, schema 1).

#include <nlohmann/json.hpp>

#include <chrono>
#include <string>
#include <vector>

namespace xisub {

struct CheckRecord {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

nlohmann::json to_json(const CheckRecord& record);

class Report {
 public:
  explicit Report(nlohmann::json command = nlohmann::json::object());

  /// pass iff value <= tolerance (NaN fails).
  CheckRecord& at_most(std::string name, double value, double tolerance, std::string detail = {});
  /// pass iff value >= threshold.
  CheckRecord& at_least(std::string name, double value, double threshold, std::string detail = {});
  CheckRecord& add(CheckRecord record);
  /// Structured error record; always a failure.
  void add_error(const std::string& context, const std::exception& e);

  void set_result(const std::string& key, nlohmann::json value) { results_[key] = std::move(value); }

  bool all_pass() const;
  const std::vector<CheckRecord>& records() const { return records_; }
  const nlohmann::json& errors() const { return errors_; }

  /// Without the timestamp object, the output is a pure function of the inputs.
  nlohmann::json to_json(bool with_timestamp = true) const;

 private:
  nlohmann::json command_;
  std::vector<CheckRecord> records_;
  nlohmann::json errors_ = nlohmann::json::array();
  nlohmann::json results_ = nlohmann::json::object();
  std::chrono::steady_clock::time_point started_;
  std::chrono::system_clock::time_point started_wall_;
};

/// Compiler, build type, thread count, library versions.
nlohmann::json environment_stamp();

/// Removes the "timestamp" member (recursively into "runs").
nlohmann::json strip_timestamp(nlohmann::json report);

/// Pretty-printed with shortest round-trip doubles.
std::string dump(const nlohmann::json& j);

}  // namespace xisub
