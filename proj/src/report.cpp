#include "xisub/report.hpp"

#include "xisub/kernels.hpp"

#include <Eigen/Core>

#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace xisub {

nlohmann::json to_json(const CheckRecord& r) {
  nlohmann::json j{{"name", r.name}, {"tolerance", r.tolerance}, {"pass", r.pass}};
  // NaN and infinities are not representable in JSON.
  j["value"] = std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr);
  if (!std::isfinite(r.value)) j["value_text"] = std::to_string(r.value);
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

Report::Report(nlohmann::json command)
    : command_(std::move(command)),
      started_(std::chrono::steady_clock::now()),
      started_wall_(std::chrono::system_clock::now()) {}

CheckRecord& Report::add(CheckRecord record) {
  records_.push_back(std::move(record));
  return records_.back();
}

CheckRecord& Report::at_most(std::string name, double value, double tolerance, std::string detail) {
  return add({std::move(name), value, tolerance, value <= tolerance, std::move(detail)});
}

CheckRecord& Report::at_least(std::string name, double value, double threshold,
                              std::string detail) {
  return add({std::move(name), value, threshold, value >= threshold, std::move(detail)});
}

void Report::add_error(const std::string& context, const std::exception& e) {
  errors_.push_back({{"context", context}, {"message", e.what()}});
}

bool Report::all_pass() const {
  if (!errors_.empty()) return false;
  for (const auto& r : records_)
    if (!r.pass) return false;
  return true;
}

nlohmann::json Report::to_json(bool with_timestamp) const {
  nlohmann::json j;
  j["schema"] = 1;
  j["command"] = command_;
  j["environment"] = environment_stamp();
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records_) recs.push_back(xisub::to_json(r));
  j["records"] = std::move(recs);
  j["errors"] = errors_;
  if (!results_.empty()) j["results"] = results_;
  std::size_t failed = 0;
  for (const auto& r : records_) failed += r.pass ? 0 : 1;
  j["summary"] = {{"records", records_.size()},
                  {"failed", failed},
                  {"errors", errors_.size()},
                  {"pass", all_pass()}};
  if (with_timestamp) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_);
    const std::time_t t = std::chrono::system_clock::to_time_t(started_wall_);
    std::ostringstream os;
    os << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    j["timestamp"] = {{"started", os.str()}, {"wall_time_s", elapsed.count()}};
  }
  return j;
}

nlohmann::json environment_stamp() {
  nlohmann::json env;
#if defined(__clang__)
  env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env["compiler"] = std::string("gcc ") + __VERSION__;
#else
  env["compiler"] = "unknown";
#endif
  env["cxx_standard"] = static_cast<long>(__cplusplus);
#ifdef NDEBUG
  env["build"] = "release";
#else
  env["build"] = "debug";
#endif
  env["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                 "." + std::to_string(EIGEN_MINOR_VERSION);
  env["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  env["threads"] = kernels::thread_count();
  return env;
}

nlohmann::json strip_timestamp(nlohmann::json report) {
  if (report.is_object()) {
    report.erase("timestamp");
    for (auto& [key, value] : report.items()) value = strip_timestamp(value);
  } else if (report.is_array()) {
    for (auto& value : report) value = strip_timestamp(value);
  }
  return report;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace xisub
