#pragma once

// Acceptance criteria 1-10, shared by the acceptance test and `verify-all`.
// Records are named "<id>/<check>"; tolerances are fixed in the source.

#include "xisub/kernels.hpp"
#include "xisub/report.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xisub::acceptance {

struct Options {
  kernels::ExecutionPolicy policy{};
  std::uint64_t seed = 20251;
};

/// "1" .. "7", "8a", "8b", "9", "10".
std::vector<std::string> criterion_ids();
std::string criterion_title(const std::string& id);

struct Verdict {
  std::string id;
  std::string title;
  bool pass = false;
  std::size_t records = 0;
  std::size_t failed = 0;
  std::size_t errors = 0;
  double seconds = 0.0;
  std::string worst;  // first failing record, if any
};

/// Appends the records of one criterion.  Criterion 10 reruns 1-9 twice.
void run_criterion(const std::string& id, Report& report, const Options& options = {});

/// Runs the given criteria in order.  When 1-9 precede 10, the first pass is
/// reused and only one extra pass is made.
std::vector<Verdict> run(const std::vector<std::string>& ids, Report& report,
                         const Options& options = {});

std::string format_verdict(const Verdict& v);

}  // namespace xisub::acceptance
