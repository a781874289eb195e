#include "xisub/acceptance.hpp"
#include "xisub/report.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace xisub;

TEST_SUITE("report") {

TEST_CASE("records carry verdicts") {
  Report r(nlohmann::json{{"name", "unit"}});
  CHECK(r.at_most("a", 1e-9, 1e-8).pass);
  CHECK_FALSE(r.at_most("b", std::nan(""), 1e-8).pass);
  CHECK(r.at_least("c", 0.5, 0.1).pass);
  CHECK_FALSE(r.all_pass());
  const auto j = r.to_json();
  CHECK(j["schema"] == 1);
  CHECK(j["records"].size() == 3);
  CHECK(j["records"][1]["value"].is_null());
  CHECK(j["summary"]["failed"] == 1);
  CHECK(j.contains("timestamp"));
  CHECK(j["environment"].contains("compiler"));
}

TEST_CASE("errors fail the report") {
  Report r;
  r.at_most("fine", 0.0, 1.0);
  CHECK(r.all_pass());
  r.add_error("ctx", std::runtime_error("broken"));
  CHECK_FALSE(r.all_pass());
  CHECK(r.to_json()["errors"][0]["message"] == "broken");
}

TEST_CASE("timestamps are the only nondeterministic field") {
  Report a(nlohmann::json{{"name", "x"}}), b(nlohmann::json{{"name", "x"}});
  a.at_most("v", 0.1 + 0.2, 1.0);
  b.at_most("v", 0.1 + 0.2, 1.0);
  CHECK(dump(strip_timestamp(a.to_json())) == dump(strip_timestamp(b.to_json())));
  CHECK_FALSE(strip_timestamp(a.to_json()).contains("timestamp"));
  // doubles survive a round trip
  const auto back = nlohmann::json::parse(dump(a.to_json()));
  CHECK(back["records"][0]["value"].get<double>() == 0.1 + 0.2);
}

TEST_CASE("criterion ids") {
  const auto ids = acceptance::criterion_ids();
  CHECK(ids.size() == 11);
  CHECK(ids.front() == "1");
  CHECK(ids.back() == "10");
  CHECK_THROWS(acceptance::criterion_title("11"));
  Report r;
  const auto v = acceptance::run({"6"}, r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].pass);
  CHECK(acceptance::format_verdict(v[0]).find("PASS") != std::string::npos);
}

}  // TEST_SUITE
