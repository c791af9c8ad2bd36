#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "fdbreak/csv_io.hpp"
#include "fdbreak/detect.hpp"
#include "fdbreak/errors.hpp"
#include "fdbreak/report_json.hpp"
#include "fdbreak/simulate.hpp"
#include "test_helpers.hpp"

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/fdbreak_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
  void write(const std::string& content) const {
    std::ofstream out(path);
    out << content;
  }
};

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("minimal file ingests as a one-curve dataset; pipeline then refuses it") {
  TempFile f("min.csv");
  f.write("curve,x,y\n1,0.5,2.0\n");
  const auto result = fdbreak::ingest_csv(f.path);
  CHECK(result.data.n() == 1);
  CHECK(result.data.curve(0).size() == 1);
  fdbreak::PipelineConfig config;
  config.interior_knots = 0;
  config.order = 1;
  CHECK_THROWS_AS(fdbreak::run_detection(result.data, config), fdbreak::ArgumentError);
}

TEST_CASE("hourly-shaped file ingests with the expected shape") {
  TempFile f("hourly.csv");
  std::string body = "curve,x,y\n";
  for (int day = 1; day <= 364; ++day)
    for (int hour = 0; hour < 24; ++hour)
      body += std::to_string(day) + "," + std::to_string(hour / 23.0) + ",1.5\n";
  f.write(body);
  const auto result = fdbreak::ingest_csv(f.path);
  CHECK(result.data.n() == 364);
  for (int i = 0; i < result.data.n(); ++i) CHECK(result.data.curve(i).size() == 24);
}

TEST_CASE("ingestion errors carry line numbers") {
  TempFile bad_header("h.csv");
  bad_header.write("a,b,c\n1,0.5,1\n");
  CHECK_THROWS_AS(fdbreak::ingest_csv(bad_header.path), fdbreak::IngestError);

  TempFile out_of_range("r.csv");
  out_of_range.write("curve,x,y\n1,0.5,1\n1,1.5,2\n");
  try {
    fdbreak::ingest_csv(out_of_range.path);
    FAIL("expected IngestError");
  } catch (const fdbreak::IngestError& e) {
    CHECK(e.line() == 3);
  }
  // The same file passes with rescaling, and the map is recorded.
  const auto rescaled = fdbreak::ingest_csv(out_of_range.path, {true});
  CHECK(rescaled.rescaled);
  CHECK(rescaled.x_min == 0.5);
  CHECK(rescaled.x_max == 1.5);
  for (int i = 0; i < rescaled.data.n(); ++i)
    for (double x : rescaled.data.curve(i).x) CHECK((x >= 0.0 && x <= 1.0));

  TempFile bad_value("v.csv");
  bad_value.write("curve,x,y\n1,0.5,nope\n");
  CHECK_THROWS_AS(fdbreak::ingest_csv(bad_value.path), fdbreak::IngestError);

  TempFile bad_id("i.csv");
  bad_id.write("curve,x,y\nfirst,0.5,1.0\n");
  CHECK_THROWS_AS(fdbreak::ingest_csv(bad_id.path), fdbreak::IngestError);

  TempFile inf_value("f.csv");
  inf_value.write("curve,x,y\n1,0.5,inf\n");
  CHECK_THROWS_AS(fdbreak::ingest_csv(inf_value.path), fdbreak::IngestError);
}

TEST_CASE("curves are grouped and sorted by id") {
  TempFile f("order.csv");
  f.write("curve,x,y\n7,0.1,1\n2,0.2,2\n7,0.3,3\n2,0.4,4\n10,0.5,5\n");
  const auto result = fdbreak::ingest_csv(f.path);
  REQUIRE(result.data.n() == 3);
  CHECK(result.data.curve(0).y[0] == 2.0);  // id 2 first
  CHECK(result.data.curve(0).size() == 2);
  CHECK(result.data.curve(1).size() == 2);  // id 7
  CHECK(result.data.curve(2).size() == 1);  // id 10
}

TEST_CASE("simulated datasets round-trip through CSV bit for bit") {
  fdbreak::SimConfig cfg;
  cfg.n = 25;
  cfg.a = 0.6;
  cfg.seed = 99;
  const auto data = fdbreak::gen_dataset(cfg);

  TempFile f("roundtrip.csv");
  fdbreak::write_dataset_csv(data, f.path);
  const auto back = fdbreak::ingest_csv(f.path);
  REQUIRE(back.data.n() == data.n());
  for (int i = 0; i < data.n(); ++i) {
    CHECK(back.data.curve(i).x == data.curve(i).x);
    CHECK(back.data.curve(i).y == data.curve(i).y);
  }

  // Identical bytes in, identical report out.
  fdbreak::PipelineConfig config;
  config.interior_knots = 1;
  config.order = 3;
  config.mc_draws = 200;
  config.grid_size = 101;
  const std::string r1 = fdbreak::to_json(fdbreak::run_detection(data, config)).dump();
  const std::string r2 = fdbreak::to_json(fdbreak::run_detection(back.data, config)).dump();
  CHECK(r1 == r2);
}

TEST_CASE("json report embeds the resolved configuration") {
  const auto data = testutil::make_dataset(
      20, 3, 5, 301, [](int i, double x) { return x + (i >= 10 ? 1.0 : 0.0); }, 0.3);
  fdbreak::PipelineConfig config;
  config.interior_knots = 1;
  config.order = 2;
  config.mc_draws = 150;
  config.grid_size = 101;
  config.seed = 4;
  const auto j = fdbreak::to_json(fdbreak::run_detection(data, config));
  CHECK(j.contains("config"));
  CHECK(j["config"]["p"] == 2);
  CHECK(j["config"]["seed"] == 4);
  CHECK(j["config"]["width_rule"] == "tau_scaled");
  CHECK(j["k_hat_l2"] == 10);
  CHECK(j["sigma_diagnostics"].contains("psd_clip_mass"));
}

TEST_SUITE_END();
