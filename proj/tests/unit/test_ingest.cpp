#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "aslap/error.hpp"
#include "aslap/ingest.hpp"
#include "oracles.hpp"

using namespace aslap;
using namespace aslap::ingest;

namespace {

const ColumnMapping kMapping{"lat", "lon", "time", {"temp", "ph", "orp"}};

RawRecord record(double lat, double lon, double temp, double ph, double orp) {
  return {"2020-01-01T00:00:00", lat, lon, {{"temp", temp}, {"ph", ph}, {"orp", orp}}};
}

std::vector<RawRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<RawRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(record(45.50 + 0.01 * unit(rng), -73.90 + 0.01 * unit(rng), 10.0 + 15.0 * unit(rng),
                         6.5 + 2.0 * unit(rng), 100.0 + 300.0 * unit(rng)));
  }
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST_CASE("three valid rows load with no drops") {
  std::istringstream in(
      "time,lat,lon,temp,ph,orp,extra\n"
      "2020-07-01T10:00:00,45.5,-73.9,20.1,7.2,250,x\n"
      "2020-07-01T10:00:05,45.5001,-73.9001,20.3,7.1,260,y\n"
      "2020-07-01T10:00:10,45.5002,-73.9002,20.2,7.3,255,z\n");
  const auto r = parse_csv(in, kMapping);
  CHECK(r.records.size() == 3);
  CHECK(r.report.rows_read == 3);
  CHECK(r.report.rows_dropped == 0);
  CHECK(r.records[1].readings.at("orp") == 260.0);
  CHECK(r.records[2].timestamp == "2020-07-01T10:00:10");
}

TEST_CASE("a row with NaN in a mapped column is dropped and counted") {
  std::istringstream in(
      "time,lat,lon,temp,ph,orp\n"
      "t0,45.5,-73.9,20.1,7.2,250\n"
      "t1,45.5,-73.9,NaN,7.2,250\n"
      "t2,45.5,-73.9,20.1,7.2,\n"
      "t3,95.0,-73.9,20.1,7.2,250\n"
      "t4,45.5,-73.9,20.1,7.2,251\n");
  const auto r = parse_csv(in, kMapping);
  CHECK(r.records.size() == 2);
  CHECK(r.report.rows_read == 5);
  CHECK(r.report.rows_dropped == 3);
}

TEST_CASE("unparseable text in an unmapped column does not drop the row") {
  std::istringstream in("time,lat,lon,temp,ph,orp,note\nt0,45.5,-73.9,20.1,7.2,250,NaN\n");
  CHECK(parse_csv(in, kMapping).records.size() == 1);
}

TEST_CASE("a missing mapped column is a schema error naming the column") {
  std::istringstream in("time,lat,lon,temp,ph\nt0,45.5,-73.9,20.1,7.2\n");
  try {
    parse_csv(in, kMapping);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Schema);
    CHECK(std::string(e.what()).find("'orp'") != std::string::npos);
  }
}

TEST_CASE("empty and missing files") {
  const auto empty = temp_file("aslap_empty.csv", "");
  try {
    load_csv(empty.string(), kMapping);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyInput);
  }
  std::filesystem::remove(empty);
  try {
    load_csv("/nonexistent/aslap/data.csv", kMapping);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
    CHECK(std::string(e.what()).find("/nonexistent/aslap/data.csv") != std::string::npos);
  }
}

TEST_CASE("quoted fields, BOM and CRLF line endings") {
  std::istringstream in(
      "\xEF\xBB\xBF\"time\",lat,lon,temp,ph,orp\r\n"
      "\"2020-07-01, morning\",45.5,-73.9,20.1,7.2,250\r\n");
  const auto r = parse_csv(in, kMapping);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].timestamp == "2020-07-01, morning");
}

TEST_CASE("build_dataset min-max endpoints") {
  const std::vector<RawRecord> recs{record(45.5, -73.9, 10, 7, 2), record(45.6, -73.8, 20, 8, 4)};
  const auto d = build_dataset(recs, {"temp", "ph"}, "orp");
  CHECK(d.latent == std::vector<double>{0.0, 1.0});
  CHECK(d.observables[0] == std::vector<double>{0.0, 1.0});
  CHECK(d.bounds.back().min == 2.0);
  CHECK(d.bounds.back().max == 4.0);
  CHECK(d.names == std::vector<std::string>{"temp", "ph", "orp"});
}

TEST_CASE("build_dataset on already-normalized columns is the identity") {
  std::vector<RawRecord> recs{record(45.5, -73.9, 0.0, 1.0, 0.0), record(45.5, -73.9, 1.0, 0.0, 1.0),
                              record(45.5, -73.9, 0.25, 0.5, 0.75)};
  const auto d = build_dataset(recs, {"temp", "ph"}, "orp");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(d.observables[0][i] == recs[i].readings.at("temp"));
    CHECK(d.observables[1][i] == recs[i].readings.at("ph"));
    CHECK(d.latent[i] == recs[i].readings.at("orp"));
  }
}

TEST_CASE("normalization round-trips and stays in [0,1]") {
  const auto recs = random_records(100, 17);
  const auto d = build_dataset(recs, {"temp", "ph"}, "orp");
  const std::vector<std::string> names{"temp", "ph", "orp"};
  for (std::size_t col = 0; col < 3; ++col) {
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double raw = recs[i].readings.at(names[col]);
      const double v = d.column(col)[i];
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      CHECK(std::abs(d.denormalize(col, v) - raw) <= 1e-12 * std::max(1.0, std::abs(raw)));
      CHECK(std::abs(d.denormalize(col, d.normalize(col, raw)) - raw) <= 1e-12 * std::max(1.0, std::abs(raw)));
    }
  }
}

TEST_CASE("build_dataset errors") {
  std::vector<RawRecord> recs{record(45.5, -73.9, 10, 7, 3), record(45.6, -73.8, 20, 8, 3)};
  try {
    build_dataset(recs, {"temp", "ph"}, "orp");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Normalization);
    CHECK(std::string(e.what()).find("'orp'") != std::string::npos);
  }
  recs.pop_back();
  try {
    build_dataset(recs, {"temp", "ph"}, "orp");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
  }
  const std::vector<RawRecord> two{record(45.5, -73.9, 10, 7, 2), record(45.6, -73.8, 20, 8, 4)};
  CHECK_THROWS_AS(build_dataset(two, {"temp", "missing"}, "orp"), Error);
}

TEST_CASE("local projection is centred and scaled in metres") {
  const std::vector<RawRecord> recs{record(45.0, -73.0, 0, 0, 0), record(45.0, -72.99, 0, 0, 0),
                                    record(45.01, -73.0, 0, 0, 0)};
  const auto p = project_local(recs);
  double sx = 0.0, sy = 0.0;
  for (const auto& q : p) {
    sx += q[0];
    sy += q[1];
  }
  CHECK(std::abs(sx) < 1e-6);
  CHECK(std::abs(sy) < 1e-6);
  // 0.01 degrees of latitude is about 1112 m; of longitude at 45 deg about 786 m.
  CHECK(p[2][1] - p[0][1] == doctest::Approx(1111.95).epsilon(1e-3));
  CHECK(p[1][0] - p[0][0] == doctest::Approx(786.3).epsilon(2e-3));
}

TEST_CASE("records sharing one location populate a single cell") {
  std::vector<RawRecord> recs;
  for (int i = 0; i < 5; ++i) recs.push_back(record(45.5, -73.9, 10.0 + i, 7.0 + 0.1 * i, 100.0 * i));
  const auto r = rasterize(recs, {"temp", "ph"}, "orp", {10, 10, 3.0});
  CHECK(r.report.populated == 1);
  const auto& env = r.environment;
  const Cell home{0, 9};
  CHECK(env.is_valid(home));
  CHECK(r.raw[0].at(home) == doctest::Approx(12.0));
  CHECK(r.raw[2].at(home) == doctest::Approx(200.0));
  CHECK_FALSE(env.is_valid({9, 0}));
  CHECK_FALSE(env.is_valid({4, 9}));
  CHECK(env.is_valid({3, 9}));
  CHECK(r.report.populated + r.report.filled + r.report.masked == 100);
  CHECK(env.cells().size() == r.report.populated + r.report.filled);
  std::mt19937_64 rng(0);
  CHECK_THROWS_AS(sense(env, 0, {9, 0}, 0.0, rng), Error);
}

TEST_CASE("cell value is the mean of its records") {
  // Two records share the first cell; a third sits in the opposite corner.
  const std::vector<RawRecord> recs{record(45.0, -73.0, 0.2, 0.0, 0.0), record(45.0, -73.0, 0.4, 1.0, 1.0),
                                    record(45.001, -72.999, 1.0, 0.5, 0.5)};
  const auto r = rasterize(recs, {"temp", "ph"}, "orp", {2, 2, 0.0});
  CHECK(r.raw[0].at({0, 1}) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(r.raw[0].at({1, 0}) == 1.0);
  CHECK(r.report.populated == 2);
  CHECK(r.report.masked == 2);
}

TEST_CASE("rasterize is permutation-invariant and normalized") {
  auto recs = random_records(400, 5);
  const auto a = rasterize(recs, {"temp", "ph"}, "orp", {12, 9, 2.0});
  std::mt19937_64 rng(6);
  std::shuffle(recs.begin(), recs.end(), rng);
  const auto b = rasterize(recs, {"temp", "ph"}, "orp", {12, 9, 2.0});
  CHECK(a.environment.fields() == b.environment.fields());
  CHECK(a.raw == b.raw);
  for (const auto& f : a.environment.fields()) {
    for (const Cell& c : a.environment.cells()) {
      CHECK(f.at(c) >= 0.0);
      CHECK(f.at(c) <= 1.0);
    }
  }
}

TEST_CASE("rasterize rejects empty input") {
  CHECK_THROWS_AS(rasterize({}, {"temp"}, "orp", {}), Error);
  CHECK_THROWS_AS(rasterize(random_records(3, 1), {"temp"}, "orp", {0, 5, 3.0}), Error);
}

TEST_CASE("dataset files round-trip") {
  const auto d = build_dataset(random_records(50, 3), {"temp", "ph"}, "orp");
  const auto path = std::filesystem::temp_directory_path() / "aslap_dataset_roundtrip.csv";
  save_dataset(d, path.string());
  const auto back = load_dataset(path.string());
  std::filesystem::remove(path);
  CHECK(back.names == d.names);
  CHECK(back.latent == d.latent);
  CHECK(back.observables == d.observables);
  CHECK(back.locations == d.locations);
  REQUIRE(back.bounds.size() == d.bounds.size());
  for (std::size_t i = 0; i < d.bounds.size(); ++i) {
    CHECK(back.bounds[i].min == d.bounds[i].min);
    CHECK(back.bounds[i].max == d.bounds[i].max);
  }

  const auto bad = temp_file("aslap_dataset_bad.csv", "x,y,a,b\n1,2,3,4\n");
  CHECK_THROWS_AS(load_dataset(bad.string()), Error);
  std::filesystem::remove(bad);
}

TEST_CASE("datasets drawn from an environment") {
  const auto env = oracle::make_env(6, 5, 2, 4);
  const auto all = dataset_from_environment(env, 0, 1);
  CHECK(all.size() == 30);
  CHECK(all.sensor_count() == 2);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const Cell c{static_cast<int>(all.locations[i][0]), static_cast<int>(all.locations[i][1])};
    CHECK(all.observables[1][i] == env.observable(1).at(c));
    CHECK(all.latent[i] == env.latent().at(c));
  }
  const auto some = dataset_from_environment(env, 10, 1);
  CHECK(some.size() == 10);
  CHECK(dataset_from_environment(env, 10, 1).latent == some.latent);
}
