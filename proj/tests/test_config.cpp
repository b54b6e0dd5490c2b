#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "carpet/config.hpp"

using namespace carpet;

TEST_CASE("config round trip") {
  RunConfig c;
  c.N = 5;
  c.m_max = 3;
  c.k_max = 4;
  c.cg_tolerance = 3.3e-11;
  c.slack = 0.1;
  c.tol_multiplier = 0.7;
  c.out_dir = "out/dir";
  c.cache = false;
  c.cache_dir = "/tmp/x";
  c.formats = {"json", "csv"};
  const auto back = RunConfig::from_text(c.to_text());
  CHECK(back == c);
  CHECK(back.to_text() == c.to_text());
  CHECK(RunConfig::from_text(RunConfig{}.to_text()) == RunConfig{});
}

TEST_CASE("config parsing") {
  const auto c = RunConfig::from_text("# comment\n  N = 3  \nslack=0.02 # trailing\n\nformats = svg\n");
  CHECK(c.N == 3);
  CHECK(c.slack == 0.02);
  CHECK(c.formats == std::vector<std::string>{"svg"});
  CHECK_THROWS_AS(RunConfig::from_text("N = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("N = two\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("bogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("N 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("cg_tolerance = 1.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("m_max = 0\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("cache = maybe\n"), std::invalid_argument);
  CHECK_THROWS_AS(RunConfig::from_text("formats = pdf\n"), std::invalid_argument);
  CHECK_THROWS(RunConfig::load("/nonexistent/carpet.cfg"));
}

TEST_CASE("fnv1a") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("result cache") {
  const auto dir = std::filesystem::temp_directory_path() / "carpet-cache-test";
  std::filesystem::remove_all(dir);
  const ResultCache cache(dir);
  CHECK_FALSE(cache.load("k1").has_value());
  cache.store("k1", nlohmann::json{{"R", 1.0000000000000002}});
  const auto hit = cache.load("k1");
  REQUIRE(hit.has_value());
  CHECK((*hit)["R"].get<double>() == 1.0000000000000002);
  CHECK_FALSE(cache.load("k2").has_value());

  // Corrupt entries are ignored, never trusted.
  {
    std::ofstream f(cache.path_for("k1"), std::ios::trunc);
    f << "{\"key\": \"k1\", \"value\": ";
  }
  CHECK_FALSE(cache.load("k1").has_value());
  // An entry stored under a colliding path with another key is rejected.
  {
    std::ofstream f(cache.path_for("k1"), std::ios::trunc);
    f << R"({"key": "other", "value": 3})";
  }
  CHECK_FALSE(cache.load("k1").has_value());

  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    ++files;
    CHECK(e.path().extension() == ".json");
  }
  CHECK(files == 1);

  const ResultCache off(dir, false);
  off.store("k3", 1);
  CHECK_FALSE(off.load("k3").has_value());
  std::filesystem::remove_all(dir);
}
