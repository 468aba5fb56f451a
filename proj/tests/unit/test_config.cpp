#include <doctest.h>

#include <string>

#include "bpmisac/config.hpp"

using namespace bpmisac;

TEST_SUITE("config") {

TEST_CASE("defaults describe the reference setup") {
  const ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.n_tx == 32);
  CHECK(c.K == 4);
  CHECK(c.N_C == 3);
  CHECK(c.scan_dirs_deg.size() == 3);
  CHECK(c.detector == "euclidean");
}

TEST_CASE("key = value parsing") {
  const ExperimentConfig c = parse_config(
      "# comment\n"
      "trials = 7\n"
      "mu = 0.2, 0.4   # trailing comment\n"
      "methods = bpm_isac,pbpm\n"
      "seed = 18446744073709551615\n"
      "\n"
      "detector = ml\n");
  CHECK(c.trials == 7);
  CHECK(c.mu == std::vector<double>{0.2, 0.4});
  CHECK(c.methods == std::vector<std::string>{"bpm_isac", "pbpm"});
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(c.detector == "ml");
}

TEST_CASE("errors carry the source and line") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text, "exp.cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("trials = 3\nbogus = 1\n").find("exp.cfg:2") != std::string::npos);
  CHECK(message("trials = 3\nbogus = 1\n").find("unknown key") != std::string::npos);
  CHECK(message("trials\n").find("exp.cfg:1") != std::string::npos);
  CHECK(message("trials = many\n").find("exp.cfg:1") != std::string::npos);
  CHECK(message("trials = 3x\n").find("bad value") != std::string::npos);
  CHECK_FALSE(message("mu = 1.5\n").empty());
  CHECK_FALSE(message("methods = bpm_isac, magic\n").empty());
  CHECK_FALSE(message("detector = psychic\n").empty());
  CHECK_FALSE(message("activation_probs = 0.5, 0.5, 0.5\n").empty());
  CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("hash tracks every field") {
  const ExperimentConfig a;
  ExperimentConfig b;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.seed = 2;
  CHECK(a.hash() != b.hash());
  b = a;
  b.detector = "ml";
  CHECK(a.hash() != b.hash());
  b = a;
  b.mu = {0.1, 0.5, 0.80000000000000004};
  CHECK(a.hash() == b.hash());  // same double
  b.mu = {0.1, 0.5, 0.8000000000000002};
  CHECK(a.hash() != b.hash());
}

}
