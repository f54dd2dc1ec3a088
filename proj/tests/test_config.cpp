#include <gtest/gtest.h>

#include "cdmm/config.hpp"
#include "cdmm/serialize.hpp"

using namespace cdmm;

namespace {

ExperimentConfig parse(const char* text) { return config_from_json(nlohmann::json::parse(text)); }

std::string error_of(const char* text) {
  try {
    parse(text).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, HomogeneousDefaults) {
  const auto c = parse(R"({"roster": {"k": 10, "s": 2}})");
  c.validate();
  EXPECT_EQ(c.active_multipliers.size(), 10u);
  EXPECT_EQ(c.passive_multipliers.size(), 2u);
  EXPECT_EQ(c.schemes, std::vector<Scheme>{Scheme::kProposed});
  EXPECT_EQ(c.scale, 10u);
  EXPECT_EQ(c.scaled(12000), 1200u);
}

TEST(Config, HeterogeneousRosterAndTypes) {
  const auto c = parse(R"({"roster": {"active": [2,2,1,1,1], "passive": [1,1]},
                           "schemes": ["proposed", "dense", "poly", "uncoded"]})");
  c.validate();
  const auto r = c.roster();
  EXPECT_EQ(r.clients[0].type, 1u);
  EXPECT_EQ(c.schemes.size(), 4u);
  const auto t = parse(R"({"roster": {"active": [2,1], "passive": [1], "types": [0,0,0]}})");
  t.validate();
  EXPECT_EQ(t.roster().clients[0].type, 0u);
}

TEST(Config, RosterSpecString) {
  const auto [a, p] = parse_roster_spec("2,2,1,1,1|1,1");
  EXPECT_EQ(a, (std::vector<std::size_t>{2, 2, 1, 1, 1}));
  EXPECT_EQ(p, (std::vector<std::size_t>{1, 1}));
  EXPECT_THROW(parse_roster_spec("2,x|1"), ConfigError);
  EXPECT_THROW(parse_roster_spec("2,0|1"), ConfigError);
}

TEST(Config, NamedErrors) {
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 3}})").find("fewer passive than active"), std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "schemes": ["magic"]})").find("unknown scheme"), std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "trials": "many"})").find("config.trials"), std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "scale": 0})").find("scale"), std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "comm": {"per_byte": -1}})").find("comm"), std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "matrix": {"source": "tape"}})").find("matrix.source"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "matrix": {"zero_fraction": 2}})").find("zero_fraction"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "timing": {"failed_clients": [9]}})").find("failed_clients"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1, "types": [0]}})").find("roster.types"), std::string::npos);
  EXPECT_NE(error_of(R"({"shape": {}})").find("roster"), std::string::npos);
  EXPECT_NE(error_of(R"([1, 2])").find("top level"), std::string::npos);
  EXPECT_NE(error_of(R"({"roster": {"k": 3, "s": 1}, "timing": {"per_type": {"x": {"shift": 1}}}})").find("per_type"),
            std::string::npos);
}

TEST(Config, HashIsStable) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Csv, FixedHeaders) {
  EXPECT_EQ(std::string(kPrivacyCsvHeader),
            "scheme,client,role,raw_blocks,coded_support_blocks,total_blocks,raw_fraction,coded_support_fraction");
  EXPECT_EQ(fmt_double(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}
