#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "jicgsim/export.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace jicgsim;
using nlohmann::json;

namespace {

SensitivityMap small_map() {
  SensitivityMap m;
  m.grid = ScanGrid{{0, 0}, {1, 0.5}, 0.5};  // 3 x 2
  m.cells = {FaultClass::none, FaultClass::bit_set, FaultClass::bit_reset,
             FaultClass::stuck_at, FaultClass::permanent, FaultClass::unstable};
  return m;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Export, ColoursAreDistinct) {
  std::set<std::array<std::uint8_t, 3>> seen;
  for (FaultClass c : {FaultClass::none, FaultClass::bit_set, FaultClass::bit_reset, FaultClass::stuck_at,
                       FaultClass::permanent, FaultClass::unstable}) {
    seen.insert(class_color(c));
  }
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_EQ(class_color(FaultClass::none), (std::array<std::uint8_t, 3>{255, 255, 255}));
  EXPECT_EQ(class_color(FaultClass::permanent), (std::array<std::uint8_t, 3>{0, 0, 0}));
}

TEST(Export, CsvRowsFollowGridOrder) {
  const auto l = lines(map_to_csv(small_map()));
  ASSERT_EQ(l.size(), 7u);
  EXPECT_EQ(l[0], "x_um,y_um,classification");
  EXPECT_EQ(l[1], "0.000,0.000,none");
  EXPECT_EQ(l[2], "0.500,0.000,bit_set");
  EXPECT_EQ(l[4], "0.000,0.500,stuck_at");
  EXPECT_EQ(l[6], "1.000,0.500,unstable");
}

TEST(Export, PpmTopRowIsLargestY) {
  const auto l = lines(map_to_ppm(small_map()));
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "P3");
  EXPECT_EQ(l[1], "3 2");
  EXPECT_EQ(l[2], "255");
  EXPECT_EQ(l[3], "30 144 255 0 0 0 128 128 128");
  EXPECT_EQ(l[4], "255 255 255 220 20 60 255 215 0");
}

TEST(Export, RegionsJson) {
  SensitiveRegion r;
  r.fault = FaultClass::bit_set;
  r.cells = 4;
  r.bbox = {73, 7, 76, 9};
  r.centroid = {74.5, 8};
  r.gate_ids = {"G6"};
  const json j = json::parse(regions_to_json({r}));
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["classification"], "bit_set");
  EXPECT_EQ(j[0]["cells"], 4);
  EXPECT_EQ(j[0]["gate_ids"][0], "G6");
  EXPECT_DOUBLE_EQ(j[0]["centroid"][0].get<double>(), 74.5);
  EXPECT_EQ(json::parse(regions_to_json({})), json::array());
}

TEST(Export, ReportJsonAndText) {
  const std::vector<ReportRow> rows = {{"'0'", 20, "35-100", "50-1000", "bit-set"},
                                       {"'0' or '1'", 5, "10-100", "50-1000", "no"}};
  const json j = json::parse(report_to_json(rows));
  EXPECT_EQ(j["format"], "jicgsim-report");
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["power_percent"], "35-100");
  EXPECT_EQ(j["rows"][1]["input"], "'0' or '1'");
  const auto t = lines(report_to_text(rows));
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].rfind("input", 0), 0u);
  EXPECT_NE(t[1].find("20x"), std::string::npos);
  EXPECT_NE(t[2].find("no"), std::string::npos);
}

TEST(Export, CampaignJsonCarriesTheLadder) {
  const ScanEngine& e = jicgsim::testing::calibrated_engine();
  EscalationLadder ladder{{0.3, 0.4}, {50}, {20}};
  const auto r = escalate(e, e.default_grid(), ladder, 0);
  const json j = json::parse(campaign_to_json({r}));
  EXPECT_EQ(j["format"], "jicgsim-campaign");
  const auto& obj = j["campaigns"][0]["objectives"][0];
  EXPECT_EQ(obj["magnification"], 20);
  EXPECT_EQ(obj["success"], true);
  EXPECT_DOUBLE_EQ(obj["onset_power"].get<double>(), 0.4);
  EXPECT_EQ(obj["trail"].size(), 2u);
  EXPECT_EQ(obj["trail"][0]["classification"], "none");
  EXPECT_EQ(campaign_to_json({r}), campaign_to_json({r}));
}
