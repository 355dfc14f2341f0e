#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "glidernav/glidernav.h"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

const char* kConfig =
    "glider.id = unit_1\n"
    "glider.speed = 0.3\n"
    "deployment.start = 3112.6N, -8008.0E\n"
    "deployment.flow = uniform 0.1 0.11\n"
    "tracking.mode = virtual_mooring\n"
    "tracking.targets = 3118.0N, -8008.0E\n";

struct Str {
  char* s = nullptr;
  ~Str() { gn_string_free(s); }
  std::string str() const { return s ? s : ""; }
};

gn_config* parse(const std::string& text, const char* base = nullptr) {
  gn_config* cfg = nullptr;
  EXPECT_EQ(gn_config_parse(text.c_str(), base, &cfg), GN_OK) << gn_last_error();
  return cfg;
}

}  // namespace

TEST(CApi, VersionAndPositions) {
  EXPECT_STRNE(gn_version(), "");
  double lat = 0, lon = 0;
  ASSERT_EQ(gn_parse_latlon("3118.0N, -8008.0E", &lat, &lon), GN_OK);
  EXPECT_NEAR(lat, 31.3, 1e-12);
  EXPECT_NEAR(lon, -80.0 - 8.0 / 60.0, 1e-12);
  Str s;
  ASSERT_EQ(gn_format_latlon(lat, lon, &s.s), GN_OK);
  double lat2 = 0, lon2 = 0;
  ASSERT_EQ(gn_parse_latlon(s.s, &lat2, &lon2), GN_OK);
  EXPECT_NEAR(lat2, lat, 1e-6);
  EXPECT_EQ(gn_parse_latlon("9999.0N, 0000.0E", &lat, &lon), GN_ERR_RANGE);
  EXPECT_EQ(gn_parse_latlon("north", &lat, &lon), GN_ERR_PARSE);
  EXPECT_STRNE(gn_last_error(), "");
  EXPECT_EQ(gn_parse_latlon(nullptr, &lat, &lon), GN_ERR_INVALID);
}

TEST(CApi, ConfigErrorNamesKey) {
  gn_config* cfg = nullptr;
  const std::string bad = std::string(kConfig) + "glider.speed = -1\n";
  EXPECT_EQ(gn_config_parse(bad.c_str(), nullptr, &cfg), GN_ERR_CONFIG);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_STREQ(gn_last_error_key(), "glider.speed");
  EXPECT_EQ(gn_config_load("/nonexistent/x.cfg", &cfg), GN_ERR_CONFIG);
  gn_config_free(nullptr);
}

TEST(CApi, RunSim) {
  gn_config* cfg = parse(kConfig);
  ASSERT_NE(cfg, nullptr);
  EXPECT_EQ(std::string(gn_config_hash(cfg)).size(), 16u);
  gn_sim_summary summary{};
  Str report;
  ASSERT_EQ(gn_run_sim(cfg, nullptr, &summary, &report.s), GN_OK) << gn_last_error();
  EXPECT_EQ(summary.status, GN_SIM_ARRIVED);
  EXPECT_GT(summary.dives, 0u);
  EXPECT_NE(report.str().find("\"arrived\""), std::string::npos);
  EXPECT_EQ(gn_run_sim(nullptr, nullptr, &summary, nullptr), GN_ERR_INVALID);
  gn_config_free(cfg);
}

TEST(CApi, FlowCreateSampleWrite) {
  gn_flow* f = nullptr;
  ASSERT_EQ(gn_flow_create("uniform 0.1 -0.05", &f), GN_OK);
  double u = 0, v = 0;
  ASSERT_EQ(gn_flow_sample(f, 31.0, -80.0, 0.0, &u, &v), GN_OK);
  EXPECT_EQ(u, 0.1);
  EXPECT_EQ(v, -0.05);
  testsupport::TempDir dir;
  const std::string path = dir / "u.gflow";
  ASSERT_EQ(gn_flow_write_grid(f, 31.0, -80.0, 0.01, 0.01, 3, 3, 0.0, 3600.0, 1, path.c_str()), GN_OK);
  gn_flow_free(f);
  ASSERT_EQ(gn_flow_create(("file " + path).c_str(), &f), GN_OK);
  ASSERT_EQ(gn_flow_sample(f, 31.01, -79.99, 0.0, &u, &v), GN_OK);
  EXPECT_NEAR(u, 0.1, 1e-6);
  EXPECT_EQ(gn_flow_sample(f, 40.0, -79.99, 0.0, &u, &v), GN_ERR_DOMAIN);
  gn_flow_free(f);
  EXPECT_EQ(gn_flow_create("swirl", &f), GN_ERR_PARSE);
}

TEST(CApi, PlanAndBlocked) {
  const std::string base = std::string(kConfig) + "planner.bbox = 3110.0N,-8012.0E; 3120.0N,-8004.0E\n";
  gn_config* cfg = parse(base);
  Str csv;
  double total = 0;
  ASSERT_EQ(gn_plan(cfg, 31.2, -80.15, 31.3, -80.1333333, &csv.s, &total), GN_OK) << gn_last_error();
  EXPECT_GT(total, 0.0);
  EXPECT_NE(csv.str().find('\n'), std::string::npos);
  gn_config_free(cfg);

  const std::string strong =
      "glider.speed = 0.3\n"
      "deployment.start = 3112.6N, -8008.0E\n"
      "deployment.flow = uniform 0 -0.5\n"
      "tracking.mode = virtual_mooring\n"
      "tracking.targets = 3118.0N, -8008.0E\n"
      "planner.bbox = 3110.0N,-8012.0E; 3120.0N,-8004.0E\n";
  cfg = parse(strong);
  Str none;
  EXPECT_EQ(gn_plan(cfg, 31.2, -80.1333333, 31.3, -80.1333333, &none.s, &total), GN_ERR_BLOCKED);
  gn_config_free(cfg);
}

TEST(CApi, FlowcmpNeedsEvents) {
  testsupport::TempDir dir;
  testsupport::spit(dir / "empty.log", "Vehicle Name: unit_1\n");
  gn_config* cfg = parse(kConfig);
  Str csv, svg, alerts;
  size_t n = 0;
  EXPECT_NE(gn_flowcmp(cfg, (dir / "empty.log").c_str(), &csv.s, &svg.s, &alerts.s, &n), GN_OK);
  EXPECT_NE(std::string(gn_last_error()), "");
  EXPECT_EQ(gn_flowcmp(cfg, (dir / "missing.log").c_str(), &csv.s, nullptr, nullptr, nullptr), GN_ERR_IO);
  gn_config_free(cfg);
}

TEST(CApi, RemoteAgainstMockServer) {
  testsupport::TempDir root;
  fs::create_directories(root.path() / "unit_1");
  gn_mock_server* server = nullptr;
  ASSERT_EQ(gn_mock_server_start(root.str().c_str(), "127.0.0.1:0", "tok", 0, &server), GN_OK);
  const std::string endpoint = "127.0.0.1:" + std::to_string(gn_mock_server_port(server));

  gn_config* cfg = parse(std::string(kConfig) + "dockserver.endpoint = " + endpoint + "\ndockserver.token = nope\n");
  gn_remote* r = nullptr;
  ASSERT_EQ(gn_remote_create(cfg, &r), GN_OK);
  EXPECT_EQ(gn_remote_poll_once(r), GN_ERR_AUTH);
  gn_remote_free(r);
  gn_config_free(cfg);

  cfg = parse(std::string(kConfig) + "dockserver.endpoint = " + endpoint + "\ndockserver.token = tok\n");
  ASSERT_EQ(gn_remote_create(cfg, &r), GN_OK);
  EXPECT_EQ(gn_remote_poll_once(r), GN_OK) << gn_last_error();
  EXPECT_EQ(gn_remote_processed_events(r), 0);
  EXPECT_EQ(gn_remote_resumed(r), 0);
  gn_remote_free(r);
  gn_mock_server_stop(server);

  ASSERT_EQ(gn_remote_create(cfg, &r), GN_OK);
  EXPECT_EQ(gn_remote_poll_once(r), GN_ERR_CONNECT);
  gn_remote_free(r);
  gn_config_free(cfg);

  cfg = parse(kConfig);
  EXPECT_EQ(gn_remote_create(cfg, &r), GN_ERR_CONFIG);
  EXPECT_STREQ(gn_last_error_key(), "dockserver.endpoint");
  gn_config_free(cfg);
}
