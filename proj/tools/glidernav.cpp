#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "glidernav/glidernav.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitConnect = 3;
constexpr int kExitBlocked = 4;

std::atomic<bool> g_interrupted{false};
gn_remote* g_remote = nullptr;

void on_signal(int) {
  g_interrupted.store(true);
  if (g_remote) gn_remote_stop(g_remote);
}

int report(gn_status st) {
  if (st == GN_OK) return kExitOk;
  switch (st) {
    case GN_ERR_CONFIG:
      std::cerr << "config error: " << gn_last_error() << "\n";
      return kExitConfig;
    case GN_ERR_CONNECT:
    case GN_ERR_AUTH:
      std::cerr << "dockserver: " << gn_last_error() << "\n";
      return kExitConnect;
    case GN_ERR_BLOCKED:
      std::cerr << "planner: " << gn_last_error() << "\n";
      return kExitBlocked;
    default:
      std::cerr << "error: " << gn_last_error() << "\n";
      return kExitFailure;
  }
}

struct Owned {
  char* s = nullptr;
  ~Owned() { gn_string_free(s); }
};

bool write_text(const fs::path& path, const char* text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

bool parse_position(const std::string& text, double& lat, double& lon) {
  if (gn_parse_latlon(text.c_str(), &lat, &lon) == GN_OK) return true;
  std::cerr << "bad position '" << text << "': " << gn_last_error() << "\n";
  return false;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

int cmd_sim(const std::string& cfg_path, const std::string& out_dir) {
  gn_config* cfg = nullptr;
  if (gn_status st = gn_config_load(cfg_path.c_str(), &cfg); st != GN_OK) return report(st);
  std::string dir = out_dir.empty() ? gn_config_output_dir(cfg) : out_dir;
  gn_sim_summary summary{};
  gn_status st = gn_run_sim(cfg, dir.c_str(), &summary, nullptr);
  gn_config_free(cfg);
  if (st != GN_OK) return report(st);
  static const char* names[] = {"arrived", "duration_elapsed", "transits_done", "domain_exit"};
  std::printf("%s after %zu dives, %.0f s; distance to target %.1f m; transits %d\n", names[summary.status],
              summary.dives, summary.elapsed_s, summary.final_distance_m, summary.transits);
  std::printf("outputs in %s\n", dir.c_str());
  return summary.status == GN_SIM_DOMAIN_EXIT ? kExitFailure : kExitOk;
}

void log_line(const char* message, void*) {
  std::fprintf(stderr, "%s\n", message);
}

int cmd_remote(const std::string& cfg_path, bool once) {
  gn_config* cfg = nullptr;
  if (gn_status st = gn_config_load(cfg_path.c_str(), &cfg); st != GN_OK) return report(st);
  gn_remote* remote = nullptr;
  gn_status st = gn_remote_create(cfg, &remote);
  gn_config_free(cfg);
  if (st != GN_OK) return report(st);
  gn_remote_set_log(remote, log_line, nullptr);
  if (gn_remote_resumed(remote)) std::fprintf(stderr, "resumed from checkpoint\n");

  if (once) {
    st = gn_remote_poll_once(remote);
  } else {
    g_remote = remote;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    st = gn_remote_run(remote);
    g_remote = nullptr;
  }
  std::printf("%lld events handled\n", gn_remote_processed_events(remote));
  gn_remote_free(remote);
  return report(st);
}

int cmd_plan(const std::string& cfg_path, const std::string& start, const std::string& goal,
             const std::string& out) {
  double slat, slon, glat, glon;
  if (!parse_position(start, slat, slon) || !parse_position(goal, glat, glon)) return kExitConfig;
  gn_config* cfg = nullptr;
  if (gn_status st = gn_config_load(cfg_path.c_str(), &cfg); st != GN_OK) return report(st);
  Owned csv;
  double total = 0.0;
  gn_status st = gn_plan(cfg, slat, slon, glat, glon, &csv.s, &total);
  gn_config_free(cfg);
  if (st != GN_OK) return report(st);
  if (out.empty()) {
    std::fputs(csv.s, stdout);
  } else {
    if (!write_text(out, csv.s)) return kExitFailure;
    std::printf("path takes %.1f s; written to %s\n", total, out.c_str());
  }
  return kExitOk;
}

int cmd_flowcmp(const std::string& cfg_path, const std::string& events, const std::string& out_dir) {
  gn_config* cfg = nullptr;
  if (gn_status st = gn_config_load(cfg_path.c_str(), &cfg); st != GN_OK) return report(st);
  std::string dir = out_dir.empty() ? gn_config_output_dir(cfg) : out_dir;
  Owned csv, svg, alerts;
  size_t n_alerts = 0;
  gn_status st = gn_flowcmp(cfg, events.c_str(), &csv.s, &svg.s, &alerts.s, &n_alerts);
  gn_config_free(cfg);
  if (st != GN_OK) return report(st);
  if (!write_text(fs::path(dir) / "flowcmp.csv", csv.s) || !write_text(fs::path(dir) / "flowcmp.svg", svg.s)) {
    return kExitFailure;
  }
  std::printf("%zu strong-flow alerts\n", n_alerts);
  if (n_alerts > 0) std::printf("t glider_speed fused_speed model_speed\n%s", alerts.s);
  std::printf("outputs in %s\n", dir.c_str());
  return kExitOk;
}

struct GridArgs {
  std::string origin = "0000.0N,0000.0E";
  double dlat = 0.01;
  double dlon = 0.01;
  size_t ny = 11;
  size_t nx = 11;
  double t0 = 0.0;
  double dt = 3600.0;
  size_t nt = 1;
  std::string out;
};

int cmd_gen_flow(const std::vector<std::string>& spec, const GridArgs& g) {
  double lat0, lon0;
  if (!parse_position(g.origin, lat0, lon0)) return kExitConfig;
  gn_flow* flow = nullptr;
  if (gn_status st = gn_flow_create(join(spec).c_str(), &flow); st != GN_OK) return report(st);
  gn_status st = gn_flow_write_grid(flow, lat0, lon0, g.dlat, g.dlon, g.ny, g.nx, g.t0, g.dt, g.nt, g.out.c_str());
  gn_flow_free(flow);
  if (st != GN_OK) return report(st);
  std::printf("wrote %zux%zux%zu grid to %s\n", g.nt, g.ny, g.nx, g.out.c_str());
  return kExitOk;
}

int cmd_sample_flow(const std::vector<std::string>& spec, const std::string& at, double t) {
  double lat, lon;
  if (!parse_position(at, lat, lon)) return kExitConfig;
  gn_flow* flow = nullptr;
  if (gn_status st = gn_flow_create(join(spec).c_str(), &flow); st != GN_OK) return report(st);
  double u = 0.0, v = 0.0;
  gn_status st = gn_flow_sample(flow, lat, lon, t, &u, &v);
  gn_flow_free(flow);
  if (st != GN_OK) return report(st);
  std::printf("%.9g %.9g\n", u, v);
  return kExitOk;
}

int cmd_mock(const std::string& root, const std::string& listen, const std::string& token, int latency_ms) {
  gn_mock_server* server = nullptr;
  if (gn_status st = gn_mock_server_start(root.c_str(), listen.c_str(), token.c_str(), latency_ms, &server);
      st != GN_OK) {
    return report(st);
  }
  std::printf("listening on port %d\n", gn_mock_server_port(server));
  std::fflush(stdout);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  gn_mock_server_stop(server);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glider navigation: simulation, remote piloting, planning and flow comparison"};
  app.require_subcommand(1);
  app.set_version_flag("--version", gn_version());

  std::string cfg_path, out, start, goal, events, at;
  bool once = false;

  auto* sim = app.add_subcommand("sim", "Run a simulated mission");
  sim->add_option("config", cfg_path, "Mission config")->required();
  sim->add_option("--out", out, "Output directory (default: output.dir)");

  auto* remote = app.add_subcommand("remote", "Pilot a glider through a dockserver");
  remote->add_option("config", cfg_path, "Mission config")->required();
  remote->add_flag("--once", once, "Poll once and exit");

  auto* plan = app.add_subcommand("plan", "Plan a minimum-time path on the configured model flow");
  plan->add_option("config", cfg_path, "Mission config")->required();
  plan->add_option("--start", start, "Start position, e.g. \"3100.0N,-8018.0E\"")->required();
  plan->add_option("--goal", goal, "Goal position")->required();
  plan->add_option("--out", out, "CSV output file (default: stdout)");

  auto* flowcmp = app.add_subcommand("flowcmp", "Compare glider, model and fused flow over a deployment");
  flowcmp->add_option("config", cfg_path, "Mission config")->required();
  flowcmp->add_option("--events", events, "Glider log with SURF records")->required();
  flowcmp->add_option("--out", out, "Output directory (default: output.dir)");

  std::vector<std::string> spec;
  GridArgs grid;
  auto* gen = app.add_subcommand("gen-flow", "Rasterize an analytic flow to a GFLOW file");
  gen->add_option("spec", spec, "uniform <u> <v> | tide <A> <T> <phase> | gyre <lat> <lon> <omega> <r_max>")
      ->required()
      ->allow_extra_args();
  gen->add_option("--origin", grid.origin, "South-west node");
  gen->add_option("--dlat", grid.dlat, "Node spacing, degrees");
  gen->add_option("--dlon", grid.dlon, "Node spacing, degrees");
  gen->add_option("--ny", grid.ny, "Rows");
  gen->add_option("--nx", grid.nx, "Columns");
  gen->add_option("--t0", grid.t0, "First frame time, epoch s");
  gen->add_option("--dt", grid.dt, "Frame spacing, s");
  gen->add_option("--nt", grid.nt, "Frames");
  gen->add_option("--out", grid.out, "Output file")->required();

  double t = 0.0;
  auto* sample = app.add_subcommand("sample-flow", "Print the flow of a source at one point");
  sample->add_option("spec", spec, "Flow description, e.g. file grid.gflow")->required();
  sample->add_option("--at", at, "Position")->required();
  sample->add_option("--time", t, "Epoch s");

  std::string root, listen = "127.0.0.1:0", token;
  int latency_ms = 0;
  auto* mock = app.add_subcommand("mock-dockserver", "Serve a directory over the dockserver protocol");
  mock->add_option("--root", root, "Directory with one subdirectory per glider")->required();
  mock->add_option("--listen", listen, "host:port");
  mock->add_option("--token", token, "Session token")->required();
  mock->add_option("--latency-ms", latency_ms, "Delay before every reply");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*sim) return cmd_sim(cfg_path, out);
  if (*remote) return cmd_remote(cfg_path, once);
  if (*plan) return cmd_plan(cfg_path, start, goal, out);
  if (*flowcmp) return cmd_flowcmp(cfg_path, events, out);
  if (*gen) return cmd_gen_flow(spec, grid);
  if (*sample) return cmd_sample_flow(spec, at, t);
  if (*mock) return cmd_mock(root, listen, token, latency_ms);
  return kExitFailure;
}
