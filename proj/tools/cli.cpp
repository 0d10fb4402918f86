#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "jicgsim/calibration.hpp"
#include "jicgsim/campaign.hpp"
#include "jicgsim/errors.hpp"
#include "jicgsim/export.hpp"
#include "jicgsim/io.hpp"
#include "jicgsim/layout_json.hpp"

namespace jicgsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<int> objective;
  std::optional<double> power;
  std::optional<int> input;
  std::optional<double> clock_mhz;
  std::optional<double> duration_ns;
  std::optional<double> x;
  std::optional<double> y;
  std::optional<std::string> thresholds;
  bool no_shot = false;
};

class Session {
 public:
  Session(const Overrides& o, std::ostream& out) : o_(o), out_(out) {
    const fs::path path(o.config_path);
    cfg_ = json::parse(read_text_file(path));
    if (!cfg_.is_object()) throw InvalidArgument("config must be a JSON object");
    base_ = path.parent_path();
    if (!cfg_.contains("layout")) throw InvalidArgument("config is missing \"layout\"");
  }

  fs::path output_dir() const { return o_.output_dir.value_or(get<std::string>("output_dir", "out")); }

  void write(const std::string& name, const std::string& text) const {
    const fs::path p = output_dir() / name;
    write_text_file(p, text);
    out_ << "wrote " << p.string() << "\n";
  }

  template <class T>
  T get(const char* key, T fallback) const {
    return cfg_.contains(key) ? cfg_.at(key).get<T>() : fallback;
  }

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() || base_.empty() ? path : base_ / path;
  }

  std::uint64_t seed() const {
    if (const char* env = std::getenv("JICGSIM_SEED"); env && *env) {
      try {
        return std::stoull(env);
      } catch (const std::exception&) {
        throw InvalidArgument("JICGSIM_SEED must be an unsigned integer");
      }
    }
    if (o_.seed) return *o_.seed;
    return get<std::uint64_t>("kappa_seed", 0);
  }

  CellLayout layout() const {
    const json& spec = cfg_.at("layout");
    CellLayout l;
    if (spec.is_string()) {
      l = load_layout(resolve(spec.get<std::string>()));
    } else if (spec.contains("path")) {
      l = load_layout(resolve(spec.at("path").get<std::string>()));
    } else {
      const std::string builder = spec.at("builder").get<std::string>();
      if (builder == "inverter") {
        l = build_inverter_layout({0, 0});
      } else if (builder == "nand") {
        l = build_nand_layout(spec.value("n_inputs", 2), {0, 0});
      } else if (builder == "flipflop") {
        l = build_flipflop_layout({0, 0});
      } else if (builder == "register") {
        l = build_register_layout(spec.value("n_ff", 256));
      } else {
        throw InvalidArgument("unknown layout builder '" + builder + "'");
      }
    }
    if (cfg_.contains("fillers") && cfg_.at("fillers").value("enabled", false)) {
      const json& f = cfg_.at("fillers");
      FillerSpec spec_f;
      spec_f.width = f.value("width", spec_f.width);
      spec_f.height = f.value("height", spec_f.height);
      spec_f.gap = f.value("gap", spec_f.gap);
      spec_f.layer_label = f.value("layer", spec_f.layer_label);
      l = generate_fillers(l, spec_f);
    }
    if (cfg_.contains("cover_gates")) {
      // One NMOS site of every NMOS pair in the listed gates.
      for (const auto& gate : cfg_.at("cover_gates").get<std::vector<std::string>>()) {
        l.gate_footprint(gate);
        for (int p : l.pair_ids()) {
          const auto ends = l.pair_sites(p);
          const auto& s = l.site(ends[0]);
          if (s.gate_id == gate && s.channel == Channel::nmos) l = place_filler_over_site(l, s.id);
        }
      }
    }
    for (int id : get<std::vector<int>>("cover_sites", {})) l = place_filler_over_site(l, id);
    const double jitter = get<double>("kappa_jitter", 0.0);
    if (jitter > 0.0) l = apply_coupling_jitter(l, seed(), jitter);
    return l;
  }

  EngineOptions engine_options() const {
    EngineOptions e;
    e.timing.clock_mhz = o_.clock_mhz.value_or(get<double>("clock_mhz", 2.0));
    e.timing.allow_any_clock = get<bool>("allow_any_clock", false);
    e.timing.fire_phase = get<double>("fire_phase", 0.25);
    e.timing.fire_cycle = get<int>("fire_cycle", -1);
    e.register_stages = get<int>("register_stages", 4);
    e.target_ff = get<int>("target_ff", -1);
    if (cfg_.contains("beam")) {
      e.source.wavelength_nm = cfg_.at("beam").value("wavelength_nm", e.source.wavelength_nm);
      e.source.p_max_w = cfg_.at("beam").value("p_max_w", e.source.p_max_w);
    }
    e.sample_pitch = get<double>("sample_pitch_um", kDefaultSamplePitch);
    e.jobs = o_.jobs.value_or(get<int>("jobs", 1));
    return e;
  }

  SpotModel spot_model() const { return spot_model_from_string(get<std::string>("spot_model", "measured")); }

  CalibrationReport calibrate_with(const CellLayout& l) const {
    const ScanEngine probe(l, FaultThresholds{1.0, 2.0}, engine_options());
    CalibrationOptions opt;
    opt.spot_model = spot_model();
    opt.source = probe.options().source;
    opt.pmos_ratio = get<double>("pmos_ratio", kDefaultPmosRatio);
    opt.sample_pitch = probe.options().sample_pitch;
    opt.jobs = probe.options().jobs;
    if (cfg_.contains("grid")) opt.grid = grid(probe);
    const auto constraints = default_constraints();
    return calibrate(probe.target_cell(), probe.evaluator(), constraints, opt);
  }

  FaultThresholds thresholds(const CellLayout& l) const {
    json spec = o_.thresholds ? json(*o_.thresholds) : cfg_.value("thresholds", json("calibrate"));
    if (spec.is_object()) return thresholds_from_json(spec.dump());
    const std::string s = spec.get<std::string>();
    if (s == "calibrate") return calibrate_with(l).thresholds;
    const fs::path p = o_.thresholds ? fs::path(s) : resolve(s);
    return thresholds_from_json(read_text_file(p));
  }

  ScanGrid grid(const ScanEngine& engine) const {
    if (!cfg_.contains("grid")) return engine.default_grid();
    const json& g = cfg_.at("grid");
    const double step = g.value("step", kDefaultScanStep);
    if (g.contains("first_point")) {
      const auto a = g.at("first_point").get<std::vector<double>>();
      const auto b = g.at("last_point").get<std::vector<double>>();
      if (a.size() != 2 || b.size() != 2) throw InvalidArgument("grid points need two coordinates");
      ScanGrid out{{a[0], a[1]}, {b[0], b[1]}, step};
      out.validate();
      return out;
    }
    return engine.default_grid(g.value("margin", kDefaultScanMargin), step);
  }

  EscalationLadder ladder() const {
    EscalationLadder l = EscalationLadder::standard();
    if (cfg_.contains("ladder")) {
      const json& j = cfg_.at("ladder");
      l.power_steps = j.value("power_steps", l.power_steps);
      l.duration_steps = j.value("duration_steps_ns", l.duration_steps);
      l.objective_order = j.value("objective_order", l.objective_order);
    }
    l.validate();
    return l;
  }

  ShotParams shot() const {
    ShotParams s;
    s.magnification = o_.objective.value_or(get<int>("objective", 20));
    s.spot_model = spot_model();
    s.power_fraction = o_.power.value_or(get<double>("power", 0.45));
    s.duration_ns = o_.duration_ns.value_or(get<double>("duration_ns", 50.0));
    s.input_bit = input();
    return s;
  }

  int input() const { return o_.input.value_or(get<int>("input_bit", 0)); }

  std::vector<int> inputs() const {
    if (o_.input) return {*o_.input};
    return get<std::vector<int>>("inputs", {0, 1});
  }

  std::optional<Point> shot_center() const {
    if (o_.no_shot) return std::nullopt;
    if (o_.x || o_.y) {
      if (!o_.x || !o_.y) throw InvalidArgument("--x and --y go together");
      return Point{*o_.x, *o_.y};
    }
    if (cfg_.contains("shot_center")) {
      const auto c = cfg_.at("shot_center").get<std::vector<double>>();
      if (c.size() != 2) throw InvalidArgument("shot_center needs two coordinates");
      return Point{c[0], c[1]};
    }
    return std::nullopt;
  }

  const json& config() const { return cfg_; }
  std::ostream& out() const { return out_; }

 private:
  Overrides o_;
  std::ostream& out_;
  json cfg_;
  fs::path base_;
};

void cmd_build_layout(const Session& s) {
  const CellLayout l = s.layout();
  s.write("layout.json", layout_to_json(l));
  char line[128];
  std::snprintf(line, sizeof line, "%s %.3f x %.3f um, %zu sites, %zu fillers\n", std::string(to_string(l.kind)).c_str(),
                l.bounds.width(), l.bounds.height(), l.sites.size(), l.fillers.size());
  s.out() << line;
}

void cmd_calibrate(const Session& s) {
  if (!s.config().contains("spot_model")) throw InvalidArgument("config is missing \"spot_model\"");
  const CalibrationReport r = s.calibrate_with(s.layout());
  s.write("thresholds.json", calibration_report_to_json(r));
  char line[160];
  std::snprintf(line, sizeof line, "i_crit_nmos %.6e W/um^2 in (%.6e, %.6e]\n", r.thresholds.i_crit_nmos, r.lower, r.upper);
  s.out() << line;
}

void cmd_scan(const Session& s) {
  const CellLayout l = s.layout();
  const ScanEngine engine(l, s.thresholds(l), s.engine_options());
  const SensitivityMap map = engine.scan(s.grid(engine), s.shot());
  if (map.outside_geometry) s.out() << "warning: scan grid lies outside the layout\n";
  s.write("map.csv", map_to_csv(map));
  s.write("map.ppm", map_to_ppm(map));
  const auto regions = sensitive_areas(map, engine.target_cell());
  s.write("regions.json", regions_to_json(regions));
  s.out() << map.fault_count() << " of " << map.cells.size() << " cells faulty, " << regions.size() << " regions\n";
}

std::vector<CampaignResult> run_campaigns(const Session& s) {
  const CellLayout l = s.layout();
  const ScanEngine engine(l, s.thresholds(l), s.engine_options());
  const ScanGrid grid = s.grid(engine);
  const EscalationLadder ladder = s.ladder();
  std::vector<CampaignResult> results;
  for (int in : s.inputs()) results.push_back(escalate(engine, grid, ladder, in, s.spot_model()));
  s.write("campaign.json", campaign_to_json(results));
  return results;
}

void cmd_escalate(const Session& s) {
  for (const auto& r : run_campaigns(s)) {
    for (const auto& o : r.objectives) {
      char line[128];
      if (o.success) {
        std::snprintf(line, sizeof line, "input %d, %dx: %s from %.2f power at %g ns\n", r.input_bit, o.magnification,
                      std::string(to_string(o.fault)).c_str(), o.onset_power, o.onset_duration_ns);
      } else {
        std::snprintf(line, sizeof line, "input %d, %dx: no fault\n", r.input_bit, o.magnification);
      }
      s.out() << line;
    }
  }
}

void cmd_report(const Session& s) {
  const auto rows = summarize(run_campaigns(s));
  s.write("report.json", report_to_json(rows));
  const std::string text = report_to_text(rows);
  s.write("report.txt", text);
  s.out() << text;
}

void cmd_trace(const Session& s) {
  const CellLayout l = s.layout();
  const auto center = s.shot_center();
  const ShotParams shot = s.shot();
  if (!center) {
    // A fault-free run needs no thresholds.
    const ScanEngine engine(l, FaultThresholds{1.0, 2.0}, s.engine_options());
    const auto& ev = engine.evaluator();
    const Trace t = run_trace(ev.shift_register(), ev.timing().clock_mhz, shot.input_bit, {},
                              ev.cycles_for(shot.duration_ns), 0.0, ev.timing().allow_any_clock);
    s.write("trace.csv", trace_to_csv(t));
    return;
  }
  const ScanEngine engine(l, s.thresholds(l), s.engine_options());
  AttackRun run = engine.simulate_at(*center, shot);
  for (auto& v : run.observed.laser) v *= shot.power_fraction;
  s.write("trace.csv", trace_to_csv(run.observed));
  s.out() << "classification " << to_string(run.fault) << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laser fault-injection simulator for JICG shift registers", "jicgsim"};
  app.require_subcommand(1);
  Overrides o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config_path, "JSON configuration file")->required();
    sub->add_option("-o,--output-dir", o.output_dir, "Directory for written files");
    sub->add_option("--seed", o.seed, "Coupling jitter seed (JICGSIM_SEED wins)");
    sub->add_option("-j,--jobs", o.jobs, "Worker threads for scans");
    sub->add_option("--objective", o.objective, "Objective magnification (5, 20, 50, 100)");
    sub->add_option("--power", o.power, "Laser power fraction in [0, 1]");
    sub->add_option("--input", o.input, "Register input bit")->check(CLI::Range(0, 1));
    sub->add_option("--clock-mhz", o.clock_mhz, "Register clock");
    sub->add_option("--duration-ns", o.duration_ns, "Pulse duration");
    sub->add_option("--thresholds", o.thresholds, "Thresholds JSON file or 'calibrate'");
  };
  std::vector<std::pair<CLI::App*, void (*)(const Session&)>> commands;
  auto add = [&](const char* name, const char* help, void (*fn)(const Session&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    commands.emplace_back(sub, fn);
    return sub;
  };
  add("build-layout", "Write the configured layout as JSON", cmd_build_layout);
  add("calibrate", "Fit fault thresholds to the observed attack outcomes", cmd_calibrate);
  add("scan", "Scan one shot setting over the grid and write the sensitivity map", cmd_scan);
  add("escalate", "Run the power, pulse and objective escalation", cmd_escalate);
  CLI::App* trace = add("trace", "Write the waveforms of one shot", cmd_trace);
  trace->add_option("--x", o.x, "Shot centre x in um");
  trace->add_option("--y", o.y, "Shot centre y in um");
  trace->add_flag("--no-shot", o.no_shot, "Fault-free run");
  add("report", "Escalate both inputs and write the attack-results table", cmd_report);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& [sub, fn] : commands) {
      if (sub->parsed()) fn(Session(o, out));
    }
    return kExitOk;
  } catch (const CalibrationFailure& e) {
    err << "calibration failed (" << e.constraint() << "): " << e.what() << "\n";
    return kExitCalibration;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NotFound& e) {
    err << "not found: " << e.what() << "\n";
    return kExitNotFound;
  } catch (const InvalidArgument& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "bad config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace jicgsim::cli
