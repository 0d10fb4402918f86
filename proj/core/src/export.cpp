#include "jicgsim/export.hpp"

#include <cstdio>

#include "json.hpp"

namespace jicgsim {

using ordered_json = nlohmann::ordered_json;

std::array<std::uint8_t, 3> class_color(FaultClass c) {
  switch (c) {
    case FaultClass::none:
      return {255, 255, 255};
    case FaultClass::bit_set:
      return {220, 20, 60};
    case FaultClass::bit_reset:
      return {255, 215, 0};
    case FaultClass::stuck_at:
      return {30, 144, 255};
    case FaultClass::permanent:
      return {0, 0, 0};
    case FaultClass::unstable:
      return {128, 128, 128};
  }
  return {255, 255, 255};
}

std::string map_to_csv(const SensitivityMap& map) {
  std::string out = "x_um,y_um,classification\n";
  const auto points = map.grid.points();
  char line[96];
  for (std::size_t k = 0; k < points.size(); ++k) {
    std::snprintf(line, sizeof line, "%.3f,%.3f,", points[k].x, points[k].y);
    out += line;
    out += to_string(map.cells[k]);
    out += '\n';
  }
  return out;
}

std::string map_to_ppm(const SensitivityMap& map) {
  const int nx = map.grid.nx();
  const int ny = map.grid.ny();
  std::string out = "P3\n" + std::to_string(nx) + " " + std::to_string(ny) + "\n255\n";
  char px[16];
  for (int j = ny - 1; j >= 0; --j) {
    for (int i = 0; i < nx; ++i) {
      const auto rgb = class_color(map.at(i, j));
      std::snprintf(px, sizeof px, "%s%d %d %d", i ? " " : "", rgb[0], rgb[1], rgb[2]);
      out += px;
    }
    out += '\n';
  }
  return out;
}

namespace {

ordered_json rect_json(const Rect& r) { return {r.x0, r.y0, r.x1, r.y1}; }

ordered_json grid_json(const ScanGrid& g) {
  return {{"first_point", {g.first_point.x, g.first_point.y}},
          {"last_point", {g.last_point.x, g.last_point.y}},
          {"step", g.step}};
}

}  // namespace

std::string regions_to_json(const std::vector<SensitiveRegion>& regions) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : regions) {
    arr.push_back({{"classification", std::string(to_string(r.fault))},
                   {"cells", r.cells},
                   {"bbox", rect_json(r.bbox)},
                   {"centroid", {r.centroid.x, r.centroid.y}},
                   {"gate_ids", r.gate_ids}});
  }
  return arr.dump(2) + "\n";
}

std::string campaign_to_json(const std::vector<CampaignResult>& results) {
  ordered_json doc;
  doc["format"] = "jicgsim-campaign";
  doc["version"] = 1;
  auto& arr = doc["campaigns"] = ordered_json::array();
  for (const auto& r : results) {
    ordered_json c;
    c["input_bit"] = r.input_bit;
    c["target_ff"] = r.target_ff;
    c["spot_model"] = std::string(to_string(r.spot_model));
    c["grid"] = grid_json(r.grid);
    c["ladder"] = {{"power_steps", r.ladder.power_steps},
                   {"duration_steps_ns", r.ladder.duration_steps},
                   {"objective_order", r.ladder.objective_order}};
    auto& objs = c["objectives"] = ordered_json::array();
    for (const auto& o : r.objectives) {
      ordered_json j;
      j["magnification"] = o.magnification;
      j["success"] = o.success;
      j["classification"] = std::string(to_string(o.fault));
      if (o.success) {
        j["onset_power"] = o.onset_power;
        j["onset_duration_ns"] = o.onset_duration_ns;
        j["power_range"] = {o.power_min, o.power_max};
        j["duration_range_ns"] = {o.duration_min, o.duration_max};
        j["confirmed"] = o.confirmed;
        j["witness"] = {o.witness.x, o.witness.y};
      }
      auto& trail = j["trail"] = ordered_json::array();
      for (const auto& s : o.trail) {
        trail.push_back({{"power", s.power_fraction},
                         {"duration_ns", s.duration_ns},
                         {"classification", std::string(to_string(s.outcome))},
                         {"fault_cells", s.fault_cells}});
      }
      objs.push_back(std::move(j));
    }
    arr.push_back(std::move(c));
  }
  return doc.dump(1) + "\n";
}

std::string report_to_json(const std::vector<ReportRow>& rows) {
  ordered_json doc;
  doc["format"] = "jicgsim-report";
  doc["version"] = 1;
  auto& arr = doc["rows"] = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"input", r.input},
                   {"magnification", r.magnification},
                   {"power_percent", r.power},
                   {"pulse_ns", r.pulse},
                   {"outcome", r.outcome}});
  }
  return doc.dump(2) + "\n";
}

std::string report_to_text(const std::vector<ReportRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-10s %-10s %-6s %s\n", "input", "power_%", "pulse_ns", "obj", "outcome");
  out += line;
  for (const auto& r : rows) {
    const std::string obj = std::to_string(r.magnification) + "x";
    std::snprintf(line, sizeof line, "%-12s %-10s %-10s %-6s %s\n", r.input.c_str(), r.power.c_str(), r.pulse.c_str(),
                  obj.c_str(), r.outcome.c_str());
    out += line;
  }
  return out;
}

}  // namespace jicgsim
