#include "jicgsim/layout_json.hpp"

#include <fstream>
#include <sstream>

#include "jicgsim/errors.hpp"
#include "jicgsim/io.hpp"
#include "json.hpp"

namespace jicgsim {

using nlohmann::json;

namespace {

json rect_json(const Rect& r) { return json::array({r.x0, r.y0, r.x1, r.y1}); }

Rect rect_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InvalidArgument("rectangle must be [x0, y0, x1, y1]");
  return Rect::checked(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
}

json placement_json(const Placement& p) {
  json children = json::array();
  for (const auto& c : p.children) children.push_back(placement_json(c));
  return {{"label", p.label},
          {"kind", std::string(to_string(p.kind))},
          {"origin", json::array({p.origin.x, p.origin.y})},
          {"bounds", rect_json(p.bounds)},
          {"site_ids", p.site_ids},
          {"children", std::move(children)}};
}

Placement placement_from(const json& j) {
  Placement p;
  p.label = j.at("label").get<std::string>();
  p.kind = cell_kind_from_string(j.at("kind").get<std::string>());
  const auto& o = j.at("origin");
  p.origin = {o.at(0).get<double>(), o.at(1).get<double>()};
  p.bounds = rect_from(j.at("bounds"));
  p.site_ids = j.at("site_ids").get<std::vector<int>>();
  for (const auto& c : j.value("children", json::array())) p.children.push_back(placement_from(c));
  return p;
}

}  // namespace

std::string layout_to_json(const CellLayout& layout) {
  json sites = json::array();
  for (const auto& s : layout.sites) {
    sites.push_back({{"id", s.id},
                     {"gate_region", rect_json(s.gate_region)},
                     {"channel", std::string(to_string(s.channel))},
                     {"pair_id", s.pair_id},
                     {"gate_id", s.gate_id},
                     {"coupling", s.coupling}});
  }
  json fillers = json::array();
  for (const auto& f : layout.fillers) fillers.push_back(rect_json(f));
  json children = json::array();
  for (const auto& c : layout.children) children.push_back(placement_json(c));
  json doc{{"format", "jicgsim-layout"},
           {"version", 1},
           {"units", "um"},
           {"kind", std::string(to_string(layout.kind))},
           {"bounds", rect_json(layout.bounds)},
           {"sites", std::move(sites)},
           {"fillers", std::move(fillers)},
           {"children", std::move(children)}};
  return doc.dump(1) + "\n";
}

CellLayout layout_from_json(std::string_view text) {
  CellLayout layout;
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "jicgsim-layout") throw InvalidArgument("not a jicgsim-layout document");
    layout.kind = cell_kind_from_string(doc.value("kind", "custom"));
    layout.bounds = rect_from(doc.at("bounds"));
    for (const auto& s : doc.at("sites")) {
      TransistorSite site;
      site.id = s.at("id").get<int>();
      site.gate_region = rect_from(s.at("gate_region"));
      site.channel = channel_from_string(s.at("channel").get<std::string>());
      site.pair_id = s.at("pair_id").get<int>();
      site.gate_id = s.value("gate_id", "");
      site.coupling = s.value("coupling", 1.0);
      layout.sites.push_back(std::move(site));
    }
    for (const auto& f : doc.value("fillers", json::array())) layout.fillers.push_back(rect_from(f));
    for (const auto& c : doc.value("children", json::array())) layout.children.push_back(placement_from(c));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed layout JSON: ") + e.what());
  }
  validate_layout(layout);
  return layout;
}

void save_layout(const CellLayout& layout, const std::filesystem::path& path) {
  write_text_file(path, layout_to_json(layout));
}

CellLayout load_layout(const std::filesystem::path& path) { return layout_from_json(read_text_file(path)); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << contents;
  if (!out.flush()) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace jicgsim
