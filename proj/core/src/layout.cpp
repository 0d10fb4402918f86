#include "jicgsim/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "jicgsim/errors.hpp"

namespace jicgsim {

std::string_view to_string(Channel c) { return c == Channel::nmos ? "nmos" : "pmos"; }

Channel channel_from_string(std::string_view s) {
  if (s == "nmos") return Channel::nmos;
  if (s == "pmos") return Channel::pmos;
  throw InvalidArgument("unknown channel type '" + std::string(s) + "'");
}

std::string_view to_string(CellKind k) {
  switch (k) {
    case CellKind::inverter: return "inverter";
    case CellKind::nand2: return "nand2";
    case CellKind::nand3: return "nand3";
    case CellKind::flipflop: return "flipflop";
    case CellKind::shift_register: return "register";
    case CellKind::custom: return "custom";
  }
  return "custom";
}

CellKind cell_kind_from_string(std::string_view s) {
  for (CellKind k : {CellKind::inverter, CellKind::nand2, CellKind::nand3, CellKind::flipflop,
                     CellKind::shift_register, CellKind::custom}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown cell kind '" + std::string(s) + "'");
}

const TransistorSite& CellLayout::site(int id) const {
  // Builders number sites densely, so try the direct index first.
  if (id >= 0 && static_cast<std::size_t>(id) < sites.size() && sites[id].id == id) return sites[id];
  auto it = std::find_if(sites.begin(), sites.end(), [id](const TransistorSite& s) { return s.id == id; });
  if (it == sites.end()) throw NotFound("no transistor site with id " + std::to_string(id));
  return *it;
}

bool CellLayout::has_site(int id) const {
  return std::any_of(sites.begin(), sites.end(), [id](const TransistorSite& s) { return s.id == id; });
}

std::vector<int> CellLayout::pair_ids() const {
  std::set<int> ids;
  for (const auto& s : sites) ids.insert(s.pair_id);
  return {ids.begin(), ids.end()};
}

std::array<int, 2> CellLayout::pair_sites(int pair_id) const {
  std::array<int, 2> out{-1, -1};
  int n = 0;
  for (const auto& s : sites) {
    if (s.pair_id != pair_id) continue;
    if (n < 2) out[n] = s.id;
    ++n;
  }
  if (n == 0) throw NotFound("no transistor pair with id " + std::to_string(pair_id));
  if (n != 2) throw InvalidArgument("pair " + std::to_string(pair_id) + " has " + std::to_string(n) + " sites");
  return out;
}

std::vector<std::string> CellLayout::gate_ids() const {
  std::vector<std::string> out;
  for (const auto& s : sites) {
    if (std::find(out.begin(), out.end(), s.gate_id) == out.end()) out.push_back(s.gate_id);
  }
  return out;
}

Rect CellLayout::gate_footprint(std::string_view gate_id) const {
  bool found = false;
  Rect box;
  for (const auto& s : sites) {
    if (s.gate_id != gate_id) continue;
    box = found ? box.united(s.gate_region) : s.gate_region;
    found = true;
  }
  if (!found) throw NotFound("no sites for gate '" + std::string(gate_id) + "'");
  return box;
}

const Placement* CellLayout::find_child(std::string_view label) const {
  for (const auto& c : children) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

namespace {

void translate_placement(Placement& p, Point offset) {
  p.origin = p.origin + offset;
  p.bounds = p.bounds.translated(offset);
  for (auto& c : p.children) translate_placement(c, offset);
}

void remap_placement(Placement& p, const std::unordered_map<int, int>& ids) {
  for (int& id : p.site_ids) id = ids.at(id);
  for (auto& c : p.children) remap_placement(c, ids);
}

// Appends `child` into `parent`, renumbering site and pair ids past the
// parent's current maxima, and records a placement for it.
void absorb(CellLayout& parent, const CellLayout& child, std::string label) {
  int next_site = 0;
  int next_pair = 0;
  for (const auto& s : parent.sites) {
    next_site = std::max(next_site, s.id + 1);
    next_pair = std::max(next_pair, s.pair_id + 1);
  }
  std::unordered_map<int, int> site_map;
  std::unordered_map<int, int> pair_map;
  Placement placement{std::move(label), child.kind, {child.bounds.x0, child.bounds.y0}, child.bounds, {}, {}};
  for (const auto& s : child.sites) {
    TransistorSite copy = s;
    copy.id = next_site++;
    auto [it, inserted] = pair_map.try_emplace(s.pair_id, next_pair);
    if (inserted) ++next_pair;
    copy.pair_id = it->second;
    site_map[s.id] = copy.id;
    placement.site_ids.push_back(copy.id);
    parent.sites.push_back(std::move(copy));
  }
  for (Placement c : child.children) {
    remap_placement(c, site_map);
    placement.children.push_back(std::move(c));
  }
  parent.fillers.insert(parent.fillers.end(), child.fillers.begin(), child.fillers.end());
  parent.children.push_back(std::move(placement));
}

double nand_width(int n_inputs, const LayoutStyle& style) {
  return style.site_size + kPairDistance + (n_inputs - 1) * style.column_pitch;
}

}  // namespace

CellLayout CellLayout::translated(Point offset) const {
  CellLayout out = *this;
  out.bounds = bounds.translated(offset);
  for (auto& s : out.sites) s.gate_region = s.gate_region.translated(offset);
  for (auto& f : out.fillers) f = f.translated(offset);
  for (auto& c : out.children) translate_placement(c, offset);
  return out;
}

void validate_layout(const CellLayout& layout) {
  auto fail = [](const std::string& what) { throw InvalidArgument("invalid layout: " + what); };
  if (!layout.bounds.valid()) fail("bounds have non-positive extent");

  std::set<int> ids;
  std::map<int, std::vector<const TransistorSite*>> pairs;
  for (const auto& s : layout.sites) {
    if (!ids.insert(s.id).second) fail("duplicate site id " + std::to_string(s.id));
    if (!s.gate_region.valid()) fail("site " + std::to_string(s.id) + " has a degenerate gate region");
    if (!layout.bounds.contains(s.gate_region)) fail("site " + std::to_string(s.id) + " lies outside the bounds");
    if (!(s.coupling >= 0.0)) fail("site " + std::to_string(s.id) + " has negative coupling");
    pairs[s.pair_id].push_back(&s);
  }
  for (const auto& [pair_id, members] : pairs) {
    const std::string name = "pair " + std::to_string(pair_id);
    if (members.size() != 2) fail(name + " has " + std::to_string(members.size()) + " sites");
    if (members[0]->channel != members[1]->channel) fail(name + " mixes channel types");
    const double d = distance(members[0]->gate_region.center(), members[1]->gate_region.center());
    if (std::abs(d - kPairDistance) > 1e-9) {
      std::ostringstream msg;
      msg << name << " centre distance " << d << " um differs from D_DR";
      fail(msg.str());
    }
  }
  for (std::size_t i = 0; i < layout.sites.size(); ++i) {
    for (std::size_t j = i + 1; j < layout.sites.size(); ++j) {
      if (layout.sites[i].gate_region.overlaps(layout.sites[j].gate_region)) {
        fail("sites " + std::to_string(layout.sites[i].id) + " and " + std::to_string(layout.sites[j].id) +
             " overlap");
      }
    }
  }
  for (const auto& f : layout.fillers) {
    if (!f.valid()) fail("degenerate filler");
  }
}

void FillerSpec::validate() const {
  if (!(gap > 0.0)) throw InvalidArgument("filler gap must be positive");
  if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("filler size must be positive");
}

CellLayout build_inverter_layout(Point origin, const LayoutStyle& style) {
  CellLayout cell;
  cell.kind = CellKind::inverter;
  const double half = 0.5 * style.site_size;
  cell.bounds = Rect::checked(origin.x, origin.y, origin.x + style.site_size + kPairDistance,
                              origin.y + kFlipFlopHeight);
  const double left = origin.x + half;
  const double right = left + kPairDistance;
  auto site = [&](int id, double x, double row, Channel ch, int pair) {
    return TransistorSite{id, Rect::centered({x, origin.y + row}, style.site_size, style.site_size), ch, pair, "INV",
                          ch == Channel::pmos ? style.pmos_coupling : 1.0};
  };
  cell.sites = {site(0, left, style.nmos_row, Channel::nmos, 0), site(1, right, style.nmos_row, Channel::nmos, 0),
                site(2, left, style.pmos_row, Channel::pmos, 1), site(3, right, style.pmos_row, Channel::pmos, 1)};
  return cell;
}

namespace {

CellLayout build_nand(int n_inputs, Point origin, const LayoutStyle& style, const std::string& gate_id) {
  if (n_inputs != 2 && n_inputs != 3) {
    throw InvalidArgument("NAND gates take 2 or 3 inputs, got " + std::to_string(n_inputs));
  }
  CellLayout cell;
  cell.kind = n_inputs == 2 ? CellKind::nand2 : CellKind::nand3;
  cell.bounds = Rect::checked(origin.x, origin.y, origin.x + nand_width(n_inputs, style), origin.y + kFlipFlopHeight);
  const double nmos_coupling = n_inputs == 2 ? style.nand2_nmos_coupling : style.nand3_nmos_coupling;
  for (int k = 0; k < n_inputs; ++k) {
    CellLayout column = build_inverter_layout({origin.x + k * style.column_pitch, origin.y}, style);
    for (auto& s : column.sites) {
      s.gate_id = gate_id;
      if (s.channel == Channel::nmos) s.coupling = nmos_coupling;
    }
    absorb(cell, column, "in" + std::to_string(k));
  }
  return cell;
}

}  // namespace

CellLayout build_nand_layout(int n_inputs, Point origin, const LayoutStyle& style) {
  return build_nand(n_inputs, origin, style, n_inputs == 3 ? "NAND3" : "NAND2");
}

CellLayout build_flipflop_layout(Point origin, const LayoutStyle& style) {
  static constexpr std::array<int, 6> kArity{3, 2, 2, 2, 2, 3};
  double used = 0.0;
  for (int n : kArity) used += nand_width(n, style);
  const double gap = (kFlipFlopWidth - 2.0 * style.edge_margin - used) / (kArity.size() - 1);
  if (gap <= 0.0) throw InvalidArgument("layout style does not fit six gates into the flip-flop width");

  CellLayout ff;
  ff.kind = CellKind::flipflop;
  ff.bounds = Rect::checked(origin.x, origin.y, origin.x + kFlipFlopWidth, origin.y + kFlipFlopHeight);
  double x = origin.x + style.edge_margin;
  for (std::size_t g = 0; g < kArity.size(); ++g) {
    const std::string label = "G" + std::to_string(g + 1);
    absorb(ff, build_nand(kArity[g], {x, origin.y}, style, label), label);
    x += nand_width(kArity[g], style) + gap;
  }
  return ff;
}

CellLayout build_register_layout(int n_ff, const LayoutStyle& style) {
  if (n_ff < 1) throw InvalidArgument("a register needs at least one flip-flop");
  CellLayout reg;
  reg.kind = CellKind::shift_register;
  reg.bounds = Rect::checked(0.0, 0.0, n_ff * kFlipFlopWidth, kFlipFlopHeight);
  reg.sites.reserve(static_cast<std::size_t>(n_ff) * 56);
  const CellLayout proto = build_flipflop_layout({0.0, 0.0}, style);
  for (int i = 0; i < n_ff; ++i) {
    absorb(reg, proto.translated({i * kFlipFlopWidth, 0.0}), "FF" + std::to_string(i));
  }
  return reg;
}

CellLayout generate_fillers(const CellLayout& layout, const FillerSpec& spec) {
  spec.validate();
  auto axis = [&](double lo, double hi, double size) {
    std::vector<double> starts;
    const double length = hi - lo;
    if (length < size) return starts;
    const auto n = static_cast<int>(std::floor((length - size) / (size + spec.gap) + 1e-9)) + 1;
    const double span = n * size + (n - 1) * spec.gap;
    const double first = lo + 0.5 * (length - span);
    for (int i = 0; i < n; ++i) starts.push_back(first + i * (size + spec.gap));
    return starts;
  };
  CellLayout out = layout;
  const auto xs = axis(layout.bounds.x0, layout.bounds.x1, spec.width);
  const auto ys = axis(layout.bounds.y0, layout.bounds.y1, spec.height);
  for (double y : ys) {
    for (double x : xs) out.fillers.push_back({x, y, x + spec.width, y + spec.height});
  }
  return out;
}

CellLayout place_filler_over_site(const CellLayout& layout, int site_id) {
  CellLayout out = layout;
  out.fillers.push_back(layout.site(site_id).gate_region);
  return out;
}

double occlusion_fraction(const CellLayout& layout, const Rect& region) {
  return covered_fraction(region, layout.fillers);
}

CellLayout extract_cell(const CellLayout& layout, const Placement& placement) {
  CellLayout out;
  out.kind = placement.kind;
  out.bounds = placement.bounds;
  const std::set<int> keep(placement.site_ids.begin(), placement.site_ids.end());
  for (const auto& s : layout.sites) {
    if (keep.count(s.id)) out.sites.push_back(s);
  }
  for (const auto& f : layout.fillers) {
    Rect k{std::max(f.x0, out.bounds.x0), std::max(f.y0, out.bounds.y0), std::min(f.x1, out.bounds.x1),
           std::min(f.y1, out.bounds.y1)};
    if (k.valid()) out.fillers.push_back(k);
  }
  out.children = placement.children;
  return out;
}

CellLayout apply_coupling_jitter(const CellLayout& layout, std::uint64_t seed, double amplitude) {
  if (!(amplitude >= 0.0) || amplitude >= 1.0) throw InvalidArgument("coupling jitter must lie in [0, 1)");
  CellLayout out = layout;
  std::mt19937_64 rng(seed);
  for (auto& s : out.sites) {
    // 53-bit mantissa draw; std::uniform_real_distribution is not portable.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    s.coupling *= 1.0 + amplitude * (2.0 * u - 1.0);
  }
  return out;
}

}  // namespace jicgsim
