#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jicgsim/geometry.hpp"

namespace jicgsim {

enum class Channel { nmos, pmos };

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view s);

// Centre distance between the two transistors of a duplicated pair (D_DR).
inline constexpr double kPairDistance = 9.0;
inline constexpr double kFlipFlopWidth = 82.0;
inline constexpr double kFlipFlopHeight = 20.0;

struct TransistorSite {
  int id = 0;
  Rect gate_region;
  Channel channel = Channel::nmos;
  int pair_id = 0;
  std::string gate_id;
  // Photo-current coupling factor applied to the delivered intensity.
  double coupling = 1.0;

  friend bool operator==(const TransistorSite&, const TransistorSite&) = default;
};

enum class CellKind { inverter, nand2, nand3, flipflop, shift_register, custom };

std::string_view to_string(CellKind k);
CellKind cell_kind_from_string(std::string_view s);

// A placed sub-cell. site_ids lists every site in the sub-tree.
struct Placement {
  std::string label;
  CellKind kind = CellKind::custom;
  Point origin;
  Rect bounds;
  std::vector<int> site_ids;
  std::vector<Placement> children;

  friend bool operator==(const Placement&, const Placement&) = default;
};

// Synthetic cell geometry. Coordinates are relative to a cell origin.
//
// Every inverter column puts its NMOS pair on nmos_row and its PMOS pair on
// pmos_row, the two transistors of a pair kPairDistance apart horizontally.
// NAND gates stagger their columns by column_pitch. The NMOS coupling of a
// gate follows its series-stack sizing: three-input stacks are drawn wider
// than two-input stacks and collect more photo-current.
struct LayoutStyle {
  double site_size = 1.0;
  double nmos_row = 8.0;
  double pmos_row = 12.0;
  double column_pitch = 1.5;
  double edge_margin = 1.0;
  double nand2_nmos_coupling = 0.75;
  double nand3_nmos_coupling = 1.0;
  double pmos_coupling = 1.0;
};

struct CellLayout {
  CellKind kind = CellKind::custom;
  Rect bounds;
  std::vector<TransistorSite> sites;
  std::vector<Rect> fillers;
  std::vector<Placement> children;

  // Throws NotFound for unknown ids.
  const TransistorSite& site(int id) const;
  bool has_site(int id) const;
  // Sorted, unique.
  std::vector<int> pair_ids() const;
  std::array<int, 2> pair_sites(int pair_id) const;
  // Gate ids in order of first appearance.
  std::vector<std::string> gate_ids() const;
  // Bounding box of every site carrying gate_id. Throws NotFound.
  Rect gate_footprint(std::string_view gate_id) const;
  const Placement* find_child(std::string_view label) const;

  CellLayout translated(Point offset) const;

  friend bool operator==(const CellLayout&, const CellLayout&) = default;
};

// Checks the structural invariants (pairing, D_DR spacing, containment,
// disjoint sites). Throws InvalidArgument describing the first violation.
void validate_layout(const CellLayout& layout);

struct FillerSpec {
  double width = 2.0;
  double height = 2.0;
  double gap = 1.2;
  std::string layer_label = "M3";

  void validate() const;
};

CellLayout build_inverter_layout(Point origin, const LayoutStyle& style = {});
// n_inputs must be 2 or 3.
CellLayout build_nand_layout(int n_inputs, Point origin, const LayoutStyle& style = {});
// Six NAND gates G1..G6 left to right; G1 and G6 have three inputs.
CellLayout build_flipflop_layout(Point origin, const LayoutStyle& style = {});
CellLayout build_register_layout(int n_ff, const LayoutStyle& style = {});

// Adds a regular grid of fillers over the layout bounds.
CellLayout generate_fillers(const CellLayout& layout, const FillerSpec& spec);
// Adds one filler covering exactly the gate region of site_id.
CellLayout place_filler_over_site(const CellLayout& layout, int site_id);

double occlusion_fraction(const CellLayout& layout, const Rect& region);

// Sub-layout of one placement, keeping site and pair ids; fillers are
// clipped to the placement bounds.
CellLayout extract_cell(const CellLayout& layout, const Placement& placement);

// Multiplies every coupling by an independent factor uniform in
// [1 - amplitude, 1 + amplitude]. Deterministic for a given seed.
CellLayout apply_coupling_jitter(const CellLayout& layout, std::uint64_t seed, double amplitude);

}  // namespace jicgsim
