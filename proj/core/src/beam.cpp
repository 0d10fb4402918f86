#include "jicgsim/beam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "jicgsim/errors.hpp"
#include "json.hpp"

namespace jicgsim {

namespace {

constexpr std::array<Objective, 4> kObjectives{{
    {100, 1.00, 1.45},
    {50, 1.50, 3.20},
    {20, 4.00, 11.00},
    {5, 15.00, 45.00},
}};

bool occluded(Point p, const CellLayout& layout) {
  return std::any_of(layout.fillers.begin(), layout.fillers.end(), [p](const Rect& f) { return f.contains(p); });
}

}  // namespace

std::string_view to_string(SpotModel m) { return m == SpotModel::measured ? "measured" : "datasheet"; }

SpotModel spot_model_from_string(std::string_view s) {
  if (s == "measured") return SpotModel::measured;
  if (s == "datasheet") return SpotModel::datasheet;
  throw InvalidArgument("unknown spot model '" + std::string(s) + "'");
}

std::span<const Objective> objective_table() { return kObjectives; }

const Objective& find_objective(int magnification) {
  for (const auto& o : kObjectives) {
    if (o.magnification == magnification) return o;
  }
  throw NotFound("no objective with magnification " + std::to_string(magnification) + "x");
}

std::string objective_table_json() {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& o : kObjectives) {
    rows.push_back({{"magnification", o.magnification},
                    {"d80_datasheet_um", o.d80_datasheet},
                    {"d80_measured_um", o.d80_measured},
                    {"waist_datasheet_um", waist_from_d80(o.d80_datasheet)},
                    {"waist_measured_um", waist_from_d80(o.d80_measured)}});
  }
  return nlohmann::json{{"objectives", rows}}.dump(2) + "\n";
}

void BeamSource::validate() const {
  if (!(p_max_w > 0.0)) throw InvalidArgument("maximum beam power must be positive");
  if (!(wavelength_nm > 0.0)) throw InvalidArgument("wavelength must be positive");
}

void BeamShot::validate() const {
  if (!(power_fraction >= 0.0 && power_fraction <= 1.0)) throw InvalidArgument("power fraction must lie in [0, 1]");
  if (!(duration_ns >= kMinPulseNs)) throw InvalidArgument("pulse duration must be at least 2 ns");
  if (!std::isfinite(center.x) || !std::isfinite(center.y)) throw InvalidArgument("shot centre must be finite");
}

double BeamShot::waist() const { return waist_from_d80(d80()); }

double waist_from_d80(double d80) {
  if (!(d80 > 0.0)) throw InvalidArgument("spot diameter must be positive");
  // 1 - exp(-2 r^2 / w^2) = 0.8 at r = d80 / 2.
  return 0.5 * d80 / std::sqrt(0.5 * std::log(5.0));
}

double gaussian_unit_intensity(double waist, double r2) {
  const double w2 = waist * waist;
  return 2.0 / (std::numbers::pi * w2) * std::exp(-2.0 * r2 / w2);
}

double energy_within(const BeamShot& shot, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("radius must be non-negative");
  const double w = shot.waist();
  return -std::expm1(-2.0 * radius * radius / (w * w));
}

double intensity_at(const BeamShot& shot, Point p, const CellLayout& layout, const BeamSource& source) {
  if (occluded(p, layout)) return 0.0;
  const double dx = p.x - shot.center.x;
  const double dy = p.y - shot.center.y;
  return shot.power_w(source) * gaussian_unit_intensity(shot.waist(), dx * dx + dy * dy);
}

double mean_intensity_over(const BeamShot& shot, const Rect& region, const CellLayout& layout,
                           const BeamSource& source, double pitch) {
  const RegionSampler sampler(region, layout, pitch);
  return shot.power_w(source) * sampler.mean_unit_intensity(shot.center, shot.waist());
}

RegionSampler::RegionSampler(const Rect& region, const CellLayout& layout, double pitch) : region_(region) {
  if (!region.valid()) throw InvalidArgument("sampling region must have positive extent");
  if (!(pitch > 0.0)) throw InvalidArgument("sampling pitch must be positive");
  const int nx = std::max(1, static_cast<int>(std::ceil(region.width() / pitch - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(region.height() / pitch - 1e-9)));
  const double sx = region.width() / nx;
  const double sy = region.height() / ny;
  total_ = static_cast<std::size_t>(nx) * ny;
  visible_.reserve(total_);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point p{region.x0 + (i + 0.5) * sx, region.y0 + (j + 0.5) * sy};
      if (!occluded(p, layout)) visible_.push_back(p);
    }
  }
}

double RegionSampler::mean_unit_intensity(Point center, double waist) const {
  if (visible_.empty()) return 0.0;
  const double w2 = waist * waist;
  const double scale = -2.0 / w2;
  double sum = 0.0;
  for (const Point& p : visible_) {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    sum += std::exp(scale * (dx * dx + dy * dy));
  }
  return 2.0 / (std::numbers::pi * w2) * sum / static_cast<double>(total_);
}

}  // namespace jicgsim
