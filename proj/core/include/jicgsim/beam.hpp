#pragma once

#include <span>
#include <string>
#include <vector>

#include "jicgsim/geometry.hpp"
#include "jicgsim/layout.hpp"

namespace jicgsim {

enum class SpotModel { datasheet, measured };

std::string_view to_string(SpotModel m);
SpotModel spot_model_from_string(std::string_view s);

// 80%-energy spot diameters in micrometers.
struct Objective {
  int magnification = 20;
  double d80_datasheet = 4.0;
  double d80_measured = 11.0;

  double d80(SpotModel model) const { return model == SpotModel::measured ? d80_measured : d80_datasheet; }
};

// Built-in objectives, ordered 100x, 50x, 20x, 5x.
std::span<const Objective> objective_table();
// Throws NotFound for magnifications outside the table.
const Objective& find_objective(int magnification);
std::string objective_table_json();

struct BeamSource {
  double wavelength_nm = 808.0;
  double p_max_w = 0.848;

  void validate() const;
};

inline constexpr double kMinPulseNs = 2.0;
inline constexpr double kDefaultSamplePitch = 0.1;

struct BeamShot {
  Objective objective;
  SpotModel spot_model = SpotModel::measured;
  Point center;
  double power_fraction = 0.0;
  double duration_ns = 50.0;
  double fire_time_ns = 0.0;

  // Throws InvalidArgument for power outside [0, 1] or pulses shorter than 2 ns.
  void validate() const;
  double d80() const { return objective.d80(spot_model); }
  double waist() const;
  double power_w(const BeamSource& source) const { return power_fraction * source.p_max_w; }
};

// Gaussian waist w whose encircled energy at radius d80/2 is 80%.
double waist_from_d80(double d80);

// Per-watt intensity 2/(pi w^2) exp(-2 r^2 / w^2), taking r^2.
double gaussian_unit_intensity(double waist, double r2);

// Fraction of beam power inside a centred disk.
double energy_within(const BeamShot& shot, double radius);

// W/um^2 at p; zero under any filler.
double intensity_at(const BeamShot& shot, Point p, const CellLayout& layout, const BeamSource& source = {});

double mean_intensity_over(const BeamShot& shot, const Rect& region, const CellLayout& layout,
                           const BeamSource& source = {}, double pitch = kDefaultSamplePitch);

// Cell-centred sample grid over one region with occluded samples dropped.
// The occlusion test does not depend on the beam, so scans build one
// sampler per site and reuse it for every shot.
class RegionSampler {
 public:
  RegionSampler(const Rect& region, const CellLayout& layout, double pitch = kDefaultSamplePitch);

  // Region mean of the per-watt intensity; occluded samples contribute zero.
  double mean_unit_intensity(Point center, double waist) const;

  const Rect& region() const { return region_; }
  std::size_t sample_count() const { return total_; }
  std::size_t visible_count() const { return visible_.size(); }

 private:
  Rect region_;
  std::vector<Point> visible_;
  std::size_t total_ = 0;
};

}  // namespace jicgsim
