#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jicgsim/campaign.hpp"

namespace jicgsim {

// Pixmap colour of each class; see docs/formats.md.
std::array<std::uint8_t, 3> class_color(FaultClass c);

// x_um,y_um,classification in grid order.
std::string map_to_csv(const SensitivityMap& map);
// Plain PPM (P3), one pixel per grid cell, largest y on the top row.
std::string map_to_ppm(const SensitivityMap& map);

std::string regions_to_json(const std::vector<SensitiveRegion>& regions);
std::string campaign_to_json(const std::vector<CampaignResult>& results);
std::string report_to_json(const std::vector<ReportRow>& rows);
// Fixed-width text table.
std::string report_to_text(const std::vector<ReportRow>& rows);

}  // namespace jicgsim
