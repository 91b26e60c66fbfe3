#pragma once

#include <string>

#include "raid_app/wire.hpp"

namespace raid::app {

/// SVG grid of result tiles drawn from a results array that carries
/// outlines: source in orange, target in blue, over the image thumbnail when
/// images_dir is set and the result names a file.
std::string contact_sheet_svg(const json& results, const std::string& images_dir = {},
                              int columns = 5, double tile = 160.0);

}  // namespace raid::app
