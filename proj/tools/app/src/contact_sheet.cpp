#include "raid_app/contact_sheet.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>

namespace raid::app {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string path_data(const json& polygons, double scale, double ox, double oy) {
  std::string d;
  auto ring = [&](const json& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      d += fmt::format("{}{:.1f},{:.1f} ", i == 0 ? "M" : "L", ox + scale * r[i][0].get<double>(),
                       oy + scale * r[i][1].get<double>());
    }
    d += "Z ";
  };
  for (const auto& p : polygons) {
    ring(p.at("outer"));
    for (const auto& h : p.at("holes")) ring(h);
  }
  return d;
}

}  // namespace

std::string contact_sheet_svg(const json& results, const std::string& images_dir, int columns,
                              double tile) {
  columns = std::max(1, columns);
  const double caption = 28.0;
  const std::size_t n = results.size();
  const std::size_t rows = (n + columns - 1) / columns;
  const double W = columns * tile;
  const double H = std::max<std::size_t>(rows, 1) * (tile + caption);
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" "
      "width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"10\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = results[i];
    const double x0 = (i % columns) * tile;
    const double y0 = (i / columns) * (tile + caption);
    const double w = r.value("width", 1.0);
    const double h = r.value("height", 1.0);
    const double scale = (tile - 8) / std::max(w, h);
    const double ox = x0 + (tile - scale * w) / 2;
    const double oy = y0 + (tile - scale * h) / 2;
    s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#f4f4f4\" stroke=\"#999\"/>\n",
                     ox, oy, scale * w, scale * h);
    const std::string file = r.value("file_name", "");
    if (!images_dir.empty() && !file.empty()) {
      const auto href = (std::filesystem::path(images_dir) / file).string();
      s += fmt::format("<image x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" xlink:href=\"{}\"/>\n",
                       ox, oy, scale * w, scale * h, escape(href));
    }
    if (r.contains("outlines")) {
      const auto& o = r["outlines"];
      s += fmt::format("<path d=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.35\" stroke=\"#1f77b4\" fill-rule=\"evenodd\"/>\n",
                       path_data(o.at("target"), scale, ox, oy));
      s += fmt::format("<path d=\"{}\" fill=\"#ff7f0e\" fill-opacity=\"0.45\" stroke=\"#ff7f0e\" fill-rule=\"evenodd\"/>\n",
                       path_data(o.at("source"), scale, ox, oy));
    }
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">#{} d={:.4f} img {}</text>\n", x0 + 4, y0 + tile + 11,
                     r.value("rank", 0), r.value("distance", 0.0), escape(r.value("image_id", "")));
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{} / {}</text>\n", x0 + 4, y0 + tile + 23,
                     escape(r.value("source_label", "")), escape(r.value("target_label", "")));
  }
  return s + "</svg>\n";
}

}  // namespace raid::app
