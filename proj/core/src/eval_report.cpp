#include "raid/eval_report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "raid/error.hpp"

namespace raid::report {

using nlohmann::ordered_json;

namespace {

ordered_json scores_json(const classifier::Scores& s) {
  ordered_json per = ordered_json::array();
  for (const auto& m : s.per_class) {
    per.push_back({{"class", m.name},
                   {"support", m.support},
                   {"true_positive", m.true_positive},
                   {"false_positive", m.false_positive},
                   {"false_negative", m.false_negative},
                   {"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1}});
  }
  return {{"macro_precision", s.macro_precision}, {"macro_recall", s.macro_recall},
          {"macro_f1", s.macro_f1},               {"micro_precision", s.micro_precision},
          {"micro_recall", s.micro_recall},       {"micro_f1", s.micro_f1},
          {"per_class", per}};
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

}  // namespace

std::string to_json(const classifier::EvalReport& r) {
  ordered_json sweep = ordered_json::array();
  for (const auto& p : r.sweep) {
    ordered_json j = scores_json(p.scores);
    j["threshold"] = p.threshold;
    sweep.push_back(std::move(j));
  }
  ordered_json preds = ordered_json::array();
  for (const auto& p : r.predictions) preds.push_back(p);
  ordered_json doc = {{"items", r.items},
                      {"k", r.k},
                      {"threshold", r.threshold},
                      {"class_list", r.class_list},
                      {"scores", scores_json(r.scores)},
                      {"confusion", {{"labels", r.matrix_labels}, {"matrix", r.confusion}}},
                      {"sweep", sweep},
                      {"predictions", preds}};
  return doc.dump(2) + "\n";
}

std::string to_text(const classifier::EvalReport& r) {
  std::string out = fmt::format("items {}  k {}  threshold {:.2f}\n\n", r.items, r.k, r.threshold);
  out += fmt::format("{:<16}{:>8}{:>11}{:>9}{:>8}\n", "class", "support", "precision", "recall", "f1");
  for (const auto& m : r.scores.per_class) {
    out += fmt::format("{:<16}{:>8}{:>11.3f}{:>9.3f}{:>8.3f}\n", m.name, m.support, m.precision,
                       m.recall, m.f1);
  }
  out += fmt::format("\nmacro  precision {:.3f}  recall {:.3f}  f1 {:.3f}\n", r.scores.macro_precision,
                     r.scores.macro_recall, r.scores.macro_f1);
  out += fmt::format("micro  precision {:.3f}  recall {:.3f}  f1 {:.3f}\n", r.scores.micro_precision,
                     r.scores.micro_recall, r.scores.micro_f1);

  out += "\nconfusion (rows actual, columns predicted)\n";
  out += fmt::format("{:<14}", "");
  for (const auto& l : r.matrix_labels) out += fmt::format("{:>8.7}", l);
  out += "\n";
  for (std::size_t i = 0; i < r.confusion.size(); ++i) {
    out += fmt::format("{:<14.13}", r.matrix_labels[i]);
    for (double v : r.confusion[i]) out += fmt::format("{:>8.2f}", v);
    out += "\n";
  }

  out += "\nthreshold sweep\n";
  out += fmt::format("{:>9}{:>11}{:>9}{:>10}{:>10}\n", "threshold", "precision", "recall", "macro_f1", "micro_f1");
  for (const auto& p : r.sweep) {
    out += fmt::format("{:>9.2f}{:>11.3f}{:>9.3f}{:>10.3f}{:>10.3f}\n", p.threshold,
                       p.scores.macro_precision, p.scores.macro_recall, p.scores.macro_f1,
                       p.scores.micro_f1);
  }
  return out;
}

std::string sweep_svg(const classifier::EvalReport& r) {
  constexpr double W = 480, H = 320, L = 50, R = 110, T = 20, B = 40;
  const double pw = W - L - R, ph = H - T - B;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H);
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", L, T, pw, ph);
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    const double y = T + ph * (1 - v);
    s += fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.1f}</text>\n", L - 4, y + 4, v);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.1f}</text>\n", L + pw * v, T + ph + 14, v);
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">threshold</text>\n", L + pw / 2, H - 8);
  struct Series {
    const char* name;
    const char* color;
    double classifier::Scores::*field;
  };
  const Series series[] = {{"precision", "#1f77b4", &classifier::Scores::macro_precision},
                           {"recall", "#ff7f0e", &classifier::Scores::macro_recall},
                           {"F1", "#2ca02c", &classifier::Scores::macro_f1}};
  int row = 0;
  for (const auto& se : series) {
    std::string pts;
    for (const auto& p : r.sweep) {
      pts += fmt::format("{:.1f},{:.1f} ", L + pw * p.threshold, T + ph * (1 - p.scores.*se.field));
    }
    s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", se.color, pts);
    const double ly = T + 14 + 16 * row++;
    s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", L + pw + 10, ly,
                     L + pw + 30, ly, se.color);
    s += fmt::format("<text x=\"{}\" y=\"{}\">macro {}</text>\n", L + pw + 34, ly + 4, se.name);
  }
  return s + "</svg>\n";
}

std::string confusion_svg(const classifier::EvalReport& r) {
  const std::size_t n = r.matrix_labels.size();
  constexpr double cell = 40, L = 100, T = 100;
  const double W = L + cell * n + 10, H = T + cell * n + 10;
  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
      "font-size=\"10\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H);
  double peak = 0.0;
  for (const auto& row : r.confusion) {
    for (double v : row) peak = std::max(peak, v);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = escape(r.matrix_labels[i]);
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", L - 4, T + cell * i + cell / 2 + 3, label);
    s += fmt::format("<text transform=\"translate({},{}) rotate(-60)\">{}</text>\n", L + cell * i + cell / 2,
                     T - 4, label);
    for (std::size_t j = 0; j < n; ++j) {
      const double v = r.confusion[i][j];
      const int shade = peak > 0 ? static_cast<int>(255 - 200 * v / peak) : 255;
      s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"rgb({},{},255)\" stroke=\"#ccc\"/>\n",
                       L + cell * j, T + cell * i, cell, cell, shade, shade);
      if (v > 0) {
        s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", L + cell * j + cell / 2,
                         T + cell * i + cell / 2 + 3, v);
      }
    }
  }
  return s + "</svg>\n";
}

void write_report(const classifier::EvalReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
  write_file(dir / "report.json", to_json(r));
  write_file(dir / "report.txt", to_text(r));
  write_file(dir / "sweep.svg", sweep_svg(r));
  write_file(dir / "confusion.svg", confusion_svg(r));
}

}  // namespace raid::report
