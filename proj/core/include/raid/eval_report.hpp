#pragma once

#include <filesystem>
#include <string>

#include "raid/classifier.hpp"

namespace raid::report {

/// Every number of the report, machine-readable.
std::string to_json(const classifier::EvalReport& r);
/// Fixed-width tables for reading in a terminal.
std::string to_text(const classifier::EvalReport& r);
/// Macro precision, recall and F1 against the threshold.
std::string sweep_svg(const classifier::EvalReport& r);
/// Confusion matrix heat map with cell values.
std::string confusion_svg(const classifier::EvalReport& r);

/// Writes report.json, report.txt, sweep.svg and confusion.svg into dir.
void write_report(const classifier::EvalReport& r, const std::filesystem::path& dir);

}  // namespace raid::report
