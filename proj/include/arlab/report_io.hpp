#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "arlab/expansion_lab.hpp"
#include "arlab/normality_test.hpp"

namespace arlab {

/// Report document: metadata, configuration echo and cells. Runtime details go
/// in a separate "runtime" object so the rest is comparable across runs.
nlohmann::json report_to_json(const ExpansionReport& report, const nlohmann::json& raw_config,
                              const nlohmann::json& resolved_config);
ExpansionReport report_from_json(const nlohmann::json& doc);

/// The report document without its "runtime" object.
nlohmann::json deterministic_part(const nlohmann::json& doc);

/// n,gamma,x,mean_R,sd_R,p_exceed_<c>...,n_invalid with six significant digits.
void write_summary_csv(const ExpansionReport& report, std::ostream& os);
/// Root mean square of R against n on a log axis, one line per gamma
/// (largest over x).
void write_remainder_svg(const ExpansionReport& report, std::ostream& os);

nlohmann::json to_json(const TestReport& r);
nlohmann::json to_json(const PowerRow& r);
void write_power_csv(std::span<const PowerRow> rows, std::ostream& os);
/// Rejection rate per scenario with +-2 SE whiskers and a line at alpha.
void write_power_svg(std::span<const PowerRow> rows, double alpha, std::ostream& os);

/// Writes the serialized document with a trailing newline.
void write_json_file(const nlohmann::json& doc, const std::string& path);

/// Reads one numeric column. A single-column file may start with a
/// non-numeric header line; a multi-column file must have a header, and the
/// field named `column` is read.
std::vector<double> read_csv_column(std::istream& is, const std::string& column);

}  // namespace arlab
