#include "arlab/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "arlab/errors.hpp"
#include "arlab/format.hpp"

namespace arlab {

using nlohmann::json;

namespace {

std::string sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

struct Frame {
  double width = 640, height = 400, left = 70, right = 20, top = 30, bottom = 60;
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void svg_open(std::ostream& os, const Frame& f, const std::string& title, const std::string& xlabel,
              const std::string& ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"18\" text-anchor=\"middle\">" << svg_escape(title) << "</text>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.height - f.bottom << "\" x2=\"" << f.width - f.right
     << "\" y2=\"" << f.height - f.bottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << f.height - f.bottom
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\">"
     << svg_escape(xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << f.height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << f.height / 2 << ")\">" << svg_escape(ylabel) << "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    os << "<text x=\"" << f.left - 6 << "\" y=\"" << f.py(y) + 4 << "\" text-anchor=\"end\">" << sig6(y)
       << "</text>\n";
  }
}

}  // namespace

json report_to_json(const ExpansionReport& report, const json& raw_config, const json& resolved_config) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"n", c.n},
                     {"gamma", c.gamma},
                     {"x", c.x},
                     {"n_valid", c.n_valid},
                     {"n_invalid", c.n_invalid},
                     {"unusable", c.unusable},
                     {"mean", c.mean},
                     {"sd", c.sd},
                     {"quantiles", c.quantiles},
                     {"p_exceed", c.p_exceed}});
  }
  return {{"master_seed", report.master_seed},
          {"remainder", report.remainder_kind},
          {"method_mu", report.method_mu},
          {"method_beta", report.method_beta},
          {"replications", report.replications},
          {"thresholds", report.thresholds},
          {"quantile_levels", kReportQuantiles},
          {"x_grid", report.x_grid},
          {"planned_steps", report.planned_steps},
          {"config", {{"raw", raw_config}, {"resolved", resolved_config}}},
          {"cells", cells},
          {"runtime", {{"seconds", report.runtime_seconds}, {"threads", report.threads}}}};
}

ExpansionReport report_from_json(const json& doc) {
  try {
    ExpansionReport r;
    r.master_seed = doc.at("master_seed").get<std::uint64_t>();
    r.remainder_kind = doc.at("remainder").get<std::string>();
    r.method_mu = doc.at("method_mu").get<std::string>();
    r.method_beta = doc.at("method_beta").get<std::string>();
    r.replications = doc.at("replications").get<std::size_t>();
    r.thresholds = doc.at("thresholds").get<std::vector<double>>();
    r.x_grid = doc.at("x_grid").get<std::vector<double>>();
    r.planned_steps = doc.at("planned_steps").get<std::uint64_t>();
    for (const auto& c : doc.at("cells")) {
      CellSummary s;
      s.n = c.at("n").get<std::size_t>();
      s.gamma = c.at("gamma").get<double>();
      s.x = c.at("x").get<double>();
      s.n_valid = c.at("n_valid").get<std::size_t>();
      s.n_invalid = c.at("n_invalid").get<std::size_t>();
      s.unusable = c.at("unusable").get<bool>();
      s.mean = c.at("mean").get<double>();
      s.sd = c.at("sd").get<double>();
      s.quantiles = c.at("quantiles").get<std::vector<double>>();
      s.p_exceed = c.at("p_exceed").get<std::vector<double>>();
      r.cells.push_back(std::move(s));
    }
    r.runtime_seconds = doc.at("runtime").at("seconds").get<double>();
    r.threads = doc.at("runtime").at("threads").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed report document: ") + e.what());
  }
}

json deterministic_part(const json& doc) {
  json copy = doc;
  copy.erase("runtime");
  return copy;
}

void write_summary_csv(const ExpansionReport& report, std::ostream& os) {
  os << "n,gamma,x,mean_R,sd_R";
  for (double t : report.thresholds) os << ",p_exceed_" << format_number(t);
  os << ",n_invalid\n";
  for (const auto& c : report.cells) {
    os << c.n << ',' << sig6(c.gamma) << ',' << sig6(c.x) << ',' << sig6(c.mean) << ',' << sig6(c.sd);
    for (double p : c.p_exceed) os << ',' << sig6(p);
    os << ',' << c.n_invalid << '\n';
  }
}

void write_remainder_svg(const ExpansionReport& report, std::ostream& os) {
  std::map<double, std::map<std::size_t, double>> lines;
  for (const auto& c : report.cells) {
    const double rms = std::sqrt(c.mean * c.mean + c.sd * c.sd);
    double& slot = lines[c.gamma][c.n];
    slot = std::max(slot, rms);
  }
  Frame f;
  double ymax = 0.0;
  std::size_t nmin = 0, nmax = 0;
  for (const auto& [g, pts] : lines) {
    for (const auto& [n, v] : pts) {
      ymax = std::max(ymax, v);
      nmin = nmin == 0 ? n : std::min(nmin, n);
      nmax = std::max(nmax, n);
    }
  }
  f.x0 = std::log10(static_cast<double>(std::max<std::size_t>(nmin, 1)));
  f.x1 = std::log10(static_cast<double>(std::max<std::size_t>(nmax, 1)));
  if (f.x1 <= f.x0) f.x1 = f.x0 + 1.0;
  f.y1 = ymax > 0.0 ? ymax * 1.1 : 1.0;
  svg_open(os, f, "Remainder size (" + report.remainder_kind + ")", "n (log scale)", "max over x of RMS(R)");
  std::set<std::size_t> ns;
  for (const auto& c : report.cells) ns.insert(c.n);
  for (std::size_t n : ns) {
    const double x = f.px(std::log10(static_cast<double>(n)));
    os << "<text x=\"" << x << "\" y=\"" << f.height - f.bottom + 16 << "\" text-anchor=\"middle\">" << n
       << "</text>\n";
  }
  std::size_t k = 0;
  for (const auto& [g, pts] : lines) {
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [n, v] : pts) os << f.px(std::log10(static_cast<double>(n))) << ',' << f.py(v) << ' ';
    os << "\"/>\n";
    for (const auto& [n, v] : pts)
      os << "<circle cx=\"" << f.px(std::log10(static_cast<double>(n))) << "\" cy=\"" << f.py(v)
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << f.width - f.right - 4 << "\" y=\"" << f.top + 14 * (k + 1)
       << "\" text-anchor=\"end\" fill=\"" << color << "\">gamma = " << sig6(g) << "</text>\n";
    ++k;
  }
  os << "</svg>\n";
}

json to_json(const TestReport& r) {
  return {{"n", r.n},
          {"sigma_hat", r.sigma_hat},
          {"edges", r.edges},
          {"observed", r.observed},
          {"expected", r.expected},
          {"statistic", r.statistic},
          {"df", r.df},
          {"null_weights", r.null_weights},
          {"p_value", r.p_value},
          {"alpha", r.alpha},
          {"reject", r.reject}};
}

json to_json(const PowerRow& r) {
  return {{"label", r.label},
          {"n", r.n},
          {"gamma", r.gamma},
          {"h", r.h},
          {"amplification", r.amplification},
          {"pi", r.pi},
          {"replications", r.replications},
          {"n_invalid", r.n_invalid},
          {"rejections", r.rejections},
          {"rate", r.rate},
          {"std_error", r.std_error}};
}

void write_power_csv(std::span<const PowerRow> rows, std::ostream& os) {
  os << "label,n,gamma,h,amplification,pi,replications,n_invalid,rejections,rate,std_error\n";
  for (const auto& r : rows) {
    os << csv_field(r.label) << ',' << r.n << ',' << sig6(r.gamma) << ',' << csv_field(r.h) << ','
       << sig6(r.amplification) << ',' << csv_field(r.pi) << ',' << r.replications << ',' << r.n_invalid << ',' << r.rejections << ',' << sig6(r.rate) << ','
       << sig6(r.std_error) << '\n';
  }
}

void write_power_svg(std::span<const PowerRow> rows, double alpha, std::ostream& os) {
  Frame f;
  f.bottom = 110;
  f.x0 = 0.0;
  f.x1 = static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  double ymax = alpha;
  for (const auto& r : rows) ymax = std::max(ymax, r.rate + 2.0 * r.std_error);
  f.y1 = std::min(1.0, ymax * 1.15);
  svg_open(os, f, "Rejection rate per scenario", "", "rejection rate");
  os << "<line x1=\"" << f.left << "\" y1=\"" << f.py(alpha) << "\" x2=\"" << f.width - f.right << "\" y2=\""
     << f.py(alpha) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double cx = f.px(static_cast<double>(i) + 0.5);
    const double lo = std::max(0.0, r.rate - 2.0 * r.std_error);
    const double hi = std::min(1.0, r.rate + 2.0 * r.std_error);
    os << "<line x1=\"" << cx << "\" y1=\"" << f.py(lo) << "\" x2=\"" << cx << "\" y2=\"" << f.py(hi)
       << "\" stroke=\"black\"/>\n";
    os << "<circle cx=\"" << cx << "\" cy=\"" << f.py(r.rate) << "\" r=\"4\" fill=\"" << kPalette[0] << "\"/>\n";
    const double ty = f.height - f.bottom + 12;
    os << "<text x=\"" << cx << "\" y=\"" << ty << "\" text-anchor=\"end\" transform=\"rotate(-40 " << cx << ' '
       << ty << ")\">" << svg_escape(r.label) << "</text>\n";
  }
  os << "</svg>\n";
}

void write_json_file(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<double> read_csv_column(std::istream& is, const std::string& column) {
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
  };
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0, width = 1, index = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (lineno == 1 && fields.size() > 1) {
      const auto it = std::find(fields.begin(), fields.end(), column);
      if (it == fields.end()) throw InvalidInput("line 1: no column named '" + column + "'");
      width = fields.size();
      index = static_cast<std::size_t>(it - fields.begin());
      continue;
    }
    if (fields.size() != width)
      throw InvalidInput("line " + std::to_string(lineno) + ": expected " + std::to_string(width) + " column(s)");
    const std::string& cell = fields[index];
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cell.size() || used == 0) {
      if (width == 1 && lineno == 1) continue;
      throw InvalidInput("line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
    if (!std::isfinite(v)) throw InvalidInput("line " + std::to_string(lineno) + ": value is not finite");
    out.push_back(v);
  }
  return out;
}

}  // namespace arlab
