#include "qstate/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "qstate/errors.hpp"

namespace qstate {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string flag(bool b) { return b ? "true" : "false"; }

// JSON has no representation for non-finite numbers.
Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string escape_xml(std::string_view s) {
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

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), width_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_)
    throw ArgumentError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(width_));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os_ << ',';
    os_ << csv_field(cells[i]);
  }
  os_ << "\r\n";
}

std::vector<std::vector<std::string>> read_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  char c;
  while (is.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          cell += '"';
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && is.peek() == '\n') is.get(c);
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      cell += c;
    }
  }
  if (quoted) throw ArgumentError("unterminated quoted CSV field");
  if (any) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// key = value

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
  KeyValueConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ArgumentError("config line " + std::to_string(number) + ": empty key");
    if (!cfg.entries_.emplace(key, trim(std::string_view(t).substr(eq + 1))).second)
      throw ArgumentError("config line " + std::to_string(number) + ": duplicate key '" + key +
                          "'");
  }
  return cfg;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ArgumentError("config has no key '" + key + "'");
  return it->second;
}

double KeyValueConfig::get_real(const std::string& key) const {
  const std::string s = get_string(key);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ArgumentError("config key '" + key + "': '" + s + "' is not a real number");
  return v;
}

int KeyValueConfig::get_int(const std::string& key) const {
  const std::string s = get_string(key);
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw ArgumentError("config key '" + key + "': '" + s + "' is not an integer");
  return v;
}

std::vector<double> KeyValueConfig::get_reals(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || end != t.data() + t.size())
      throw ArgumentError("config key '" + key + "': '" + t + "' is not a real number");
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

void write_svg_plot(std::ostream& os, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool first = true;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (first) {
        x0 = x1 = x;
        y0 = y1 = y;
        first = false;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << escape_xml(title) << "</text>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">" << format_real(xv) << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << format_real(yv) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(x_label) << "</text>\n"
     << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
     << "transform=\"rotate(-90 16 " << (T + H - B) / 2 << ")\">" << escape_xml(y_label)
     << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[i].points)
      if (std::isfinite(x) && std::isfinite(y)) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n"
       << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 16 * (i + 1)
       << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
       << escape_xml(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Tables

void write_inequality_csv(std::ostream& os, const std::vector<InequalityReport>& rows) {
  CsvWriter w(os, {"pi", "bracket_norm", "bound", "C", "satisfied"});
  for (const auto& r : rows)
    w.row({format_real(r.pi), format_real(r.bracket_norm), format_real(r.bound),
           format_real(r.defect_C), flag(r.satisfied)});
}

void write_measurement_csv(std::ostream& os, const std::vector<MeasurementReport>& rows) {
  CsvWriter w(os, {"T", "epsilon", "delta", "bound", "satisfied", "conservation_residual"});
  for (const auto& r : rows)
    w.row({format_real(r.T), format_real(r.epsilon), format_real(r.delta),
           r.bound ? format_real(*r.bound) : "", flag(r.satisfied),
           format_real(r.conservation_residual)});
}

void write_partition_csv(std::ostream& os, const ExperimentResult& result) {
  CsvWriter w(os, {"N", "m", "N_eff", "measured_max_bracket", "proof_bound", "satisfied"});
  for (const auto& r : result.rows)
    w.row({std::to_string(r.N), std::to_string(r.m), std::to_string(r.N_eff),
           format_real(r.measured_max_bracket), format_real(r.proof_bound), flag(r.satisfied)});
}

void write_robustness_csv(std::ostream& os, const RobustnessReport& report) {
  CsvWriter w(os, {"epsilon", "upsilon_lower"});
  for (const auto& [e, u] : report.upsilon_curve) w.row({format_real(e), format_real(u)});
}

// ---------------------------------------------------------------------------
// JSON

Json to_json(const InequalityReport& r) {
  return {{"pi", real(r.pi)},
          {"bracket_norm", real(r.bracket_norm)},
          {"bound", real(r.bound)},
          {"C", real(r.defect_C)},
          {"satisfied", r.satisfied}};
}

namespace {

void flatten(std::ostream& os, const std::string& prefix, const Json& j) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(os, prefix.empty() ? k : prefix + "." + k, v);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      flatten(os, prefix + "." + std::to_string(i), j[i]);
  } else if (j.is_number_float()) {
    os << prefix << " = " << format_real(j.get<double>()) << '\n';
  } else if (j.is_string()) {
    os << prefix << " = " << j.get<std::string>() << '\n';
  } else {
    os << prefix << " = " << j.dump() << '\n';
  }
}

}  // namespace

void write_key_values(std::ostream& os, const Json& report) {
  if (!report.is_object()) throw ArgumentError("key-value output needs a JSON object");
  flatten(os, "", report);
}

Json to_json(const RobustnessReport& r) {
  Json curve = Json::array();
  for (const auto& [e, u] : r.upsilon_curve) curve.push_back({{"epsilon", e}, {"upsilon_lower", real(u)}});
  return {{"pi", real(r.pi_value)},
          {"C", real(r.defect_C)},
          {"vacuous", r.vacuous},
          {"upsilon_lower", real(r.upsilon_lower)},
          {"eps_max_lower", real(r.eps_max_lower)},
          {"curve", curve}};
}

Json to_json(const MeasurementReport& r) {
  return {{"T", real(r.T)},
          {"epsilon", real(r.epsilon)},
          {"delta", real(r.delta)},
          {"delta_2", real(r.delta_2)},
          {"bound", r.bound ? real(*r.bound) : Json(nullptr)},
          {"satisfied", r.satisfied},
          {"conservation_residual", real(r.conservation_residual)},
          {"pointwise_residual", real(r.pointwise_residual)},
          {"initial_points", r.F1_out.size()}};
}

Json to_json(const CompositionReport& r) {
  return {{"t", real(r.t)},
          {"residual", real(r.residual)},
          {"bound", real(r.bound)},
          {"conservation_residual", real(r.conservation_residual)},
          {"satisfied", r.satisfied}};
}

Json to_json(const ScalingReport& r) {
  return {{"time_lhs", real(r.time_lhs)},       {"time_rhs", real(r.time_rhs)},
          {"time_residual", real(r.time_residual)}, {"energy_lhs", real(r.energy_lhs)},
          {"energy_rhs", real(r.energy_rhs)},   {"energy_residual", real(r.energy_residual)}};
}

Json to_json(const ExperimentResult& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"N", row.N},
                    {"m", row.m},
                    {"N_eff", row.N_eff},
                    {"measured_max_bracket", real(row.measured_max_bracket)},
                    {"proof_bound", real(row.proof_bound)},
                    {"slack", real(row.slack)},
                    {"satisfied", row.satisfied}});
  Json slopes = Json::array();
  for (double s : r.slopes) slopes.push_back(real(s));
  return {{"rows", rows}, {"slopes", slopes}};
}

}  // namespace qstate
