#pragma once

// Output formats: RFC 4180 CSV tables, JSON reports with stable key order,
// standalone SVG line plots, and the flat `key = value` configuration format.

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qstate/dynamics.hpp"
#include "qstate/partitions.hpp"
#include "qstate/quasistate.hpp"

namespace qstate {

using Json = nlohmann::ordered_json;

// Shortest decimal form that reads back to the same double; "nan", "inf",
// "-inf" for non-finite values.
std::string format_real(double v);

// Quotes the field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  // Throws ArgumentError when the row width differs from the header.
  void row(const std::vector<std::string>& cells);

 private:
  std::ostream& os_;
  std::size_t width_;
};

// Parses RFC 4180 text, including quoted fields spanning lines.
std::vector<std::vector<std::string>> read_csv(std::istream& is);

// `key = value` lines; blank lines and lines starting with '#' are skipped.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string get_string(const std::string& key) const;
  double get_real(const std::string& key) const;
  int get_int(const std::string& key) const;
  // Comma separated reals.
  std::vector<double> get_reals(const std::string& key) const;

 private:
  std::map<std::string, std::string> entries_;
};

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

void write_svg_plot(std::ostream& os, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series);

// Tables with the canonical headers.
void write_inequality_csv(std::ostream& os, const std::vector<InequalityReport>& rows);
void write_measurement_csv(std::ostream& os, const std::vector<MeasurementReport>& rows);
void write_partition_csv(std::ostream& os, const ExperimentResult& result);
void write_robustness_csv(std::ostream& os, const RobustnessReport& report);

// Flattens a JSON report into `key = value` lines, nested keys joined by
// dots and array elements by index ("curve.0.epsilon = 0.05"). Readable by
// KeyValueConfig.
void write_key_values(std::ostream& os, const Json& report);

Json to_json(const InequalityReport& r);
Json to_json(const RobustnessReport& r);
Json to_json(const MeasurementReport& r);
Json to_json(const CompositionReport& r);
Json to_json(const ScalingReport& r);
Json to_json(const ExperimentResult& r);

}  // namespace qstate
