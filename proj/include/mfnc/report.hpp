#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace mfnc {

/// Shortest decimal that round-trips; output bytes depend only on the value.
std::string fmt_double(double v);

class CsvWriter {
 public:
  /// Throws std::runtime_error if the file cannot be opened.
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

void write_text(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> y_low;   // optional error bars
  std::vector<double> y_high;
  bool dashed = false;
};

/// Log-log line plot.
std::string svg_loglog(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series);

struct Histogram {
  std::string label;
  std::vector<double> values;
};

/// Overlaid step histograms on a common linear axis.
std::string svg_histograms(const std::string& title, const std::string& x_label,
                           const std::vector<Histogram>& hists, std::size_t bins = 40);

}  // namespace mfnc
