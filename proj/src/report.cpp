#include "mfnc/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mfnc {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("csv: row width differs from header");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

namespace {

constexpr double kW = 640, kH = 420, kL = 70, kR = 20, kT = 40, kB = 55;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

void frame(std::ostringstream& s, const std::string& title, const std::string& xl,
           const std::string& yl) {
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title)
    << "</text>\n";
  s << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
    << kH - kT - kB << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">"
    << esc(xl) << "</text>\n";
  s << "<text transform=\"translate(16," << (kT + kH - kB) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">" << esc(yl) << "</text>\n";
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series) {
  double x0 = std::numeric_limits<double>::max(), x1 = 0, y0 = x0, y1 = 0;
  for (const auto& s : series) {
    for (double x : s.x) {
      if (x > 0) x0 = std::min(x0, x), x1 = std::max(x1, x);
    }
    auto upd = [&](double y) {
      if (y > 0) y0 = std::min(y0, y), y1 = std::max(y1, y);
    };
    for (double y : s.y) upd(y);
    for (double y : s.y_low) upd(y);
    for (double y : s.y_high) upd(y);
  }
  if (x1 <= 0 || y1 <= 0) x0 = y0 = 1, x1 = y1 = 10;
  const double lx0 = std::log10(x0) - 0.05, lx1 = std::log10(x1) + 0.05;
  const double ly0 = std::log10(y0) - 0.05, ly1 = std::log10(y1) + 0.05;
  auto px = [&](double x) { return kL + (std::log10(x) - lx0) / (lx1 - lx0) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - (std::log10(y) - ly0) / (ly1 - ly0) * (kH - kT - kB); };

  std::ostringstream s;
  frame(s, title, x_label, y_label);
  for (int k = 0; k <= 4; ++k) {
    const double lx = lx0 + (lx1 - lx0) * k / 4.0, ly = ly0 + (ly1 - ly0) * k / 4.0;
    const double xv = std::pow(10.0, lx), yv = std::pow(10.0, ly);
    s << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
      << num(xv) << "</text>\n";
    s << "<text x=\"" << kL - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& ser = series[i];
    const char* col = kColors[i % 6];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\""
      << (ser.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
    for (std::size_t k = 0; k < ser.x.size(); ++k)
      if (ser.x[k] > 0 && ser.y[k] > 0) s << px(ser.x[k]) << "," << py(ser.y[k]) << " ";
    s << "\"/>\n";
    for (std::size_t k = 0; k < ser.y_low.size() && k < ser.x.size(); ++k) {
      if (ser.y_low[k] <= 0 || ser.y_high[k] <= 0) continue;
      s << "<line x1=\"" << px(ser.x[k]) << "\" x2=\"" << px(ser.x[k]) << "\" y1=\""
        << py(ser.y_low[k]) << "\" y2=\"" << py(ser.y_high[k]) << "\" stroke=\"" << col
        << "\"/>\n";
    }
    s << "<text x=\"" << kL + 10 << "\" y=\"" << kT + 16 + 15 * i << "\" fill=\"" << col << "\">"
      << esc(ser.label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_histograms(const std::string& title, const std::string& x_label,
                           const std::vector<Histogram>& hists, std::size_t bins) {
  double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
  for (const auto& h : hists)
    for (double v : h.values) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!(hi > lo)) lo = 0, hi = 1;
  std::vector<std::vector<double>> dens;
  double top = 0;
  for (const auto& h : hists) {
    std::vector<double> c(bins, 0.0);
    for (double v : h.values) {
      auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
      c[std::min(b, bins - 1)] += 1.0;
    }
    for (double& x : c) x /= std::max<double>(1.0, static_cast<double>(h.values.size()));
    top = std::max(top, *std::max_element(c.begin(), c.end()));
    dens.push_back(std::move(c));
  }
  if (top <= 0) top = 1;
  auto px = [&](double x) { return kL + (x - lo) / (hi - lo) * (kW - kL - kR); };
  auto py = [&](double y) { return kH - kB - y / top * (kH - kT - kB); };

  std::ostringstream s;
  frame(s, title, x_label, "fraction");
  for (int k = 0; k <= 4; ++k) {
    const double xv = lo + (hi - lo) * k / 4.0;
    s << "<text x=\"" << px(xv) << "\" y=\"" << kH - kB + 16 << "\" text-anchor=\"middle\">"
      << num(xv) << "</text>\n";
  }
  const double w = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const char* col = kColors[i % 6];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    s << px(lo) << "," << py(0) << " ";
    for (std::size_t b = 0; b < bins; ++b) {
      const double xa = lo + w * static_cast<double>(b);
      s << px(xa) << "," << py(dens[i][b]) << " " << px(xa + w) << "," << py(dens[i][b]) << " ";
    }
    s << px(hi) << "," << py(0) << "\"/>\n";
    s << "<text x=\"" << kW - kR - 10 << "\" y=\"" << kT + 16 + 15 * i
      << "\" text-anchor=\"end\" fill=\"" << col << "\">" << esc(hists[i].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace mfnc
