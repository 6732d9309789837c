#include "gcd/io/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "gcd/errors.hpp"

namespace gcd::io {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trajectory_csv(const integrator::Trajectory& tr) {
  std::ostringstream os;
  os << "t";
  for (std::size_t i = 0; i < macro::kNumFree; ++i) os << ',' << macro::kRateNames[i];
  for (const auto& f : macro::dependent_fields()) os << ',' << f.name;
  for (auto n : macro::kMultiplierNames) os << ',' << n;
  for (const auto& f : macro::utility_fields()) os << ',' << f.name;
  for (std::size_t i = 0; i < macro::kNumRates; ++i) os << ",rate_" << macro::kRateNames[i];
  os << '\n';
  for (const auto& s : tr.samples) {
    os << format_double(s.t);
    for (double v : s.x.values) os << ',' << format_double(v);
    for (const auto& f : macro::dependent_fields()) os << ',' << format_double(s.d.*f.member);
    for (double v : s.ev.lambdas) os << ',' << format_double(v);
    for (const auto& f : macro::utility_fields()) os << ',' << format_double(s.u.*f.member);
    for (double v : s.ev.rates) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ConfigError("csv", "CSV has no header row");
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError("csv", "non-numeric cell '" + cell + "' on line " + std::to_string(lineno));
      }
    }
    if (row.size() != t.header.size()) {
      throw ConfigError("csv", "line " + std::to_string(lineno) + " has " +
                                   std::to_string(row.size()) + " cells, header has " +
                                   std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

constexpr int kWidth = 800, kHeight = 500;
constexpr int kLeft = 80, kRight = 160, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace

std::string plot_svg(const Table& t, const std::vector<std::string>& columns, const std::string& title) {
  if (columns.empty()) throw ConfigError("variables", "no variables to plot");
  if (t.header.empty()) throw ConfigError("csv", "CSV has no columns");
  std::vector<std::size_t> cols;
  for (const auto& c : columns) {
    auto it = std::find(t.header.begin(), t.header.end(), c);
    if (it == t.header.end()) {
      std::string avail;
      for (const auto& h : t.header) avail += (avail.empty() ? "" : ", ") + h;
      throw ConfigError(c, "unknown column '" + c + "'; available: " + avail);
    }
    cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : t.rows) {
    x0 = std::min(x0, r[0]);
    x1 = std::max(x1, r[0]);
    for (auto c : cols) {
      if (!std::isfinite(r[c])) continue;
      y0 = std::min(y0, r[c]);
      y1 = std::max(y1, r[c]);
    }
  }
  if (!(x1 > x0)) {
    x0 = std::isfinite(x0) ? x0 - 0.5 : 0.0;
    x1 = x0 + 1.0;
  }
  if (!(y1 > y0)) {
    const double mid = std::isfinite(y0) ? y0 : 0.0;
    const double pad = std::max(1e-12, std::abs(mid) * 0.05 + (mid == 0.0 ? 1.0 : 0.0));
    y0 = mid - pad;
    y1 = mid + pad;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(title) << "</text>\n";
  }
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << num(pw) << "\" height=\""
     << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    os << "<line x1=\"" << num(sx(xv)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(sx(xv))
       << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(kTop + ph + 20)
       << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << kLeft
       << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(sy(yv) + 4)
       << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << kHeight - 15
     << "\" text-anchor=\"middle\">" << escape(t.header[0]) << "</text>\n";
  std::string ylabel;
  for (const auto& c : columns) ylabel += (ylabel.empty() ? "" : ", ") + c;
  os << "<text transform=\"translate(18," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";

  for (std::size_t k = 0; k < cols.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& r : t.rows) {
      if (!std::isfinite(r[cols[k]])) continue;
      os << (first ? "" : " ") << num(sx(r[0])) << ',' << num(sy(r[cols[k]]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 15 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(kLeft + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << num(kLeft + pw + 38) << "\" y=\"" << num(ly + 4) << "\">"
       << escape(columns[k]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gcd::io
