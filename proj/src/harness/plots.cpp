#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vvclab/error.hpp"
#include "vvclab/harness.hpp"

namespace vvclab::harness {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& file, int lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(file.string() + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
}

fs::path metrics_file(const fs::path& p) {
  return fs::is_directory(p) ? p / "metrics.csv" : p;
}

void write_svg(const fs::path& path, const std::vector<CurvePoint>& curve, const std::vector<env::DailyTotals>& mbo,
               const std::string& label) {
  const double w = 640, h = 400, left = 70, right = 20, top = 20, bottom = 50;
  double lo = curve.front().min, hi = curve.front().max;
  for (const auto& p : curve) {
    lo = std::min(lo, p.min);
    hi = std::max(hi, p.max);
  }
  for (std::size_t d = 0; d < std::min(mbo.size(), curve.size()); ++d) {
    lo = std::min(lo, mbo[d].reward);
    hi = std::max(hi, mbo[d].reward);
  }
  if (hi <= lo) hi = lo + 1.0;
  const double last = std::max(1, curve.back().day);
  auto x = [&](double day) { return left + (w - left - right) * day / last; };
  auto y = [&](double v) { return top + (h - top - bottom) * (hi - v) / (hi - lo); };

  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<path fill=\"#9ecae1\" fill-opacity=\"0.5\" d=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i == 0 ? "M" : "L") << num(x(curve[i].day)) << ' ' << num(y(curve[i].max)) << ' ';
  }
  for (std::size_t i = curve.size(); i-- > 0;) out << "L" << num(x(curve[i].day)) << ' ' << num(y(curve[i].min)) << ' ';
  out << "Z\"/>\n<polyline fill=\"none\" stroke=\"#3182bd\" stroke-width=\"2\" points=\"";
  for (const auto& p : curve) out << num(x(p.day)) << ',' << num(y(p.mean)) << ' ';
  out << "\"/>\n";
  if (!mbo.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#e6550d\" stroke-dasharray=\"6 3\" points=\"";
    for (std::size_t d = 0; d < std::min(mbo.size(), curve.size()); ++d) {
      out << num(x(curve[d].day)) << ',' << num(y(mbo[d].reward)) << ' ';
    }
    out << "\"/>\n";
  }
  out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (w + left) / 2 << "\" y=\"" << h - 15 << "\" text-anchor=\"middle\">day</text>\n";
  out << "<text x=\"15\" y=\"" << (h - bottom + top) / 2 << "\" transform=\"rotate(-90 15 "
      << (h - bottom + top) / 2 << ")\" text-anchor=\"middle\">" << label << "</text>\n";
  out << "<text x=\"" << left - 5 << "\" y=\"" << top + 5 << "\" text-anchor=\"end\" font-size=\"11\">" << num(hi)
      << "</text>\n";
  out << "<text x=\"" << left - 5 << "\" y=\"" << h - bottom << "\" text-anchor=\"end\" font-size=\"11\">" << num(lo)
      << "</text>\n";
  out << "</svg>\n";
}

}  // namespace

std::vector<DayRecord> read_day_records(const fs::path& metrics_csv) {
  std::ifstream in(metrics_csv);
  if (!in) throw ParseError("cannot open " + metrics_csv.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError(metrics_csv.string() + ": unexpected header");
  }
  std::vector<DayRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.rfind(kSummaryStep, 0) != 0) continue;
    const auto f = split(line);
    if (f.size() != 9) throw ParseError(metrics_csv.string() + ":" + std::to_string(lineno) + ": expected 9 fields");
    DayRecord r;
    r.day = static_cast<int>(parse_double(f[1], metrics_csv, lineno));
    r.reward = parse_double(f[2], metrics_csv, lineno);
    r.loss_mw = parse_double(f[3], metrics_csv, lineno);
    r.vvr = parse_double(f[4], metrics_csv, lineno);
    r.loss_qp = parse_double(f[5], metrics_csv, lineno);
    r.loss_qv = parse_double(f[6], metrics_csv, lineno);
    r.alpha = parse_double(f[7], metrics_csv, lineno);
    out.push_back(r);
  }
  return out;
}

std::vector<CurvePoint> learning_curve(const std::vector<std::vector<DayRecord>>& runs) {
  if (runs.empty()) throw ContractViolation("learning curve needs at least one run");
  const auto& ref = runs.front();
  for (const auto& r : runs) {
    if (r.size() != ref.size()) throw AlignmentError("runs cover " + std::to_string(ref.size()) + " and " +
                                                     std::to_string(r.size()) + " days");
    for (std::size_t d = 0; d < r.size(); ++d) {
      if (r[d].day != ref[d].day) throw AlignmentError("runs disagree on day index at row " + std::to_string(d));
    }
  }
  std::vector<CurvePoint> curve;
  for (std::size_t d = 0; d < ref.size(); ++d) {
    CurvePoint p{ref[d].day, 0.0, ref[d].reward, ref[d].reward};
    for (const auto& r : runs) {
      p.mean += r[d].reward / static_cast<double>(runs.size());
      p.min = std::min(p.min, r[d].reward);
      p.max = std::max(p.max, r[d].reward);
    }
    curve.push_back(p);
  }
  return curve;
}

void emit_plots(const std::vector<fs::path>& runs, const fs::path& out, const PlotOptions& options) {
  std::vector<std::vector<DayRecord>> records;
  for (const auto& r : runs) records.push_back(read_day_records(metrics_file(r)));
  const auto curve = learning_curve(records);
  if (curve.empty()) throw ContractViolation("runs contain no completed days");
  fs::create_directories(out);
  {
    std::ofstream csv(out / "curve.csv");
    if (!csv) throw Error("cannot write " + (out / "curve.csv").string());
    csv << "day,mean,min,max\n";
    for (const auto& p : curve) csv << p.day << ',' << num(p.mean) << ',' << num(p.min) << ',' << num(p.max) << '\n';
  }
  std::vector<env::DailyTotals> mbo;
  if (options.mbo_csv) {
    mbo = read_daily_totals(*options.mbo_csv);
    if (mbo.size() < curve.size()) {
      throw AlignmentError("MBO file covers " + std::to_string(mbo.size()) + " days, runs cover " +
                           std::to_string(curve.size()));
    }
    std::ofstream csv(out / "reward_error.csv");
    if (!csv) throw Error("cannot write " + (out / "reward_error.csv").string());
    csv << "day,reward_error\n";
    std::vector<double> err;
    for (const auto& p : curve) {
      err.push_back(mbo[static_cast<std::size_t>(p.day)].reward - p.mean);
      csv << p.day << ',' << num(err.back()) << '\n';
    }
    const std::size_t n = std::min(err.size(), static_cast<std::size_t>(std::max(options.final_window, 1)));
    double mean = 0.0;
    for (std::size_t i = err.size() - n; i < err.size(); ++i) mean += err[i] / static_cast<double>(n);
    csv << "final_mean," << num(mean) << '\n';
  }
  if (options.svg) write_svg(out / "curve.svg", curve, mbo, options.label);
}

}  // namespace vvclab::harness
