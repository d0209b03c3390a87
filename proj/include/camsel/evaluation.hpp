#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "camsel/detail/text_io.hpp"
#include "camsel/errors.hpp"
#include "camsel/geometry.hpp"
#include "camsel/localizer.hpp"

namespace camsel {

struct ToleranceBin {
  double t_tol = 0.25;  // meters
  double r_tol = 2.0;   // degrees

  void validate(const std::string& field = "evaluation.bins") const {
    if (!(t_tol > 0.0) || !(r_tol > 0.0)) throw ConfigError(field, "tolerances must be > 0");
  }
};

inline std::vector<ToleranceBin> default_bins() { return {{0.25, 2.0}, {0.5, 5.0}, {5.0, 10.0}}; }

// Minimum recall (percent) per bin below which a slice counts as failed.
struct FailureThresholds {
  std::vector<double> min_recall_pct{30.0, 50.0, 70.0};

  void validate(std::size_t num_bins, const std::string& field = "evaluation.failure_thresholds") const {
    if (min_recall_pct.size() != num_bins) throw ConfigError(field, "need one threshold per tolerance bin");
    for (std::size_t i = 0; i < min_recall_pct.size(); ++i) {
      if (!(min_recall_pct[i] > 0.0 && min_recall_pct[i] <= 100.0))
        throw ConfigError(field, "thresholds must be in (0, 100]");
      if (i > 0 && min_recall_pct[i] < min_recall_pct[i - 1])
        throw ConfigError(field, "thresholds must be non-decreasing across bins");
    }
  }
};

// Percentage of errors within both tolerances. Failed frames carry infinite
// translation error and never count.
inline double recall_at(std::span<const PoseError> errors, const ToleranceBin& bin) {
  if (errors.empty()) throw EmptyInput("recall over an empty error list");
  std::size_t hits = 0;
  for (const auto& e : errors)
    if (e.translation_err <= bin.t_tol && e.rotation_err <= bin.r_tol) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(errors.size());
}

struct SliceReport {
  int slice_id = 0;
  int frame_count = 0;
  std::vector<double> recall_pct;  // per bin
  std::vector<bool> failed;        // per bin
};

struct SliceRecall {
  int slice_id = 0;
  int frame_count = 0;
  std::vector<double> recall_pct;
};

// A slice fails a bin when its recall is strictly below the threshold.
inline std::vector<SliceReport> classify_slices(std::span<const SliceRecall> slices, const FailureThresholds& th) {
  std::vector<SliceReport> out;
  for (const auto& s : slices) {
    if (s.recall_pct.size() != th.min_recall_pct.size())
      throw DomainError("slice " + std::to_string(s.slice_id) + " has a different number of bins than the thresholds");
    SliceReport r{s.slice_id, s.frame_count, s.recall_pct, {}};
    for (std::size_t b = 0; b < s.recall_pct.size(); ++b) r.failed.push_back(s.recall_pct[b] < th.min_recall_pct[b]);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-frame query results

struct FrameRecord {
  std::string selector;
  std::string log;
  int frame = 0;
  int slice = 0;
  int place = 0;
  int camera = 0;  // -1 for joint rig estimates
  LocalizationStatus status = LocalizationStatus::Failed;
  PoseError error;
  int inliers = 0;
  double inlier_ratio = 0.0;
  int matched = 0;
  int localizations = 0;  // localization pipelines run for this frame
};

inline constexpr const char* kFrameCsvHeader =
    "selector,log,frame,slice,place,camera,status,t_err,r_err,inliers,ratio,matched,localizations";

inline void write_frame_records(std::ostream& out, std::span<const FrameRecord> records) {
  using detail::format_double;
  out << kFrameCsvHeader << '\n';
  for (const auto& r : records)
    out << r.selector << ',' << r.log << ',' << r.frame << ',' << r.slice << ',' << r.place << ',' << r.camera << ','
        << (r.status == LocalizationStatus::Success ? "success" : "failed") << ','
        << format_double(r.error.translation_err) << ',' << format_double(r.error.rotation_err) << ',' << r.inliers
        << ',' << format_double(r.inlier_ratio) << ',' << r.matched << ',' << r.localizations << '\n';
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline std::vector<FrameRecord> read_frame_records(std::istream& in, const std::string& source = "results") {
  std::vector<FrameRecord> out;
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) { throw FormatError(source, line_no, what); };
  if (!std::getline(in, line)) fail("empty results file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kFrameCsvHeader) fail("unexpected header");
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 13) fail("expected 13 columns, got " + std::to_string(f.size()));
    FrameRecord r;
    r.selector = std::string(f[0]);
    r.log = std::string(f[1]);
    const auto integer = [&](std::string_view s) {
      int v = 0;
      if (!detail::parse_int(s, v)) fail("bad integer '" + std::string(s) + "'");
      return v;
    };
    const auto number = [&](std::string_view s) {
      double v = 0.0;
      if (!detail::parse_double(s, v)) fail("bad number '" + std::string(s) + "'");
      return v;
    };
    r.frame = integer(f[2]);
    r.slice = integer(f[3]);
    r.place = integer(f[4]);
    r.camera = integer(f[5]);
    if (f[6] == "success")
      r.status = LocalizationStatus::Success;
    else if (f[6] == "failed")
      r.status = LocalizationStatus::Failed;
    else
      fail("bad status '" + std::string(f[6]) + "'");
    r.error = {number(f[7]), number(f[8])};
    if (!(r.error.translation_err >= 0.0) || !(r.error.rotation_err >= 0.0 && r.error.rotation_err <= 180.0))
      fail("pose error out of range");
    r.inliers = integer(f[9]);
    r.inlier_ratio = number(f[10]);
    r.matched = integer(f[11]);
    r.localizations = integer(f[12]);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct SliceRow {
  std::string selector;
  std::string log;
  SliceReport report;
};

struct SummaryRow {
  std::string selector;
  std::string log;
  int frames = 0;
  int slices = 0;
  std::vector<double> recall_pct;     // per bin, over every frame of the log
  std::vector<int> failed_slices;     // per bin
  std::vector<double> failed_pct;     // per bin, failed_slices / slices
  double localizations_per_frame = 0.0;
};

// Failed-slice reduction of the dynamic selector relative to static, per log and bin.
struct Reduction {
  std::string log;
  int slices = 0;
  std::vector<int> static_failed;
  std::vector<int> dynamic_failed;
  std::vector<int> reduction;             // static - dynamic
  std::vector<double> reduction_pct;      // of static failures (0 when static never fails)
};

struct PlaceRecall {
  std::string selector;
  std::string log;
  int place = 0;
  int frames = 0;
  std::vector<double> recall_pct;
};

struct Summary {
  std::vector<ToleranceBin> bins;
  FailureThresholds thresholds;
  std::vector<SliceRow> slices;        // sorted by (selector, log, slice)
  std::vector<SummaryRow> rows;        // sorted by (selector, log)
  std::vector<Reduction> reductions;   // sorted by log
  std::vector<PlaceRecall> places;     // sorted by (selector, log, place)

  const SummaryRow* row(const std::string& selector, const std::string& log) const {
    for (const auto& r : rows)
      if (r.selector == selector && r.log == log) return &r;
    return nullptr;
  }
};

inline std::vector<double> recalls_over(std::span<const PoseError> errors, std::span<const ToleranceBin> bins) {
  std::vector<double> out;
  for (const auto& b : bins) out.push_back(recall_at(errors, b));
  return out;
}

// Pure aggregation of per-frame records into slice reports, per-log summary
// rows, the dynamic-vs-static failed-slice comparison, and per-place recall.
inline Summary summarize(std::span<const FrameRecord> records, const std::vector<ToleranceBin>& bins,
                         const FailureThresholds& thresholds) {
  for (const auto& b : bins) b.validate();
  thresholds.validate(bins.size());
  Summary s;
  s.bins = bins;
  s.thresholds = thresholds;

  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::map<int, std::vector<PoseError>>> by_slice;
  std::map<Key, std::map<int, std::vector<PoseError>>> by_place;
  std::map<Key, std::vector<PoseError>> by_log;
  std::map<Key, long long> calls;
  for (const auto& r : records) {
    const Key k{r.selector, r.log};
    by_slice[k][r.slice].push_back(r.error);
    by_place[k][r.place].push_back(r.error);
    by_log[k].push_back(r.error);
    calls[k] += r.localizations;
  }

  for (const auto& [key, slices] : by_slice) {
    std::vector<SliceRecall> recalls;
    for (const auto& [id, errors] : slices)
      recalls.push_back({id, static_cast<int>(errors.size()), recalls_over(errors, bins)});
    const auto reports = classify_slices(recalls, thresholds);

    SummaryRow row;
    row.selector = key.first;
    row.log = key.second;
    row.frames = static_cast<int>(by_log[key].size());
    row.slices = static_cast<int>(reports.size());
    row.recall_pct = recalls_over(by_log[key], bins);
    row.failed_slices.assign(bins.size(), 0);
    for (const auto& rep : reports) {
      for (std::size_t b = 0; b < bins.size(); ++b) row.failed_slices[b] += rep.failed[b] ? 1 : 0;
      s.slices.push_back({key.first, key.second, rep});
    }
    for (const int f : row.failed_slices) row.failed_pct.push_back(100.0 * f / row.slices);
    row.localizations_per_frame = static_cast<double>(calls[key]) / row.frames;
    s.rows.push_back(std::move(row));
  }

  for (const auto& [key, places] : by_place)
    for (const auto& [id, errors] : places)
      s.places.push_back({key.first, key.second, id, static_cast<int>(errors.size()), recalls_over(errors, bins)});

  std::map<std::string, std::pair<const SummaryRow*, const SummaryRow*>> pairs;
  for (const auto& row : s.rows) {
    if (row.selector == "static") pairs[row.log].first = &row;
    if (row.selector == "dynamic") pairs[row.log].second = &row;
  }
  for (const auto& [log, pr] : pairs) {
    if (!pr.first || !pr.second) continue;
    Reduction red;
    red.log = log;
    red.slices = pr.first->slices;
    red.static_failed = pr.first->failed_slices;
    red.dynamic_failed = pr.second->failed_slices;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      const int d = red.static_failed[b] - red.dynamic_failed[b];
      red.reduction.push_back(d);
      red.reduction_pct.push_back(red.static_failed[b] > 0 ? 100.0 * d / red.static_failed[b] : 0.0);
    }
    s.reductions.push_back(std::move(red));
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV reports

inline void write_slices_csv(std::ostream& out, const Summary& s) {
  using detail::format_double;
  out << "selector,log,slice,bin_t,bin_r,recall_pct,failed\n";
  for (const auto& row : s.slices)
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      out << row.selector << ',' << row.log << ',' << row.report.slice_id << ',' << format_double(s.bins[b].t_tol)
          << ',' << format_double(s.bins[b].r_tol) << ',' << format_double(row.report.recall_pct[b]) << ','
          << (row.report.failed[b] ? 1 : 0) << '\n';
}

// One row per (selector, log): recall per bin, then failed slices per bin as
// count and percentage.
inline void write_summary_csv(std::ostream& out, const Summary& s) {
  using detail::format_double;
  out << "selector,log,frames,slices,localizations_per_frame";
  for (const auto& b : s.bins) {
    const std::string tag = format_double(b.t_tol) + "m_" + format_double(b.r_tol) + "deg";
    out << ",recall_" << tag << ",failed_" << tag << ",failed_pct_" << tag;
  }
  out << '\n';
  for (const auto& row : s.rows) {
    out << row.selector << ',' << row.log << ',' << row.frames << ',' << row.slices << ','
        << format_double(row.localizations_per_frame);
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      out << ',' << format_double(row.recall_pct[b]) << ',' << row.failed_slices[b] << ','
          << format_double(row.failed_pct[b]);
    out << '\n';
  }
}

inline void write_reduction_csv(std::ostream& out, const Summary& s) {
  using detail::format_double;
  out << "log,bin_t,bin_r,slices,static_failed,dynamic_failed,reduction,reduction_pct\n";
  for (const auto& red : s.reductions)
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      out << red.log << ',' << format_double(s.bins[b].t_tol) << ',' << format_double(s.bins[b].r_tol) << ','
          << red.slices << ',' << red.static_failed[b] << ',' << red.dynamic_failed[b] << ',' << red.reduction[b]
          << ',' << format_double(red.reduction_pct[b]) << '\n';
}

inline void write_place_recall_csv(std::ostream& out, const Summary& s) {
  using detail::format_double;
  out << "selector,log,place,frames,bin_t,bin_r,recall_pct\n";
  for (const auto& p : s.places)
    for (std::size_t b = 0; b < s.bins.size(); ++b)
      out << p.selector << ',' << p.log << ',' << p.place << ',' << p.frames << ',' << format_double(s.bins[b].t_tol)
          << ',' << format_double(s.bins[b].r_tol) << ',' << format_double(p.recall_pct[b]) << '\n';
}

}  // namespace camsel
