#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "camsel/detail/seed.hpp"
#include "camsel/detail/text_io.hpp"
#include "camsel/errors.hpp"
#include "camsel/geometry.hpp"

namespace camsel {

// ---------------------------------------------------------------------------
// Places

struct Place {
  int place_id = 0;
  int start_index = 0;  // inclusive
  int end_index = 0;    // exclusive
  Pose center_pose;
};

struct PlacePartition {
  std::vector<Place> places;
  int width_images = 40;
  int stride_images = 10;

  // Fraction of a place shared with its successor (3/4 for 40/10).
  double overlap_factor() const { return 1.0 - static_cast<double>(stride_images) / width_images; }
};

// Windows of `width` images every `stride` images. The last place is the
// final full window; any trailing partial window is merged into it.
// `trajectory`, when non-empty, supplies one pose per image for place centers.
inline PlacePartition partition_places(int num_images, int width, int stride,
                                       std::span<const Pose> trajectory = {}) {
  if (width <= 0) throw ConfigError("places.width", "must be > 0");
  if (stride <= 0 || stride > width) throw ConfigError("places.stride", "must satisfy 0 < stride <= width");
  if (num_images < width)
    throw ConfigError("places.width", "trajectory has " + std::to_string(num_images) +
                                          " images, fewer than one place width (" + std::to_string(width) + ")");
  if (!trajectory.empty() && static_cast<int>(trajectory.size()) != num_images)
    throw DomainError("trajectory length does not match the number of images");

  PlacePartition part;
  part.width_images = width;
  part.stride_images = stride;
  for (int start = 0; start + width <= num_images; start += stride) {
    Place p;
    p.place_id = static_cast<int>(part.places.size());
    p.start_index = start;
    p.end_index = start + width;
    part.places.push_back(p);
  }
  part.places.back().end_index = num_images;
  for (auto& p : part.places) {
    const int center = p.start_index + (p.end_index - p.start_index) / 2;
    if (!trajectory.empty()) p.center_pose = trajectory[static_cast<std::size_t>(center)];
  }
  return part;
}

// ---------------------------------------------------------------------------
// Cost and density

// c(x) = x^p below the ceiling x_max, x_max^p above it.
struct CostFunction {
  double p = 2.0;
  double x_max = 2.0;  // meters

  void validate() const {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("cost.p", "must be a finite value >= 0");
    if (!(x_max > 0.0) || !std::isfinite(x_max)) throw ConfigError("cost.x_max", "must be > 0");
  }

  double ceiling() const { return std::pow(x_max, p); }
};

inline double cost(const CostFunction& cf, double x) {
  if (!std::isfinite(x) || x < 0.0) throw DomainError("cost is defined for finite errors >= 0");
  return x <= cf.x_max ? std::pow(x, cf.p) : std::pow(cf.x_max, cf.p);
}

enum class Kernel { Gaussian };

struct KdeConfig {
  Kernel kernel = Kernel::Gaussian;
  double bandwidth = 0.1;  // meters of translation error
  int mc_samples = 10000;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ConfigError("kde.bandwidth", "must be > 0");
    if (mc_samples <= 0) throw ConfigError("kde.mc_samples", "must be > 0");
  }
};

enum class ExpectationMode { MonteCarlo, Quadrature };

struct PoseErrorSampleSet {
  int camera_id = 0;
  int place_id = 0;
  std::vector<double> samples;  // translation errors in meters

  void validate() const {
    for (const double s : samples)
      if (!std::isfinite(s) || s < 0.0) throw DomainError("pose-error samples must be finite and >= 0");
  }
};

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// P(Z > z) for a standard normal.
inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline void require_samples(const PoseErrorSampleSet& set) {
  if (set.samples.empty())
    throw EmptySamples("camera " + std::to_string(set.camera_id) + " has no samples in place " +
                       std::to_string(set.place_id));
  set.validate();
}

}  // namespace detail

// f(x) = 1/(n h) * sum_i K((x - x_i) / h), K the standard normal density.
inline double kde_density(const PoseErrorSampleSet& set, const KdeConfig& cfg, double x) {
  detail::require_samples(set);
  cfg.validate();
  double sum = 0.0;
  for (const double xi : set.samples) sum += detail::normal_pdf((x - xi) / cfg.bandwidth);
  return sum / (static_cast<double>(set.samples.size()) * cfg.bandwidth);
}

// Monte Carlo estimate of E[c(X)] under the KDE: pick a sample uniformly,
// add N(0, h) noise, clamp negative draws to zero, average the cost.
inline double expected_cost(const PoseErrorSampleSet& set, const CostFunction& cf, const KdeConfig& cfg) {
  detail::require_samples(set);
  cf.validate();
  cfg.validate();
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, set.samples.size() - 1);
  std::normal_distribution<double> jitter(0.0, cfg.bandwidth);
  double total = 0.0;
  for (int i = 0; i < cfg.mc_samples; ++i) {
    const double x = set.samples[pick(rng)] + jitter(rng);
    total += cost(cf, std::max(x, 0.0));
  }
  return total / cfg.mc_samples;
}

// Deterministic counterpart of expected_cost: trapezoid rule for c(x) f(x)
// over [0, x_max + 6h] with step ~h/20 (x_max is a grid node), plus the
// exact contributions of the mass clamped to zero and the mass beyond the
// integration range, where the cost is saturated.
inline double expected_cost_quadrature(const PoseErrorSampleSet& set, const CostFunction& cf,
                                       const KdeConfig& cfg) {
  detail::require_samples(set);
  cf.validate();
  cfg.validate();
  const double h = cfg.bandwidth;
  const double n = static_cast<double>(set.samples.size());
  const double upper = cf.x_max + 6.0 * h;

  const auto density = [&](double x) {
    double s = 0.0;
    for (const double xi : set.samples) s += detail::normal_pdf((x - xi) / h);
    return s / (n * h);
  };
  const auto trapezoid = [&](double a, double b) {
    const int steps = std::max(1, static_cast<int>(std::ceil((b - a) / (h / 20.0))));
    const double dx = (b - a) / steps;
    double acc = 0.5 * (cost(cf, a) * density(a) + cost(cf, b) * density(b));
    for (int i = 1; i < steps; ++i) {
      const double x = a + i * dx;
      acc += cost(cf, x) * density(x);
    }
    return acc * dx;
  };

  double below = 0.0;
  double above = 0.0;
  for (const double xi : set.samples) {
    below += detail::normal_upper_tail(xi / h);
    above += detail::normal_upper_tail((upper - xi) / h);
  }
  const double total = trapezoid(0.0, cf.x_max) + trapezoid(cf.x_max, upper) + cost(cf, 0.0) * below / n +
                       cf.ceiling() * above / n;
  // Discretization can push a saturated estimate a few ulps past the ceiling.
  return std::clamp(total, 0.0, cf.ceiling());
}

inline double expected_cost(const PoseErrorSampleSet& set, const CostFunction& cf, const KdeConfig& cfg,
                            ExpectationMode mode) {
  return mode == ExpectationMode::MonteCarlo ? expected_cost(set, cf, cfg) : expected_cost_quadrature(set, cf, cfg);
}

// Index of the smallest value; ties go to the lowest index.
inline int argmin_lowest_id(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

// ---------------------------------------------------------------------------
// Selection table

struct PlaceSelection {
  int place_id = 0;
  int start_index = 0;
  int end_index = 0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  int chosen_camera = 0;
  std::vector<double> expected_costs;  // one per camera
  std::vector<int> sample_counts;      // one per camera

  bool operator==(const PlaceSelection&) const = default;
};

struct SelectionTable {
  CostFunction cost;
  KdeConfig kde;
  ExpectationMode mode = ExpectationMode::MonteCarlo;
  int num_cameras = 0;
  std::vector<PlaceSelection> places;

  // Chosen camera must be the argmin of the recorded costs (lowest id on ties).
  void validate() const {
    if (num_cameras <= 0) throw DomainError("selection table has no cameras");
    for (const auto& p : places) {
      if (static_cast<int>(p.expected_costs.size()) != num_cameras ||
          static_cast<int>(p.sample_counts.size()) != num_cameras)
        throw DomainError("place " + std::to_string(p.place_id) + " does not list every camera");
      if (p.chosen_camera != argmin_lowest_id(p.expected_costs))
        throw DomainError("place " + std::to_string(p.place_id) + " chosen camera is not the cost argmin");
    }
  }
};

inline bool operator==(const SelectionTable& a, const SelectionTable& b) {
  return a.cost.p == b.cost.p && a.cost.x_max == b.cost.x_max && a.kde.kernel == b.kde.kernel &&
         a.kde.bandwidth == b.kde.bandwidth && a.kde.mc_samples == b.kde.mc_samples &&
         a.kde.rng_seed == b.kde.rng_seed && a.mode == b.mode && a.num_cameras == b.num_cameras &&
         a.places == b.places;
}

// Per-place argmin of expected cost. error_sets[i][c] holds camera c's
// samples for partition.places[i]. A camera without samples is scored at the
// cost ceiling. Each (place, camera) estimate uses its own RNG stream.
inline SelectionTable select_cameras(const PlacePartition& partition,
                                     const std::vector<std::vector<PoseErrorSampleSet>>& error_sets,
                                     const CostFunction& cf, const KdeConfig& cfg,
                                     ExpectationMode mode = ExpectationMode::MonteCarlo) {
  cf.validate();
  cfg.validate();
  if (error_sets.size() != partition.places.size())
    throw DomainError("need one list of sample sets per place");
  SelectionTable table;
  table.cost = cf;
  table.kde = cfg;
  table.mode = mode;
  table.num_cameras = error_sets.empty() ? 0 : static_cast<int>(error_sets.front().size());
  if (table.num_cameras == 0) throw DomainError("no cameras to select from");

  for (std::size_t i = 0; i < partition.places.size(); ++i) {
    const Place& place = partition.places[i];
    const auto& sets = error_sets[i];
    if (static_cast<int>(sets.size()) != table.num_cameras)
      throw DomainError("place " + std::to_string(place.place_id) + " has a different camera count");
    PlaceSelection sel;
    sel.place_id = place.place_id;
    sel.start_index = place.start_index;
    sel.end_index = place.end_index;
    sel.center = place.center_pose.translation();
    bool any = false;
    for (int c = 0; c < table.num_cameras; ++c) {
      const auto& set = sets[static_cast<std::size_t>(c)];
      sel.sample_counts.push_back(static_cast<int>(set.samples.size()));
      if (set.samples.empty()) {
        sel.expected_costs.push_back(cf.ceiling());
        continue;
      }
      any = true;
      KdeConfig stream = cfg;
      stream.rng_seed = detail::mix_seed(cfg.rng_seed, {static_cast<std::uint64_t>(place.place_id),
                                                        static_cast<std::uint64_t>(c)});
      sel.expected_costs.push_back(expected_cost(set, cf, stream, mode));
    }
    if (!any) throw NoDataForPlace(place.place_id);
    sel.chosen_camera = argmin_lowest_id(sel.expected_costs);
    table.places.push_back(std::move(sel));
  }
  return table;
}

// Index into table.places of the place whose center is nearest `position`
// (lowest index on ties).
inline std::size_t nearest_place(const SelectionTable& table, const Eigen::Vector3d& position) {
  if (table.places.empty()) throw DomainError("selection table is empty");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < table.places.size(); ++i) {
    const double d = (table.places[i].center - position).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Query-time lookup: coarse position (simulated GPS) -> nearest place -> camera.
inline int lookup_camera(const SelectionTable& table, const Pose& query_pose) {
  return table.places[nearest_place(table, query_pose.translation())].chosen_camera;
}

// ---------------------------------------------------------------------------
// Text format
//
//   camsel-selection-table 1
//   cost <p> <x_max>
//   kde gaussian <bandwidth> <mc_samples> <seed>
//   mode montecarlo|quadrature
//   cameras <n>
//   places <count>
//   place <id> <start> <end> <cx> <cy> <cz> <chosen> <cost_0..cost_n-1> <count_0..count_n-1>

inline void write_selection_table(std::ostream& out, const SelectionTable& table) {
  using detail::format_double;
  out << "camsel-selection-table 1\n";
  out << "cost " << format_double(table.cost.p) << ' ' << format_double(table.cost.x_max) << '\n';
  out << "kde gaussian " << format_double(table.kde.bandwidth) << ' ' << table.kde.mc_samples << ' '
      << table.kde.rng_seed << '\n';
  out << "mode " << (table.mode == ExpectationMode::MonteCarlo ? "montecarlo" : "quadrature") << '\n';
  out << "cameras " << table.num_cameras << '\n';
  out << "places " << table.places.size() << '\n';
  for (const auto& p : table.places) {
    out << "place " << p.place_id << ' ' << p.start_index << ' ' << p.end_index << ' ' << format_double(p.center.x())
        << ' ' << format_double(p.center.y()) << ' ' << format_double(p.center.z()) << ' ' << p.chosen_camera;
    for (const double c : p.expected_costs) out << ' ' << format_double(c);
    for (const int n : p.sample_counts) out << ' ' << n;
    out << '\n';
  }
}

inline SelectionTable read_selection_table(std::istream& in, const std::string& source = "selection table") {
  detail::LineReader reader(in, source);
  SelectionTable table;

  auto tok = reader.expect("header");
  if (tok.size() != 2 || tok[0] != "camsel-selection-table") reader.fail("not a selection table");
  if (tok[1] != "1") reader.fail("unsupported selection table version " + std::string(tok[1]));

  tok = reader.expect("cost");
  reader.expect_keyword(tok, "cost", 3);
  table.cost.p = reader.number(tok[1]);
  table.cost.x_max = reader.number(tok[2]);

  tok = reader.expect("kde");
  reader.expect_keyword(tok, "kde", 5);
  if (tok[1] != "gaussian") reader.fail("unsupported kernel " + std::string(tok[1]));
  table.kde.bandwidth = reader.number(tok[2]);
  table.kde.mc_samples = reader.integer<int>(tok[3]);
  table.kde.rng_seed = reader.integer<std::uint64_t>(tok[4]);

  tok = reader.expect("mode");
  reader.expect_keyword(tok, "mode", 2);
  if (tok[1] == "montecarlo")
    table.mode = ExpectationMode::MonteCarlo;
  else if (tok[1] == "quadrature")
    table.mode = ExpectationMode::Quadrature;
  else
    reader.fail("unknown mode " + std::string(tok[1]));

  tok = reader.expect("cameras");
  reader.expect_keyword(tok, "cameras", 2);
  table.num_cameras = reader.integer<int>(tok[1]);
  if (table.num_cameras <= 0) reader.fail("camera count must be positive");

  tok = reader.expect("places");
  reader.expect_keyword(tok, "places", 2);
  const auto count = reader.integer<std::size_t>(tok[1]);
  const std::size_t nc = static_cast<std::size_t>(table.num_cameras);

  for (std::size_t i = 0; i < count; ++i) {
    tok = reader.expect("place");
    reader.expect_keyword(tok, "place", 8 + 2 * nc);
    PlaceSelection p;
    p.place_id = reader.integer<int>(tok[1]);
    p.start_index = reader.integer<int>(tok[2]);
    p.end_index = reader.integer<int>(tok[3]);
    p.center = {reader.number(tok[4]), reader.number(tok[5]), reader.number(tok[6])};
    p.chosen_camera = reader.integer<int>(tok[7]);
    for (std::size_t c = 0; c < nc; ++c) p.expected_costs.push_back(reader.number(tok[8 + c]));
    for (std::size_t c = 0; c < nc; ++c) p.sample_counts.push_back(reader.integer<int>(tok[8 + nc + c]));
    if (p.chosen_camera != argmin_lowest_id(p.expected_costs))
      reader.fail("place " + std::to_string(p.place_id) + ": chosen camera is not the argmin of its costs");
    table.places.push_back(std::move(p));
  }
  std::vector<std::string_view> extra;
  if (reader.next(extra)) reader.fail("trailing content after the last place");
  try {
    table.cost.validate();
    table.kde.validate();
  } catch (const ConfigError& e) {
    reader.fail(e.what());
  }
  return table;
}

}  // namespace camsel
