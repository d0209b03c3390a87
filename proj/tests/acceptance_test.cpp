// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <streambuf>
#include <string>
#include <vector>

#include "camsel/pipeline.hpp"
#include "test_support.hpp"

using namespace camsel;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void report(int id, const std::string& name, const Outcome& o, double seconds, double limit) {
  const bool ok = o.pass && seconds < limit;
  if (!ok) ++failures;
  std::ostringstream line;
  line << (ok ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail;
  line.precision(3);
  line << std::fixed << " [" << seconds << " s, limit " << limit << " s]";
  if (o.pass && seconds >= limit) line << " time limit exceeded";
  std::cerr << line.str() << std::endl;
  lines[id] = line.str();
}

void timed(int id, const std::string& name, double limit, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, o, seconds_since(t0), limit);
}

// FNV-1a over everything written to it.
class HashBuf : public std::streambuf {
 public:
  std::uint64_t value() const { return h_; }

 protected:
  int_type overflow(int_type c) override {
    if (c != traits_type::eof()) mix(static_cast<unsigned char>(c));
    return traits_type::not_eof(c);
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    for (std::streamsize i = 0; i < n; ++i) mix(static_cast<unsigned char>(s[i]));
    return n;
  }

 private:
  void mix(unsigned char c) {
    h_ ^= c;
    h_ *= 0x100000001b3ULL;
  }
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

template <class Writer>
std::uint64_t hash_of(Writer&& write) {
  HashBuf buf;
  std::ostream out(&buf);
  write(out);
  out.flush();
  return buf.value();
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

// ---------------------------------------------------------------------------
// Independent oracles

double trapezoid(const std::function<double(double)>& f, double a, double b, int steps) {
  const double dx = (b - a) / steps;
  double acc = 0.5 * (f(a) + f(b));
  for (int i = 1; i < steps; ++i) acc += f(a + i * dx);
  return acc * dx;
}

double gaussian_kde(const std::vector<double>& xs, double h, double x) {
  double s = 0.0;
  for (const double xi : xs) s += std::exp(-0.5 * ((x - xi) / h) * ((x - xi) / h));
  return s / (xs.size() * h * std::sqrt(2.0 * M_PI));
}

std::vector<double> random_samples(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(5, 200);
  std::uniform_real_distribution<double> value(0.0, 3.0);
  std::vector<double> xs(static_cast<std::size_t>(count(rng)));
  for (auto& x : xs) x = value(rng);
  return xs;
}

// ---------------------------------------------------------------------------
// Criteria 1-6

Outcome cost_exactness() {
  const CostFunction cf{2.0, 2.0};
  const double a = cost(cf, 1.5);
  const double b = cost(cf, 3.7);
  return {a == 2.25 && b == 4.0, "cost(1.5)=" + std::to_string(a) + " cost(3.7)=" + std::to_string(b)};
}

Outcome kde_normalization() {
  std::mt19937_64 rng(202);
  const KdeConfig kde;
  double lo = 2.0;
  double hi = 0.0;
  for (int set = 0; set < 100; ++set) {
    const PoseErrorSampleSet s{0, set, random_samples(rng)};
    const double h = kde.bandwidth;
    const double a = *std::min_element(s.samples.begin(), s.samples.end()) - 6.0 * h;
    const double b = *std::max_element(s.samples.begin(), s.samples.end()) + 6.0 * h;
    const int steps = static_cast<int>(std::ceil((b - a) / (h / 10.0)));
    const double mass = trapezoid([&](double x) { return kde_density(s, kde, x); }, a, b, steps);
    lo = std::min(lo, mass);
    hi = std::max(hi, mass);
  }
  return {lo >= 0.999 && hi <= 1.001, "integral range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
}

Outcome monte_carlo_vs_quadrature() {
  std::mt19937_64 rng(303);
  const CostFunction cf{2.0, 2.0};
  int agree = 0;
  double worst = 0.0;
  for (int set = 0; set < 50; ++set) {
    const PoseErrorSampleSet s{0, set, random_samples(rng)};
    KdeConfig kde;
    kde.mc_samples = 10000;
    kde.rng_seed = static_cast<std::uint64_t>(set) * 7919 + 1;
    const double mc = expected_cost(s, cf, kde);
    // Draws below zero are clamped to zero where the cost vanishes, so the
    // expectation is the integral of c(x) f(x) over x >= 0.
    const double h = kde.bandwidth;
    const double upper = *std::max_element(s.samples.begin(), s.samples.end()) + 10.0 * h;
    const auto c = [&](double x) { return std::pow(std::min(x, cf.x_max), cf.p); };
    const int steps = static_cast<int>(std::ceil(upper / (h / 50.0)));
    const double oracle = trapezoid([&](double x) { return c(x) * gaussian_kde(s.samples, h, x); }, 0.0, upper, steps);
    const double tol = std::max(0.02 * std::abs(oracle), 0.005);
    worst = std::max(worst, std::abs(mc - oracle) / tol);
    agree += std::abs(mc - oracle) <= tol ? 1 : 0;
  }
  return {agree == 50, std::to_string(agree) + "/50 within tolerance, worst |diff|/tol " + fmt(worst)};
}

Outcome noiseless_pnp() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> count(20, 80);
  double worst_t = 0.0;
  double worst_r = 0.0;
  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const CameraModel cam = camsel::testing::test_camera();
    const Pose truth = camsel::testing::random_pose(rng);
    const auto corrs = camsel::testing::synthesize(cam, truth, count(rng), rng);
    RansacConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    const auto r = localize_pnp_ransac(corrs, cam, cfg);
    if (!r.ok()) {
      worst_t = std::numeric_limits<double>::infinity();
      continue;
    }
    const PoseError e = pose_error(*r.pose, truth);
    worst_t = std::max(worst_t, e.translation_err);
    worst_r = std::max(worst_r, e.rotation_err);
    ok += e.translation_err < 1e-6 && e.rotation_err < 1e-6 ? 1 : 0;
  }
  std::ostringstream d;
  d << ok << "/100 recovered, worst t " << worst_t << " m, worst r " << worst_r << " deg";
  return {ok == 100, d.str()};
}

Outcome ransac_robustness() {
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(5000 + trial);
    const CameraModel cam = camsel::testing::test_camera();
    const Pose truth = camsel::testing::random_pose(rng);
    auto corrs = camsel::testing::synthesize(cam, truth, 100, rng);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::uniform_real_distribution<double> px(0.0, cam.width());
    std::uniform_real_distribution<double> py(0.0, cam.height());
    for (std::size_t i = 0; i < corrs.size(); ++i) {
      if (i < 40)
        corrs[i].pixel = {px(rng), py(rng)};
      else
        corrs[i].pixel += Eigen::Vector2d(noise(rng), noise(rng));
    }
    std::shuffle(corrs.begin(), corrs.end(), rng);
    RansacConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(trial) + 1;
    const auto r = localize_pnp_ransac(corrs, cam, cfg);
    if (r.ok() && pose_error(*r.pose, truth).translation_err < 0.05) ++good;
  }
  return {good >= 95, std::to_string(good) + "/100 trials within 0.05 m"};
}

Outcome place_partition() {
  const PlacePartition p = partition_places(100, 40, 10);
  std::vector<int> starts;
  for (const auto& place : p.places) starts.push_back(place.start_index);
  bool ok = starts == std::vector<int>{0, 10, 20, 30, 40, 50, 60};
  std::vector<int> cover(100, 0);
  for (const auto& place : p.places)
    for (int i = place.start_index; i < place.end_index; ++i) ++cover[static_cast<std::size_t>(i)];
  // Interior: indices reachable by a full complement of overlapping windows.
  for (int i = 30; i < 70; ++i) ok = ok && cover[static_cast<std::size_t>(i)] == 4;
  return {ok, std::to_string(p.places.size()) + " places, interior coverage " +
                  std::to_string(*std::min_element(cover.begin() + 30, cover.begin() + 70)) + ".." +
                  std::to_string(*std::max_element(cover.begin() + 30, cover.begin() + 70))};
}

// ---------------------------------------------------------------------------
// Scenario criteria 7-11

struct ScenarioRun {
  std::map<std::string, std::uint64_t> artifacts;
  Summary summary;
  std::map<SelectorKind, long long> requests;
  std::vector<FrameRecord> records;
  long long frames = 0;
  int num_cameras = 0;
  double seconds = 0.0;
};

Summary summarize_run(const QueryRun& q, const RunConfig& cfg) { return summarize(q.records, cfg.bins, cfg.thresholds); }

// simulate -> train -> query -> report, hashing every artifact the CLI writes.
ScenarioRun full_pipeline(const RunConfig& cfg, TrainingResult* keep_training = nullptr) {
  const auto t0 = Clock::now();
  ScenarioRun run;
  const World world = build_world(cfg);
  {
    const Traverse map = simulate_traverse(world, cfg, TraverseRole::Map);
    run.artifacts["map.traverse"] = hash_of([&](std::ostream& o) { write_traverse(o, map); });
  }
  TrainingResult trained;
  {
    const Traverse training = simulate_traverse(world, cfg, TraverseRole::Training);
    run.artifacts["training.traverse"] = hash_of([&](std::ostream& o) { write_traverse(o, training); });
    trained = train(training, cfg);
  }
  run.artifacts["selection_table.txt"] = hash_of([&](std::ostream& o) { write_selection_table(o, trained.dynamic); });
  run.artifacts["static_table.txt"] = hash_of([&](std::ostream& o) { write_selection_table(o, trained.static_table); });

  const Traverse query = simulate_traverse(world, cfg, TraverseRole::Query);
  run.artifacts["query.traverse"] = hash_of([&](std::ostream& o) { write_traverse(o, query); });
  QueryRun q = run_query(query, cfg, cfg.selectors, {&trained.dynamic, &trained.static_table});
  const std::size_t n = query.frames.size();
  for (std::size_t i = 0; i < cfg.selectors.size(); ++i) {
    const auto part = std::span<const FrameRecord>(q.records).subspan(i * n, n);
    run.artifacts["results_" + std::string(to_string(cfg.selectors[i])) + ".csv"] =
        hash_of([&](std::ostream& o) { write_frame_records(o, part); });
  }
  run.summary = summarize_run(q, cfg);
  run.artifacts["slices.csv"] = hash_of([&](std::ostream& o) { write_slices_csv(o, run.summary); });
  run.artifacts["summary.csv"] = hash_of([&](std::ostream& o) { write_summary_csv(o, run.summary); });
  run.artifacts["reduction.csv"] = hash_of([&](std::ostream& o) { write_reduction_csv(o, run.summary); });
  run.artifacts["place_recall.csv"] = hash_of([&](std::ostream& o) { write_place_recall_csv(o, run.summary); });
  run.requests = q.requests;
  run.records = std::move(q.records);
  run.frames = static_cast<long long>(n);
  run.num_cameras = static_cast<int>(query.rig.size());
  run.seconds = seconds_since(t0);
  if (keep_training) *keep_training = std::move(trained);
  return run;
}

const SummaryRow& row(const Summary& s, SelectorKind k, const std::string& log) {
  const SummaryRow* r = s.row(to_string(k), log);
  if (!r) throw Error(std::string("no summary row for ") + to_string(k));
  return *r;
}

Outcome worst_case_coverage(const ScenarioRun& run, const RunConfig& cfg) {
  const SummaryRow& stat = row(run.summary, SelectorKind::StaticCam, cfg.log);
  const SummaryRow& dyn = row(run.summary, SelectorKind::DynamicCam, cfg.log);
  const bool ok = stat.slices == 10 && stat.failed_slices[0] >= 2 && dyn.failed_slices[0] <= 1 &&
                  dyn.recall_pct[0] >= stat.recall_pct[0];
  return {ok, std::to_string(stat.slices) + " slices; static fails " + std::to_string(stat.failed_slices[0]) +
                  ", dynamic fails " + std::to_string(dyn.failed_slices[0]) + "; recall@0.25m dynamic " +
                  fmt(dyn.recall_pct[0]) + " vs static " + fmt(stat.recall_pct[0]) + "; " +
                  std::to_string(run.frames) + " query frames x " + std::to_string(run.num_cameras) + " cameras"};
}

Outcome oracle_dominance(const std::vector<const Summary*>& summaries, const std::string& log) {
  bool ok = true;
  std::string violations;
  for (const Summary* s : summaries) {
    const SummaryRow& oracle = row(*s, SelectorKind::OracleCam, log);
    for (const auto& r : s->rows)
      for (std::size_t b = 0; b < s->bins.size(); ++b)
        if (r.recall_pct[b] > oracle.recall_pct[b]) {
          ok = false;
          violations += " " + r.selector + "@bin" + std::to_string(b);
        }
  }
  return {ok, ok ? "oracle >= every selector at every bin in " + std::to_string(summaries.size()) + " runs"
                 : "exceeds oracle:" + violations};
}

Outcome call_counts(const std::map<SelectorKind, long long>& requests, const std::vector<FrameRecord>& records,
                    long long frames, int nc) {
  bool ok = requests.at(SelectorKind::DynamicCam) == frames;
  for (const SelectorKind k : {SelectorKind::Num3DPoints, SelectorKind::InlierCount, SelectorKind::InlierRatio})
    ok = ok && requests.at(k) == nc * frames;
  for (const auto& r : records) {
    if (r.selector == "dynamic") ok = ok && r.localizations == 1;
    if (r.selector == "num3d" || r.selector == "inliers" || r.selector == "ratio") ok = ok && r.localizations == nc;
  }
  return {ok, "dynamic " + std::to_string(requests.at(SelectorKind::DynamicCam)) + " localizations, inliers " +
                  std::to_string(requests.at(SelectorKind::InlierCount)) + " over " + std::to_string(frames) +
                  " frames with " + std::to_string(nc) + " cameras"};
}

}  // namespace

int main() {
  timed(1, "cost function exactness", 1.0, cost_exactness);
  timed(2, "KDE normalization", 5.0, kde_normalization);
  timed(3, "Monte Carlo vs quadrature", 10.0, monte_carlo_vs_quadrature);
  timed(4, "noiseless PnP recovery", 5.0, noiseless_pnp);
  timed(5, "RANSAC robustness", 30.0, ransac_robustness);
  timed(6, "place partition", 1.0, place_partition);

  const RunConfig cfg = load_run_config(std::string(CAMSEL_SOURCE_DIR) + "/configs/worst_case.json");
  TrainingResult trained;
  ScenarioRun base;
  timed(7, "worst-case coverage", 300.0, [&] {
    base = full_pipeline(cfg, &trained);
    return worst_case_coverage(base, cfg);
  });

  Summary shifted;
  bool shifted_ok = false;
  timed(10, "condition-shift trend", 600.0, [&] {
    RunConfig shifted_cfg = cfg;
    shifted_cfg.condition_shift[static_cast<std::size_t>(TraverseRole::Query)] = 1.0;
    const World world = build_world(shifted_cfg);
    const Traverse query = simulate_traverse(world, shifted_cfg, TraverseRole::Query);
    const QueryRun q = run_query(query, shifted_cfg, shifted_cfg.selectors, {&trained.dynamic, &trained.static_table});
    shifted = summarize_run(q, shifted_cfg);
    shifted_ok = true;
    const auto gap = [&](const Summary& s, SelectorKind k) {
      return row(s, k, cfg.log).recall_pct[0] - row(s, SelectorKind::StaticCam, cfg.log).recall_pct[0];
    };
    const double before = gap(base.summary, SelectorKind::DynamicCam);
    const double after = gap(shifted, SelectorKind::DynamicCam);
    bool ok = after < before;
    std::string detail = "dynamic-static gap " + fmt(before) + " -> " + fmt(after) + "; statistic gaps at shift 1:";
    for (const SelectorKind k : {SelectorKind::Num3DPoints, SelectorKind::InlierCount, SelectorKind::InlierRatio}) {
      const double g = gap(shifted, k);
      ok = ok && g >= 0.0;
      detail += std::string(" ") + to_string(k) + " " + fmt(g);
    }
    return Outcome{ok, detail};
  });

  timed(8, "oracle dominance", 1.0, [&] {
    std::vector<const Summary*> runs{&base.summary};
    if (shifted_ok) runs.push_back(&shifted);
    return oracle_dominance(runs, cfg.log);
  });

  timed(9, "efficiency invariant", 60.0, [&] {
    const RunConfig small = load_run_config(std::string(CAMSEL_SOURCE_DIR) + "/configs/minimal.json");
    const ScenarioRun r = full_pipeline(small);
    const Outcome a = call_counts(r.requests, r.records, r.frames, r.num_cameras);
    const Outcome b = call_counts(base.requests, base.records, base.frames, base.num_cameras);
    return Outcome{a.pass && b.pass, "minimal: " + a.detail + "; worst case: " + b.detail};
  });

  base.records.clear();
  base.records.shrink_to_fit();
  timed(11, "determinism", 300.0, [&] {
    const ScenarioRun again = full_pipeline(cfg);
    std::vector<std::string> differing;
    for (const auto& [name, h] : base.artifacts) {
      const auto it = again.artifacts.find(name);
      if (it == again.artifacts.end() || it->second != h) differing.push_back(name);
    }
    const bool ok = differing.empty() && again.artifacts.size() == base.artifacts.size();
    std::string detail = std::to_string(base.artifacts.size()) + " artifacts compared";
    for (const auto& d : differing) detail += ", differs: " + d;
    return Outcome{ok, detail};
  });

  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
