// camsel: simulate -> train -> query -> report, composed through files.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "camsel/pipeline.hpp"

namespace fs = std::filesystem;
using namespace camsel;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string selector;
  bool quadrature = false;
  std::string traverse;
  std::string table;
  std::string static_table;
  std::vector<std::string> results;
};

RunConfig load(const Options& o) {
  RunConfig cfg = load_run_config(o.config);
  if (o.seed) cfg.apply_seed(*o.seed);
  return cfg;
}

fs::path out_dir(const Options& o, const RunConfig& cfg) {
  const fs::path dir = o.out.empty() ? fs::path(cfg.output_dir) : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  return in;
}

void finish(std::ofstream& out, const fs::path& p) {
  out.flush();
  if (!out) throw Error("failed writing " + p.string());
}

std::string traverse_file(TraverseRole role) { return std::string(to_string(role)) + ".traverse"; }

Traverse read_traverse_file(const fs::path& p) {
  auto in = open_in(p);
  return read_traverse(in, p.string());
}

SelectionTable read_table_file(const fs::path& p) {
  auto in = open_in(p);
  return read_selection_table(in, p.string());
}

int cmd_simulate(const Options& o) {
  const RunConfig cfg = load(o);
  const fs::path dir = out_dir(o, cfg);
  const World world = build_world(cfg);
  std::cout << "seed " << cfg.seed << "\nworld_seed " << cfg.world.rng_seed << "\nregions " << world.num_regions
            << "\nlandmarks " << world.landmarks.size() << "\n";
  for (const TraverseRole role : {TraverseRole::Map, TraverseRole::Training, TraverseRole::Query}) {
    const Traverse tr = simulate_traverse(world, cfg, role);
    std::size_t obs = 0;
    for (const auto& f : tr.frames)
      for (const auto& c : f.per_camera) obs += c.size();
    const fs::path p = dir / traverse_file(role);
    auto out = open_out(p);
    write_traverse(out, tr);
    finish(out, p);
    std::cout << to_string(role) << " seed " << tr.seed << " frames " << tr.frames.size() << " correspondences " << obs
              << " -> " << p.string() << "\n";
  }
  return 0;
}

int cmd_train(const Options& o) {
  const RunConfig cfg = load(o);
  const fs::path dir = out_dir(o, cfg);
  const fs::path src = o.traverse.empty() ? dir / traverse_file(TraverseRole::Training) : fs::path(o.traverse);
  const Traverse training = read_traverse_file(src);
  const TrainingResult result =
      train(training, cfg, o.quadrature ? ExpectationMode::Quadrature : ExpectationMode::MonteCarlo);

  const fs::path table = o.table.empty() ? dir / "selection_table.txt" : fs::path(o.table);
  const fs::path stat = o.static_table.empty() ? dir / "static_table.txt" : fs::path(o.static_table);
  auto out = open_out(table);
  write_selection_table(out, result.dynamic);
  finish(out, table);
  auto sout = open_out(stat);
  write_selection_table(sout, result.static_table);
  finish(sout, stat);

  std::vector<int> chosen(static_cast<std::size_t>(result.dynamic.num_cameras), 0);
  for (const auto& p : result.dynamic.places) ++chosen[static_cast<std::size_t>(p.chosen_camera)];
  std::cout << "places " << result.dynamic.places.size() << "\n";
  for (std::size_t c = 0; c < chosen.size(); ++c) std::cout << "camera " << c << " chosen for " << chosen[c] << " places\n";
  for (const auto& s : result.static_table.places)
    std::cout << "slice " << s.place_id << " static camera " << s.chosen_camera << "\n";
  std::cout << "selection table -> " << table.string() << "\nstatic table -> " << stat.string() << "\n";
  return 0;
}

int cmd_query(const Options& o) {
  const RunConfig cfg = load(o);
  const fs::path dir = out_dir(o, cfg);
  std::vector<SelectorKind> selectors = cfg.selectors;
  if (!o.selector.empty()) selectors = {parse_selector(o.selector, "--selector")};

  const fs::path src = o.traverse.empty() ? dir / traverse_file(TraverseRole::Query) : fs::path(o.traverse);
  const Traverse query = read_traverse_file(src);

  const auto needs = [&](SelectorKind k) { return std::find(selectors.begin(), selectors.end(), k) != selectors.end(); };
  std::optional<SelectionTable> dynamic;
  std::optional<SelectionTable> stat;
  if (needs(SelectorKind::DynamicCam)) {
    const fs::path p = o.table.empty() ? dir / "selection_table.txt" : fs::path(o.table);
    if (!fs::exists(p)) throw ConfigError("--table", "the dynamic selector needs a selection table; " + p.string() + " not found (run train first)");
    dynamic = read_table_file(p);
  }
  if (needs(SelectorKind::StaticCam)) {
    const fs::path p = o.static_table.empty() ? dir / "static_table.txt" : fs::path(o.static_table);
    if (!fs::exists(p)) throw ConfigError("--static-table", "the static selector needs a static table; " + p.string() + " not found (run train first)");
    stat = read_table_file(p);
  }

  const QueryRun run = run_query(query, cfg, selectors, {dynamic ? &*dynamic : nullptr, stat ? &*stat : nullptr});
  const std::size_t per = query.frames.size();
  for (std::size_t i = 0; i < selectors.size(); ++i) {
    const fs::path p = dir / ("results_" + std::string(to_string(selectors[i])) + ".csv");
    auto out = open_out(p);
    write_frame_records(out, std::span<const FrameRecord>(run.records).subspan(i * per, per));
    finish(out, p);
    std::cout << to_string(selectors[i]) << " localizations " << run.requests.at(selectors[i]) << " over " << per
              << " frames -> " << p.string() << "\n";
  }
  return 0;
}

int cmd_report(const Options& o) {
  RunConfig cfg;
  if (!o.config.empty()) cfg = load(o);
  const fs::path dir = out_dir(o, cfg);
  std::vector<fs::path> files(o.results.begin(), o.results.end());
  if (files.empty()) {
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.rfind("results_", 0) == 0 && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw Error("no results files given and none found in " + dir.string());

  std::vector<FrameRecord> records;
  for (const auto& f : files) {
    auto in = open_in(f);
    auto part = read_frame_records(in, f.string());
    records.insert(records.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  const Summary summary = summarize(records, cfg.bins, cfg.thresholds);
  const std::vector<std::pair<std::string, void (*)(std::ostream&, const Summary&)>> outputs{
      {"slices.csv", write_slices_csv},
      {"summary.csv", write_summary_csv},
      {"reduction.csv", write_reduction_csv},
      {"place_recall.csv", write_place_recall_csv}};
  for (const auto& [name, writer] : outputs) {
    const fs::path p = dir / name;
    auto out = open_out(p);
    writer(out, summary);
    finish(out, p);
  }
  write_summary_csv(std::cout, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Place-specific camera selection for multi-camera localization"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    if (config_required) c->required();
    sub->add_option("--out", o.out, "output directory (default: output_dir from the config)");
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { o.seed = v; },
                                            "override the master seed");
  };

  auto* simulate = app.add_subcommand("simulate", "generate the world and the map/training/query traverses");
  common(simulate, true);

  auto* train = app.add_subcommand("train", "localize the training traverse and build the selection tables");
  common(train, true);
  train->add_flag("--quadrature", o.quadrature, "use trapezoid integration instead of Monte Carlo");
  train->add_option("--traverse", o.traverse, "training traverse (default: <out>/training.traverse)");
  train->add_option("--table", o.table, "selection table output (default: <out>/selection_table.txt)");
  train->add_option("--static-table", o.static_table, "static table output (default: <out>/static_table.txt)");

  auto* query = app.add_subcommand("query", "run selectors over the query traverse");
  common(query, true);
  query->add_option("--selector", o.selector, "one of random, static, num3d, inliers, ratio, rigpnp, dynamic, oracle (default: all configured)");
  query->add_option("--traverse", o.traverse, "query traverse (default: <out>/query.traverse)");
  query->add_option("--table", o.table, "selection table (default: <out>/selection_table.txt)");
  query->add_option("--static-table", o.static_table, "static table (default: <out>/static_table.txt)");

  auto* report = app.add_subcommand("report", "aggregate per-frame results into slice and summary CSVs");
  common(report, false);
  report->add_option("results", o.results, "results CSV files (default: <out>/results_*.csv)")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*simulate) return cmd_simulate(o);
    if (*train) return cmd_train(o);
    if (*query) return cmd_query(o);
    if (*report) return cmd_report(o);
  } catch (const NoDataForPlace& e) {
    std::cerr << "camsel: error: " << e.what() << " (place " << e.place_id() << ")\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "camsel: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "camsel: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
