// Command-line front end: train runs, offline trace energy analysis, and
// cross-run sample-efficiency comparison.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ebrl/energy.hpp"
#include "ebrl/envs.hpp"
#include "ebrl/harness.hpp"

namespace {

struct RunData {
  std::string dir;
  std::string strategy;
  std::string env;
  std::uint64_t budget = 0;  // total training samples per seed
  // seed -> cumulative samples at first crossing of the threshold
  std::vector<std::pair<std::uint64_t, std::optional<std::uint64_t>>> seeds;
};

RunData load_run(const std::string& dir, double threshold) {
  std::ifstream meta(dir + "/run.json");
  if (!meta) throw ebrl::IoError("missing run.json in " + dir);
  nlohmann::json j;
  meta >> j;

  RunData run;
  run.dir = dir;
  run.strategy = j.at("strategy").get<std::string>();
  run.env = j.at("env").get<std::string>();

  const auto env = ebrl::make_env(run.env);
  run.budget = static_cast<std::uint64_t>(j.at("epochs").get<int>()) *
               j.at("episodes_per_epoch").get<std::uint64_t>() *
               static_cast<std::uint64_t>(env->spec().horizon);

  for (const auto& s : j.at("seeds")) {
    const std::uint64_t seed = s.get<std::uint64_t>();
    std::ifstream csv(dir + "/seed_" + std::to_string(seed) + ".csv");
    if (!csv)
      throw ebrl::IoError("missing seed csv for seed " + std::to_string(seed));
    std::string line;
    std::getline(csv, line);  // header
    std::optional<std::uint64_t> crossing;
    while (std::getline(csv, line)) {
      // epoch,success_rate,cumulative_samples,...
      const std::size_t c1 = line.find(',');
      const std::size_t c2 = line.find(',', c1 + 1);
      const std::size_t c3 = line.find(',', c2 + 1);
      const double success = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const std::uint64_t samples =
          std::stoull(line.substr(c2 + 1, c3 - c2 - 1));
      if (!crossing && success >= threshold) crossing = samples;
    }
    run.seeds.emplace_back(seed, crossing);
  }
  return run;
}

int cmd_train(const std::string& config_path, const std::string& env_name,
              const std::string& strategy, const std::string& seeds,
              int epochs, const std::string& out_dir) {
  ebrl::RunConfig config;
  if (!config_path.empty()) config = ebrl::parse_config_file(config_path);
  if (!env_name.empty()) ebrl::apply_config_entry(config, "env", env_name);
  if (!strategy.empty())
    ebrl::apply_config_entry(config, "strategy", strategy);
  if (!seeds.empty()) ebrl::apply_config_entry(config, "seeds", seeds);
  if (epochs > 0)
    ebrl::apply_config_entry(config, "epochs", std::to_string(epochs));
  config.validate();

  std::cout << "training " << ebrl::to_string(config.strategy) << " on "
            << config.env << " (" << config.seeds.size() << " seeds, "
            << config.epochs << " epochs)\n";
  const std::vector<ebrl::SeedResult> results = ebrl::train(config, out_dir);
  ebrl::write_reports(config, results, out_dir);

  for (const ebrl::SeedResult& sr : results) {
    std::cout << "seed " << sr.seed << ": best success "
              << sr.best_success << " at epoch " << sr.best_epoch << '\n';
  }
  std::cout << "reports written to " << out_dir << '\n';
  return 0;
}

int cmd_replay_analyze(const std::string& trace_path, double cap, double dt) {
  const std::vector<ebrl::ObjectState> states =
      ebrl::read_trace_object_states(trace_path);
  ebrl::EnergyParams params;
  params.dt = dt;
  params.transition_cap = cap;

  const std::vector<double> totals = ebrl::state_totals(states, params);
  std::vector<double> transitions;
  for (std::size_t t = 1; t < totals.size(); ++t)
    transitions.push_back(
        ebrl::transition_energy(totals[t - 1], totals[t], cap));

  nlohmann::json out{
      {"trace", trace_path},
      {"states", states.size()},
      {"e_tran_max", cap},
      {"trajectory_energy", ebrl::trajectory_energy(states, params)},
      {"transition_energies", transitions}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_compare(const std::vector<std::string>& run_dirs, double threshold,
                const std::string& out_path) {
  std::vector<RunData> runs;
  for (const std::string& dir : run_dirs) runs.push_back(load_run(dir, threshold));

  const auto ebp = std::find_if(runs.begin(), runs.end(), [](const RunData& r) {
    return r.strategy == "ebp-her";
  });
  if (ebp == runs.end())
    throw ebrl::ConfigError("compare needs one ebp-her run");

  std::ostringstream csv;
  csv << "baseline,seed,baseline_samples,ebp_samples,ratio,censored\n";
  for (const RunData& run : runs) {
    if (&run == &*ebp) continue;
    std::vector<double> ratios;
    for (const auto& [seed, crossing] : run.seeds) {
      const auto it =
          std::find_if(ebp->seeds.begin(), ebp->seeds.end(),
                       [seed](const auto& p) { return p.first == seed; });
      if (it == ebp->seeds.end() || !it->second) continue;
      // A baseline that never crossed is censored at its budget.
      const bool censored = !crossing.has_value();
      const std::uint64_t base = crossing.value_or(run.budget);
      const double ratio = ebrl::efficiency_ratio(
          static_cast<double>(base), static_cast<double>(*it->second));
      ratios.push_back(ratio);
      csv << run.strategy << ',' << seed << ',' << base << ',' << *it->second
          << ',' << ebrl::format_ratio(ratio) << ',' << (censored ? 1 : 0)
          << '\n';
    }
    if (!ratios.empty()) {
      std::sort(ratios.begin(), ratios.end());
      const double median = ratios.size() % 2 == 1
                                ? ratios[ratios.size() / 2]
                                : 0.5 * (ratios[ratios.size() / 2 - 1] +
                                         ratios[ratios.size() / 2]);
      std::cout << run.strategy << " vs ebp-her @" << threshold
                << ": median sample-efficiency ratio "
                << ebrl::format_ratio(median) << " over " << ratios.size()
                << " seeds\n";
    } else {
      std::cout << run.strategy
                << ": no comparable seeds reached the threshold\n";
    }
  }

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw ebrl::IoError("cannot write " + out_path);
    out << csv.str();
    std::cout << "ratios written to " << out_path << '\n';
  } else {
    std::cout << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"energy-prioritized hindsight replay benchmark"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "run training and write reports");
  std::string config_path, env_name, strategy, seeds, out_dir;
  int epochs = 0;
  train->add_option("--config", config_path, "flat key=value config file");
  train->add_option("--env", env_name, "environment name");
  train->add_option("--strategy", strategy,
                    "uniform-her | per-her | ebp-her");
  train->add_option("--seeds", seeds, "comma-separated seed list");
  train->add_option("--epochs", epochs, "override epoch count");
  train->add_option("--out", out_dir, "output directory")->required();

  // replay-analyze
  auto* analyze = app.add_subcommand(
      "replay-analyze", "trajectory energy of an exported episode trace");
  std::string trace_path;
  double cap = 0.5, dt = 0.04;
  analyze->add_option("--trace", trace_path, "episode trace (jsonl)")
      ->required();
  analyze->add_option("--e-tran-max", cap, "transition energy cap");
  analyze->add_option("--dt", dt, "timestep seconds");

  // compare
  auto* compare = app.add_subcommand(
      "compare", "sample-efficiency ratios between finished runs");
  std::vector<std::string> run_dirs;
  double threshold = 0.8;
  std::string ratios_out;
  compare->add_option("--runs", run_dirs, "run output directories")
      ->required()
      ->expected(-2);
  compare->add_option("--threshold", threshold, "success threshold");
  compare->add_option("--out", ratios_out, "ratios csv path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train)
      return cmd_train(config_path, env_name, strategy, seeds, epochs, out_dir);
    if (*analyze) return cmd_replay_analyze(trace_path, cap, dt);
    if (*compare) return cmd_compare(run_dirs, threshold, ratios_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
