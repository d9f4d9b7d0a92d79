#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "mpmab/audit.hpp"
#include "mpmab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"multi-player bandit simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  int workers = 1;
  auto* run = app.add_subcommand("run", "run an experiment and write results");
  run->add_option("--config", config_path, "experiment json")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);

  std::string gaps_config;
  auto* gaps = app.add_subcommand("gaps", "print the suboptimality structure of an instance");
  gaps->add_option("--config", gaps_config, "experiment json")->required();

  std::string trace_path;
  auto* audit = app.add_subcommand("audit", "check a recorded binary trace");
  audit->add_option("--trace", trace_path, "binary trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = mpmab::load_config(config_path);
      auto res = mpmab::run_experiment(cfg, workers, out_dir);
      std::cout << std::setprecision(6);
      for (const auto& algo : cfg.algorithms) {
        double pseudo = 0.0;
        int64_t n = 0;
        for (const auto& r : res.runs)
          if (r.algorithm == algo) {
            pseudo += r.final_pseudo;
            ++n;
          }
        if (n)
          std::cout << algo << ": mean final pseudo-regret "
                    << pseudo / static_cast<double>(n) << " over " << n
                    << " runs\n";
      }
      std::cout << "results written to " << out_dir << "\n";
    } else if (*gaps) {
      auto cfg = mpmab::load_config(gaps_config);
      if (cfg.instance_per_seed) {
        std::cerr << "gap statistics need a fixed instance\n";
        return 2;
      }
      std::vector<mpmab::OutcomeDist> dists;
      for (double p : cfg.instance.mu)
        dists.push_back(mpmab::BernoulliDist{p});
      auto g = mpmab::gap_stats(cfg.instance, *cfg.reward, dists);
      std::cout << mpmab::gap_stats_json(g, cfg.instance.K, cfg.instance.M);
    } else if (*audit) {
      std::ifstream in(trace_path, std::ios::binary);
      if (!in) {
        std::cerr << "cannot open " << trace_path << "\n";
        return 2;
      }
      mpmab::Trace tr = mpmab::read_binary(in);
      auto rep = mpmab::audit_trace(tr);
      std::cout << mpmab::audit_report_json(rep);
      return rep.ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
