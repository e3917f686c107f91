#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "qvol/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Experiment runner for brickwork-circuit simulations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string plot_series;
  std::uint64_t seed = 0;
  int workers = 1;

  for (const auto& kind : qvol::experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(kind, "Run a " + kind + " experiment");
    sub->add_option("--config", config_path,
                    "Path to a key = value config file")
        ->required();
    sub->add_option("--seed", seed, "Master seed override");
    sub->add_option("--workers", workers, "Worker thread count override")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_path,
                    "Append the result record to this file instead of stdout");
    sub->add_option("--emit-plot", plot_series,
                    "Print the named plot series as a tab-separated table");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    qvol::ExperimentConfig cfg = qvol::ExperimentConfig::load(config_path);
    if (cfg.kind.empty()) {
      cfg.kind = sub->get_name();
    } else if (cfg.kind != sub->get_name()) {
      std::cerr << "error: config kind '" << cfg.kind
                << "' does not match subcommand '" << sub->get_name()
                << "'\n";
      return 1;
    }
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--workers")) cfg.workers = workers;

    const qvol::ResultRecord record = qvol::run(cfg);

    const std::string line = record.to_line() + "\n";
    if (!out_path.empty()) {
      std::ofstream out(out_path, std::ios::app);
      if (!out) {
        std::cerr << "error: cannot open '" << out_path << "' for writing\n";
        return 1;
      }
      out << line;
    } else {
      std::cout << line;
    }
    if (!plot_series.empty())
      std::cout << qvol::emit_plot_data(record, plot_series);

    return record.pass ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
