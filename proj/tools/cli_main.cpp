#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "csv.hpp"
#include "study.hpp"

namespace tools = lookback::tools;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string output_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::vector<std::string> sets;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* output_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  args.output_opt =
      cmd->add_option("--output", args.output_path, "write CSV here");
  args.seed_opt =
      cmd->add_option("--seed", args.seed, "Monte Carlo seed override");
  args.threads_opt =
      cmd->add_option("--threads", args.threads, "worker thread override");
  cmd->add_option("--set", args.sets,
                  "section.key=value override (repeatable)");
}

// priority: file, then environment, then --set, then dedicated flags
tools::Config load(const CommonArgs& args) {
  tools::Config cfg = tools::Config::from_file(args.config_path);
  cfg.apply_env();
  for (const std::string& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("--set expects section.key=value, got '" + kv +
                               "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.output_opt->count()) cfg.set("output.path", args.output_path);
  if (args.seed_opt->count())
    cfg.set("mc.seed", std::to_string(args.seed));
  if (args.threads_opt->count())
    cfg.set("engine.threads", std::to_string(args.threads));
  return cfg;
}

void emit(const tools::Config& cfg,
          const std::vector<std::vector<std::string>>& rows) {
  const std::string path = cfg.get_string("output.path", "");
  if (path.empty()) {
    tools::write_csv(std::cout, rows);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  tools::write_csv(out, rows);
  std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lookback option pricing under Markov and regime-switching "
               "models"};
  app.require_subcommand(1);

  CommonArgs price_args, conv_args, fd_args, mc_args;
  CLI::App* cmd_price =
      app.add_subcommand("price", "price one contract");
  add_common(cmd_price, price_args);
  CLI::App* cmd_conv =
      app.add_subcommand("converge", "nested-grid convergence study");
  add_common(cmd_conv, conv_args);
  CLI::App* cmd_fd = app.add_subcommand(
      "compare-fd", "engine versus lattice sweep at matched budgets");
  add_common(cmd_fd, fd_args);
  CLI::App* cmd_mc =
      app.add_subcommand("mc-check", "engine versus Monte Carlo");
  add_common(cmd_mc, mc_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_price->parsed()) {
      const tools::Config cfg = load(price_args);
      const auto model = tools::build_model(cfg);
      const auto contract = tools::build_contract(cfg);
      const auto pc = tools::build_pricing(cfg);
      const bool fast = cfg.get_bool("engine.fast_path", false);
      const lookback::PriceResult r =
          fast ? lookback::price_levy_fastpath(contract, model, pc)
               : lookback::price(contract, model, pc);
      emit(cfg, tools::price_csv(r, cfg.get_bool("output.include_runtime",
                                                 false)));
      std::cerr << "price " << tools::csv_double(r.price) << " ("
                << r.grid_points << " states, " << r.expm_calls
                << " exponentials)\n";
    } else if (cmd_conv->parsed()) {
      const tools::Config cfg = load(conv_args);
      const tools::StudyResult r = tools::run_convergence(cfg);
      emit(cfg, tools::convergence_csv(
                    r, cfg.get_bool("output.include_runtime", false)));
      std::cerr << "order " << tools::csv_double(r.order) << " against "
                << tools::csv_double(r.benchmark) << "\n";
    } else if (cmd_fd->parsed()) {
      const tools::Config cfg = load(fd_args);
      const tools::CompareResult r = tools::run_compare_fd(cfg);
      emit(cfg, tools::compare_fd_csv(r));
      std::cerr << "benchmark " << tools::csv_double(r.benchmark) << "\n";
    } else if (cmd_mc->parsed()) {
      const tools::Config cfg = load(mc_args);
      const tools::McCheckResult r = tools::run_mc_check(cfg);
      emit(cfg, tools::mc_check_csv(r));
      std::cerr << (r.pass ? "PASS" : "FAIL") << " |engine - mc| = "
                << tools::csv_double(r.abs_diff) << " vs tolerance "
                << tools::csv_double(r.tolerance) << "\n";
      if (!r.pass) return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
