// wsm: Wannier-Stark / Casimir-Polder / Yukawa driver.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical convergence
// failure, 4 cache corruption, 1 anything else.

#include "wsm/wsm.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace {

enum Exit { Ok = 0, Other = 1, Config = 2, Convergence = 3, Cache = 4 };

} // namespace

int main(int argc, char **argv) {
  CLI::App cli{"Wannier-Stark lattice near a mirror: spectra, Casimir-Polder corrections, "
               "Yukawa signals"};
  cli.require_subcommand(1, 1);
  cli.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir, cache_dir;
  bool no_cache = false;
  int threads = -1;
  cli.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  cli.add_option("--set", overrides, "override, section.key=value (repeatable)");
  cli.add_option("--out", out_dir, "output directory");
  cli.add_option("--cache", cache_dir, "eigenstate cache directory");
  cli.add_flag("--no-cache", no_cache, "disable the eigenstate cache");
  cli.add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"spectrum", "lowest first-band levels and spacings"},
      {"potential", "Casimir-Polder, regularized and total potentials with exponents"},
      {"corrections", "Casimir-Polder energy corrections and well-centre comparison"},
      {"yukawa", "two-isotope Yukawa differential per well"},
      {"exclusion", "alpha_Y exclusion curves per scenario"},
  };
  for (const auto &[name, help] : commands)
    cli.add_subcommand(name, help);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = cli.exit(e);
    return code == 0 ? Ok : Config;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    if (!out_dir.empty())
      overrides.push_back("output.directory=" + out_dir);
    if (!cache_dir.empty())
      overrides.push_back("cache.directory=" + cache_dir);
    if (no_cache)
      overrides.push_back("cache.enabled=false");
    if (threads >= 0)
      overrides.push_back("run.threads=" + std::to_string(threads));

    wsm::app::Context ctx(wsm::io::load_run_config(config_path, overrides));
    const auto t0 = std::chrono::steady_clock::now();
    if (command == "spectrum")
      wsm::app::cmd_spectrum(ctx);
    else if (command == "potential")
      wsm::app::cmd_potential(ctx);
    else if (command == "corrections")
      wsm::app::cmd_corrections(ctx);
    else if (command == "yukawa")
      wsm::app::cmd_yukawa(ctx);
    else
      wsm::app::cmd_exclusion(ctx);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (const auto &n : ctx.notes)
      std::cerr << n << "\n";
    for (const auto &w : ctx.warnings)
      std::cerr << "warning: " << w << "\n";
    for (const auto &f : ctx.written)
      std::cerr << "wrote " << f << "\n";
    std::cerr << "eigensolves: " << wsm::eigensolve_counter().load()
              << "  cache hits: " << (ctx.store ? ctx.store->hits() : 0)
              << "  time: " << secs << " s\n";
    return Ok;
  } catch (const wsm::ValidationError &e) {
    std::cerr << "config error (" << command << "): " << e.what() << "\n";
    return Config;
  } catch (const wsm::ConvergenceError &e) {
    std::cerr << "convergence failure (" << command << "): " << e.what() << "\n";
    return Convergence;
  } catch (const wsm::CacheError &e) {
    std::cerr << "cache error (" << command << "): " << e.what()
              << "; delete the file or run with --no-cache\n";
    return Cache;
  } catch (const std::exception &e) {
    std::cerr << "error (" << command << "): " << e.what() << "\n";
    return Other;
  }
}
