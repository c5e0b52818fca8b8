// truncbound: certified truncation bounds for Markov chain stationary
// distributions.
//
//   truncbound bounds --config run.json [--normalize-report]
//   truncbound nu     --config run.json [--format csv|mtx]
//   truncbound verify --config run.json [--trials N] [--seed S]
//   truncbound adapt  --config run.json
//
// Exit codes: 0 ok, 2 configuration/input error, 3 numerical error,
// 4 verification failure, 5 adapt budget exhausted.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "truncbound/app.hpp"
#include "truncbound/parallel.hpp"

namespace {

using truncbound::Error;
using truncbound::ErrorCode;
namespace app = truncbound::app;

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("truncbound");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TRUNCBOUND_LOG"))
    spdlog::set_level(spdlog::level::from_str(env));
}

int report_error(ErrorCode code, const std::string& message, int exit_code) {
  std::cerr << app::error_json(code, message).dump() << std::endl;
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App cli{"Certified bounds on stationary distributions under state-space truncation"};
  cli.require_subcommand(1);
  cli.fallthrough();

  std::string config_path;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool normalize = false;
  cli.add_option("--config", config_path, "Run configuration (JSON)")->required();
  cli.add_option("--seed", seed, "Seed for randomized checks");
  cli.add_option("--threads", threads, "Cap on worker threads (0 = all cores)");
  cli.add_flag("--normalize-report", normalize, "Omit wall-clock timings from reports");

  auto* bounds = cli.add_subcommand("bounds", "Reward bounds and total-variation diameter");
  auto* nu = cli.add_subcommand("nu", "Dump the normalized fundamental-matrix rows");
  std::string format = "csv";
  nu->add_option("--format", format, "csv or mtx")->check(CLI::IsMember({"csv", "mtx"}));
  auto* verify = cli.add_subcommand("verify", "Round-trip checks of the mixture representation");
  std::size_t trials = 100;
  bool corrupt = false;
  verify->add_option("--trials", trials, "Number of random draws");
  verify->add_flag("--corrupt-nu", corrupt)->group("");
  auto* adapt = cli.add_subcommand("adapt", "Grow the boundary layer until the diameter <= eps");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error(ErrorCode::ConfigInvalid, e.what(), app::kExitConfig);
  }

  truncbound::set_thread_count(threads);
  spdlog::debug("threads = {}", truncbound::thread_count());

  try {
    const app::RunConfig config = app::load_config(config_path);
    app::CommandOptions options{normalize};

    if (bounds->parsed()) {
      auto result = app::cmd_bounds(config, options);
      std::cout << result.report.dump(2) << std::endl;
      return result.exit_code;
    }
    if (nu->parsed()) {
      const std::string text =
          app::cmd_nu(config, format == "csv" ? app::NuFormat::Csv : app::NuFormat::MatrixMarket);
      if (!config.output_dir) std::cout << text;
      return app::kExitOk;
    }
    if (verify->parsed()) {
      auto result = app::cmd_verify(config, {trials, seed, corrupt});
      for (const auto& w : result.warnings) spdlog::warn("{}", w);
      std::cout << result.report.dump(2) << std::endl;
      if (result.exit_code == app::kExitVerifyFailed) {
        const auto& f = result.report.at("failure");
        return report_error(ErrorCode::VerifyFailed,
                            "verification failed at seed " + f.at("seed").dump() + ", trial " +
                                f.at("trial").dump(),
                            app::kExitVerifyFailed);
      }
      return result.exit_code;
    }
    if (adapt->parsed()) {
      auto result = app::cmd_adapt(config);
      std::cout << result.report.dump(2) << std::endl;
      if (result.exit_code == app::kExitBudgetExhausted)
        spdlog::warn("budget of {} states exhausted before reaching eps = {}", config.budget,
                     config.eps);
      return result.exit_code;
    }
  } catch (const Error& e) {
    return report_error(e.code(), e.what(), app::exit_code_for(e.code()));
  } catch (const std::exception& e) {
    return report_error(ErrorCode::IoError, e.what(), app::kExitConfig);
  }
  return app::kExitConfig;
}
