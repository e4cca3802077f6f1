#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cvqkd/cli.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void emit(const std::string& out, const std::vector<cvqkd::ResultRow>& rows) {
  if (!out.empty()) {
    cvqkd::write_csv(out, rows);
  } else {
    std::cout << cvqkd::csv_header() << '\n';
    for (const auto& r : rows) std::cout << cvqkd::csv_line(r) << '\n';
  }
  for (const auto& r : rows)
    if (!r.message.empty()) std::cerr << status_name(r.status) << ": " << r.message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified key-rate lower bounds for discrete-modulated CV-QKD"};
  app.require_subcommand(1);
  std::string config_path, out_path, echo_path;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_path, "CSV output path (default: stdout)");
  app.add_option("--jobs", jobs, "parallel solves for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--echo-config", echo_path, "write the parsed configuration as JSON");
  app.fallthrough();

  auto* run = app.add_subcommand("run", "execute the mode the configuration selects");
  auto* sweep = app.add_subcommand("sweep", "evaluate the configured sweep grid");
  auto* optimize = app.add_subcommand("optimize", "golden-section search over the configured variable");
  auto* ingest = app.add_subcommand("ingest-samples", "solve with moments estimated from heterodyne samples");
  std::vector<std::string> sample_files;
  ingest->add_option("samples", sample_files, "one CSV per signal, or one path containing {i}")->required();
  for (auto* s : {run, sweep, optimize, ingest}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const cvqkd::RunConfig config = cvqkd::load_run_config(config_path);
    if (!echo_path.empty()) {
      std::ofstream echo(echo_path);
      echo << cvqkd::echo_run_config(config);
      if (!echo) throw cvqkd::IoError("cannot write '" + echo_path + "'");
    }
    const auto adapter = cvqkd::default_conic_adapter();
    const cvqkd::RunMode mode = config.mode();
    if (*sweep && mode != cvqkd::RunMode::sweep) throw cvqkd::ConfigError("'sweep' needs a 'sweep' section");
    if (*optimize && mode != cvqkd::RunMode::optimize)
      throw cvqkd::ConfigError("'optimize' needs an 'optimize' section");
    if (*ingest) {
      if (mode != cvqkd::RunMode::single) throw cvqkd::ConfigError("'ingest-samples' takes a single-point config");
      const cvqkd::Moments m = cvqkd::moments_from_sample_files(config, sample_files);
      emit(out_path, {cvqkd::evaluate_point(config, *adapter, m)});
      return 0;
    }
    switch (mode) {
      case cvqkd::RunMode::single: emit(out_path, {cvqkd::evaluate_point(config, *adapter)}); break;
      case cvqkd::RunMode::sweep: emit(out_path, cvqkd::run_sweep(config, *adapter, jobs)); break;
      case cvqkd::RunMode::optimize: {
        const auto res = cvqkd::run_optimize(config, *adapter);
        emit(out_path, res.rows);
        std::cerr << "optimum " << variable_name(config.optimize->variable) << " = " << res.optimum.x
                  << ", key_rate = " << res.optimum.value << '\n';
        if (res.optimum.non_unimodal) std::cerr << "warning: key rate is not unimodal over the probes\n";
        break;
      }
    }
  } catch (const cvqkd::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const cvqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cvqkd::SpecError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
