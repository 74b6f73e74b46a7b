// fmcf: batch driver for the capillary fractional curvature flow.

#include "fmcf/flow.hpp"
#include "fmcf/io.hpp"
#include "fmcf/validation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kConfigExit = 2;
constexpr int kIoExit = 6;

std::string suite_list() {
  std::string out;
  for (const std::string& s : fmcf::suite_names()) out += (out.empty() ? "" : ", ") + s;
  return out;
}

int cmd_run(const std::string& path) {
  fmcf::RunManifest manifest;
  fmcf::GridPtr grid;
  std::optional<fmcf::RadialField> rho0;
  try {
    manifest = fmcf::parse_config(path);
    grid = fmcf::build_grid(manifest.config.n, manifest.config.resolution,
                            manifest.config.topology);
    rho0.emplace(fmcf::make_initial_field(manifest, grid));
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoExit;
  } catch (const fmcf::SnapshotError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoExit;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  }

  const std::string snap_path = manifest.output + ".snap";
  const std::string csv_path = manifest.output + ".csv";
  std::ofstream snap(snap_path, std::ios::binary);
  std::ofstream csv(csv_path, std::ios::binary);
  if (!snap || !csv) {
    std::cerr << "error: cannot write " << (snap ? csv_path : snap_path) << '\n';
    return kIoExit;
  }
  fmcf::write_snapshot_header(snap, manifest);
  fmcf::write_diagnostics_header(csv, manifest);

  fmcf::FlowSolver solver(grid, manifest.config);
  long step = 0;
  auto observer = [&](const fmcf::FlowState& state, const fmcf::StepDiagnostics& d) {
    ++step;
    if (d.halvings > 0) {
      std::cerr << "step " << step << ": dt halved " << d.halvings << " time(s) to " << d.dt_used
                << '\n';
    }
    fmcf::write_diagnostics_row(csv, d);
    if (step % manifest.save_every == 0) snap << fmcf::write_record(fmcf::to_record(state)) << '\n';
  };
  fmcf::Trajectory tr;
  try {
    // the initial frame is written before stepping
    const fmcf::FlowState start = solver.initial_state(*rho0);
    snap << fmcf::write_record(fmcf::to_record(start)) << '\n';
    tr = solver.run(*rho0, observer);
  } catch (const fmcf::FlowError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fmcf::exit_code(e.status());
  } catch (const fmcf::DegenerateParametrization& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fmcf::exit_code(fmcf::FlowStatus::injectivity);
  }
  if (tr.status != fmcf::FlowStatus::ok && step % manifest.save_every != 0) {
    snap << fmcf::write_record(fmcf::to_record(tr.states.back())) << '\n';
  }
  snap.flush();
  csv.flush();
  if (!snap || !csv) {
    std::cerr << "error: write failed\n";
    return kIoExit;
  }
  if (tr.status != fmcf::FlowStatus::ok) {
    std::cerr << fmcf::to_string(tr.status) << ": " << tr.message << '\n';
  }
  std::cout << "t=" << tr.states.back().t << " steps=" << step
            << " status=" << fmcf::to_string(tr.status) << '\n';
  return fmcf::exit_code(tr.status);
}

int cmd_validate(const std::string& suite, int resolution) {
  if (!fmcf::is_suite(suite)) {
    std::cerr << "usage: fmcf validate <suite> [--resolution N]\n"
              << "unknown suite '" << suite << "'; available: " << suite_list() << '\n';
    return kConfigExit;
  }
  try {
    const fmcf::SuiteReport report = fmcf::run_suite(suite, resolution);
    std::cout << fmcf::format_report(report);
    return report.pass() ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  }
}

int cmd_inspect(const std::string& path) {
  fmcf::SnapshotFile file;
  try {
    file = fmcf::read_snapshot_file(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoExit;
  }
  const fmcf::FlowConfig& c = file.manifest.config;
  std::cout << "version " << file.manifest.version << '\n'
            << "n=" << c.n << " s=" << c.s << " theta=" << c.theta
            << " resolution=" << c.resolution << " topology=" << fmcf::to_string(c.topology)
            << " hs_ref_mode=" << fmcf::to_string(c.hs_ref_mode) << '\n'
            << "frames " << file.records.size() << '\n';
  std::printf("%14s %14s %14s %14s\n", "t", "volume", "min_rho", "bc_residual");
  for (const fmcf::SnapshotRecord& r : file.records) {
    std::printf("%14.6e %14.6e %14.6e %14.6e\n", r.t, r.volume, r.min_rho, r.bc_residual);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capillary fractional mean curvature flow of radial graphs"};
  app.set_version_flag("--version", std::string(fmcf::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a flow from a key=value config file");
  run->add_option("config", config_path, "Config file")->required();

  std::string suite;
  int resolution = 0;
  auto* validate = app.add_subcommand("validate", "Run a validation suite: " + suite_list());
  validate->add_option("suite", suite, "Suite name")->required();
  validate->add_option("--resolution", resolution, "Grid resolution (0 = suite default)")
      ->check(CLI::NonNegativeNumber);

  std::string snapshot;
  auto* inspect = app.add_subcommand("inspect", "Summarize a snapshot file");
  inspect->add_option("snapshot", snapshot, "Snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  if (*run) return cmd_run(config_path);
  if (*validate) return cmd_validate(suite, resolution);
  return cmd_inspect(snapshot);
}
