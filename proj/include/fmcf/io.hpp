#ifndef FMCF_IO_HPP
#define FMCF_IO_HPP

#include "fmcf/flow.hpp"
#include "fmcf/geometry.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmcf {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSnapshotSchema = "fmcf.snapshot";
inline constexpr int kSnapshotVersion = 1;

/// Named initial shape, or a frame loaded from a snapshot file.
struct InitialCondition {
  std::string family = "circle";  // circle | cosine | height | snapshot
  double radius = 1.0;
  double amplitude = 0.0;
  int mode = 2;
  std::string snapshot;
};

/// Everything needed to reproduce a run.
struct RunManifest {
  FlowConfig config;
  InitialCondition initial;
  std::string output = "fmcf_run";
  int save_every = 1;
  std::string version = kVersion;
};

bool operator==(const RunManifest& a, const RunManifest& b);

/// Parses key=value text. Blank lines and lines starting with '#' are ignored.
RunManifest parse_config_text(const std::string& text);
RunManifest parse_config(const std::string& path);

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

std::string to_string(Topology topology);
Topology topology_from_string(const std::string& name);

/// Builds rho_0 on the grid described by the manifest.
RadialField make_initial_field(const RunManifest& manifest, const GridPtr& grid);

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One saved frame.
struct SnapshotRecord {
  double t = 0.0;
  int n = 1;
  int resolution = 0;
  Topology topology = Topology::hemisphere;
  std::vector<double> values;
  double bc_residual = 0.0;
  double volume = 0.0;
  double min_rho = 0.0;
};

SnapshotRecord to_record(const FlowState& state);
/// Rebuilds the grid and field; throws SnapshotError if the values do not fit.
FlowState to_state(const SnapshotRecord& record);

/// Single-line JSON encoding; doubles use shortest round-trip form.
std::string write_record(const SnapshotRecord& record);
/// Throws SnapshotError on schema mismatch or a corrupt line.
SnapshotRecord read_record(const std::string& line);

/// Header line carrying the manifest, then one line per frame.
void write_snapshot_header(std::ostream& out, const RunManifest& manifest);
struct SnapshotFile {
  RunManifest manifest;
  std::vector<SnapshotRecord> records;
};
SnapshotFile read_snapshot_file(const std::string& path);

/// Diagnostics table with a '#' manifest header.
void write_diagnostics_header(std::ostream& out, const RunManifest& manifest);
void write_diagnostics_row(std::ostream& out, const StepDiagnostics& d);

/// Maps a flow status to the CLI exit code.
int exit_code(FlowStatus status);

}  // namespace fmcf

#endif  // FMCF_IO_HPP
