#include "fmcf/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fmcf {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  int out = 0;
  const char* first = value.data();
  const char* last = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + value + "'");
}

const std::set<std::string> kFamilies = {"circle", "cosine", "height", "snapshot"};

void validate_run(const RunManifest& m) {
  m.config.validate();
  if (!kFamilies.count(m.initial.family)) {
    throw ConfigError("initial must be one of circle, cosine, height, snapshot");
  }
  if (!(m.initial.radius > 0.0)) throw ConfigError("initial_radius must be positive");
  if (!(std::abs(m.initial.amplitude) < 1.0)) {
    throw ConfigError("initial_amplitude must lie in (-1,1)");
  }
  if (m.initial.mode < 0) throw ConfigError("initial_mode must be non-negative");
  if (m.initial.family == "snapshot" && m.initial.snapshot.empty()) {
    throw ConfigError("initial_snapshot is required when initial=snapshot");
  }
  if (m.save_every < 1) throw ConfigError("save_every must be at least 1");
  if (m.output.empty()) throw ConfigError("output must not be empty");
}

json config_json(const FlowConfig& c) {
  return json{{"n", c.n},
              {"s", c.s},
              {"theta", c.theta},
              {"dt", c.dt},
              {"t_end", c.t_end},
              {"resolution", c.resolution},
              {"topology", to_string(c.topology)},
              {"hs_ref_mode", to_string(c.hs_ref_mode)},
              {"max_picard", c.max_picard},
              {"picard_tol", c.picard_tol},
              {"bc_tol", c.bc_tol},
              {"refresh_remainders", c.refresh_remainders},
              {"homotopy_order", c.homotopy_order},
              {"max_halvings", c.max_halvings}};
}

FlowConfig config_from(const json& j) {
  FlowConfig c;
  c.n = j.at("n").get<int>();
  c.s = j.at("s").get<double>();
  c.theta = j.at("theta").get<double>();
  c.dt = j.at("dt").get<double>();
  c.t_end = j.at("t_end").get<double>();
  c.resolution = j.at("resolution").get<int>();
  c.topology = topology_from_string(j.at("topology").get<std::string>());
  c.hs_ref_mode = hs_ref_mode_from_string(j.at("hs_ref_mode").get<std::string>());
  c.max_picard = j.at("max_picard").get<int>();
  c.picard_tol = j.at("picard_tol").get<double>();
  c.bc_tol = j.at("bc_tol").get<double>();
  c.refresh_remainders = j.at("refresh_remainders").get<bool>();
  c.homotopy_order = j.at("homotopy_order").get<int>();
  c.max_halvings = j.at("max_halvings").get<int>();
  return c;
}

json manifest_json(const RunManifest& m) {
  return json{{"config", config_json(m.config)},
              {"initial",
               {{"family", m.initial.family},
                {"radius", m.initial.radius},
                {"amplitude", m.initial.amplitude},
                {"mode", m.initial.mode},
                {"snapshot", m.initial.snapshot}}},
              {"output", m.output},
              {"save_every", m.save_every},
              {"version", m.version}};
}

RunManifest manifest_from(const json& j) {
  RunManifest m;
  m.config = config_from(j.at("config"));
  const json& init = j.at("initial");
  m.initial.family = init.at("family").get<std::string>();
  m.initial.radius = init.at("radius").get<double>();
  m.initial.amplitude = init.at("amplitude").get<double>();
  m.initial.mode = init.at("mode").get<int>();
  m.initial.snapshot = init.at("snapshot").get<std::string>();
  m.output = j.at("output").get<std::string>();
  m.save_every = j.at("save_every").get<int>();
  m.version = j.at("version").get<std::string>();
  return m;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

bool operator==(const RunManifest& a, const RunManifest& b) {
  return manifest_json(a) == manifest_json(b);
}

std::string to_string(Topology topology) {
  return topology == Topology::hemisphere ? "hemisphere" : "full-sphere";
}

Topology topology_from_string(const std::string& name) {
  if (name == "hemisphere") return Topology::hemisphere;
  if (name == "full-sphere") return Topology::full_sphere;
  throw ConfigError("topology must be hemisphere or full-sphere, got '" + name + "'");
}

RunManifest parse_config_text(const std::string& text) {
  RunManifest m;
  bool mode_given = false;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"s", [&](auto& k, auto& v) { m.config.s = to_double(k, v); }},
      {"theta", [&](auto& k, auto& v) { m.config.theta = to_double(k, v); }},
      {"dt", [&](auto& k, auto& v) { m.config.dt = to_double(k, v); }},
      {"t_end", [&](auto& k, auto& v) { m.config.t_end = to_double(k, v); }},
      {"resolution", [&](auto& k, auto& v) { m.config.resolution = to_int(k, v); }},
      {"n", [&](auto& k, auto& v) { m.config.n = to_int(k, v); }},
      {"topology", [&](auto&, auto& v) { m.config.topology = topology_from_string(v); }},
      {"hs_ref_mode",
       [&](auto&, auto& v) {
         try {
           m.config.hs_ref_mode = hs_ref_mode_from_string(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
         mode_given = true;
       }},
      {"max_picard", [&](auto& k, auto& v) { m.config.max_picard = to_int(k, v); }},
      {"picard_tol", [&](auto& k, auto& v) { m.config.picard_tol = to_double(k, v); }},
      {"bc_tol", [&](auto& k, auto& v) { m.config.bc_tol = to_double(k, v); }},
      {"refresh_remainders",
       [&](auto& k, auto& v) { m.config.refresh_remainders = to_bool(k, v); }},
      {"homotopy_order", [&](auto& k, auto& v) { m.config.homotopy_order = to_int(k, v); }},
      {"max_halvings", [&](auto& k, auto& v) { m.config.max_halvings = to_int(k, v); }},
      {"initial", [&](auto&, auto& v) { m.initial.family = v; }},
      {"initial_radius", [&](auto& k, auto& v) { m.initial.radius = to_double(k, v); }},
      {"initial_amplitude", [&](auto& k, auto& v) { m.initial.amplitude = to_double(k, v); }},
      {"initial_mode", [&](auto& k, auto& v) { m.initial.mode = to_int(k, v); }},
      {"initial_snapshot", [&](auto&, auto& v) { m.initial.snapshot = v; }},
      {"save_every", [&](auto& k, auto& v) { m.save_every = to_int(k, v); }},
      {"output", [&](auto&, auto& v) { m.output = v; }},
  };

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + " is not of the form key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("unknown key '" + key + "' on line " + std::to_string(line_no));
    }
    if (!seen.insert(key).second) throw ConfigError("key '" + key + "' given twice");
    it->second(key, value);
  }
  for (const char* key : {"s", "theta", "dt", "t_end", "resolution"}) {
    if (!seen.count(key)) throw ConfigError(std::string("missing required key '") + key + "'");
  }
  if (!mode_given) {
    m.config.hs_ref_mode = m.config.topology == Topology::hemisphere ? HsRefMode::half_ball
                                                                     : HsRefMode::full_sphere;
  }
  validate_run(m);
  return m;
}

RunManifest parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string manifest_to_json(const RunManifest& manifest) { return manifest_json(manifest).dump(); }

RunManifest manifest_from_json(const std::string& text) {
  try {
    return manifest_from(json::parse(text));
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("corrupt manifest: ") + e.what());
  }
}

RadialField make_initial_field(const RunManifest& manifest, const GridPtr& grid) {
  const InitialCondition& ic = manifest.initial;
  if (ic.family == "snapshot") {
    SnapshotFile file = read_snapshot_file(ic.snapshot);
    if (file.records.empty()) throw SnapshotError("snapshot " + ic.snapshot + " has no frames");
    const SnapshotRecord& last = file.records.back();
    if (last.n != grid->dimension() || last.resolution != grid->resolution() ||
        last.topology != grid->topology()) {
      throw ConfigError("initial_snapshot grid does not match n, resolution and topology");
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(last.values.data(),
                                                          static_cast<Index>(last.values.size()));
    return RadialField(grid, std::move(v));
  }
  Eigen::VectorXd v(grid->size());
  for (Index i = 0; i < grid->size(); ++i) {
    const Vec3 x = grid->node(i);
    double shape = 1.0;
    if (ic.family == "cosine") {
      // cos(k phi) of the polar angle phi measured from e_1
      shape = 1.0 + ic.amplitude * std::cos(ic.mode * std::acos(std::clamp(x.x(), -1.0, 1.0)));
    } else if (ic.family == "height") {
      shape = 1.0 + ic.amplitude * x[grid->vertical_axis()];
    }
    v[i] = ic.radius * shape;
  }
  return RadialField(grid, std::move(v));
}

SnapshotRecord to_record(const FlowState& state) {
  SnapshotRecord r;
  r.t = state.t;
  r.n = state.rho.grid().dimension();
  r.resolution = state.rho.grid().resolution();
  r.topology = state.rho.grid().topology();
  r.values.assign(state.rho.values().data(), state.rho.values().data() + state.rho.size());
  r.bc_residual = state.bc_residual;
  r.volume = state.volume;
  r.min_rho = state.min_rho;
  return r;
}

FlowState to_state(const SnapshotRecord& record) {
  GridPtr grid;
  try {
    grid = build_grid(record.n, record.resolution, record.topology);
  } catch (const std::invalid_argument& e) {
    throw SnapshotError(std::string("snapshot grid is invalid: ") + e.what());
  }
  if (static_cast<Index>(record.values.size()) != grid->size()) {
    throw SnapshotError("snapshot has " + std::to_string(record.values.size()) +
                        " values for a grid of " + std::to_string(grid->size()));
  }
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(record.values.data(), grid->size());
  return FlowState{record.t, RadialField(grid, std::move(v)), record.bc_residual, record.min_rho,
                   record.volume};
}

std::string write_record(const SnapshotRecord& r) {
  const json j{{"schema", kSnapshotSchema},
               {"version", kSnapshotVersion},
               {"kind", "frame"},
               {"t", r.t},
               {"n", r.n},
               {"resolution", r.resolution},
               {"topology", to_string(r.topology)},
               {"values", r.values},
               {"bc_residual", r.bc_residual},
               {"volume", r.volume},
               {"min_rho", r.min_rho}};
  return j.dump();
}

namespace {

json parse_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw SnapshotError(std::string("corrupt record: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema") || !j.contains("version")) {
    throw SnapshotError("corrupt record: missing schema or version");
  }
  if (j["schema"] != kSnapshotSchema) {
    throw SnapshotError("corrupt record: unexpected schema " + j["schema"].dump());
  }
  if (!j["version"].is_number_integer() || j["version"].get<int>() != kSnapshotVersion) {
    throw SnapshotError("snapshot version mismatch: file has " + j["version"].dump() +
                        ", reader expects " + std::to_string(kSnapshotVersion));
  }
  return j;
}

}  // namespace

SnapshotRecord read_record(const std::string& line) {
  const json j = parse_line(line);
  try {
    if (j.at("kind") != "frame") throw SnapshotError("record is not a frame");
    SnapshotRecord r;
    r.t = j.at("t").get<double>();
    r.n = j.at("n").get<int>();
    r.resolution = j.at("resolution").get<int>();
    r.topology = topology_from_string(j.at("topology").get<std::string>());
    r.values = j.at("values").get<std::vector<double>>();
    r.bc_residual = j.at("bc_residual").get<double>();
    r.volume = j.at("volume").get<double>();
    r.min_rho = j.at("min_rho").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw SnapshotError(std::string("corrupt record: ") + e.what());
  } catch (const ConfigError& e) {
    throw SnapshotError(std::string("corrupt record: ") + e.what());
  }
}

void write_snapshot_header(std::ostream& out, const RunManifest& manifest) {
  const json j{{"schema", kSnapshotSchema},
               {"version", kSnapshotVersion},
               {"kind", "manifest"},
               {"manifest", manifest_json(manifest)}};
  out << j.dump() << '\n';
}

SnapshotFile read_snapshot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open snapshot " + path);
  SnapshotFile file;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!have_header) {
      const json j = parse_line(line);
      if (j.value("kind", "") != "manifest") {
        throw SnapshotError("line 1 of " + path + " is not a manifest record");
      }
      try {
        file.manifest = manifest_from(j.at("manifest"));
      } catch (const json::exception& e) {
        throw SnapshotError(std::string("corrupt manifest: ") + e.what());
      }
      have_header = true;
      continue;
    }
    try {
      file.records.push_back(read_record(line));
    } catch (const SnapshotError& e) {
      throw SnapshotError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw SnapshotError(path + " is empty");
  return file;
}

void write_diagnostics_header(std::ostream& out, const RunManifest& manifest) {
  out << "# fmcf diagnostics " << kVersion << '\n';
  out << "# manifest " << manifest_to_json(manifest) << '\n';
  out << "t,volume,sup_dev,max_bc_residual,picard_iterations,dt_used\n";
}

void write_diagnostics_row(std::ostream& out, const StepDiagnostics& d) {
  out << format_double(d.t) << ',' << format_double(d.volume) << ',' << format_double(d.sup_dev)
      << ',' << format_double(d.max_bc_residual) << ',' << d.picard_iterations << ','
      << format_double(d.dt_used) << '\n';
}

int exit_code(FlowStatus status) {
  switch (status) {
    case FlowStatus::ok:
      return 0;
    case FlowStatus::nonconvergence:
      return 3;
    case FlowStatus::extinction:
      return 4;
    case FlowStatus::injectivity:
      return 5;
  }
  return 3;
}

}  // namespace fmcf
