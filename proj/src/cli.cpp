#include "qvs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qvs/circuits.hpp"
#include "qvs/encoding.hpp"
#include "qvs/gatelist.hpp"
#include "qvs/oracle.hpp"
#include "qvs/verify.hpp"

namespace qvs {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

UnitsMode units_from_string(const std::string& s) {
  if (s == "physical") return UnitsMode::physical;
  if (s == "reduced") return UnitsMode::reduced;
  throw std::invalid_argument("unknown units mode '" + s + "'");
}

RunMode mode_from_string(const std::string& s) {
  if (s == "amplitude") return RunMode::amplitude;
  if (s == "sampled") return RunMode::sampled;
  throw std::invalid_argument("unknown run mode '" + s + "'");
}

FirstRowBackend backend_from_string(const std::string& s) {
  if (s == "householder") return FirstRowBackend::householder;
  if (s == "ry_tree") return FirstRowBackend::ry_tree;
  throw std::invalid_argument("unknown backend '" + s + "'");
}

void apply_offset_string(CliConfig& config, const std::string& s) {
  if (s == "auto") {
    config.offset_auto = true;
    config.offset_value = 0.0;
    return;
  }
  config.offset_auto = false;
  config.offset_value = std::stod(s);
  if (config.offset_value < 0.0)
    throw std::invalid_argument("offset must be nonnegative");
}

CliConfig config_from_json(const json& root) {
  CliConfig c;
  if (root.contains("protein")) c.protein_path = root["protein"].get<std::string>();
  if (root.contains("ligand")) c.ligand_path = root["ligand"].get<std::string>();
  if (root.contains("maps")) c.maps_path = root["maps"].get<std::string>();
  if (root.contains("encoding"))
    c.encoding_path = root["encoding"].get<std::string>();
  if (root.contains("save_encoding"))
    c.save_encoding_path = root["save_encoding"].get<std::string>();
  if (root.contains("out")) c.out_path = root["out"].get<std::string>();
  if (root.contains("grid")) {
    const auto& g = root["grid"];
    GridSpec grid;
    const auto origin = g.at("origin").get<std::vector<double>>();
    if (origin.size() != 3) throw std::invalid_argument("grid.origin needs 3 values");
    grid.origin = {origin[0], origin[1], origin[2]};
    grid.spacing = g.at("spacing").get<double>();
    const auto dims = g.at("dims").get<std::vector<int>>();
    if (dims.size() != 3) throw std::invalid_argument("grid.dims needs 3 values");
    grid.dims = {dims[0], dims[1], dims[2]};
    c.grid = grid;
  }
  if (root.contains("registers")) {
    const auto& r = root["registers"];
    if (r.contains("nt") && !r["nt"].is_null()) c.nt = r["nt"].get<int>();
    if (r.contains("ng") && !r["ng"].is_null()) c.ng = r["ng"].get<int>();
  }
  if (root.contains("mode")) c.mode = mode_from_string(root["mode"].get<std::string>());
  if (root.contains("shots")) c.shots = root["shots"].get<std::uint64_t>();
  if (root.contains("seed")) c.seed = root["seed"].get<std::uint64_t>();
  if (root.contains("offset")) {
    if (root["offset"].is_string())
      apply_offset_string(c, root["offset"].get<std::string>());
    else {
      c.offset_auto = false;
      c.offset_value = root["offset"].get<double>();
    }
  }
  if (root.contains("units")) c.units = units_from_string(root["units"].get<std::string>());
  if (root.contains("dielectric")) {
    const auto& d = root["dielectric"];
    const auto kind = d.at("mode").get<std::string>();
    if (kind == "vacuum")
      c.dielectric = DielectricMode::vacuum();
    else if (kind == "distance_dependent")
      c.dielectric = DielectricMode::distance_dependent(
          d.contains("slope") ? d["slope"].get<double>() : 1.0);
    else
      throw std::invalid_argument("unknown dielectric mode '" + kind + "'");
  }
  if (root.contains("clamp")) c.clamp = root["clamp"].get<double>();
  if (root.contains("backend"))
    c.backend = backend_from_string(root["backend"].get<std::string>());
  if (root.contains("batch")) {
    const auto& b = root["batch"];
    auto list = [&](const char* key, std::vector<int>& dst) {
      if (b.contains(key)) dst = b[key].get<std::vector<int>>();
    };
    list("shifts_x", c.poses.shifts_x);
    list("shifts_y", c.poses.shifts_y);
    list("shifts_z", c.poses.shifts_z);
    list("turns_x", c.poses.turns_x);
    list("turns_y", c.poses.turns_y);
    list("turns_z", c.poses.turns_z);
    if (b.contains("conformations"))
      c.use_conformations = b["conformations"].get<bool>();
  }
  return c;
}

ordered_json config_to_json(const CliConfig& c) {
  ordered_json root;
  root["protein"] = c.protein_path;
  root["ligand"] = c.ligand_path;
  if (!c.maps_path.empty()) root["maps"] = c.maps_path;
  if (!c.encoding_path.empty()) root["encoding"] = c.encoding_path;
  if (!c.out_path.empty()) root["out"] = c.out_path;
  if (c.grid) {
    root["grid"] = {{"origin", c.grid->origin},
                    {"spacing", c.grid->spacing},
                    {"dims", c.grid->dims}};
  }
  ordered_json regs;
  regs["nt"] = c.nt ? ordered_json(*c.nt) : ordered_json(nullptr);
  regs["ng"] = c.ng ? ordered_json(*c.ng) : ordered_json(nullptr);
  root["registers"] = regs;
  root["mode"] = c.mode == RunMode::amplitude ? "amplitude" : "sampled";
  if (c.mode == RunMode::sampled) {
    root["shots"] = c.shots;
    root["seed"] = c.seed;
  }
  if (c.offset_auto)
    root["offset"] = "auto";
  else
    root["offset"] = c.offset_value;
  root["units"] = c.units == UnitsMode::physical ? "physical" : "reduced";
  root["dielectric"] = {
      {"mode", c.dielectric.kind == DielectricMode::Kind::vacuum
                   ? "vacuum"
                   : "distance_dependent"},
      {"slope", c.dielectric.slope}};
  root["clamp"] = c.clamp;
  root["backend"] =
      c.backend == FirstRowBackend::householder ? "householder" : "ry_tree";
  root["batch"] = {{"shifts_x", c.poses.shifts_x}, {"shifts_y", c.poses.shifts_y},
                   {"shifts_z", c.poses.shifts_z}, {"turns_x", c.poses.turns_x},
                   {"turns_y", c.poses.turns_y},   {"turns_z", c.poses.turns_z},
                   {"conformations", c.use_conformations}};
  return root;
}

ordered_json report_to_json(const EnergyReport& r, const std::string& norm_kind) {
  ordered_json j;
  j["pose"] = {{"conf_p", r.pose.conf_p}, {"conf_l", r.pose.conf_l},
               {"tx", r.pose.tx},         {"ty", r.pose.ty},
               {"tz", r.pose.tz},         {"rx", r.pose.rx},
               {"ry", r.pose.ry},         {"rz", r.pose.rz}};
  j["E_total"] = r.e_total;
  j["E_ele"] = r.e_ele;
  j["E_vdw_by_type"] = r.e_vdw_by_type;
  j["mode"] = r.mode;
  if (r.shots) j["shots"] = *r.shots;
  if (r.stderr_e) j["stderr"] = *r.stderr_e;
  if (r.seed) j["seed"] = *r.seed;
  j["offset_c"] = r.offset_c;
  j[norm_kind] = r.norm_value;
  if (r.padded) j["padded"] = true;
  if (r.warning) j["warning"] = *r.warning;
  return j;
}

void write_output(const std::string& path, const std::string& text,
                  std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    if (text.empty() || text.back() != '\n') fallback << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

struct LoadedSystem {
  Molecule protein;
  Molecule ligand;
  AtomTypeRegistry registry;
  GridSpec grid;
  PotentialMaps maps; // conformation 0 maps
  bool maps_from_file = false;
};

void validate_registers(const CliConfig& config, std::size_t n_types,
                        std::size_t n_grid, bool with_offset) {
  if (config.nt && (std::size_t(1) << *config.nt) <= 1 + n_types)
    throw std::invalid_argument(
        "register nt=" + std::to_string(*config.nt) +
        " rejected: 2^nt must exceed 1 + n_types = " + std::to_string(1 + n_types));
  if (config.ng &&
      (std::size_t(1) << *config.ng) < n_grid + (with_offset ? 1 : 0))
    throw std::invalid_argument(
        "register ng=" + std::to_string(*config.ng) +
        " rejected: 2^ng must cover " + std::to_string(n_grid) +
        " grid nodes" + (with_offset ? " plus the offset slot" : ""));
}

LoadedSystem load_system(const CliConfig& config, bool need_maps) {
  if (config.protein_path.empty())
    throw std::invalid_argument("missing protein file (--protein)");
  if (config.ligand_path.empty())
    throw std::invalid_argument("missing ligand file (--ligand)");
  LoadedSystem sys;
  sys.protein = load_molecule_file(config.protein_path);
  sys.ligand = load_molecule_file(config.ligand_path);
  sys.registry = AtomTypeRegistry::from_ligand(sys.ligand);

  bool have_maps = false;
  if (!config.maps_path.empty()) {
    std::ifstream probe(config.maps_path);
    if (probe) {
      sys.maps = load_maps_file(config.maps_path);
      sys.grid = sys.maps.grid;
      sys.maps_from_file = true;
      have_maps = true;
      if (sys.maps.evdw.size() != sys.registry.size())
        throw std::invalid_argument(
            "map file '" + config.maps_path + "' carries " +
            std::to_string(sys.maps.evdw.size()) + " type maps but the ligand has " +
            std::to_string(sys.registry.size()) + " types");
    }
  }
  if (!have_maps) {
    if (!config.grid)
      throw std::invalid_argument("missing grid (config `grid` or --grid-* flags)");
    sys.grid = *config.grid;
    sys.grid.validate();
  }
  // Explicit register sizes are rejected before any map work. An auto offset
  // is assumed to occupy its slot.
  validate_registers(config, sys.registry.size(), sys.grid.num_nodes(),
                     config.offset_auto || config.offset_value > 0.0);
  if (!have_maps && need_maps)
    sys.maps = build_potential_maps(sys.protein, sys.registry, sys.grid,
                                    config.dielectric, config.units, config.clamp);
  return sys;
}

double resolve_offset(const CliConfig& config, const PotentialMaps& maps,
                      const LigandGridVector& lig) {
  return config.offset_auto ? auto_offset(maps, lig) : config.offset_value;
}

} // namespace

CliConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  json root = json::parse(in);
  return config_from_json(root);
}

int cmd_gridmap(const CliConfig& config, std::ostream& out, std::ostream& err) {
  (void)err;
  auto sys = load_system(config, true);
  if (sys.maps_from_file)
    throw std::invalid_argument("gridmap builds maps; pass --out, not an "
                                "existing --maps cache");
  if (config.out_path.empty())
    throw std::invalid_argument("gridmap needs an output path (--out)");
  save_maps_file(config.out_path, sys.maps);

  auto norm_of = [](const std::vector<double>& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    return std::sqrt(sq);
  };
  out << "wrote " << config.out_path << "\n";
  out << "phi_norm " << norm_of(sys.maps.phi) << "\n";
  for (std::size_t t = 0; t < sys.maps.evdw.size(); ++t)
    out << "evdw_norm[" << sys.registry.type(t).name << "] "
        << norm_of(sys.maps.evdw[t]) << "\n";
  return 0;
}

int cmd_score(const CliConfig& config, std::ostream& out, std::ostream& err) {
  (void)err;
  RunOptions opts;
  opts.mode = config.mode;
  opts.shots = config.shots;
  opts.seed = config.seed;
  opts.backend = config.backend;

  ordered_json doc;
  doc["config"] = config_to_json(config);

  EnergyReport rep;
  if (!config.encoding_path.empty()) {
    // Score from a saved encoding; the map file supplies the unitary rows.
    if (config.maps_path.empty())
      throw std::invalid_argument("scoring from an encoding needs --maps");
    const auto problem = load_encoded_problem_file(config.encoding_path);
    const auto maps = load_maps_file(config.maps_path);
    rep = run_pipeline(problem, maps, opts);
  } else {
    auto sys = load_system(config, true);
    const auto lig = deposit_ligand(sys.ligand, sys.registry, sys.grid);
    const double offset_c = resolve_offset(config, sys.maps, lig);
    RegisterSizing sizing{config.nt, config.ng};
    const auto problem = assemble_o_grid(sys.maps, lig, offset_c, sizing);
    if (!config.save_encoding_path.empty())
      save_encoded_problem_file(config.save_encoding_path, problem);
    rep = run_pipeline(problem, sys.maps, opts);

    if (config.embed_verification) {
      const auto oracle = oracle_report(sys.protein, sys.ligand, sys.maps, lig,
                                        config.dielectric, config.units);
      ordered_json jo;
      jo["E_ele_direct"] = oracle.direct.e_ele;
      jo["E_vdw_direct"] = oracle.direct.e_vdw;
      jo["E_ele_grid"] = oracle.grid.e_ele;
      jo["E_vdw_grid_by_type"] = oracle.grid.e_vdw_by_type;
      jo["delta_abs"] = oracle.delta_abs;
      if (oracle.rel_defined) jo["delta_rel"] = oracle.delta_rel;
      jo["pipeline_vs_grid_oracle"] = std::abs(rep.e_total - oracle.grid.total());
      doc["oracle"] = jo;
    }
  }

  doc["results"] = ordered_json::array({report_to_json(rep, rep.norm_kind)});
  write_output(config.out_path, doc.dump(2), out);
  return 0;
}

int cmd_batch(const CliConfig& config, std::ostream& out, std::ostream& err) {
  (void)err;
  auto sys = load_system(config, false);

  BatchInputs inputs;
  inputs.poses = config.poses;
  inputs.sizing = RegisterSizing{config.nt, config.ng};

  const std::size_t n_p = config.use_conformations ? sys.protein.conformation_count() : 1;
  const std::size_t n_l = config.use_conformations ? sys.ligand.conformation_count() : 1;
  for (std::size_t i = 0; i < n_p; ++i) {
    if (sys.maps_from_file && i == 0 && n_p == 1)
      inputs.maps_by_protein_conf.push_back(sys.maps);
    else
      inputs.maps_by_protein_conf.push_back(
          build_potential_maps(sys.protein.conformation(i), sys.registry, sys.grid,
                               config.dielectric, config.units, config.clamp));
  }
  for (std::size_t j = 0; j < n_l; ++j)
    inputs.lig_by_conf.push_back(
        deposit_ligand(sys.ligand.conformation(j), sys.registry, sys.grid));

  double offset_c = config.offset_value;
  if (config.offset_auto) {
    offset_c = 0.0;
    for (const auto& maps : inputs.maps_by_protein_conf)
      for (const auto& lig : inputs.lig_by_conf)
        offset_c = std::max(offset_c, auto_offset(maps, lig));
  }
  inputs.offset_c = offset_c;

  RunOptions opts;
  opts.mode = config.mode;
  opts.shots = config.shots;
  opts.seed = config.seed;
  opts.backend = config.backend;

  auto reports = run_pipeline_batch(inputs, opts);

  // Rank real poses ascending by energy; padded slots trail, marked.
  auto pose_tuple = [](const EnergyReport& r) {
    return std::make_tuple(r.pose.conf_p, r.pose.conf_l, r.pose.rz, r.pose.ry,
                           r.pose.rx, r.pose.tz, r.pose.ty, r.pose.tx);
  };
  std::stable_sort(reports.begin(), reports.end(),
                   [&](const EnergyReport& a, const EnergyReport& b) {
                     if (a.padded != b.padded) return !a.padded;
                     if (a.e_total != b.e_total) return a.e_total < b.e_total;
                     return pose_tuple(a) < pose_tuple(b);
                   });

  ordered_json doc;
  doc["config"] = config_to_json(config);
  doc["results"] = ordered_json::array();
  for (const auto& r : reports)
    doc["results"].push_back(report_to_json(r, r.norm_kind));
  write_output(config.out_path, doc.dump(2), out);
  return 0;
}

int cmd_verify(const CliConfig& config, std::ostream& out, std::ostream& err) {
  (void)err;
  auto checks = run_default_checks(config.seed);

  // With concrete inputs, also cross-check a stored map cache against maps
  // rebuilt from the protein.
  if (!config.protein_path.empty() && !config.ligand_path.empty() &&
      !config.maps_path.empty()) {
    const auto protein = load_molecule_file(config.protein_path);
    const auto ligand = load_molecule_file(config.ligand_path);
    const auto registry = AtomTypeRegistry::from_ligand(ligand);
    const auto stored = load_maps_file(config.maps_path);
    const auto lig = deposit_ligand(ligand, registry, stored.grid);
    checks.push_back(check_maps_file_consistency(protein, registry, stored, lig,
                                                 config.dielectric, config.units));
  }

  bool all_pass = true;
  for (const auto& c : checks) {
    all_pass = all_pass && c.pass;
    out << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  }
  out << (all_pass ? "all checks passed" : "verification FAILED") << "\n";
  return all_pass ? 0 : 1;
}

int cmd_circuit_export(const CliConfig& config, std::ostream& out,
                       std::ostream& err) {
  (void)err;
  if (config.backend != FirstRowBackend::ry_tree)
    throw std::invalid_argument("circuit export needs --backend ry_tree");
  auto sys = load_system(config, true);
  const auto lig = deposit_ligand(sys.ligand, sys.registry, sys.grid);
  const double offset_c = resolve_offset(config, sys.maps, lig);
  RegisterSizing sizing{config.nt, config.ng};
  const auto problem = assemble_o_grid(sys.maps, lig, offset_c, sizing);
  const auto u = make_u_grid(problem, sys.maps, FirstRowBackend::ry_tree);

  std::vector<std::vector<const EncodedProblem*>> views{{&problem}};
  const auto batch = make_batch(views, {u}, config.poses);
  const BatchLayout& lay = batch.layout;
  const int total = lay.total_qubits();

  GateList list;
  list.n_qubits = total;

  // Pose permutations first (they act on the prepared input), then the
  // U_grid blocks as type-register-controlled RY trees, then the summation
  // Hadamards.
  for (const auto& op : batch.pose_ops) {
    const auto* perm = dynamic_cast<const ControlledGridPermOp*>(op.get());
    if (!perm) continue;
    for (auto& g : perm->to_perm_gates()) list.gates.push_back(std::move(g));
  }
  std::vector<int> block_signs;
  for (std::size_t b = 0; b < u->n_blocks(); ++b) {
    const FirstRowUnitary* block = u->block(b);
    block_signs.push_back(block ? block->global_sign() : 1);
    if (!block) continue;
    std::vector<ControlBit> type_controls;
    for (int q = 0; q < lay.nt; ++q)
      type_controls.push_back({lay.ng + q, int((b >> q) & 1)});
    for (const Gate& g : block->gates().gates) {
      Gate embedded = g;
      for (const auto& c : type_controls) embedded.controls.push_back(c);
      list.gates.push_back(std::move(embedded));
    }
    // A sign-flipped tree is compensated by a controlled 2*pi Y rotation,
    // which is -I on the block.
    if (block->global_sign() < 0)
      list.gates.push_back(Gate::make_ry(2.0 * M_PI, 0, type_controls));
  }
  for (int q = 0; q < lay.nt; ++q) list.gates.push_back(Gate::make_h(lay.ng + q));
  list.validate();

  ordered_json doc = ordered_json::parse(list.to_json());
  ordered_json registers;
  registers["grid"] = {{"lsb", 0}, {"bits", lay.ng}};
  registers["type"] = {{"lsb", lay.ng}, {"bits", lay.nt}};
  if (lay.ntx) registers["tx"] = {{"lsb", lay.lsb_tx()}, {"bits", lay.ntx}};
  if (lay.nty) registers["ty"] = {{"lsb", lay.lsb_ty()}, {"bits", lay.nty}};
  if (lay.ntz) registers["tz"] = {{"lsb", lay.lsb_tz()}, {"bits", lay.ntz}};
  if (lay.nrx) registers["rx"] = {{"lsb", lay.lsb_rx()}, {"bits", lay.nrx}};
  if (lay.nry) registers["ry"] = {{"lsb", lay.lsb_ry()}, {"bits", lay.nry}};
  if (lay.nrz) registers["rz"] = {{"lsb", lay.lsb_rz()}, {"bits", lay.nrz}};
  doc["registers"] = registers;
  doc["block_signs"] = block_signs;
  doc["l_type"] = problem.l_type;
  doc["offset_c"] = problem.offset_c;

  write_output(config.out_path, doc.dump(2), out);
  return 0;
}

namespace {

struct Overrides {
  std::string config_path;
  std::string protein, ligand, maps, encoding, save_encoding, out_path;
  std::vector<double> grid_origin;
  double grid_spacing = 0.0;
  std::vector<int> grid_dims;
  int nt = -1, ng = -1;
  std::string mode, offset, backend, dielectric;
  double dielectric_slope = -1.0, clamp = -1.0;
  std::uint64_t shots = 0, seed = 0;
  bool reduced_units = false, conformations = false, verify = false;
  std::vector<int> sx, sy, sz, rx, ry, rz;
};

void add_common_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--protein", o.protein, "protein molecule file");
  cmd->add_option("--ligand", o.ligand, "ligand molecule file");
  cmd->add_option("--maps", o.maps, "potential map cache file");
  cmd->add_option("--out", o.out_path, "output path");
  cmd->add_option("--grid-origin", o.grid_origin, "grid origin x,y,z")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--grid-spacing", o.grid_spacing, "grid spacing, Angstrom");
  cmd->add_option("--grid-dims", o.grid_dims, "grid dims nx,ny,nz (powers of two)")
      ->delimiter(',')
      ->expected(3);
  cmd->add_option("--nt", o.nt, "type-register qubits (auto when omitted)");
  cmd->add_option("--ng", o.ng, "grid-register qubits (auto when omitted)");
  cmd->add_option("--mode", o.mode, "amplitude | sampled");
  cmd->add_option("--shots", o.shots, "samples in sampled mode");
  cmd->add_option("--seed", o.seed, "sampling seed");
  cmd->add_option("--offset", o.offset, "positivity offset: auto | NUM | 0");
  cmd->add_flag("--reduced-units", o.reduced_units,
                "Coulomb prefactor 1 (analytic fixtures)");
  cmd->add_option("--dielectric", o.dielectric, "vacuum | distance_dependent");
  cmd->add_option("--dielectric-slope", o.dielectric_slope,
                  "slope of eps(r) = slope * r");
  cmd->add_option("--clamp", o.clamp, "map clamp value, kcal/mol");
  cmd->add_option("--backend", o.backend, "householder | ry_tree");
  cmd->add_option("--shifts-x", o.sx, "translation sweep, grid units")->delimiter(',');
  cmd->add_option("--shifts-y", o.sy, "translation sweep, grid units")->delimiter(',');
  cmd->add_option("--shifts-z", o.sz, "translation sweep, grid units")->delimiter(',');
  cmd->add_option("--turns-x", o.rx, "rotation sweep, quarter turns")->delimiter(',');
  cmd->add_option("--turns-y", o.ry, "rotation sweep, quarter turns")->delimiter(',');
  cmd->add_option("--turns-z", o.rz, "rotation sweep, quarter turns")->delimiter(',');
  cmd->add_flag("--conformations", o.conformations,
                "sweep all protein x ligand conformations");
}

CliConfig merge_config(const CLI::App* cmd, const Overrides& o) {
  CliConfig c;
  if (!o.config_path.empty()) c = load_config_file(o.config_path);
  auto passed = [&](const std::string& name) { return cmd->count(name) > 0; };
  if (passed("--protein")) c.protein_path = o.protein;
  if (passed("--ligand")) c.ligand_path = o.ligand;
  if (passed("--maps")) c.maps_path = o.maps;
  if (passed("--out")) c.out_path = o.out_path;
  if (passed("--grid-origin") || passed("--grid-spacing") || passed("--grid-dims")) {
    GridSpec grid = c.grid.value_or(GridSpec{});
    if (passed("--grid-origin"))
      grid.origin = {o.grid_origin[0], o.grid_origin[1], o.grid_origin[2]};
    if (passed("--grid-spacing")) grid.spacing = o.grid_spacing;
    if (passed("--grid-dims")) grid.dims = {o.grid_dims[0], o.grid_dims[1], o.grid_dims[2]};
    c.grid = grid;
  }
  if (passed("--nt")) c.nt = o.nt;
  if (passed("--ng")) c.ng = o.ng;
  if (passed("--mode")) c.mode = mode_from_string(o.mode);
  if (passed("--shots")) c.shots = o.shots;
  if (passed("--seed")) c.seed = o.seed;
  if (passed("--offset")) apply_offset_string(c, o.offset);
  if (o.reduced_units) c.units = UnitsMode::reduced;
  if (passed("--dielectric")) {
    if (o.dielectric == "vacuum")
      c.dielectric = DielectricMode::vacuum();
    else if (o.dielectric == "distance_dependent")
      c.dielectric = DielectricMode::distance_dependent(
          passed("--dielectric-slope") ? o.dielectric_slope : 1.0);
    else
      throw std::invalid_argument("unknown dielectric mode '" + o.dielectric + "'");
  } else if (passed("--dielectric-slope")) {
    c.dielectric.slope = o.dielectric_slope;
  }
  if (passed("--clamp")) c.clamp = o.clamp;
  if (passed("--backend")) c.backend = backend_from_string(o.backend);
  if (passed("--shifts-x")) c.poses.shifts_x = o.sx;
  if (passed("--shifts-y")) c.poses.shifts_y = o.sy;
  if (passed("--shifts-z")) c.poses.shifts_z = o.sz;
  if (passed("--turns-x")) c.poses.turns_x = o.rx;
  if (passed("--turns-y")) c.poses.turns_y = o.ry;
  if (passed("--turns-z")) c.poses.turns_z = o.rz;
  if (o.conformations) c.use_conformations = true;
  return c;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"grid-based protein-ligand scoring through a simulated "
               "amplitude pipeline"};
  app.require_subcommand(1);

  Overrides o;
  auto* gridmap_cmd =
      app.add_subcommand("gridmap", "build and store potential maps");
  auto* score_cmd = app.add_subcommand("score", "score a single pose");
  auto* batch_cmd =
      app.add_subcommand("batch", "score a conformation/translation/rotation sweep");
  auto* verify_cmd =
      app.add_subcommand("verify", "run the built-in verification checks");
  auto* export_cmd =
      app.add_subcommand("circuit-export", "export the circuit as a gate list");
  for (auto* cmd : {gridmap_cmd, score_cmd, batch_cmd, verify_cmd, export_cmd})
    add_common_options(cmd, o);
  score_cmd->add_option("--encoding", o.encoding, "score from a saved encoding");
  score_cmd->add_option("--save-encoding", o.save_encoding,
                        "write the assembled encoding to a file");
  score_cmd->add_flag("--verify", o.verify, "embed an oracle cross-check");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    const CLI::App* active = gridmap_cmd->parsed()  ? gridmap_cmd
                             : score_cmd->parsed()  ? score_cmd
                             : batch_cmd->parsed()  ? batch_cmd
                             : verify_cmd->parsed() ? verify_cmd
                                                    : export_cmd;
    CliConfig config = merge_config(active, o);
    if (score_cmd->parsed()) {
      if (active->count("--encoding")) config.encoding_path = o.encoding;
      if (active->count("--save-encoding"))
        config.save_encoding_path = o.save_encoding;
      config.embed_verification = o.verify;
    }
    if (gridmap_cmd->parsed()) return cmd_gridmap(config, out, err);
    if (score_cmd->parsed()) return cmd_score(config, out, err);
    if (batch_cmd->parsed()) return cmd_batch(config, out, err);
    if (verify_cmd->parsed()) return cmd_verify(config, out, err);
    return cmd_circuit_export(config, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

} // namespace qvs
