// Command-line surface: gridmap, score, batch, verify, circuit-export.
// A JSON config file provides the run description; flags override it.
// Exit codes: 0 success, 1 verification failure, 2 usage/input error.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qvs/gridmap.hpp"
#include "qvs/simulator.hpp"

namespace qvs {

struct CliConfig {
  std::string protein_path;
  std::string ligand_path;
  std::string maps_path;     // map cache (read if present, else built)
  std::string encoding_path; // saved encoding to score from
  std::string save_encoding_path;
  std::string out_path; // report / map / gate-list destination

  std::optional<GridSpec> grid;
  std::optional<int> nt, ng;

  RunMode mode = RunMode::amplitude;
  std::uint64_t shots = 1000000;
  std::uint64_t seed = 1;

  bool offset_auto = false;
  double offset_value = 0.0;

  PoseSpec poses;
  bool use_conformations = false;

  DielectricMode dielectric;
  UnitsMode units = UnitsMode::physical;
  double clamp = kDefaultClampKcal;
  FirstRowBackend backend = FirstRowBackend::householder;
  bool embed_verification = false; // score --verify
};

CliConfig load_config_file(const std::string& path);

int cmd_gridmap(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_score(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_batch(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const CliConfig& config, std::ostream& out, std::ostream& err);
int cmd_circuit_export(const CliConfig& config, std::ostream& out,
                       std::ostream& err);

// Full dispatcher used by the binary and by in-process tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace qvs
