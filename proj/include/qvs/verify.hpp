// Built-in verification checks: operator unitarity, exactness of the worked
// 2D shift/rotation matrices, permutation group laws, and pipeline-vs-oracle
// equivalence on randomized systems. Used by the command-line `verify`
// command and by the acceptance suite.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qvs/forcefield.hpp"
#include "qvs/gridmap.hpp"

namespace qvs {

struct CheckResult {
  std::string name;
  bool pass = false;
  double deviation = 0.0; // measured maximum deviation, 0 for exact passes
  std::string detail;
};

// Both first-row backends on random unit rows: ||U^T U - I||_max < 1e-10 and
// first row within 1e-10 of the target (ry_tree up to its reported sign).
CheckResult check_first_row_unitarity(int n_rows, int min_dim_bits,
                                      int max_dim_bits, std::uint64_t seed);

// Constructed shift/rotation operators on the 4x4 planar layout equal the
// worked matrices entry for entry (integer exact).
CheckResult check_paper_matrices();

// T^a T^b = T^{(a+b) mod n} and R^4 = I on dense realizations up to
// `max_grid_bits` grid qubits, integer exact.
CheckResult check_group_laws(int max_grid_bits = 8);

// Amplitude-mode pipeline total vs the classical grid inner product on
// randomized systems, relative 1e-9 with a 1e-12 absolute floor.
CheckResult check_pipeline_vs_oracle(int n_systems, std::uint64_t seed);

// Recomputes maps from the protein and compares a stored map file against
// them (detects stale or corrupted caches), then checks the pipeline built
// from the stored maps against the oracle built from the recomputed ones.
CheckResult check_maps_file_consistency(const Molecule& protein,
                                        const AtomTypeRegistry& registry,
                                        const PotentialMaps& stored,
                                        const LigandGridVector& lig,
                                        DielectricMode dielectric,
                                        UnitsMode units);

std::vector<CheckResult> run_default_checks(std::uint64_t seed);

} // namespace qvs
