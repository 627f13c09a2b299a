// Seeded generation of small protein/ligand/grid systems for the built-in
// verification checks and the test suites. Protein atoms sit on a shell
// outside the grid box so maps stay smooth and unclamped; ligand atoms stay
// strictly inside with a configurable plane margin.
#pragma once

#include <cstdint>
#include <random>

#include "qvs/forcefield.hpp"
#include "qvs/gridmap.hpp"

namespace qvs {

struct RandomSystemSpec {
  int max_protein_atoms = 8;
  int max_ligand_atoms = 4;
  int max_types = 3;
  std::array<int, 3> dims{4, 4, 4};
  double spacing = 1.0;
  int ligand_plane_margin = 0; // empty node planes kept free on each side
  int protein_conformations = 1;
  int ligand_conformations = 1;
};

struct RandomSystem {
  Molecule protein;
  Molecule ligand;
  GridSpec grid;
};

RandomSystem make_random_system(std::mt19937_64& rng,
                                const RandomSystemSpec& spec = {});

} // namespace qvs
