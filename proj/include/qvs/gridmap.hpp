// Binding-pocket discretization: protein potential maps sampled on grid
// nodes and ligand charge/occupancy deposition by trilinear interpolation.
//
// Linear node index is k = (z*ny + y)*nx + x with z the most significant
// axis, so the grid register's low qubits run over x, then y, then z.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "qvs/forcefield.hpp"

namespace qvs {

enum class Axis : int { x = 0, y = 1, z = 2 };

struct DielectricMode {
  enum class Kind { vacuum, distance_dependent } kind = Kind::vacuum;
  double slope = 1.0; // eps(r) = slope * r, per Angstrom

  static DielectricMode vacuum() { return {}; }
  static DielectricMode distance_dependent(double slope = 1.0) {
    return {Kind::distance_dependent, slope};
  }
};

// Axis-aligned node lattice. Each per-axis dim must be a power of two; a
// degenerate axis of dim 1 (zero qubits) is allowed for planar layouts.
struct GridSpec {
  Vec3 origin{};                  // position of node (0,0,0), Angstrom
  double spacing = 1.0;           // Angstrom, > 0
  std::array<int, 3> dims{2, 2, 2};

  void validate() const;
  std::size_t num_nodes() const {
    return std::size_t(dims[0]) * dims[1] * dims[2];
  }
  int dim(Axis a) const { return dims[static_cast<int>(a)]; }
  int bits(Axis a) const;
  int geometry_bits() const; // log2(num_nodes)

  std::size_t node_index(int x, int y, int z) const {
    return (std::size_t(z) * dims[1] + y) * dims[0] + x;
  }
  std::array<int, 3> node_coords(std::size_t k) const;
  Vec3 node_position(int x, int y, int z) const;

  bool operator==(const GridSpec&) const = default;
};

// Protein-generated potentials at every node: electrostatic phi and one van
// der Waals map per ligand atom type. Entries are clamped to +-clamp_value;
// an infinite clamp disables clamping and makes node/atom coincidence an
// error.
struct PotentialMaps {
  GridSpec grid;
  std::vector<double> phi;               // kcal mol^-1 e^-1
  std::vector<std::vector<double>> evdw; // [type][node], kcal/mol
  double clamp_value = 1e4;
};

// Ligand charge and per-type occupancy deposited on grid nodes. Sums are
// conserved: total charge and per-type atom counts match the ligand.
struct LigandGridVector {
  GridSpec grid;
  std::vector<double> q_grid;                 // e
  std::vector<std::vector<double>> occupancy; // [type][node], dimensionless
};

inline constexpr double kDefaultClampKcal = 1e4;

std::vector<double> build_phi_map(const Molecule& protein, const GridSpec& grid,
                                  DielectricMode dielectric = {},
                                  UnitsMode units = UnitsMode::physical,
                                  double clamp_value = kDefaultClampKcal);

std::vector<std::vector<double>> build_evdw_map(const Molecule& protein,
                                                const AtomTypeRegistry& registry,
                                                const GridSpec& grid,
                                                double clamp_value = kDefaultClampKcal);

PotentialMaps build_potential_maps(const Molecule& protein,
                                   const AtomTypeRegistry& registry,
                                   const GridSpec& grid,
                                   DielectricMode dielectric = {},
                                   UnitsMode units = UnitsMode::physical,
                                   double clamp_value = kDefaultClampKcal);

LigandGridVector deposit_ligand(const Molecule& ligand,
                                const AtomTypeRegistry& registry,
                                const GridSpec& grid);

// Count of all-zero node planes at the two ends of `axis` (minimum of the
// two) across q_grid and every occupancy map; bounds cyclic translations
// that cannot wrap occupied nodes. A fully zero vector is degenerate and
// yields dim/2 by convention.
int grid_guard_margin(const LigandGridVector& lig, Axis axis,
                      bool* degenerate = nullptr);

// Text map file: header lines `origin x y z`, `spacing s`, `dims nx ny nz`,
// `clamp v`, `types n`, then one line per node for phi followed by each
// per-type map in index order, all with 17 significant digits.
void write_maps(std::ostream& out, const PotentialMaps& maps);
PotentialMaps read_maps(std::istream& in);
void save_maps_file(const std::string& path, const PotentialMaps& maps);
PotentialMaps load_maps_file(const std::string& path);

} // namespace qvs
