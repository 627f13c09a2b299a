// Classical reference paths for everything the simulated pipeline produces:
// direct pairwise energies over atoms and plain grid inner products. Sums run
// in ascending index order with scalar double accumulation so equivalence
// tolerances are well defined.
#pragma once

#include <string>
#include <vector>

#include "qvs/forcefield.hpp"
#include "qvs/gridmap.hpp"

namespace qvs {

struct DirectEnergies {
  double e_ele = 0.0;
  double e_vdw = 0.0;
};

struct GridEnergies {
  double e_ele = 0.0;
  std::vector<double> e_vdw_by_type;

  double total() const {
    double e = e_ele;
    for (double v : e_vdw_by_type) e += v;
    return e;
  }
};

struct OracleReport {
  DirectEnergies direct;
  GridEnergies grid;
  double delta_abs = 0.0; // |grid total - direct total|
  double delta_rel = 0.0; // defined only when |direct total| > 1e-12
  bool rel_defined = false;
};

// Full double loop over atom pairs, no grids, no cutoffs.
DirectEnergies direct_pairwise(const Molecule& protein, const Molecule& ligand,
                               DielectricMode dielectric = {},
                               UnitsMode units = UnitsMode::physical);

// E_ele = sum_k q_k phi_k and E_vdw,t = sum_k N^t_k evdw_t,k.
GridEnergies grid_inner_product(const PotentialMaps& maps,
                                const LigandGridVector& lig);

OracleReport oracle_report(const Molecule& protein, const Molecule& ligand,
                           const PotentialMaps& maps, const LigandGridVector& lig,
                           DielectricMode dielectric = {},
                           UnitsMode units = UnitsMode::physical);

struct ConvergenceRow {
  double spacing = 0.0;
  double grid_total = 0.0;
  double direct_total = 0.0;
  double rel_error = 0.0;
};

// Rebuilds maps and deposits at each spacing over a cubic region anchored at
// `origin` spanning at least `extent` per axis (node counts rounded up to
// powers of two) and compares against the direct pairwise total.
std::vector<ConvergenceRow> convergence_study(
    const Molecule& protein, const Molecule& ligand, const Vec3& origin,
    double extent, const std::vector<double>& spacings,
    DielectricMode dielectric = {}, UnitsMode units = UnitsMode::physical,
    double clamp_value = kDefaultClampKcal);

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows);

} // namespace qvs
