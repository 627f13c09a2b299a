#include "qvs/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qvs {

DirectEnergies direct_pairwise(const Molecule& protein, const Molecule& ligand,
                               DielectricMode dielectric, UnitsMode units) {
  const double prefactor = coulomb_prefactor(units);
  DirectEnergies out;
  for (std::size_t i = 0; i < protein.size(); ++i) {
    const Atom& p = protein.atoms()[i];
    for (std::size_t j = 0; j < ligand.size(); ++j) {
      const Atom& l = ligand.atoms()[j];
      const double d = distance(p.position, l.position);
      if (d == 0.0)
        throw std::runtime_error("coincident atoms: protein atom " +
                                 std::to_string(i) + " and ligand atom " +
                                 std::to_string(j));
      if (dielectric.kind == DielectricMode::Kind::vacuum)
        out.e_ele += prefactor * p.charge * l.charge / d;
      else
        out.e_ele += prefactor * p.charge * l.charge / (dielectric.slope * d * d);
      const double rmin = p.rmin_half + l.rmin_half;
      const double u = std::pow(rmin / d, 6);
      out.e_vdw += std::sqrt(p.epsilon * l.epsilon) * u * (u - 2.0);
    }
  }
  return out;
}

GridEnergies grid_inner_product(const PotentialMaps& maps,
                                const LigandGridVector& lig) {
  if (!(maps.grid == lig.grid))
    throw std::invalid_argument("grid mismatch between maps and deposit");
  const std::size_t n = maps.grid.num_nodes();
  GridEnergies out;
  for (std::size_t k = 0; k < n; ++k) out.e_ele += lig.q_grid[k] * maps.phi[k];
  out.e_vdw_by_type.resize(maps.evdw.size(), 0.0);
  if (lig.occupancy.size() != maps.evdw.size())
    throw std::invalid_argument("type count mismatch between maps and deposit");
  for (std::size_t t = 0; t < maps.evdw.size(); ++t)
    for (std::size_t k = 0; k < n; ++k)
      out.e_vdw_by_type[t] += lig.occupancy[t][k] * maps.evdw[t][k];
  return out;
}

OracleReport oracle_report(const Molecule& protein, const Molecule& ligand,
                           const PotentialMaps& maps, const LigandGridVector& lig,
                           DielectricMode dielectric, UnitsMode units) {
  OracleReport rep;
  rep.direct = direct_pairwise(protein, ligand, dielectric, units);
  rep.grid = grid_inner_product(maps, lig);
  const double direct_total = rep.direct.e_ele + rep.direct.e_vdw;
  rep.delta_abs = std::abs(rep.grid.total() - direct_total);
  if (std::abs(direct_total) > 1e-12) {
    rep.delta_rel = rep.delta_abs / std::abs(direct_total);
    rep.rel_defined = true;
  }
  return rep;
}

std::vector<ConvergenceRow> convergence_study(
    const Molecule& protein, const Molecule& ligand, const Vec3& origin,
    double extent, const std::vector<double>& spacings, DielectricMode dielectric,
    UnitsMode units, double clamp_value) {
  if (!(extent > 0.0)) throw std::invalid_argument("extent must be positive");
  const DirectEnergies direct = direct_pairwise(protein, ligand, dielectric, units);
  const double direct_total = direct.e_ele + direct.e_vdw;
  const AtomTypeRegistry registry = AtomTypeRegistry::from_ligand(ligand);

  std::vector<ConvergenceRow> rows;
  for (double s : spacings) {
    if (!(s > 0.0)) throw std::invalid_argument("spacing must be positive");
    int n = 2;
    while (double(n - 1) * s < extent) n *= 2;
    GridSpec grid{origin, s, {n, n, n}};
    const auto maps =
        build_potential_maps(protein, registry, grid, dielectric, units, clamp_value);
    const auto lig = deposit_ligand(ligand, registry, grid);
    const auto grid_e = grid_inner_product(maps, lig);

    ConvergenceRow row;
    row.spacing = s;
    row.grid_total = grid_e.total();
    row.direct_total = direct_total;
    row.rel_error = std::abs(direct_total) > 1e-12
                        ? std::abs(row.grid_total - direct_total) / std::abs(direct_total)
                        : std::abs(row.grid_total - direct_total);
    rows.push_back(row);
  }
  return rows;
}

std::string format_convergence_table(const std::vector<ConvergenceRow>& rows) {
  std::string out =
      "  spacing(A)          grid E          direct E       rel error\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%10.4f %17.9e %17.9e %15.6e\n", r.spacing,
                  r.grid_total, r.direct_total, r.rel_error);
    out += buf;
  }
  return out;
}

} // namespace qvs
