#include "qvs/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qvs {

namespace {

bool is_power_of_two(std::size_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(std::size_t v) {
  int b = 0;
  while ((std::size_t(1) << b) < v) ++b;
  return b;
}

double clamp_entry(double v, double clamp_value) {
  return std::clamp(v, -clamp_value, clamp_value);
}

} // namespace

void GridSpec::validate() const {
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("grid spacing must be positive");
  for (double c : origin)
    if (!std::isfinite(c)) throw std::invalid_argument("grid origin must be finite");
  for (int d : dims)
    if (d < 1 || !is_power_of_two(std::size_t(d)))
      throw std::invalid_argument("grid dims must be powers of two >= 1");
  if (num_nodes() < 2)
    throw std::invalid_argument("grid must have at least 2 nodes");
}

int GridSpec::bits(Axis a) const { return log2_exact(std::size_t(dim(a))); }

int GridSpec::geometry_bits() const {
  return bits(Axis::x) + bits(Axis::y) + bits(Axis::z);
}

std::array<int, 3> GridSpec::node_coords(std::size_t k) const {
  const int x = int(k % dims[0]);
  const int y = int((k / dims[0]) % dims[1]);
  const int z = int(k / (std::size_t(dims[0]) * dims[1]));
  return {x, y, z};
}

Vec3 GridSpec::node_position(int x, int y, int z) const {
  return {origin[0] + spacing * x, origin[1] + spacing * y,
          origin[2] + spacing * z};
}

std::vector<double> build_phi_map(const Molecule& protein, const GridSpec& grid,
                                  DielectricMode dielectric, UnitsMode units,
                                  double clamp_value) {
  grid.validate();
  if (protein.empty()) throw std::invalid_argument("protein has no atoms");
  const bool clamping = std::isfinite(clamp_value);
  const double prefactor = coulomb_prefactor(units);
  const std::size_t n = grid.num_nodes();

  std::vector<double> phi(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [x, y, z] = grid.node_coords(k);
    const Vec3 rk = grid.node_position(x, y, z);
    double v = 0.0;
    for (std::size_t i = 0; i < protein.size(); ++i) {
      const Atom& a = protein.atoms()[i];
      const double d = distance(a.position, rk);
      if (d == 0.0 && !clamping)
        throw std::runtime_error("singular electrostatic potential: atom " +
                                 std::to_string(i) + " coincides with grid node " +
                                 std::to_string(k));
      double term;
      if (dielectric.kind == DielectricMode::Kind::vacuum)
        term = a.charge / d;
      else
        term = a.charge / (dielectric.slope * d * d);
      v += prefactor * term;
    }
    phi[k] = clamping ? clamp_entry(v, clamp_value) : v;
  }
  return phi;
}

std::vector<std::vector<double>> build_evdw_map(const Molecule& protein,
                                                const AtomTypeRegistry& registry,
                                                const GridSpec& grid,
                                                double clamp_value) {
  grid.validate();
  if (protein.empty()) throw std::invalid_argument("protein has no atoms");
  const bool clamping = std::isfinite(clamp_value);
  const std::size_t n = grid.num_nodes();

  std::vector<std::vector<double>> evdw(registry.size(),
                                        std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < registry.size(); ++t) {
    const AtomType& type = registry.type(t);
    for (std::size_t k = 0; k < n; ++k) {
      const auto [x, y, z] = grid.node_coords(k);
      const Vec3 rk = grid.node_position(x, y, z);
      double v = 0.0;
      for (std::size_t i = 0; i < protein.size(); ++i) {
        const Atom& a = protein.atoms()[i];
        const double d = distance(a.position, rk);
        if (d == 0.0 && !clamping)
          throw std::runtime_error("singular van der Waals potential: atom " +
                                   std::to_string(i) +
                                   " coincides with grid node " + std::to_string(k));
        const double rmin = a.rmin_half + type.rmin_half;
        const double u = std::pow(rmin / d, 6); // inf at d=0, never NaN
        v += std::sqrt(a.epsilon * type.epsilon) * u * (u - 2.0);
      }
      evdw[t][k] = clamping ? clamp_entry(v, clamp_value) : v;
    }
  }
  return evdw;
}

PotentialMaps build_potential_maps(const Molecule& protein,
                                   const AtomTypeRegistry& registry,
                                   const GridSpec& grid, DielectricMode dielectric,
                                   UnitsMode units, double clamp_value) {
  PotentialMaps maps;
  maps.grid = grid;
  maps.phi = build_phi_map(protein, grid, dielectric, units, clamp_value);
  maps.evdw = build_evdw_map(protein, registry, grid, clamp_value);
  maps.clamp_value = clamp_value;
  return maps;
}

LigandGridVector deposit_ligand(const Molecule& ligand,
                                const AtomTypeRegistry& registry,
                                const GridSpec& grid) {
  grid.validate();
  if (ligand.empty()) throw std::invalid_argument("ligand has no atoms");
  const auto type_of = registry.assign(ligand);

  LigandGridVector out;
  out.grid = grid;
  out.q_grid.assign(grid.num_nodes(), 0.0);
  out.occupancy.assign(registry.size(),
                       std::vector<double>(grid.num_nodes(), 0.0));

  for (std::size_t i = 0; i < ligand.size(); ++i) {
    const Atom& a = ligand.atoms()[i];
    // Fractional node coordinates; the atom must sit strictly inside the
    // outermost cell boundary so all 8 enclosing nodes exist.
    int cell[3];
    double frac[3];
    for (int ax = 0; ax < 3; ++ax) {
      const double t = (a.position[ax] - grid.origin[ax]) / grid.spacing;
      const int n_ax = grid.dims[ax];
      if (n_ax == 1) {
        // Degenerate axis: the atom must lie on the single plane.
        if (t != 0.0)
          throw std::runtime_error(
              "ligand atom " + std::to_string(i) + " at (" +
              std::to_string(a.position[0]) + ", " + std::to_string(a.position[1]) +
              ", " + std::to_string(a.position[2]) +
              ") is off the degenerate grid plane");
        cell[ax] = 0;
        frac[ax] = 0.0;
        continue;
      }
      if (!(t >= 0.0) || !(t < double(n_ax - 1)))
        throw std::runtime_error("ligand atom " + std::to_string(i) + " at (" +
                                 std::to_string(a.position[0]) + ", " +
                                 std::to_string(a.position[1]) + ", " +
                                 std::to_string(a.position[2]) +
                                 ") lies outside the grid");
      cell[ax] = int(std::floor(t));
      frac[ax] = t - cell[ax];
    }

    for (int cz = 0; cz < 2; ++cz)
      for (int cy = 0; cy < 2; ++cy)
        for (int cx = 0; cx < 2; ++cx) {
          if ((cx && grid.dims[0] == 1) || (cy && grid.dims[1] == 1) ||
              (cz && grid.dims[2] == 1))
            continue;
          const double w = (cx ? frac[0] : 1.0 - frac[0]) *
                           (cy ? frac[1] : 1.0 - frac[1]) *
                           (cz ? frac[2] : 1.0 - frac[2]);
          if (w == 0.0) continue;
          const std::size_t k =
              grid.node_index(cell[0] + cx, cell[1] + cy, cell[2] + cz);
          out.q_grid[k] += w * a.charge;
          out.occupancy[type_of[i]][k] += w;
        }
  }
  return out;
}

int grid_guard_margin(const LigandGridVector& lig, Axis axis, bool* degenerate) {
  const GridSpec& grid = lig.grid;
  const int n_axis = grid.dim(axis);

  auto plane_is_zero = [&](int plane) {
    for (std::size_t k = 0; k < grid.num_nodes(); ++k) {
      const auto c = grid.node_coords(k);
      if (c[static_cast<int>(axis)] != plane) continue;
      if (lig.q_grid[k] != 0.0) return false;
      for (const auto& occ : lig.occupancy)
        if (occ[k] != 0.0) return false;
    }
    return true;
  };

  int leading = 0;
  while (leading < n_axis && plane_is_zero(leading)) ++leading;
  if (leading == n_axis) {
    if (degenerate) *degenerate = true;
    return n_axis / 2;
  }
  if (degenerate) *degenerate = false;
  int trailing = 0;
  while (trailing < n_axis && plane_is_zero(n_axis - 1 - trailing)) ++trailing;
  return std::min(leading, trailing);
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("map file: missing '" + key + "' line");
  std::istringstream ss(line);
  std::string k;
  ss >> k;
  if (k != key)
    throw std::runtime_error("map file: expected '" + key + "', got '" + k + "'");
  std::string rest;
  std::getline(ss, rest);
  return rest;
}

double read_value_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(std::string("map file: truncated ") + what);
  std::istringstream ss(line);
  double v;
  if (!(ss >> v))
    throw std::runtime_error(std::string("map file: bad ") + what + " line '" +
                             line + "'");
  return v;
}

} // namespace

void write_maps(std::ostream& out, const PotentialMaps& maps) {
  const GridSpec& g = maps.grid;
  out << "origin " << g17(g.origin[0]) << " " << g17(g.origin[1]) << " "
      << g17(g.origin[2]) << "\n";
  out << "spacing " << g17(g.spacing) << "\n";
  out << "dims " << g.dims[0] << " " << g.dims[1] << " " << g.dims[2] << "\n";
  out << "clamp " << g17(maps.clamp_value) << "\n";
  out << "types " << maps.evdw.size() << "\n";
  for (double v : maps.phi) out << g17(v) << "\n";
  for (const auto& map : maps.evdw)
    for (double v : map) out << g17(v) << "\n";
}

PotentialMaps read_maps(std::istream& in) {
  PotentialMaps maps;
  {
    std::istringstream ss(expect_line(in, "origin"));
    if (!(ss >> maps.grid.origin[0] >> maps.grid.origin[1] >> maps.grid.origin[2]))
      throw std::runtime_error("map file: bad origin line");
  }
  {
    std::istringstream ss(expect_line(in, "spacing"));
    if (!(ss >> maps.grid.spacing))
      throw std::runtime_error("map file: bad spacing line");
  }
  {
    std::istringstream ss(expect_line(in, "dims"));
    if (!(ss >> maps.grid.dims[0] >> maps.grid.dims[1] >> maps.grid.dims[2]))
      throw std::runtime_error("map file: bad dims line");
  }
  std::size_t n_types = 0;
  {
    std::istringstream ss(expect_line(in, "clamp"));
    if (!(ss >> maps.clamp_value))
      throw std::runtime_error("map file: bad clamp line");
  }
  {
    std::istringstream ss(expect_line(in, "types"));
    if (!(ss >> n_types)) throw std::runtime_error("map file: bad types line");
  }
  maps.grid.validate();
  const std::size_t n = maps.grid.num_nodes();
  maps.phi.resize(n);
  for (std::size_t k = 0; k < n; ++k) maps.phi[k] = read_value_line(in, "phi");
  maps.evdw.assign(n_types, std::vector<double>(n));
  for (std::size_t t = 0; t < n_types; ++t)
    for (std::size_t k = 0; k < n; ++k)
      maps.evdw[t][k] = read_value_line(in, "evdw");
  return maps;
}

void save_maps_file(const std::string& path, const PotentialMaps& maps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write map file '" + path + "'");
  write_maps(out, maps);
}

PotentialMaps load_maps_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file '" + path + "'");
  return read_maps(in);
}

} // namespace qvs
