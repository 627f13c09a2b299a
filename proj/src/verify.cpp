#include "qvs/verify.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "qvs/circuits.hpp"
#include "qvs/oracle.hpp"
#include "qvs/random_systems.hpp"
#include "qvs/simulator.hpp"

namespace qvs {

namespace {

std::vector<double> random_unit_row(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> row(dim);
  double sq = 0.0;
  for (auto& v : row) {
    v = n(rng);
    sq += v * v;
  }
  for (auto& v : row) v /= std::sqrt(sq);
  return row;
}

// ||U^T U - I||_max through the Gram matrix, accumulated row by row.
double unitarity_defect(const std::vector<double>& dense, std::size_t d) {
  std::vector<double> gram(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    const double* row = dense.data() + k * d;
    for (std::size_t i = 0; i < d; ++i) {
      const double r = row[i];
      if (r == 0.0) continue;
      double* g = gram.data() + i * d;
      for (std::size_t j = 0; j < d; ++j) g[j] += r * row[j];
    }
  }
  double defect = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      defect = std::max(defect,
                        std::abs(gram[i * d + j] - (i == j ? 1.0 : 0.0)));
  return defect;
}

const GridSpec kPlane{{0, 0, 0}, 1.0, {4, 4, 1}};

constexpr int kShiftRightGrid[4][4] = {
    {3, 0, 1, 2}, {7, 4, 5, 6}, {11, 8, 9, 10}, {15, 12, 13, 14}};
constexpr int kShiftDownGrid[4][4] = {
    {12, 13, 14, 15}, {0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}};
constexpr int kRotateCwGrid[4][4] = {
    {12, 8, 4, 0}, {13, 9, 5, 1}, {14, 10, 6, 2}, {15, 11, 7, 3}};

bool dense_matches_grid(const std::vector<double>& dense, const int grid[4][4]) {
  std::vector<double> expected(16 * 16, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) expected[(4 * r + c) * 16 + grid[r][c]] = 1.0;
  return dense == expected;
}

} // namespace

CheckResult check_first_row_unitarity(int n_rows, int min_dim_bits,
                                      int max_dim_bits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CheckResult out;
  out.name = "first-row unitarity (" + std::to_string(n_rows) + " rows, dims " +
             std::to_string(1 << min_dim_bits) + "-" +
             std::to_string(1 << max_dim_bits) + ")";
  double worst = 0.0;
  for (int i = 0; i < n_rows; ++i) {
    const int bits =
        min_dim_bits + int(rng() % std::uint64_t(max_dim_bits - min_dim_bits + 1));
    const std::size_t dim = std::size_t(1) << bits;
    const auto row = random_unit_row(rng, dim);
    for (auto backend : {FirstRowBackend::householder, FirstRowBackend::ry_tree}) {
      const FirstRowUnitary u(row, backend);
      const auto dense = u.dense();
      worst = std::max(worst, unitarity_defect(dense, dim));
      const double sign = u.global_sign();
      for (std::size_t j = 0; j < dim; ++j)
        worst = std::max(worst, std::abs(dense[j] - sign * row[j]));
    }
  }
  out.deviation = worst;
  out.pass = worst < 1e-10;
  out.detail = "max deviation " + std::to_string(worst);
  return out;
}

CheckResult check_paper_matrices() {
  CheckResult out;
  out.name = "worked 2D shift/rotation matrices (exact)";
  const auto tx = make_shift_operator(Axis::x, 1, kPlane, 0)->dense();
  const auto ty = make_shift_operator(Axis::y, 1, kPlane, 0)->dense();
  const auto rz = make_rotation_operator(Axis::z, 1, kPlane, 0)->dense();

  bool ok = dense_matches_grid(tx, kShiftRightGrid);
  ok = ok && dense_matches_grid(ty, kShiftDownGrid);
  ok = ok && dense_matches_grid(rz, kRotateCwGrid);

  // The printed rotation matrix in the source material is the
  // counterclockwise relabeling (x, y) -> (y, 3 - x); our clockwise operator
  // must equal its transpose: R[i][j] == CCW[j][i].
  std::vector<double> ccw(16 * 16, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) ccw[(4 * (3 - x) + y) * 16 + (4 * y + x)] = 1.0;
  for (int i = 0; i < 16 && ok; ++i)
    for (int j = 0; j < 16 && ok; ++j) ok = rz[i * 16 + j] == ccw[j * 16 + i];

  out.pass = ok;
  out.deviation = ok ? 0.0 : 1.0;
  out.detail = ok ? "matrix identical" : "matrix mismatch";
  return out;
}

CheckResult check_group_laws(int max_grid_bits) {
  CheckResult out;
  out.name = "shift group law and rotation periodicity (exact, dense up to 2^" +
             std::to_string(max_grid_bits) + ")";
  bool ok = true;

  // Shifts on an anisotropic grid filling max_grid_bits qubits.
  const int nx = 1 << (max_grid_bits - 4);
  GridSpec grid{{0, 0, 0}, 1.0, {nx, 8, 2}};
  for (int a = 0; a < nx && ok; a += std::max(1, nx / 8))
    for (int b = 0; b < nx && ok; b += std::max(1, nx / 8)) {
      const auto ta = make_shift_operator(Axis::x, a, grid, 0)->dense();
      const auto tb = make_shift_operator(Axis::x, b, grid, 0)->dense();
      const auto tab =
          make_shift_operator(Axis::x, (a + b) % nx, grid, 0)->dense();
      const std::size_t d = grid.num_nodes();
      // Integer permutation product, exact comparison.
      for (std::size_t i = 0; i < d && ok; ++i)
        for (std::size_t j = 0; j < d && ok; ++j) {
          double prod = 0.0;
          for (std::size_t k = 0; k < d; ++k)
            prod += ta[i * d + k] * tb[k * d + j];
          ok = prod == tab[i * d + j];
        }
    }

  GridSpec cube{{0, 0, 0}, 1.0, {8, 8, 4}};
  for (Axis axis : {Axis::z}) {
    const auto r = make_rotation_operator(axis, 1, cube, 0)->dense();
    const std::size_t d = cube.num_nodes();
    std::vector<double> power(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) power[i * d + i] = 1.0;
    for (int q = 0; q < 4; ++q) {
      std::vector<double> next(d * d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
          if (r[i * d + k] == 0.0) continue;
          for (std::size_t j = 0; j < d; ++j)
            next[i * d + j] += r[i * d + k] * power[k * d + j];
        }
      power = std::move(next);
    }
    for (std::size_t i = 0; i < d && ok; ++i)
      for (std::size_t j = 0; j < d && ok; ++j)
        ok = power[i * d + j] == (i == j ? 1.0 : 0.0);
  }

  out.pass = ok;
  out.deviation = ok ? 0.0 : 1.0;
  out.detail = ok ? "exact" : "violation found";
  return out;
}

CheckResult check_pipeline_vs_oracle(int n_systems, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  CheckResult out;
  out.name = "pipeline vs classical oracle (" + std::to_string(n_systems) +
             " random systems)";
  RandomSystemSpec spec;
  double worst = 0.0;
  bool ok = true;
  for (int i = 0; i < n_systems; ++i) {
    const auto sys = make_random_system(rng, spec);
    const auto reg = AtomTypeRegistry::from_ligand(sys.ligand);
    const auto maps =
        build_potential_maps(sys.protein, reg, sys.grid, {}, UnitsMode::physical);
    const auto lig = deposit_ligand(sys.ligand, reg, sys.grid);
    const auto problem = assemble_o_grid(maps, lig, 0.0);
    const auto rep = run_pipeline(problem, maps);
    const double expected = grid_inner_product(maps, lig).total();
    const double delta = std::abs(rep.e_total - expected);
    const double tol = std::max(1e-9 * std::abs(expected), 1e-12);
    worst = std::max(worst, delta);
    ok = ok && delta <= tol;
  }
  out.pass = ok;
  out.deviation = worst;
  out.detail = "max |pipeline - oracle| = " + std::to_string(worst);
  return out;
}

CheckResult check_maps_file_consistency(const Molecule& protein,
                                        const AtomTypeRegistry& registry,
                                        const PotentialMaps& stored,
                                        const LigandGridVector& lig,
                                        DielectricMode dielectric,
                                        UnitsMode units) {
  CheckResult out;
  out.name = "map file consistency vs rebuilt maps";
  const auto rebuilt = build_potential_maps(protein, registry, stored.grid,
                                            dielectric, units, stored.clamp_value);
  double worst = 0.0;
  for (std::size_t k = 0; k < rebuilt.phi.size(); ++k)
    worst = std::max(worst, std::abs(rebuilt.phi[k] - stored.phi[k]));
  for (std::size_t t = 0; t < rebuilt.evdw.size(); ++t) {
    if (t >= stored.evdw.size()) {
      worst = std::numeric_limits<double>::infinity();
      break;
    }
    for (std::size_t k = 0; k < rebuilt.evdw[t].size(); ++k)
      worst = std::max(worst, std::abs(rebuilt.evdw[t][k] - stored.evdw[t][k]));
  }

  // Pipeline on the stored maps vs oracle on the rebuilt maps.
  const auto problem = assemble_o_grid(stored, lig, 0.0);
  const auto rep = run_pipeline(problem, stored);
  const double expected = grid_inner_product(rebuilt, lig).total();
  const double delta = std::abs(rep.e_total - expected);
  const double tol = std::max(1e-9 * std::abs(expected), 1e-12);

  out.deviation = std::max(worst, delta);
  out.pass = worst <= 1e-12 && delta <= tol;
  out.detail = "max map delta " + std::to_string(worst) +
               ", pipeline-oracle delta " + std::to_string(delta);
  return out;
}

std::vector<CheckResult> run_default_checks(std::uint64_t seed) {
  std::vector<CheckResult> checks;
  checks.push_back(check_first_row_unitarity(20, 2, 8, seed));
  checks.push_back(check_paper_matrices());
  checks.push_back(check_group_laws(8));
  checks.push_back(check_pipeline_vs_oracle(10, seed + 1));
  return checks;
}

} // namespace qvs
