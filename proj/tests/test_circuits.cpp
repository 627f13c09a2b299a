#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qvs/circuits.hpp"
#include "qvs/gatelist.hpp"

using namespace qvs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> random_unit_row(std::mt19937_64& rng, std::size_t dim,
                                    bool with_zeros = false) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> row(dim);
  for (auto& v : row) v = n(rng);
  if (with_zeros)
    for (std::size_t i = 0; i < dim; i += 3) row[i] = 0.0;
  double sq = 0.0;
  for (double v : row) sq += v * v;
  for (auto& v : row) v /= std::sqrt(sq);
  return row;
}

double max_unitarity_defect(const std::vector<double>& dense, std::size_t d) {
  double defect = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < d; ++k) g += dense[k * d + i] * dense[k * d + j];
      defect = std::max(defect, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  return defect;
}

// 2D 4x4 layout used by the worked examples: index = 4*y + x.
const GridSpec kPlane{{0, 0, 0}, 1.0, {4, 4, 1}};

// Relabeled grids from the worked examples; cell (row, col) holds the old
// index now sitting at that position.
constexpr int kShiftRightGrid[4][4] = {
    {3, 0, 1, 2}, {7, 4, 5, 6}, {11, 8, 9, 10}, {15, 12, 13, 14}};
constexpr int kShiftDownGrid[4][4] = {
    {12, 13, 14, 15}, {0, 1, 2, 3}, {4, 5, 6, 7}, {8, 9, 10, 11}};
constexpr int kRotateCwGrid[4][4] = {
    {12, 8, 4, 0}, {13, 9, 5, 1}, {14, 10, 6, 2}, {15, 11, 7, 3}};

std::vector<double> matrix_from_grid(const int grid[4][4]) {
  std::vector<double> m(16 * 16, 0.0);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[(4 * r + c) * 16 + grid[r][c]] = 1.0;
  return m;
}

// Hand-built problem on a grid: block values chosen directly.
EncodedProblem make_plane_problem() {
  EncodedProblem p;
  p.grid = kPlane;
  p.nt = 1;
  p.ng = 4;
  p.n_types = 1;
  p.o_grid.assign(32, 0.0);
  // Support on the middle 2x2 so every axis has margin >= 1.
  p.o_grid[4 * 1 + 1] = 0.3;
  p.o_grid[4 * 1 + 2] = -0.2;
  p.o_grid[4 * 2 + 1] = 0.5;
  p.o_grid[16 + 4 * 2 + 2] = 0.7;
  double sq = 0.0;
  for (double v : p.o_grid) sq += v * v;
  p.l_type = std::sqrt(sq);
  p.phi_norm = 1.0;
  p.evdw_norms = {1.0};
  return p;
}

} // namespace

TEST_CASE("first-row unitary: e1 gives the identity on both backends") {
  std::vector<double> e1{1.0, 0.0, 0.0, 0.0};
  for (auto backend : {FirstRowBackend::householder, FirstRowBackend::ry_tree}) {
    const FirstRowUnitary u(e1, backend);
    CHECK(u.is_identity());
    CHECK(u.global_sign() == 1);
    const auto d = u.dense();
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        CHECK(d[i * 4 + j] == (i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("first-row unitary: [0.6, 0.8] householder reflection") {
  const FirstRowUnitary u({0.6, 0.8}, FirstRowBackend::householder);
  const auto d = u.dense();
  CHECK(d[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(d[2] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(d[3] == doctest::Approx(-0.6).epsilon(1e-15));
}

TEST_CASE("first-row unitary rejects bad inputs") {
  CHECK_THROWS_AS(FirstRowUnitary({0.5, 0.5}, FirstRowBackend::householder),
                  std::invalid_argument);
  CHECK_THROWS_AS(FirstRowUnitary({1.0, 0.0, 0.0}, FirstRowBackend::householder),
                  std::invalid_argument);
}

TEST_CASE("first-row unitary: random rows pass unitarity and row checks") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t dim = std::size_t(1) << (2 + trial % 4);
    const auto row = random_unit_row(rng, dim, trial % 2 == 1);

    const FirstRowUnitary hh(row, FirstRowBackend::householder);
    const auto dh = hh.dense();
    CHECK(max_unitarity_defect(dh, dim) < 1e-10);
    for (std::size_t j = 0; j < dim; ++j)
      CHECK(dh[j] == doctest::Approx(row[j]).epsilon(1e-10));

    const FirstRowUnitary ry(row, FirstRowBackend::ry_tree);
    const auto dr = ry.dense();
    CHECK(max_unitarity_defect(dr, dim) < 1e-10);
    const double s = ry.global_sign();
    for (std::size_t j = 0; j < dim; ++j) {
      CHECK(dr[j] == doctest::Approx(s * row[j]).epsilon(1e-10));
      // Backends agree on the first row up to the reported sign.
      CHECK(dr[j] * s == doctest::Approx(dh[j]).epsilon(1e-10));
    }
  }
}

TEST_CASE("ry tree reports a negative global sign when the row leads negative") {
  const FirstRowUnitary u({-0.6, 0.8}, FirstRowBackend::ry_tree);
  CHECK(u.global_sign() == -1);
  const auto d = u.dense();
  CHECK(d[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(d[1] == doctest::Approx(-0.8).epsilon(1e-12));
}

TEST_CASE("ry tree emits no gates for [1, 0] and three RY gates for dim 4") {
  const FirstRowUnitary trivial({1.0, 0.0}, FirstRowBackend::ry_tree);
  CHECK(trivial.gates().gates.empty());

  std::mt19937_64 rng(5);
  const auto row = random_unit_row(rng, 4);
  const FirstRowUnitary u(row, FirstRowBackend::ry_tree);
  REQUIRE(u.gates().gates.size() == 3);
  // Reversed tree: the two controlled leaf-level gates come first, the
  // uncontrolled root gate last.
  CHECK(u.gates().gates[0].controls.size() == 1);
  CHECK(u.gates().gates[1].controls.size() == 1);
  CHECK(u.gates().gates[2].controls.empty());
}

TEST_CASE("gate list applies x, h, and controlled gates") {
  GateList list;
  list.n_qubits = 2;
  list.gates.push_back(Gate::make_x(0));
  list.gates.push_back(Gate::make_h(1));
  list.gates.push_back(Gate::make_x(1, {{0, 1}})); // CNOT 0 -> 1
  list.validate();
  std::vector<double> state{1.0, 0.0, 0.0, 0.0};
  list.apply(state);
  // X|00> = |01>; H on qubit 1: (|01> + |11>)/sqrt2; CNOT(0->1): (|01> + |11>)
  // stays a swap of the pair -> same set here.
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(state[1] == doctest::Approx(r).epsilon(1e-15));
  CHECK(state[3] == doctest::Approx(r).epsilon(1e-15));

  // Round-trip through JSON preserves every gate kind.
  const GateList round = GateList::from_json(list.to_json());
  CHECK(round.gates.size() == 3);
  CHECK(round.gates[2].controls.size() == 1);
}

TEST_CASE("gate list validation rejects bad structures") {
  GateList list;
  list.n_qubits = 2;
  list.gates.push_back(Gate::make_ry(0.5, 3));
  CHECK_THROWS_AS(list.validate(), std::invalid_argument);

  GateList overlap;
  overlap.n_qubits = 4;
  overlap.gates.push_back(
      Gate::make_perm("grid", 0, 2, {{0, 1}, {1, 2}})); // 1 repeats
  CHECK_THROWS_WITH_AS(overlap.validate(), doctest::Contains("disjoint"),
                       std::invalid_argument);
}

TEST_CASE("gate list JSON round-trip replays identically") {
  std::mt19937_64 rng(43);
  const auto row = random_unit_row(rng, 32);
  const FirstRowUnitary u(row, FirstRowBackend::ry_tree);
  const GateList round = GateList::from_json(u.gates().to_json());

  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> state(32);
    for (auto& v : state) v = n(rng);
    auto a = state;
    auto b = state;
    u.apply_in_place(a);
    round.apply(b);
    for (std::size_t i = 0; i < state.size(); ++i)
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("conformation batch wrapper stacks problems and pads with zeros") {
  const auto p = make_plane_problem();
  auto q = p;
  for (double& v : q.o_grid) v *= 0.5;
  q.l_type *= 0.5;

  // 1x2 ligand conformations, single protein conformation, no poses.
  const auto batch = make_conformation_batch({}, {{&p, &q}});
  CHECK(batch.layout.nlc == 1);
  CHECK(batch.layout.nrc == 0);
  const double l = std::sqrt(p.l_type * p.l_type + q.l_type * q.l_type);
  CHECK(batch.l_norm == doctest::Approx(l).epsilon(1e-14));
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(batch.input[i] == doctest::Approx(p.o_grid[i] / l).epsilon(1e-14));
    CHECK(batch.input[32 + i] == doctest::Approx(q.o_grid[i] / l).epsilon(1e-14));
  }
  CHECK_FALSE(batch.pair_padded(0, 0));

  // Three ligand conformations pad to four; the padded slot stays zero.
  const auto padded = make_conformation_batch({}, {{&p, &q, &p}});
  CHECK(padded.layout.nlc == 2);
  CHECK(padded.pair_padded(0, 3));
  for (std::size_t i = 0; i < 32; ++i) CHECK(padded.input[3 * 32 + i] == 0.0);
}

TEST_CASE("U_grid block structure and padding") {
  GridSpec grid{{0, 0, 0}, 1.0, {2, 2, 2}};
  PotentialMaps maps;
  maps.grid = grid;
  maps.phi = {0.5, 0.25, 0.2, 0.1, 0.4, 0.3, 0.2, 0.6};
  maps.evdw.assign(1, std::vector<double>(8, -0.25));

  LigandGridVector lig;
  lig.grid = grid;
  lig.q_grid.assign(8, 0.0);
  lig.q_grid[0] = 1.0;
  lig.occupancy.assign(1, std::vector<double>(8, 0.0));
  lig.occupancy[0][0] = 1.0;

  RegisterSizing minimal;
  minimal.nt = 1;
  const auto p1 = assemble_o_grid(maps, lig, 0.0, minimal);
  const UGridOp u1(p1, maps, FirstRowBackend::householder);
  CHECK(u1.n_blocks() == 2);
  CHECK(u1.block(0) != nullptr);
  CHECK(u1.block(1) != nullptr);

  const auto p2 = assemble_o_grid(maps, lig, 0.0); // auto nt = 2
  const UGridOp u2(p2, maps, FirstRowBackend::householder);
  CHECK(u2.n_blocks() == 4);
  CHECK(u2.block(2) == nullptr);
  CHECK(u2.block(3) == nullptr);

  // A zero map block also collapses to the identity.
  auto maps_zero = maps;
  maps_zero.evdw[0].assign(8, 0.0);
  const auto p3 = assemble_o_grid(maps_zero, lig, 0.0);
  const UGridOp u3(p3, maps_zero, FirstRowBackend::householder);
  CHECK(u3.block(1) == nullptr);
}

TEST_CASE("U_grid puts each block energy at the block's first position") {
  GridSpec grid{{0, 0, 0}, 1.0, {2, 2, 2}};
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u01(0.1, 1.0);
  PotentialMaps maps;
  maps.grid = grid;
  maps.phi.resize(8);
  for (auto& v : maps.phi) v = u01(rng) - 0.4;
  maps.evdw.assign(2, std::vector<double>(8));
  for (auto& m : maps.evdw)
    for (auto& v : m) v = u01(rng) - 0.6;

  LigandGridVector lig;
  lig.grid = grid;
  lig.q_grid.resize(8);
  for (auto& v : lig.q_grid) v = u01(rng) - 0.5;
  lig.occupancy.assign(2, std::vector<double>(8));
  for (auto& m : lig.occupancy)
    for (auto& v : m) v = u01(rng);

  const auto p = assemble_o_grid(maps, lig, 0.0);
  // Independent oracle: plain dot products per block.
  double e_ele = 0.0, e_v0 = 0.0, e_v1 = 0.0;
  for (int k = 0; k < 8; ++k) {
    e_ele += maps.phi[k] * lig.q_grid[k];
    e_v0 += maps.evdw[0][k] * lig.occupancy[0][k];
    e_v1 += maps.evdw[1][k] * lig.occupancy[1][k];
  }

  for (auto backend : {FirstRowBackend::householder, FirstRowBackend::ry_tree}) {
    // Sign-flipped ry blocks are compensated inside U_grid, so both backends
    // put the exact block energy at the block's first position.
    const UGridOp u(p, maps, backend);
    std::vector<double> state = p.o_grid;
    for (auto& v : state) v /= p.l_type;
    u.apply_in_place(state);
    const std::size_t block = p.block_size();
    CHECK(state[0 * block] * p.l_type == doctest::Approx(e_ele).epsilon(1e-11));
    CHECK(state[1 * block] * p.l_type == doctest::Approx(e_v0).epsilon(1e-11));
    CHECK(state[2 * block] * p.l_type == doctest::Approx(e_v1).epsilon(1e-11));
  }
}

TEST_CASE("summation stage folds block firsts into index 0") {
  // nt = 1: state with block firsts (a, b) -> (a + b) / sqrt(2).
  HadamardLayer h1 = make_summation_stage(1, 2);
  std::vector<double> s1(8, 0.0);
  s1[0] = 0.6;
  s1[4] = 0.8;
  h1.apply_in_place(s1);
  CHECK(s1[0] == doctest::Approx((0.6 + 0.8) / std::sqrt(2.0)).epsilon(1e-15));

  // nt = 2: blocks (a, b, c, d) -> (a + b + c + d) / 2.
  HadamardLayer h2 = make_summation_stage(2, 1);
  std::vector<double> s2(8, 0.0);
  s2[0] = 0.1;
  s2[2] = 0.2;
  s2[4] = 0.3;
  s2[6] = 0.4;
  h2.apply_in_place(s2);
  CHECK(s2[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("x-shift by one matches the worked right-shift matrix exactly") {
  const auto op = make_shift_operator(Axis::x, 1, kPlane, 0);
  const auto dense = op->dense();
  const auto expected = matrix_from_grid(kShiftRightGrid);
  CHECK(dense == expected);
  CHECK(dense[0 * 16 + 3] == 1.0);
  CHECK(dense[1 * 16 + 0] == 1.0);
}

TEST_CASE("y-shift by one matches the worked down-shift matrix exactly") {
  const auto op = make_shift_operator(Axis::y, 1, kPlane, 0);
  const auto dense = op->dense();
  const auto expected = matrix_from_grid(kShiftDownGrid);
  CHECK(dense == expected);
  CHECK(dense[0 * 16 + 12] == 1.0);
}

TEST_CASE("zero shift is the identity") {
  const auto op = make_shift_operator(Axis::x, 0, kPlane, 0);
  const auto dense = op->dense();
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) CHECK(dense[i * 16 + j] == (i == j ? 1.0 : 0.0));
}

TEST_CASE("quarter turn matches the worked clockwise relabeling exactly") {
  const auto op = make_rotation_operator(Axis::z, 1, kPlane, 0);
  const auto dense = op->dense();
  const auto expected = matrix_from_grid(kRotateCwGrid);
  CHECK(dense == expected);
  // Cell (0,0) receives the original state 1100 (= 12).
  CHECK(dense[0 * 16 + 12] == 1.0);
}

TEST_CASE("quarter turn equals the transpose of the counterclockwise map") {
  // The printed matrix in the source material is the counterclockwise
  // relabeling; our clockwise operator must be its transpose.
  const auto op = make_rotation_operator(Axis::z, 1, kPlane, 0);
  const auto dense = op->dense();
  // Independent counterclockwise map: (x, y) -> (y, N-1-x).
  std::vector<double> ccw(16 * 16, 0.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const int old_k = 4 * y + x;
      const int new_k = 4 * (3 - x) + y;
      ccw[new_k * 16 + old_k] = 1.0;
    }
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) CHECK(dense[i * 16 + j] == ccw[j * 16 + i]);
}

TEST_CASE("shift group law and rotation periodicity") {
  GridSpec grid{{0, 0, 0}, 1.0, {8, 4, 2}};
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> state(grid.num_nodes());
  for (auto& v : state) v = n(rng);

  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      auto composed = state;
      make_shift_operator(Axis::x, a, grid, 0)->apply_in_place(composed);
      make_shift_operator(Axis::x, b, grid, 0)->apply_in_place(composed);
      auto direct = state;
      make_shift_operator(Axis::x, (a + b) % 8, grid, 0)->apply_in_place(direct);
      CHECK(composed == direct);
    }

  GridSpec cube{{0, 0, 0}, 1.0, {4, 4, 4}};
  std::vector<double> cstate(cube.num_nodes());
  for (auto& v : cstate) v = n(rng);
  for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
    auto four = cstate;
    const auto quarter = make_rotation_operator(axis, 1, cube, 0);
    for (int q = 0; q < 4; ++q) quarter->apply_in_place(four);
    CHECK(four == cstate);
    // R^3 = R^T = R^-1.
    auto inv = cstate;
    quarter->apply_in_place(inv);
    make_rotation_operator(axis, 3, cube, 0)->apply_in_place(inv);
    CHECK(inv == cstate);
  }
}

TEST_CASE("two quarter turns are the in-plane point reflection") {
  GridSpec cube{{0, 0, 0}, 1.0, {4, 4, 4}};
  const auto op = make_rotation_operator(Axis::z, 2, cube, 0);
  const auto& perm = op->perm_new_from_old();
  for (std::size_t k = 0; k < cube.num_nodes(); ++k) {
    const auto c = cube.node_coords(k);
    const std::size_t expected_new = cube.node_index(3 - c[0], 3 - c[1], c[2]);
    CHECK(perm[expected_new] == k);
  }
}

TEST_CASE("rotation requires equal in-plane dims") {
  GridSpec grid{{0, 0, 0}, 1.0, {8, 4, 2}};
  CHECK_THROWS_WITH_AS(make_rotation_operator(Axis::z, 1, grid, 0),
                       doctest::Contains("equal in-plane dims"),
                       std::invalid_argument);
}

TEST_CASE("shift permutations preserve the amplitude multiset and the norm") {
  GridSpec grid{{0, 0, 0}, 1.0, {4, 4, 4}};
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> state(grid.num_nodes());
  for (auto& v : state) v = n(rng);
  auto sorted_before = state;
  std::sort(sorted_before.begin(), sorted_before.end());
  auto shifted = state;
  make_shift_operator(Axis::y, 3, grid, 0)->apply_in_place(shifted);
  std::sort(shifted.begin(), shifted.end());
  CHECK(shifted == sorted_before);
}

TEST_CASE("permutations leave the grid-register padding fixed") {
  // ng one bit larger than the geometry: indices >= 16 must not move.
  const auto op = make_shift_operator(Axis::x, 1, kPlane, 0, 5);
  std::vector<double> state(32, 0.0);
  state[16] = 1.0; // offset-slot style padding entry
  state[31] = -2.0;
  auto moved = state;
  op->apply_in_place(moved);
  CHECK(moved == state);
}

TEST_CASE("shift operators embed above the type register") {
  // nt = 1 upper qubit: both type blocks see the same grid permutation.
  const auto op = make_shift_operator(Axis::x, 1, kPlane, 1);
  std::vector<double> state(32, 0.0);
  state[0] = 0.5;       // block 0, node 0
  state[16 + 4] = 1.5;  // block 1, node 4
  op->apply_in_place(state);
  CHECK(state[1] == 0.5);
  CHECK(state[16 + 5] == 1.5);
}

TEST_CASE("PERM gate export replays the permutation faithfully") {
  GridSpec grid{{0, 0, 0}, 1.0, {4, 4, 2}};
  const auto op = make_shift_operator(Axis::y, 1, grid, 0);
  GateList list;
  list.n_qubits = grid.geometry_bits();
  list.gates.push_back(Gate::make_perm("grid", 0, grid.geometry_bits(),
                                       op->cycles()));
  list.validate();

  std::mt19937_64 rng(53);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> state(grid.num_nodes());
    for (auto& v : state) v = n(rng);
    auto a = state;
    auto b = state;
    op->apply_in_place(a);
    list.apply(b);
    CHECK(a == b);
  }
}

TEST_CASE("controlled PERM gates replay the controlled permutation") {
  GridSpec grid{{0, 0, 0}, 1.0, {4, 4, 1}};
  const int ng = 4, total = 6; // one control qubit at 5, one spare at 4
  std::vector<std::vector<std::uint32_t>> perms{
      {}, GridPermutationOp::shift(grid, Axis::x, 1, ng, 0).perm_new_from_old()};
  const ControlledGridPermOp op("T~_x", grid, ng, total, 5, 1, std::move(perms));

  GateList list;
  list.n_qubits = total;
  for (auto& g : op.to_perm_gates()) list.gates.push_back(std::move(g));
  list.validate();
  REQUIRE(list.gates.size() == 1);
  REQUIRE(list.gates[0].controls.size() == 1);
  CHECK(list.gates[0].controls[0].qubit == 5);

  std::mt19937_64 rng(59);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> state(std::size_t(1) << total);
  for (auto& v : state) v = n(rng);
  auto a = state;
  auto b = state;
  op.apply_in_place(a);
  list.apply(b);
  CHECK(a == b);
}

TEST_CASE("translation batch: identity lists reproduce the problem vector") {
  const auto p = make_plane_problem();
  const auto batch = make_translation_batch(p, {0}, {0}, {0});
  CHECK(batch.layout.pose_bits() == 0);
  CHECK(batch.layout.total_qubits() == 5);
  REQUIRE(batch.input.size() == 32);
  for (std::size_t i = 0; i < 32; ++i)
    CHECK(batch.input[i] == doctest::Approx(p.o_grid[i] / p.l_type).epsilon(1e-14));
  CHECK(batch.l_norm == doctest::Approx(p.l_type).epsilon(1e-14));
}

TEST_CASE("translation batch: [0, 1] gives the worked sub-blocks") {
  const auto p = make_plane_problem();
  const auto batch = make_translation_batch(p, {0, 1}, {0}, {0});
  CHECK(batch.layout.ntx == 1);
  REQUIRE(batch.input.size() == 64);

  const double w = std::exp2(-0.5) / p.l_type;
  // tx = 0 sub-block: the unshifted vector.
  for (std::size_t i = 0; i < 32; ++i)
    CHECK(batch.input[i] == doctest::Approx(p.o_grid[i] * w).epsilon(1e-14));
  // tx = 1 sub-block: T_x^1 applied to each type block.
  const auto shift = make_shift_operator(Axis::x, 1, p.grid, 0, p.ng);
  for (std::size_t b = 0; b < 2; ++b) {
    std::vector<double> block(p.o_grid.begin() + b * 16,
                              p.o_grid.begin() + (b + 1) * 16);
    shift->apply_in_place(block);
    for (std::size_t k = 0; k < 16; ++k)
      CHECK(batch.input[32 + b * 16 + k] ==
            doctest::Approx(block[k] * w).epsilon(1e-14));
  }
}

TEST_CASE("translation batch rejects shifts beyond the guard margin") {
  const auto p = make_plane_problem(); // margin 1 on every axis
  CHECK_THROWS_WITH_AS(make_translation_batch(p, {0, 2}, {0}, {0}),
                       doctest::Contains("axis x"), std::runtime_error);
  CHECK_THROWS_WITH_AS(make_translation_batch(p, {0}, {0, -3}, {0}),
                       doctest::Contains("guard margin 1"), std::runtime_error);
  CHECK_NOTHROW(make_translation_batch(p, {0, 1}, {0, -1}, {0}));
}

TEST_CASE("rotation batch: [0, 1] gives the worked sub-blocks") {
  const auto p = make_plane_problem();
  const auto batch = make_rotation_batch(p, {0}, {0}, {0, 1});
  CHECK(batch.layout.nrz == 1);
  REQUIRE(batch.input.size() == 64);

  const double w = std::exp2(-0.5) / p.l_type;
  for (std::size_t i = 0; i < 32; ++i)
    CHECK(batch.input[i] == doctest::Approx(p.o_grid[i] * w).epsilon(1e-14));
  const auto rot = make_rotation_operator(Axis::z, 1, p.grid, 0, p.ng);
  for (std::size_t b = 0; b < 2; ++b) {
    std::vector<double> block(p.o_grid.begin() + b * 16,
                              p.o_grid.begin() + (b + 1) * 16);
    rot->apply_in_place(block);
    for (std::size_t k = 0; k < 16; ++k)
      CHECK(batch.input[32 + b * 16 + k] ==
            doctest::Approx(block[k] * w).epsilon(1e-14));
  }
}

TEST_CASE("all-zero turn lists build an identity batch") {
  const auto p = make_plane_problem();
  const auto batch = make_rotation_batch(p, {0, 0}, {0}, {0});
  CHECK(batch.pose_ops.empty()); // nothing to permute
  const double w = std::exp2(-0.5) / p.l_type;
  for (std::size_t i = 0; i < 32; ++i) {
    CHECK(batch.input[i] == doctest::Approx(p.o_grid[i] * w).epsilon(1e-14));
    CHECK(batch.input[32 + i] == doctest::Approx(p.o_grid[i] * w).epsilon(1e-14));
  }
}

TEST_CASE("pose lists pad to a power of two with identity entries") {
  const auto p = make_plane_problem();
  const auto batch = make_translation_batch(p, {0, 1, -1}, {0}, {0});
  CHECK(batch.layout.ntx == 2);
  CHECK(batch.layout.n_shifts[0] == 3); // fourth slot is padding
}
