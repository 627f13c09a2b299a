#include "qvs/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qvs {

namespace {

bool is_power_of_two(std::size_t v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(std::size_t v) {
  int b = 0;
  while ((std::size_t(1) << b) < v) ++b;
  return b;
}

int axis_id(Axis a) { return static_cast<int>(a); }

const char* axis_label(Axis a) {
  switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    default: return "z";
  }
}

} // namespace

std::vector<double> Operator::dense() const {
  const std::size_t d = dim();
  if (d > (std::size_t(1) << kDenseVerificationMaxQubits))
    throw std::runtime_error("dense realization capped at 2^" +
                             std::to_string(kDenseVerificationMaxQubits));
  std::vector<double> matrix(d * d, 0.0);
  std::vector<double> col(d, 0.0);
  for (std::size_t c = 0; c < d; ++c) {
    std::fill(col.begin(), col.end(), 0.0);
    col[c] = 1.0;
    apply_in_place(col);
    for (std::size_t r = 0; r < d; ++r) matrix[r * d + c] = col[r];
  }
  return matrix;
}

// --- FirstRowUnitary ------------------------------------------------------

namespace {

// Signed-magnitude reduction tree for RY-only preparation of a real unit
// vector: each parent carries sqrt(a^2 + b^2) signed by its first nonzero
// child, so cos/sin of the node angle reproduce both children exactly.
struct RyTree {
  std::vector<std::vector<double>> levels; // levels[l] has 2^l entries
  int n = 0;
};

RyTree build_ry_tree(const std::vector<double>& row) {
  RyTree tree;
  tree.n = log2_exact(row.size());
  tree.levels.resize(tree.n + 1);
  tree.levels[tree.n] = row;
  for (int l = tree.n - 1; l >= 0; --l) {
    auto& level = tree.levels[l];
    const auto& below = tree.levels[l + 1];
    level.resize(std::size_t(1) << l);
    for (std::size_t j = 0; j < level.size(); ++j) {
      const double a = below[2 * j];
      const double b = below[2 * j + 1];
      const double mag = std::sqrt(a * a + b * b);
      const double sgn = a != 0.0 ? (a > 0.0 ? 1.0 : -1.0)
                                  : (b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 1.0));
      level[j] = sgn * mag;
    }
  }
  return tree;
}

// Conventional preparation order (root first); the transposed circuit is the
// reverse with negated angles.
std::vector<Gate> preparation_gates(const RyTree& tree) {
  std::vector<Gate> gates;
  const int n = tree.n;
  for (int l = 0; l < n; ++l) {
    for (std::size_t j = 0; j < tree.levels[l].size(); ++j) {
      const double parent = tree.levels[l][j];
      if (parent == 0.0) continue; // dead subtree
      const double a = tree.levels[l + 1][2 * j];
      const double b = tree.levels[l + 1][2 * j + 1];
      const double theta = 2.0 * std::atan2(b / parent, a / parent);
      if (theta == 0.0) continue; // amplitude already sits in the 0 branch
      std::vector<ControlBit> controls;
      for (int bit = 0; bit < l; ++bit) {
        const int qubit = n - 1 - bit;
        const int value = int((j >> (l - 1 - bit)) & 1);
        controls.push_back({qubit, value});
      }
      gates.push_back(Gate::make_ry(theta, n - 1 - l, std::move(controls)));
    }
  }
  return gates;
}

} // namespace

FirstRowUnitary::FirstRowUnitary(std::vector<double> target_row,
                                 FirstRowBackend backend)
    : row_(std::move(target_row)), backend_(backend) {
  if (!is_power_of_two(row_.size()) || row_.size() < 2)
    throw std::invalid_argument("first-row unitary dim must be a power of two >= 2");
  double sq = 0.0;
  for (double v : row_) sq += v * v;
  if (std::abs(sq - 1.0) > 1e-10)
    throw std::invalid_argument("first row must be a unit vector");

  if (backend_ == FirstRowBackend::householder) {
    // w proportional to (row - e1); row == e1 exactly gives the identity.
    std::vector<double> w = row_;
    w[0] -= 1.0;
    double wsq = 0.0;
    for (double v : w) wsq += v * v;
    if (wsq > 0.0) {
      const double inv = 1.0 / std::sqrt(wsq);
      for (double& v : w) v *= inv;
      householder_w_ = std::move(w);
    }
  } else {
    const RyTree tree = build_ry_tree(row_);
    sign_ = tree.levels[0][0] >= 0.0 ? 1 : -1;
    auto prep = preparation_gates(tree);
    gates_.n_qubits = tree.n;
    for (auto it = prep.rbegin(); it != prep.rend(); ++it) {
      Gate g = *it;
      g.angle = -g.angle;
      gates_.gates.push_back(std::move(g));
    }
    gates_.validate();
  }
}

void FirstRowUnitary::apply_in_place(std::span<double> amps) const {
  if (amps.size() != dim())
    throw std::invalid_argument("state size does not match operator dim");
  if (backend_ == FirstRowBackend::householder) {
    if (householder_w_.empty()) return; // identity
    double dot = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) dot += householder_w_[i] * amps[i];
    const double two_dot = 2.0 * dot;
    for (std::size_t i = 0; i < amps.size(); ++i)
      amps[i] -= two_dot * householder_w_[i];
  } else {
    gates_.apply(amps);
  }
}

std::string FirstRowUnitary::name() const {
  return backend_ == FirstRowBackend::householder ? "first_row(householder)"
                                                  : "first_row(ry_tree)";
}

bool FirstRowUnitary::is_identity() const {
  if (backend_ == FirstRowBackend::householder) return householder_w_.empty();
  return gates_.gates.empty();
}

const GateList& FirstRowUnitary::gates() const {
  if (backend_ != FirstRowBackend::ry_tree)
    throw std::logic_error("gate list is only available for the ry_tree backend");
  return gates_;
}

std::shared_ptr<FirstRowUnitary> make_first_row_unitary(std::vector<double> row,
                                                        FirstRowBackend backend) {
  return std::make_shared<FirstRowUnitary>(std::move(row), backend);
}

// --- UGridOp ---------------------------------------------------------------

UGridOp::UGridOp(const EncodedProblem& problem, const PotentialMaps& maps,
                 FirstRowBackend backend)
    : nt_(problem.nt), ng_(problem.ng) {
  if (!(problem.grid == maps.grid))
    throw std::invalid_argument("problem and maps use different grids");
  if (problem.n_types != maps.evdw.size())
    throw std::invalid_argument("problem and maps disagree on type count");
  const std::size_t n_blocks = std::size_t(1) << nt_;
  if (n_blocks < 1 + problem.n_types)
    throw std::invalid_argument("type register too small for the energy blocks");

  const std::size_t block = problem.block_size();
  const std::size_t n_grid = problem.n_grid();
  blocks_.assign(n_blocks, nullptr);

  auto build_block = [&](const std::vector<double>& map_values,
                         bool with_offset) -> std::shared_ptr<FirstRowUnitary> {
    std::vector<double> row(block, 0.0);
    std::copy(map_values.begin(), map_values.end(), row.begin());
    if (with_offset && problem.offset_slot)
      row[*problem.offset_slot] = problem.offset_c;
    double sq = 0.0;
    for (double v : row) sq += v * v;
    if (sq == 0.0) return nullptr; // zero block: identity
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : row) v *= inv;
    return make_first_row_unitary(std::move(row), backend);
  };

  if (maps.phi.size() != n_grid)
    throw std::invalid_argument("phi map length mismatch");
  blocks_[0] = build_block(maps.phi, true);
  for (std::size_t t = 0; t < problem.n_types; ++t) {
    if (maps.evdw[t].size() != n_grid)
      throw std::invalid_argument("evdw map length mismatch");
    blocks_[t + 1] = build_block(maps.evdw[t], false);
  }
}

void UGridOp::apply_in_place(std::span<double> amps) const {
  if (amps.size() != dim())
    throw std::invalid_argument("state size does not match operator dim");
  const std::size_t block = std::size_t(1) << ng_;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (!blocks_[b]) continue;
    auto slice = amps.subspan(b * block, block);
    blocks_[b]->apply_in_place(slice);
    // The ry_tree backend realizes its row up to a reported global sign; the
    // block-diagonal operator must carry the exact rows, so flip the block
    // back (a controlled RY(2pi) in circuit form).
    if (blocks_[b]->global_sign() < 0)
      for (double& v : slice) v = -v;
  }
}

const FirstRowUnitary* UGridOp::block(std::size_t b) const {
  return b < blocks_.size() ? blocks_[b].get() : nullptr;
}

std::vector<int> UGridOp::block_signs() const {
  std::vector<int> signs;
  signs.reserve(blocks_.size());
  for (const auto& b : blocks_) signs.push_back(b ? b->global_sign() : 1);
  return signs;
}

std::shared_ptr<UGridOp> make_u_grid(const EncodedProblem& problem,
                                     const PotentialMaps& maps,
                                     FirstRowBackend backend) {
  return std::make_shared<UGridOp>(problem, maps, backend);
}

// --- HadamardLayer ----------------------------------------------------------

HadamardLayer::HadamardLayer(int total_qubits, std::vector<int> targets)
    : total_qubits_(total_qubits), targets_(std::move(targets)) {
  for (int q : targets_)
    if (q < 0 || q >= total_qubits_)
      throw std::invalid_argument("Hadamard target out of range");
}

void HadamardLayer::apply_in_place(std::span<double> amps) const {
  if (amps.size() != dim())
    throw std::invalid_argument("state size does not match operator dim");
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int q : targets_) {
    const std::size_t mask = std::size_t(1) << q;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      if (i & mask) continue;
      const double a0 = amps[i];
      const double a1 = amps[i | mask];
      amps[i] = (a0 + a1) * inv_sqrt2;
      amps[i | mask] = (a0 - a1) * inv_sqrt2;
    }
  }
}

HadamardLayer make_summation_stage(int nt, int ng) {
  if (nt < 1 || ng < 0) throw std::invalid_argument("need nt >= 1 and ng >= 0");
  std::vector<int> targets;
  for (int q = 0; q < nt; ++q) targets.push_back(ng + q);
  return HadamardLayer(nt + ng, std::move(targets));
}

// --- Grid permutations -------------------------------------------------------

namespace {

// Single clockwise quarter turn about `axis`: with (u, v) the remaining axes
// in cyclic order, (u, v) -> (N-1-v, u). Matches the worked 2D relabeling
// for the z axis and composes to the identity after four turns.
std::array<int, 3> quarter_turn(const std::array<int, 3>& c, Axis axis, int n) {
  const int a = axis_id(axis);
  const int u = (a + 1) % 3;
  const int v = (a + 2) % 3;
  std::array<int, 3> out = c;
  out[u] = n - 1 - c[v];
  out[v] = c[u];
  return out;
}

} // namespace

GridPermutationOp::GridPermutationOp(std::string name, const GridSpec& grid,
                                     int ng, int upper_qubits,
                                     std::vector<std::uint32_t> perm)
    : grid_(grid), ng_(ng), upper_(upper_qubits), perm_(std::move(perm)),
      name_(std::move(name)) {
  if (ng_ < grid_.geometry_bits())
    throw std::invalid_argument("grid register smaller than the grid geometry");
  if (upper_ < 0) throw std::invalid_argument("negative upper register width");
}

GridPermutationOp GridPermutationOp::shift(const GridSpec& grid, Axis axis, int g,
                                           int ng, int upper_qubits) {
  grid.validate();
  if (ng < 0) ng = grid.geometry_bits();
  const int n_axis = grid.dim(axis);
  if (std::abs(g) >= n_axis && n_axis > 1)
    throw std::invalid_argument("shift magnitude must be below the axis dim");
  const int wrapped = ((g % n_axis) + n_axis) % n_axis;

  const std::size_t n_grid = grid.num_nodes();
  std::vector<std::uint32_t> perm(n_grid);
  for (std::size_t k = 0; k < n_grid; ++k) {
    auto c = grid.node_coords(k);
    c[axis_id(axis)] = (c[axis_id(axis)] + wrapped) % n_axis;
    perm[grid.node_index(c[0], c[1], c[2])] = std::uint32_t(k);
  }
  return GridPermutationOp(std::string("T_") + axis_label(axis) + "^" +
                               std::to_string(g),
                           grid, ng, upper_qubits, std::move(perm));
}

GridPermutationOp GridPermutationOp::rotation(const GridSpec& grid, Axis axis,
                                              int quarter_turns, int ng,
                                              int upper_qubits) {
  grid.validate();
  if (ng < 0) ng = grid.geometry_bits();
  if (quarter_turns < 0 || quarter_turns > 3)
    throw std::invalid_argument("quarter turns must be in {0, 1, 2, 3}");
  const int a = axis_id(axis);
  const int u = (a + 1) % 3;
  const int v = (a + 2) % 3;
  if (quarter_turns != 0 && grid.dims[u] != grid.dims[v])
    throw std::invalid_argument(std::string("rotation about ") + axis_label(axis) +
                                " needs equal in-plane dims, got " +
                                std::to_string(grid.dims[u]) + "x" +
                                std::to_string(grid.dims[v]));

  const std::size_t n_grid = grid.num_nodes();
  std::vector<std::uint32_t> perm(n_grid);
  for (std::size_t k = 0; k < n_grid; ++k) {
    auto c = grid.node_coords(k);
    for (int q = 0; q < quarter_turns; ++q) c = quarter_turn(c, axis, grid.dims[u]);
    perm[grid.node_index(c[0], c[1], c[2])] = std::uint32_t(k);
  }
  return GridPermutationOp(std::string("R_") + axis_label(axis) + "^" +
                               std::to_string(90 * quarter_turns),
                           grid, ng, upper_qubits, std::move(perm));
}

std::size_t GridPermutationOp::dim() const {
  return std::size_t(1) << (ng_ + upper_);
}

void GridPermutationOp::apply_in_place(std::span<double> amps) const {
  if (amps.size() != dim())
    throw std::invalid_argument("state size does not match operator dim");
  const std::size_t slice = std::size_t(1) << ng_;
  const std::size_t n_grid = grid_.num_nodes();
  std::vector<double> scratch(n_grid);
  for (std::size_t base = 0; base < amps.size(); base += slice) {
    auto s = amps.subspan(base, slice);
    std::copy(s.begin(), s.begin() + n_grid, scratch.begin());
    for (std::size_t k = 0; k < n_grid; ++k) s[k] = scratch[perm_[k]];
  }
}

std::vector<std::vector<std::uint64_t>> GridPermutationOp::cycles() const {
  const std::size_t n_grid = grid_.num_nodes();
  std::vector<std::uint32_t> moves_to(n_grid);
  for (std::size_t knew = 0; knew < n_grid; ++knew) moves_to[perm_[knew]] = std::uint32_t(knew);
  std::vector<std::vector<std::uint64_t>> cycles;
  std::vector<bool> visited(n_grid, false);
  for (std::size_t start = 0; start < n_grid; ++start) {
    if (visited[start] || moves_to[start] == start) continue;
    std::vector<std::uint64_t> cycle;
    std::size_t i = start;
    while (!visited[i]) {
      visited[i] = true;
      cycle.push_back(i);
      i = moves_to[i];
    }
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

std::shared_ptr<GridPermutationOp> make_shift_operator(Axis axis, int g,
                                                       const GridSpec& grid,
                                                       int nt, int ng) {
  return std::make_shared<GridPermutationOp>(
      GridPermutationOp::shift(grid, axis, g, ng, nt));
}

std::shared_ptr<GridPermutationOp> make_rotation_operator(Axis axis,
                                                          int quarter_turns,
                                                          const GridSpec& grid,
                                                          int nt, int ng) {
  return std::make_shared<GridPermutationOp>(
      GridPermutationOp::rotation(grid, axis, quarter_turns, ng, nt));
}

// --- ControlledGridPermOp ----------------------------------------------------

ControlledGridPermOp::ControlledGridPermOp(
    std::string name, GridSpec grid, int ng, int total_qubits, int ctrl_lsb,
    int ctrl_bits, std::vector<std::vector<std::uint32_t>> perm_by_value)
    : name_(std::move(name)), grid_(std::move(grid)), ng_(ng),
      total_qubits_(total_qubits), ctrl_lsb_(ctrl_lsb), ctrl_bits_(ctrl_bits),
      perm_by_value_(std::move(perm_by_value)) {
  if (ctrl_lsb_ < ng_ || ctrl_lsb_ + ctrl_bits_ > total_qubits_)
    throw std::invalid_argument("control register out of range");
  if (perm_by_value_.size() != (std::size_t(1) << ctrl_bits_))
    throw std::invalid_argument("need one permutation per control value");
}

void ControlledGridPermOp::apply_in_place(std::span<double> amps) const {
  if (amps.size() != dim())
    throw std::invalid_argument("state size does not match operator dim");
  const std::size_t slice = std::size_t(1) << ng_;
  const std::size_t n_grid = grid_.num_nodes();
  const std::size_t vmask = (std::size_t(1) << ctrl_bits_) - 1;
  const int shift = ctrl_lsb_ - ng_;
  std::vector<double> scratch(n_grid);
  const std::size_t n_slices = amps.size() >> ng_;
  for (std::size_t upper = 0; upper < n_slices; ++upper) {
    const std::size_t v = (upper >> shift) & vmask;
    const auto& perm = perm_by_value_[v];
    if (perm.empty()) continue;
    auto s = amps.subspan(upper << ng_, slice);
    std::copy(s.begin(), s.begin() + n_grid, scratch.begin());
    for (std::size_t k = 0; k < n_grid; ++k) s[k] = scratch[perm[k]];
  }
}

std::vector<Gate> ControlledGridPermOp::to_perm_gates() const {
  std::vector<Gate> gates;
  for (std::size_t v = 0; v < perm_by_value_.size(); ++v) {
    const auto& perm = perm_by_value_[v];
    if (perm.empty()) continue;
    const std::size_t n_grid = grid_.num_nodes();
    std::vector<std::uint32_t> moves_to(n_grid);
    for (std::size_t knew = 0; knew < n_grid; ++knew)
      moves_to[perm[knew]] = std::uint32_t(knew);
    std::vector<std::vector<std::uint64_t>> cycles;
    std::vector<bool> visited(n_grid, false);
    for (std::size_t start = 0; start < n_grid; ++start) {
      if (visited[start] || moves_to[start] == start) continue;
      std::vector<std::uint64_t> cycle;
      std::size_t i = start;
      while (!visited[i]) {
        visited[i] = true;
        cycle.push_back(i);
        i = moves_to[i];
      }
      cycles.push_back(std::move(cycle));
    }
    if (cycles.empty()) continue;
    std::vector<ControlBit> controls;
    for (int b = 0; b < ctrl_bits_; ++b)
      controls.push_back({ctrl_lsb_ + b, int((v >> b) & 1)});
    gates.push_back(
        Gate::make_perm("grid", 0, ng_, std::move(cycles), std::move(controls)));
  }
  return gates;
}

// --- Batch assembly ----------------------------------------------------------

std::size_t BatchLayout::slot_index(std::size_t conf_p, std::size_t conf_l,
                                    std::size_t irz, std::size_t iry,
                                    std::size_t irx, std::size_t itz,
                                    std::size_t ity, std::size_t itx) const {
  std::size_t idx = 0;
  idx |= conf_p << lsb_conf_p();
  idx |= conf_l << lsb_conf_l();
  idx |= irz << lsb_rz();
  idx |= iry << lsb_ry();
  idx |= irx << lsb_rx();
  idx |= itz << lsb_tz();
  idx |= ity << lsb_ty();
  idx |= itx << lsb_tx();
  return idx;
}

double BatchedProblem::decode_scale() const {
  return std::exp2((layout.nt + layout.pose_bits()) / 2.0) * l_norm;
}

double BatchedProblem::decode_amplitude(double a, bool padded) const {
  const double raw = a * decode_scale();
  return padded ? raw : raw - offset_c;
}

bool BatchedProblem::pair_padded(std::size_t conf_p, std::size_t conf_l) const {
  return conf_p >= layout.n_protein_confs || conf_l >= layout.n_ligand_confs;
}

namespace {

int bits_for_count(std::size_t count) {
  int b = 0;
  while ((std::size_t(1) << b) < count) ++b;
  return b;
}

// Pads a pose list to a power of two with identity entries.
std::vector<int> pad_pose_list(std::vector<int> list) {
  if (list.empty()) list.push_back(0);
  const std::size_t padded = std::size_t(1) << bits_for_count(list.size());
  list.resize(padded, 0);
  return list;
}

std::array<int, 3> margins_of_mask(const GridSpec& grid,
                                   const std::vector<char>& occupied) {
  std::array<int, 3> margins{};
  for (int ax = 0; ax < 3; ++ax) {
    const int n_axis = grid.dims[ax];
    auto plane_zero = [&](int plane) {
      for (std::size_t k = 0; k < occupied.size(); ++k)
        if (occupied[k] && grid.node_coords(k)[ax] == plane) return false;
      return true;
    };
    int leading = 0;
    while (leading < n_axis && plane_zero(leading)) ++leading;
    if (leading == n_axis) {
      margins[ax] = n_axis / 2; // degenerate: nothing deposited
      continue;
    }
    int trailing = 0;
    while (trailing < n_axis && plane_zero(n_axis - 1 - trailing)) ++trailing;
    margins[ax] = std::min(leading, trailing);
  }
  return margins;
}

} // namespace

std::array<int, 3> problem_margins(const EncodedProblem& problem) {
  const std::size_t n_grid = problem.n_grid();
  const std::size_t block = problem.block_size();
  std::vector<char> occupied(n_grid, 0);
  for (std::size_t b = 0; b <= problem.n_types; ++b)
    for (std::size_t k = 0; k < n_grid; ++k)
      if (problem.o_grid[b * block + k] != 0.0) occupied[k] = 1;
  return margins_of_mask(problem.grid, occupied);
}

BatchedProblem make_batch(
    const std::vector<std::vector<const EncodedProblem*>>& problems,
    const std::vector<std::shared_ptr<const UGridOp>>& u_by_conf,
    const PoseSpec& poses, std::optional<std::array<int, 3>> margin_override) {
  if (problems.empty() || problems[0].empty())
    throw std::invalid_argument("batch needs at least one problem");
  const std::size_t n_p = problems.size();
  const std::size_t n_l = problems[0].size();
  const EncodedProblem& ref = *problems[0][0];
  for (const auto& row : problems) {
    if (row.size() != n_l)
      throw std::invalid_argument("ragged conformation matrix");
    for (const auto* p : row) {
      if (!p) throw std::invalid_argument("missing problem in batch");
      if (p->nt != ref.nt || p->ng != ref.ng || !(p->grid == ref.grid) ||
          p->offset_c != ref.offset_c || p->offset_slot != ref.offset_slot ||
          p->n_types != ref.n_types)
        throw std::invalid_argument(
            "inconsistent register sizes across conformations");
    }
  }
  if (!u_by_conf.empty() && u_by_conf.size() != n_p)
    throw std::invalid_argument("need one U_grid per protein conformation");

  BatchedProblem out;
  out.grid = ref.grid;
  out.offset_c = ref.offset_c;

  BatchLayout& lay = out.layout;
  lay.ng = ref.ng;
  lay.nt = ref.nt;
  const auto sx = pad_pose_list(poses.shifts_x);
  const auto sy = pad_pose_list(poses.shifts_y);
  const auto sz = pad_pose_list(poses.shifts_z);
  const auto rx = pad_pose_list(poses.turns_x);
  const auto ry = pad_pose_list(poses.turns_y);
  const auto rz = pad_pose_list(poses.turns_z);
  lay.n_shifts = {std::max<std::size_t>(poses.shifts_x.size(), 1),
                  std::max<std::size_t>(poses.shifts_y.size(), 1),
                  std::max<std::size_t>(poses.shifts_z.size(), 1)};
  lay.n_turns = {std::max<std::size_t>(poses.turns_x.size(), 1),
                 std::max<std::size_t>(poses.turns_y.size(), 1),
                 std::max<std::size_t>(poses.turns_z.size(), 1)};
  lay.ntx = bits_for_count(sx.size());
  lay.nty = bits_for_count(sy.size());
  lay.ntz = bits_for_count(sz.size());
  lay.nrx = bits_for_count(rx.size());
  lay.nry = bits_for_count(ry.size());
  lay.nrz = bits_for_count(rz.size());
  lay.nrc = bits_for_count(n_p);
  lay.nlc = bits_for_count(n_l);
  lay.n_protein_confs = n_p;
  lay.n_ligand_confs = n_l;

  for (int ax = 0; ax < 3; ++ax) {
    const auto& list = ax == 0 ? sx : (ax == 1 ? sy : sz);
    for (int g : list)
      if (std::abs(g) >= ref.grid.dims[ax] && ref.grid.dims[ax] > 1)
        throw std::invalid_argument("shift magnitude must be below the axis dim");
  }
  for (int ax = 0; ax < 3; ++ax) {
    const auto& list = ax == 0 ? rx : (ax == 1 ? ry : rz);
    const int u = (ax + 1) % 3;
    const int v = (ax + 2) % 3;
    for (int q : list) {
      if (q < 0 || q > 3)
        throw std::invalid_argument("quarter turns must be in {0, 1, 2, 3}");
      if (q != 0 && ref.grid.dims[u] != ref.grid.dims[v])
        throw std::invalid_argument(
            std::string("rotation about ") + axis_label(static_cast<Axis>(ax)) +
            " needs equal in-plane dims");
    }
  }

  // Guard margins: scan zero planes of every stacked problem under every
  // rotation variant present in the batch, then check the requested shifts.
  bool any_shift = false;
  for (const auto* list : {&sx, &sy, &sz})
    for (int g : *list) any_shift |= (g != 0);
  std::array<int, 3> margins;
  if (!any_shift) {
    margins = {0, 0, 0};
  } else if (margin_override) {
    margins = *margin_override;
  } else {
    margins = {ref.grid.dims[0] / 2, ref.grid.dims[1] / 2, ref.grid.dims[2] / 2};
    const std::size_t n_grid = ref.grid.num_nodes();
    const std::size_t block = ref.block_size();
    std::vector<char> occupied(n_grid), rotated(n_grid);
    for (std::size_t i = 0; i < n_p; ++i)
      for (std::size_t j = 0; j < n_l; ++j) {
        std::fill(occupied.begin(), occupied.end(), 0);
        const auto& o = problems[i][j]->o_grid;
        for (std::size_t b = 0; b <= ref.n_types; ++b)
          for (std::size_t k = 0; k < n_grid; ++k)
            if (o[b * block + k] != 0.0) occupied[k] = 1;
        for (int qx : rx)
          for (int qy : ry)
            for (int qz : rz) {
              std::fill(rotated.begin(), rotated.end(), 0);
              for (std::size_t k = 0; k < n_grid; ++k) {
                if (!occupied[k]) continue;
                auto c = ref.grid.node_coords(k);
                for (int q = 0; q < qx; ++q)
                  c = quarter_turn(c, Axis::x, ref.grid.dims[1]);
                for (int q = 0; q < qy; ++q)
                  c = quarter_turn(c, Axis::y, ref.grid.dims[2]);
                for (int q = 0; q < qz; ++q)
                  c = quarter_turn(c, Axis::z, ref.grid.dims[0]);
                rotated[ref.grid.node_index(c[0], c[1], c[2])] = 1;
              }
              const auto m = margins_of_mask(ref.grid, rotated);
              for (int ax = 0; ax < 3; ++ax)
                margins[ax] = std::min(margins[ax], m[ax]);
            }
      }
  }
  for (int ax = 0; ax < 3; ++ax) {
    const auto& list = ax == 0 ? sx : (ax == 1 ? sy : sz);
    for (int g : list)
      if (g != 0 && std::abs(g) > margins[ax])
        throw std::runtime_error(
            std::string("requested shift ") + std::to_string(g) + " on axis " +
            axis_label(static_cast<Axis>(ax)) + " exceeds guard margin " +
            std::to_string(margins[ax]) + ": wrap-around would corrupt pose");
  }

  // Stacked input: each real (protein, ligand) pair carries its problem
  // vector spread uniformly over the pose registers.
  double sq = 0.0;
  for (std::size_t i = 0; i < n_p; ++i)
    for (std::size_t j = 0; j < n_l; ++j)
      for (double v : problems[i][j]->o_grid) sq += v * v;
  out.l_norm = std::sqrt(sq);
  if (out.l_norm == 0.0)
    throw std::runtime_error("degenerate batch: all problem vectors are zero");

  const int total = lay.total_qubits();
  out.input.assign(std::size_t(1) << total, 0.0);
  const double pose_weight =
      std::exp2(-lay.pose_bits() / 2.0) / out.l_norm;
  const std::size_t pair_dim = std::size_t(1) << (lay.nt + lay.ng);
  for (std::size_t i = 0; i < n_p; ++i)
    for (std::size_t j = 0; j < n_l; ++j) {
      const auto& o = problems[i][j]->o_grid;
      for (std::size_t irz = 0; irz < rz.size(); ++irz)
        for (std::size_t iry = 0; iry < ry.size(); ++iry)
          for (std::size_t irx = 0; irx < rx.size(); ++irx)
            for (std::size_t itz = 0; itz < sz.size(); ++itz)
              for (std::size_t ity = 0; ity < sy.size(); ++ity)
                for (std::size_t itx = 0; itx < sx.size(); ++itx) {
                  const std::size_t base =
                      lay.slot_index(i, j, irz, iry, irx, itz, ity, itx);
                  for (std::size_t idx = 0; idx < pair_dim; ++idx)
                    out.input[base + idx] = o[idx] * pose_weight;
                }
    }

  // Controlled pose permutations, applied rotations-then-translations with
  // x before y before z within each family.
  auto add_perm_op = [&](const char* opname, bool rotation, Axis axis,
                         const std::vector<int>& values, int ctrl_lsb,
                         int ctrl_bits) {
    bool all_identity = true;
    for (int v : values) all_identity &= (v == 0);
    if (all_identity) return;
    std::vector<std::vector<std::uint32_t>> perms;
    perms.reserve(values.size());
    for (int v : values) {
      if (v == 0) {
        perms.emplace_back();
        continue;
      }
      auto op = rotation
                    ? GridPermutationOp::rotation(ref.grid, axis, v, lay.ng, 0)
                    : GridPermutationOp::shift(ref.grid, axis, v, lay.ng, 0);
      perms.push_back(op.perm_new_from_old());
    }
    out.pose_ops.push_back(std::make_shared<ControlledGridPermOp>(
        opname, ref.grid, lay.ng, total, ctrl_lsb, ctrl_bits, std::move(perms)));
  };
  add_perm_op("R~_x", true, Axis::x, rx, lay.lsb_rx(), lay.nrx);
  add_perm_op("R~_y", true, Axis::y, ry, lay.lsb_ry(), lay.nry);
  add_perm_op("R~_z", true, Axis::z, rz, lay.lsb_rz(), lay.nrz);
  add_perm_op("T~_x", false, Axis::x, sx, lay.lsb_tx(), lay.ntx);
  add_perm_op("T~_y", false, Axis::y, sy, lay.lsb_ty(), lay.nty);
  add_perm_op("T~_z", false, Axis::z, sz, lay.lsb_tz(), lay.ntz);
  for (const auto& op : out.pose_ops) op->apply_in_place(out.input);

  if (!u_by_conf.empty()) {
    struct BlockwiseUGrid : Operator {
      std::vector<std::shared_ptr<const UGridOp>> u;
      BatchLayout lay;
      std::size_t dim() const override {
        return std::size_t(1) << lay.total_qubits();
      }
      std::string name() const override { return "U_grid(batch)"; }
      void apply_in_place(std::span<double> amps) const override {
        const std::size_t pair_dim = std::size_t(1) << (lay.nt + lay.ng);
        const std::size_t n_slices = amps.size() / pair_dim;
        const int conf_shift = lay.lsb_conf_p() - (lay.nt + lay.ng);
        const std::size_t conf_mask = (std::size_t(1) << lay.nrc) - 1;
        for (std::size_t sidx = 0; sidx < n_slices; ++sidx) {
          const std::size_t i = (sidx >> conf_shift) & conf_mask;
          if (i >= u.size()) continue; // padded conformation: identity
          u[i]->apply_in_place(amps.subspan(sidx * pair_dim, pair_dim));
        }
      }
    };
    auto stage = std::make_shared<BlockwiseUGrid>();
    stage->u = u_by_conf;
    stage->lay = lay;
    out.u_stage = stage;
  }
  std::vector<int> h_targets;
  for (int q = 0; q < lay.nt; ++q) h_targets.push_back(lay.ng + q);
  out.summation = std::make_shared<HadamardLayer>(total, std::move(h_targets));
  return out;
}

BatchedProblem make_translation_batch(
    const EncodedProblem& problem, std::vector<int> shifts_x,
    std::vector<int> shifts_y, std::vector<int> shifts_z,
    std::optional<std::array<int, 3>> margin_override) {
  PoseSpec poses;
  poses.shifts_x = std::move(shifts_x);
  poses.shifts_y = std::move(shifts_y);
  poses.shifts_z = std::move(shifts_z);
  return make_batch({{&problem}}, {}, poses, margin_override);
}

BatchedProblem make_rotation_batch(const EncodedProblem& problem,
                                   std::vector<int> turns_x,
                                   std::vector<int> turns_y,
                                   std::vector<int> turns_z) {
  PoseSpec poses;
  poses.turns_x = std::move(turns_x);
  poses.turns_y = std::move(turns_y);
  poses.turns_z = std::move(turns_z);
  return make_batch({{&problem}}, {}, poses, {});
}

BatchedProblem make_conformation_batch(
    const std::vector<std::shared_ptr<const UGridOp>>& u_by_conf,
    const std::vector<std::vector<const EncodedProblem*>>& problems) {
  return make_batch(problems, u_by_conf, PoseSpec{}, {});
}

} // namespace qvs
