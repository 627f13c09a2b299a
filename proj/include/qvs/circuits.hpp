// Operator constructions for the scoring pipeline: first-row-specified
// orthogonal matrices (Householder completion or a reversed RY preparation
// tree), the block-diagonal U_grid, the Hadamard summation stage, cyclic
// grid translations, quarter-turn rotations, and conformation/pose batching.
//
// Operators act on real statevectors through structure-exploiting
// application; dense matrices are materialized only for verification and are
// capped at 10 qubits.
#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qvs/encoding.hpp"
#include "qvs/gatelist.hpp"
#include "qvs/gridmap.hpp"

namespace qvs {

enum class FirstRowBackend { householder, ry_tree };

inline constexpr int kDenseVerificationMaxQubits = 10;

class Operator {
public:
  virtual ~Operator() = default;
  virtual std::size_t dim() const = 0;
  virtual void apply_in_place(std::span<double> amps) const = 0;
  virtual std::string name() const = 0;

  // Row-major dense realization via application to basis vectors; throws
  // beyond kDenseVerificationMaxQubits.
  std::vector<double> dense() const;
};

// Orthogonal matrix with a prescribed first row. The householder backend is
// the reflection I - 2ww^T with w proportional to (row - e1); identity when
// row = e1. The ry_tree backend replays a reversed divide-and-conquer RY
// preparation tree with negated angles and realizes the row up to one global
// sign, which is reported.
class FirstRowUnitary : public Operator {
public:
  FirstRowUnitary(std::vector<double> target_row, FirstRowBackend backend);

  std::size_t dim() const override { return row_.size(); }
  void apply_in_place(std::span<double> amps) const override;
  std::string name() const override;

  FirstRowBackend backend() const { return backend_; }
  const std::vector<double>& target_row() const { return row_; }
  int global_sign() const { return sign_; }
  bool is_identity() const;
  const GateList& gates() const; // ry_tree only

private:
  std::vector<double> row_;
  FirstRowBackend backend_;
  std::vector<double> householder_w_; // empty => identity (householder)
  GateList gates_;                    // ry_tree replay
  int sign_ = 1;
};

std::shared_ptr<FirstRowUnitary> make_first_row_unitary(std::vector<double> row,
                                                        FirstRowBackend backend);

// diag(Phi-hat, E-hat^1, E-hat^2, ...): one first-row unitary per energy
// block indexed by the type register, identity for zero or unused blocks.
// Block 0 includes the offset entry when the problem carries one.
class UGridOp : public Operator {
public:
  UGridOp(const EncodedProblem& problem, const PotentialMaps& maps,
          FirstRowBackend backend);

  std::size_t dim() const override { return std::size_t(1) << (nt_ + ng_); }
  void apply_in_place(std::span<double> amps) const override;
  std::string name() const override { return "U_grid"; }

  int nt() const { return nt_; }
  int ng() const { return ng_; }
  std::size_t n_blocks() const { return blocks_.size(); }
  const FirstRowUnitary* block(std::size_t b) const; // nullptr = identity
  std::vector<int> block_signs() const;

private:
  int nt_ = 0, ng_ = 0;
  std::vector<std::shared_ptr<FirstRowUnitary>> blocks_;
};

std::shared_ptr<UGridOp> make_u_grid(const EncodedProblem& problem,
                                     const PotentialMaps& maps,
                                     FirstRowBackend backend);

// Hadamard on selected qubits, identity elsewhere.
class HadamardLayer : public Operator {
public:
  HadamardLayer(int total_qubits, std::vector<int> targets);
  std::size_t dim() const override { return std::size_t(1) << total_qubits_; }
  void apply_in_place(std::span<double> amps) const override;
  std::string name() const override { return "H_layer"; }
  const std::vector<int>& targets() const { return targets_; }

private:
  int total_qubits_ = 0;
  std::vector<int> targets_;
};

// (H^{x nt} (x) I^{x ng}): sums the block-first amplitudes into index 0 with
// weight 2^{-nt/2}.
HadamardLayer make_summation_stage(int nt, int ng);

// Permutation of the grid register: cyclic shift along one axis or a
// quarter-turn rotation about one axis. Geometric node indices are permuted;
// any grid-register padding slots (including the offset slot) are fixed
// points. Upper registers are untouched.
class GridPermutationOp : public Operator {
public:
  static GridPermutationOp shift(const GridSpec& grid, Axis axis, int g,
                                 int ng = -1, int upper_qubits = 0);
  static GridPermutationOp rotation(const GridSpec& grid, Axis axis,
                                    int quarter_turns, int ng = -1,
                                    int upper_qubits = 0);

  std::size_t dim() const override;
  void apply_in_place(std::span<double> amps) const override;
  std::string name() const override { return name_; }

  // perm[new] = old over geometric node indices.
  const std::vector<std::uint32_t>& perm_new_from_old() const { return perm_; }
  // Disjoint move-to cycles for PERM gate export.
  std::vector<std::vector<std::uint64_t>> cycles() const;

private:
  GridPermutationOp(std::string name, const GridSpec& grid, int ng,
                    int upper_qubits, std::vector<std::uint32_t> perm);
  GridSpec grid_;
  int ng_ = 0;
  int upper_ = 0;
  std::vector<std::uint32_t> perm_;
  std::string name_;
};

// Spec-facing factories on the (nt + ng) register pair.
std::shared_ptr<GridPermutationOp> make_shift_operator(Axis axis, int g,
                                                       const GridSpec& grid,
                                                       int nt, int ng = -1);
std::shared_ptr<GridPermutationOp> make_rotation_operator(Axis axis,
                                                          int quarter_turns,
                                                          const GridSpec& grid,
                                                          int nt, int ng = -1);

// Applies one of several grid permutations to each 2^ng slice, selected by
// the value of a control register; empty perm means identity.
class ControlledGridPermOp : public Operator {
public:
  ControlledGridPermOp(std::string name, GridSpec grid, int ng, int total_qubits,
                       int ctrl_lsb, int ctrl_bits,
                       std::vector<std::vector<std::uint32_t>> perm_by_value);

  std::size_t dim() const override { return std::size_t(1) << total_qubits_; }
  void apply_in_place(std::span<double> amps) const override;
  std::string name() const override { return name_; }

  // One controlled PERM gate per non-identity control value.
  std::vector<Gate> to_perm_gates() const;

private:
  std::string name_;
  GridSpec grid_;
  int ng_ = 0, total_qubits_ = 0, ctrl_lsb_ = 0, ctrl_bits_ = 0;
  std::vector<std::vector<std::uint32_t>> perm_by_value_;
};

// Register layout of a batched run, least significant first:
//   ng | nt | tx | ty | tz | rx | ry | rz | conf_l | conf_p
struct BatchLayout {
  int ng = 0, nt = 0;
  int ntx = 0, nty = 0, ntz = 0;
  int nrx = 0, nry = 0, nrz = 0;
  int nlc = 0, nrc = 0;
  std::array<std::size_t, 3> n_shifts{1, 1, 1}; // original list lengths
  std::array<std::size_t, 3> n_turns{1, 1, 1};
  std::size_t n_protein_confs = 1, n_ligand_confs = 1;

  int pose_bits() const { return ntx + nty + ntz + nrx + nry + nrz; }
  int total_qubits() const { return ng + nt + pose_bits() + nlc + nrc; }
  int lsb_nt() const { return ng; }
  int lsb_tx() const { return ng + nt; }
  int lsb_ty() const { return lsb_tx() + ntx; }
  int lsb_tz() const { return lsb_ty() + nty; }
  int lsb_rx() const { return lsb_tz() + ntz; }
  int lsb_ry() const { return lsb_rx() + nrx; }
  int lsb_rz() const { return lsb_ry() + nry; }
  int lsb_conf_l() const { return lsb_rz() + nrz; }
  int lsb_conf_p() const { return lsb_conf_l() + nlc; }

  // Amplitude index of a pose at type register 0, grid register 0.
  std::size_t slot_index(std::size_t conf_p, std::size_t conf_l, std::size_t irz,
                         std::size_t iry, std::size_t irx, std::size_t itz,
                         std::size_t ity, std::size_t itx) const;
};

struct PoseSpec {
  std::vector<int> shifts_x{0}, shifts_y{0}, shifts_z{0};
  std::vector<int> turns_x{0}, turns_y{0}, turns_z{0};
};

// A fully assembled batched execution: the (already posed) input state, the
// per-protein-conformation U_grid stage, the summation stage, and decode
// constants. The input stacks every (protein conf, ligand conf) problem
// vector, uniformly spread over the pose registers; pose permutations have
// been applied per register value. l_norm is the Euclidean norm of the
// stacked problem vectors, so decode multiplies the slot amplitude by
// 2^{(nt + pose_bits)/2} * l_norm and subtracts the offset.
struct BatchedProblem {
  BatchLayout layout;
  GridSpec grid;
  std::vector<double> input;
  std::vector<std::shared_ptr<const Operator>> pose_ops; // applied, kept for export
  std::shared_ptr<const Operator> u_stage;               // null if built without maps
  std::shared_ptr<const Operator> summation;
  double l_norm = 0.0;
  double offset_c = 0.0;

  double decode_scale() const;
  double decode_amplitude(double a, bool padded) const;
  bool pair_padded(std::size_t conf_p, std::size_t conf_l) const;
};

// General batch over per-pair encoded problems, indexed
// problems[protein_conf][ligand_conf]. u_by_conf may be empty when only the
// batched vector is needed. Shift guard margins are derived from the stacked
// problem vectors (over every rotation variant in the batch) unless
// overridden.
BatchedProblem make_batch(
    const std::vector<std::vector<const EncodedProblem*>>& problems,
    const std::vector<std::shared_ptr<const UGridOp>>& u_by_conf,
    const PoseSpec& poses,
    std::optional<std::array<int, 3>> margin_override = {});

BatchedProblem make_translation_batch(
    const EncodedProblem& problem, std::vector<int> shifts_x,
    std::vector<int> shifts_y, std::vector<int> shifts_z,
    std::optional<std::array<int, 3>> margin_override = {});

BatchedProblem make_rotation_batch(const EncodedProblem& problem,
                                   std::vector<int> turns_x,
                                   std::vector<int> turns_y,
                                   std::vector<int> turns_z);

BatchedProblem make_conformation_batch(
    const std::vector<std::shared_ptr<const UGridOp>>& u_by_conf,
    const std::vector<std::vector<const EncodedProblem*>>& problems);

// Zero-plane guard margins of a problem vector across all energy blocks
// (geometric grid part only).
std::array<int, 3> problem_margins(const EncodedProblem& problem);

} // namespace qvs
