// Assembly of the stacked problem vector: block 0 carries the electrostatic
// norm times the deposited grid charges, block t+1 the type-t van der Waals
// norm times the type-t occupancy, padded with zero blocks to 2^nt blocks of
// 2^ng entries. An optional positivity offset occupies one grid-register
// padding slot inside block 0 so probability readout stays sign-safe.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qvs/gridmap.hpp"

namespace qvs {

struct RegisterSizing {
  std::optional<int> nt; // type-register qubits
  std::optional<int> ng; // grid-register qubits
};

struct EncodedProblem {
  GridSpec grid;
  int nt = 0;
  int ng = 0;
  std::size_t n_types = 0;
  std::vector<double> o_grid; // length 2^(nt+ng)
  double l_type = 0.0;        // Euclidean norm of o_grid
  double phi_norm = 0.0;      // includes the offset entry when configured
  std::vector<double> evdw_norms;
  double offset_c = 0.0;
  std::optional<std::size_t> offset_slot; // grid index >= num nodes, block 0

  std::size_t block_size() const { return std::size_t(1) << ng; }
  std::size_t dim() const { return std::size_t(1) << (nt + ng); }
  std::size_t n_grid() const { return grid.num_nodes(); }
};

// Smallest register sizes satisfying 2^nt > 1 + n_types and
// 2^ng >= n_grid (+1 when an offset slot is needed).
int auto_nt(std::size_t n_types);
int auto_ng(std::size_t n_grid, bool with_offset);

// Euclidean normalization of a map row. All-zero input is an error.
std::pair<std::vector<double>, double> normalize_row(std::span<const double> values);

// Offset constant guaranteeing a nonnegative decoded value: 1.1 times the
// elementwise absolute bound on |E|.
double auto_offset(const PotentialMaps& maps, const LigandGridVector& lig);

EncodedProblem assemble_o_grid(const PotentialMaps& maps,
                               const LigandGridVector& lig, double offset_c,
                               RegisterSizing sizing = {});

// Signed-amplitude decode: a0 * 2^(nt/2) * L_type - offset_c. Exact and
// linear in a0.
double decode_energy_amplitude(double a0, const EncodedProblem& problem);

// Probability decode per measurement statistics: sqrt(p0) * 2^(nt/2) * L_type
// - offset_c. Without an offset the sign of the energy is not recoverable;
// pass allow_sign_ambiguous to accept |E| semantics.
double decode_energy_probability(double p0, const EncodedProblem& problem,
                                 bool allow_sign_ambiguous = false);

inline bool decode_is_sign_ambiguous(const EncodedProblem& p) {
  return p.offset_c == 0.0;
}

// Structured text serialization (17 significant digits) so scoring can run
// from a saved encoding.
void write_encoded_problem(std::ostream& out, const EncodedProblem& p);
EncodedProblem read_encoded_problem(std::istream& in);
void save_encoded_problem_file(const std::string& path, const EncodedProblem& p);
EncodedProblem load_encoded_problem_file(const std::string& path);

} // namespace qvs
