// Real-amplitude statevector engine and the end-to-end scoring pipeline:
// encode, batch, apply the U_grid and summation stages, and decode energies
// from signed amplitudes or from seeded measurement sampling.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qvs/circuits.hpp"
#include "qvs/encoding.hpp"

namespace qvs {

inline constexpr int kMaxQubits = 26;

// Desk-scale guard shared by the state constructors and the batch driver.
void enforce_qubit_cap(int n_qubits);

// Every operator in the pipeline is real orthogonal, so amplitudes are
// stored as plain doubles.
struct Statevector {
  int n_qubits = 0;
  std::vector<double> amplitudes;

  std::size_t dim() const { return amplitudes.size(); }
  double norm() const;
};

Statevector state_from_vector(std::vector<double> v);
void apply(const Operator& op, Statevector& state);
double amplitude_at(const Statevector& state, std::size_t basis_index);

// The sampling generator; the seed is recorded in every report.
using Rng = std::mt19937_64;

struct SamplingResult {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::map<std::size_t, std::uint64_t> counts;
  double p0_hat = 0.0;
  double stderr_p0 = 0.0;

  double probability_of(std::size_t basis_index) const;
};

SamplingResult sample(const Statevector& state, std::uint64_t shots,
                      std::uint64_t seed);

enum class RunMode { amplitude, sampled };

struct RunOptions {
  RunMode mode = RunMode::amplitude;
  std::uint64_t shots = 1000000;
  std::uint64_t seed = 1;
  FirstRowBackend backend = FirstRowBackend::householder;
};

struct PoseKey {
  std::size_t conf_p = 0, conf_l = 0;
  int tx = 0, ty = 0, tz = 0; // grid units
  int rx = 0, ry = 0, rz = 0; // quarter turns
};

struct EnergyReport {
  PoseKey pose;
  double e_total = 0.0;
  double e_ele = 0.0;
  std::vector<double> e_vdw_by_type;
  std::string mode;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  std::optional<double> stderr_e;
  double offset_c = 0.0;
  double norm_value = 0.0;     // L_type or L_con
  std::string norm_kind;       // "L_type" | "L_con"
  bool padded = false;
  std::optional<std::string> warning;
};

// Single-pose pipeline: U_grid then the Hadamard summation stage, decoded at
// basis index 0. The electrostatic / per-type van der Waals split is always
// computed on the amplitude path by zeroing the other blocks of the problem
// vector.
EnergyReport run_pipeline(const EncodedProblem& problem, const PotentialMaps& maps,
                          const RunOptions& opts = {});

// Conformation x rotation x translation sweep in one statevector execution.
// Offsets, register sizes, and the grid must be uniform across pairs; per
// (protein conf, ligand conf) problems are assembled by the caller.
struct BatchInputs {
  std::vector<PotentialMaps> maps_by_protein_conf;   // size >= 1
  std::vector<LigandGridVector> lig_by_conf;         // size >= 1
  double offset_c = 0.0;
  RegisterSizing sizing;
  PoseSpec poses;
};

std::vector<EnergyReport> run_pipeline_batch(const BatchInputs& inputs,
                                             const RunOptions& opts = {});

} // namespace qvs
