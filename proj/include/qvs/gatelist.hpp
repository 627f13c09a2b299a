// Serializable circuit description: RY rotations with classical control
// patterns, X, H, and subregister permutations given by disjoint cycles.
// A gate list can be replayed directly on a real-amplitude state.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qvs {

struct ControlBit {
  int qubit = 0;
  int value = 0; // 0 or 1
};

struct Gate {
  enum class Kind { ry, x, h, perm };
  Kind kind = Kind::ry;
  int target = -1;     // ry / x / h
  double angle = 0.0;  // ry, radians
  std::vector<ControlBit> controls;

  // perm: cycles over basis indices of the subregister
  // [register_lsb, register_lsb + register_bits). A cycle (c0 c1 ... cm)
  // moves the amplitude at c0 to c1, c1 to c2, ..., cm to c0.
  std::string register_name;
  int register_lsb = 0;
  int register_bits = 0;
  std::vector<std::vector<std::uint64_t>> cycles;

  static Gate make_ry(double angle, int target, std::vector<ControlBit> controls = {});
  static Gate make_x(int target, std::vector<ControlBit> controls = {});
  static Gate make_h(int target);
  static Gate make_perm(std::string register_name, int register_lsb,
                        int register_bits,
                        std::vector<std::vector<std::uint64_t>> cycles,
                        std::vector<ControlBit> controls = {});
};

struct GateList {
  int n_qubits = 0;
  std::vector<Gate> gates;

  void validate() const;

  // Replays the whole list on a length-2^n_qubits amplitude span.
  void apply(std::span<double> amps) const;

  std::string to_json() const;
  static GateList from_json(const std::string& text);
};

// Applies one gate; span length must be 2^n_qubits.
void apply_gate(const Gate& gate, int n_qubits, std::span<double> amps);

} // namespace qvs
