#include "qvs/gatelist.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace qvs {

Gate Gate::make_ry(double angle, int target, std::vector<ControlBit> controls) {
  Gate g;
  g.kind = Kind::ry;
  g.angle = angle;
  g.target = target;
  g.controls = std::move(controls);
  return g;
}

Gate Gate::make_x(int target, std::vector<ControlBit> controls) {
  Gate g;
  g.kind = Kind::x;
  g.target = target;
  g.controls = std::move(controls);
  return g;
}

Gate Gate::make_h(int target) {
  Gate g;
  g.kind = Kind::h;
  g.target = target;
  return g;
}

Gate Gate::make_perm(std::string register_name, int register_lsb, int register_bits,
                     std::vector<std::vector<std::uint64_t>> cycles,
                     std::vector<ControlBit> controls) {
  Gate g;
  g.kind = Kind::perm;
  g.register_name = std::move(register_name);
  g.register_lsb = register_lsb;
  g.register_bits = register_bits;
  g.cycles = std::move(cycles);
  g.controls = std::move(controls);
  return g;
}

namespace {

void check_qubit(int q, int n_qubits, const char* what) {
  if (q < 0 || q >= n_qubits)
    throw std::invalid_argument(std::string("gate ") + what +
                                " qubit out of range: " + std::to_string(q));
}

// Builds (mask, fixed-values) for the control pattern.
std::pair<std::uint64_t, std::uint64_t> control_masks(const std::vector<ControlBit>& controls) {
  std::uint64_t mask = 0, vals = 0;
  for (const auto& c : controls) {
    const std::uint64_t bit = std::uint64_t(1) << c.qubit;
    mask |= bit;
    if (c.value) vals |= bit;
  }
  return {mask, vals};
}

// Calls fn(base) for every basis index matching the control values, with all
// bits in free_mask enumerated; base already includes the control values.
template <typename Fn>
void for_each_free(std::uint64_t free_mask, std::uint64_t fixed, Fn&& fn) {
  std::uint64_t sub = 0;
  while (true) {
    fn(fixed | sub);
    sub = (sub - free_mask) & free_mask;
    if (sub == 0) break;
  }
}

} // namespace

void apply_gate(const Gate& gate, int n_qubits, std::span<double> amps) {
  const std::uint64_t dim = std::uint64_t(1) << n_qubits;
  if (amps.size() != dim)
    throw std::invalid_argument("state length does not match qubit count");
  auto [cmask, cvals] = control_masks(gate.controls);

  switch (gate.kind) {
    case Gate::Kind::ry: {
      const std::uint64_t tmask = std::uint64_t(1) << gate.target;
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      const std::uint64_t free_mask = (dim - 1) & ~(cmask | tmask);
      for_each_free(free_mask, cvals, [&](std::uint64_t i0) {
        const std::uint64_t i1 = i0 | tmask;
        const double a0 = amps[i0];
        const double a1 = amps[i1];
        amps[i0] = c * a0 - s * a1;
        amps[i1] = s * a0 + c * a1;
      });
      break;
    }
    case Gate::Kind::x: {
      const std::uint64_t tmask = std::uint64_t(1) << gate.target;
      const std::uint64_t free_mask = (dim - 1) & ~(cmask | tmask);
      for_each_free(free_mask, cvals, [&](std::uint64_t i0) {
        std::swap(amps[i0], amps[i0 | tmask]);
      });
      break;
    }
    case Gate::Kind::h: {
      const std::uint64_t tmask = std::uint64_t(1) << gate.target;
      const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
      const std::uint64_t free_mask = (dim - 1) & ~(cmask | tmask);
      for_each_free(free_mask, cvals, [&](std::uint64_t i0) {
        const std::uint64_t i1 = i0 | tmask;
        const double a0 = amps[i0];
        const double a1 = amps[i1];
        amps[i0] = (a0 + a1) * inv_sqrt2;
        amps[i1] = (a0 - a1) * inv_sqrt2;
      });
      break;
    }
    case Gate::Kind::perm: {
      const std::uint64_t reg_mask = ((std::uint64_t(1) << gate.register_bits) - 1)
                                     << gate.register_lsb;
      const std::uint64_t free_mask = (dim - 1) & ~(cmask | reg_mask);
      for_each_free(free_mask, cvals, [&](std::uint64_t base) {
        for (const auto& cycle : gate.cycles) {
          if (cycle.size() < 2) continue;
          // Amplitude at c0 moves to c1, ..., last moves to c0.
          auto addr = [&](std::uint64_t sub) {
            return base | (sub << gate.register_lsb);
          };
          double carry = amps[addr(cycle.back())];
          for (std::size_t j = cycle.size(); j-- > 1;)
            amps[addr(cycle[j])] = amps[addr(cycle[j - 1])];
          amps[addr(cycle.front())] = carry;
        }
      });
      break;
    }
  }
}

void GateList::validate() const {
  for (const auto& g : gates) {
    for (const auto& c : g.controls) {
      check_qubit(c.qubit, n_qubits, "control");
      if (c.value != 0 && c.value != 1)
        throw std::invalid_argument("control value must be 0 or 1");
    }
    if (g.kind == Gate::Kind::perm) {
      if (g.register_bits <= 0 || g.register_lsb < 0 ||
          g.register_lsb + g.register_bits > n_qubits)
        throw std::invalid_argument("perm register out of range");
      std::set<std::uint64_t> seen;
      const std::uint64_t limit = std::uint64_t(1) << g.register_bits;
      for (const auto& cycle : g.cycles)
        for (std::uint64_t idx : cycle) {
          if (idx >= limit)
            throw std::invalid_argument("perm cycle index out of range");
          if (!seen.insert(idx).second)
            throw std::invalid_argument("perm cycles are not disjoint");
        }
    } else {
      check_qubit(g.target, n_qubits, "target");
      for (const auto& c : g.controls)
        if (c.qubit == g.target)
          throw std::invalid_argument("control overlaps target qubit");
    }
  }
}

void GateList::apply(std::span<double> amps) const {
  for (const auto& g : gates) apply_gate(g, n_qubits, amps);
}

namespace {
using nlohmann::ordered_json;

const char* kind_name(Gate::Kind k) {
  switch (k) {
    case Gate::Kind::ry: return "ry";
    case Gate::Kind::x: return "x";
    case Gate::Kind::h: return "h";
    default: return "perm";
  }
}

Gate::Kind kind_from_name(const std::string& s) {
  if (s == "ry") return Gate::Kind::ry;
  if (s == "x") return Gate::Kind::x;
  if (s == "h") return Gate::Kind::h;
  if (s == "perm") return Gate::Kind::perm;
  throw std::invalid_argument("unknown gate kind '" + s + "'");
}
} // namespace

std::string GateList::to_json() const {
  ordered_json root;
  root["n_qubits"] = n_qubits;
  root["gates"] = ordered_json::array();
  for (const auto& g : gates) {
    ordered_json jg;
    jg["kind"] = kind_name(g.kind);
    if (g.kind == Gate::Kind::perm) {
      jg["register"] = g.register_name;
      jg["lsb"] = g.register_lsb;
      jg["bits"] = g.register_bits;
      jg["cycles"] = g.cycles;
    } else {
      jg["target"] = g.target;
      if (g.kind == Gate::Kind::ry) jg["angle"] = g.angle;
    }
    if (!g.controls.empty()) {
      ordered_json jc = ordered_json::array();
      for (const auto& c : g.controls) jc.push_back({c.qubit, c.value});
      jg["controls"] = jc;
    }
    root["gates"].push_back(jg);
  }
  return root.dump(2);
}

GateList GateList::from_json(const std::string& text) {
  const auto root = nlohmann::json::parse(text);
  GateList list;
  list.n_qubits = root.at("n_qubits").get<int>();
  for (const auto& jg : root.at("gates")) {
    Gate g;
    g.kind = kind_from_name(jg.at("kind").get<std::string>());
    if (g.kind == Gate::Kind::perm) {
      g.register_name = jg.at("register").get<std::string>();
      g.register_lsb = jg.at("lsb").get<int>();
      g.register_bits = jg.at("bits").get<int>();
      g.cycles = jg.at("cycles").get<std::vector<std::vector<std::uint64_t>>>();
    } else {
      g.target = jg.at("target").get<int>();
      if (g.kind == Gate::Kind::ry) g.angle = jg.at("angle").get<double>();
    }
    if (jg.contains("controls"))
      for (const auto& jc : jg.at("controls"))
        g.controls.push_back({jc.at(0).get<int>(), jc.at(1).get<int>()});
    list.gates.push_back(std::move(g));
  }
  list.validate();
  return list;
}

} // namespace qvs
