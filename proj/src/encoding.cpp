#include "qvs/encoding.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qvs {

int auto_nt(std::size_t n_types) {
  int nt = 1;
  while ((std::size_t(1) << nt) <= 1 + n_types) ++nt;
  return nt;
}

int auto_ng(std::size_t n_grid, bool with_offset) {
  const std::size_t need = n_grid + (with_offset ? 1 : 0);
  int ng = 1;
  while ((std::size_t(1) << ng) < need) ++ng;
  return ng;
}

std::pair<std::vector<double>, double> normalize_row(std::span<const double> values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq == 0.0) throw std::invalid_argument("degenerate map: all-zero row");
  const double norm = std::sqrt(sq);
  std::vector<double> unit(values.begin(), values.end());
  for (double& v : unit) v /= norm;
  return {std::move(unit), norm};
}

double auto_offset(const PotentialMaps& maps, const LigandGridVector& lig) {
  if (!(maps.grid == lig.grid))
    throw std::invalid_argument("grid mismatch between maps and deposit");
  const std::size_t n = maps.grid.num_nodes();
  double bound = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    bound += std::abs(maps.phi[k] * lig.q_grid[k]);
  for (std::size_t t = 0; t < maps.evdw.size(); ++t)
    for (std::size_t k = 0; k < n; ++k)
      bound += std::abs(maps.evdw[t][k] * lig.occupancy[t][k]);
  return 1.1 * bound;
}

EncodedProblem assemble_o_grid(const PotentialMaps& maps,
                               const LigandGridVector& lig, double offset_c,
                               RegisterSizing sizing) {
  if (!(maps.grid == lig.grid))
    throw std::invalid_argument("grid mismatch between maps and deposit");
  if (offset_c < 0.0) throw std::invalid_argument("offset must be nonnegative");
  if (maps.evdw.size() != lig.occupancy.size())
    throw std::invalid_argument("type count mismatch between maps and deposit");

  EncodedProblem p;
  p.grid = maps.grid;
  p.n_types = maps.evdw.size();
  p.offset_c = offset_c;
  const bool with_offset = offset_c > 0.0;
  const std::size_t n_grid = p.grid.num_nodes();

  p.ng = sizing.ng.value_or(auto_ng(n_grid, with_offset));
  p.nt = sizing.nt.value_or(auto_nt(p.n_types));
  const std::size_t block = std::size_t(1) << p.ng;
  if (block < n_grid + (with_offset ? 1 : 0))
    throw std::invalid_argument("grid register too small: 2^ng must cover the "
                                "grid nodes plus the offset slot");
  if ((std::size_t(1) << p.nt) < 1 + p.n_types)
    throw std::invalid_argument("type register too small: 2^nt must cover the "
                                "electrostatic block plus every atom type");

  if (with_offset) p.offset_slot = n_grid; // first padding slot inside block 0

  // Block norms. The electrostatic norm includes the offset entry so the
  // normalized first row and the stacked vector stay mutually consistent.
  double phi_sq = 0.0;
  for (double v : maps.phi) phi_sq += v * v;
  if (with_offset) phi_sq += offset_c * offset_c;
  p.phi_norm = std::sqrt(phi_sq);
  p.evdw_norms.resize(p.n_types, 0.0);
  for (std::size_t t = 0; t < p.n_types; ++t) {
    double sq = 0.0;
    for (double v : maps.evdw[t]) sq += v * v;
    p.evdw_norms[t] = std::sqrt(sq);
  }

  p.o_grid.assign(p.dim(), 0.0);
  for (std::size_t k = 0; k < n_grid; ++k)
    p.o_grid[k] = p.phi_norm * lig.q_grid[k];
  if (with_offset) p.o_grid[*p.offset_slot] = p.phi_norm * 1.0;
  for (std::size_t t = 0; t < p.n_types; ++t) {
    double* dst = p.o_grid.data() + (t + 1) * block;
    for (std::size_t k = 0; k < n_grid; ++k)
      dst[k] = p.evdw_norms[t] * lig.occupancy[t][k];
  }

  double sq = 0.0;
  for (double v : p.o_grid) sq += v * v;
  p.l_type = std::sqrt(sq);
  if (p.l_type == 0.0)
    throw std::runtime_error("degenerate encoding: L_type = 0 (zero ligand "
                             "deposit and zero offset)");
  return p;
}

double decode_energy_amplitude(double a0, const EncodedProblem& problem) {
  return a0 * std::exp2(problem.nt / 2.0) * problem.l_type - problem.offset_c;
}

double decode_energy_probability(double p0, const EncodedProblem& problem,
                                 bool allow_sign_ambiguous) {
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw std::invalid_argument("probability must lie in [0, 1]");
  if (decode_is_sign_ambiguous(problem) && !allow_sign_ambiguous)
    throw std::runtime_error("sign-ambiguous decode: probability readout with "
                             "offset 0 cannot recover a negative energy");
  return std::sqrt(p0) * std::exp2(problem.nt / 2.0) * problem.l_type -
         problem.offset_c;
}

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::istringstream keyed_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("encoding file: missing '" + key + "' line");
  std::istringstream ss(line);
  std::string k;
  ss >> k;
  if (k != key)
    throw std::runtime_error("encoding file: expected '" + key + "', got '" +
                             k + "'");
  return ss;
}

} // namespace

void write_encoded_problem(std::ostream& out, const EncodedProblem& p) {
  const GridSpec& g = p.grid;
  out << "origin " << g17(g.origin[0]) << " " << g17(g.origin[1]) << " "
      << g17(g.origin[2]) << "\n";
  out << "spacing " << g17(g.spacing) << "\n";
  out << "dims " << g.dims[0] << " " << g.dims[1] << " " << g.dims[2] << "\n";
  out << "registers " << p.nt << " " << p.ng << "\n";
  out << "n_types " << p.n_types << "\n";
  out << "l_type " << g17(p.l_type) << "\n";
  out << "phi_norm " << g17(p.phi_norm) << "\n";
  out << "evdw_norms";
  for (double v : p.evdw_norms) out << " " << g17(v);
  out << "\n";
  out << "offset " << g17(p.offset_c) << " "
      << (p.offset_slot ? std::to_string(*p.offset_slot) : std::string("none"))
      << "\n";
  out << "o_grid " << p.o_grid.size() << "\n";
  for (double v : p.o_grid) out << g17(v) << "\n";
}

EncodedProblem read_encoded_problem(std::istream& in) {
  EncodedProblem p;
  {
    auto ss = keyed_line(in, "origin");
    if (!(ss >> p.grid.origin[0] >> p.grid.origin[1] >> p.grid.origin[2]))
      throw std::runtime_error("encoding file: bad origin");
  }
  {
    auto ss = keyed_line(in, "spacing");
    if (!(ss >> p.grid.spacing))
      throw std::runtime_error("encoding file: bad spacing");
  }
  {
    auto ss = keyed_line(in, "dims");
    if (!(ss >> p.grid.dims[0] >> p.grid.dims[1] >> p.grid.dims[2]))
      throw std::runtime_error("encoding file: bad dims");
  }
  {
    auto ss = keyed_line(in, "registers");
    if (!(ss >> p.nt >> p.ng))
      throw std::runtime_error("encoding file: bad registers");
  }
  {
    auto ss = keyed_line(in, "n_types");
    if (!(ss >> p.n_types))
      throw std::runtime_error("encoding file: bad n_types");
  }
  {
    auto ss = keyed_line(in, "l_type");
    if (!(ss >> p.l_type)) throw std::runtime_error("encoding file: bad l_type");
  }
  {
    auto ss = keyed_line(in, "phi_norm");
    if (!(ss >> p.phi_norm))
      throw std::runtime_error("encoding file: bad phi_norm");
  }
  {
    auto ss = keyed_line(in, "evdw_norms");
    double v;
    while (ss >> v) p.evdw_norms.push_back(v);
    if (p.evdw_norms.size() != p.n_types)
      throw std::runtime_error("encoding file: evdw_norms count mismatch");
  }
  {
    auto ss = keyed_line(in, "offset");
    std::string slot;
    if (!(ss >> p.offset_c >> slot))
      throw std::runtime_error("encoding file: bad offset");
    if (slot != "none") p.offset_slot = std::stoull(slot);
  }
  std::size_t count = 0;
  {
    auto ss = keyed_line(in, "o_grid");
    if (!(ss >> count)) throw std::runtime_error("encoding file: bad o_grid");
  }
  p.grid.validate();
  if (count != p.dim())
    throw std::runtime_error("encoding file: o_grid length mismatch");
  p.o_grid.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("encoding file: truncated o_grid");
    std::istringstream ss(line);
    if (!(ss >> p.o_grid[i]))
      throw std::runtime_error("encoding file: bad o_grid entry '" + line + "'");
  }
  return p;
}

void save_encoded_problem_file(const std::string& path, const EncodedProblem& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write encoding file '" + path + "'");
  write_encoded_problem(out, p);
}

EncodedProblem load_encoded_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open encoding file '" + path + "'");
  return read_encoded_problem(in);
}

} // namespace qvs
