#include "qvs/random_systems.hpp"

#include <stdexcept>
#include <string>

namespace qvs {

namespace {

struct TypeParams {
  const char* name;
  double epsilon;
  double rmin_half;
};

// Fixed parameter table so type names always map to consistent LJ values.
constexpr TypeParams kLigandTypes[] = {
    {"C", 0.086, 1.908}, {"N", 0.17, 1.824}, {"O", 0.21, 1.661},
    {"S", 0.25, 2.0},    {"H", 0.0157, 0.6},
};

} // namespace

RandomSystem make_random_system(std::mt19937_64& rng, const RandomSystemSpec& spec) {
  if (spec.max_types < 1 || spec.max_types > int(std::size(kLigandTypes)))
    throw std::invalid_argument("unsupported type count");

  RandomSystem sys;
  sys.grid.origin = {0.0, 0.0, 0.0};
  sys.grid.spacing = spec.spacing;
  sys.grid.dims = spec.dims;
  sys.grid.validate();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto uniform_int = [&](int lo, int hi) {
    return lo + int(rng() % std::uint64_t(hi - lo + 1));
  };

  const int n_types = uniform_int(1, spec.max_types);
  const int n_lig = uniform_int(1, spec.max_ligand_atoms);
  const int n_prot = uniform_int(1, spec.max_protein_atoms);

  auto ligand_position = [&]() {
    Vec3 p;
    for (int ax = 0; ax < 3; ++ax) {
      const int n = spec.dims[ax];
      const double lo = spec.ligand_plane_margin + 0.05;
      const double hi = double(n - 1) - spec.ligand_plane_margin - 0.05;
      if (lo >= hi)
        throw std::invalid_argument("grid too small for the requested margin");
      p[ax] = sys.grid.origin[ax] + spec.spacing * uniform(lo, hi);
    }
    return p;
  };

  std::vector<Atom> lig_atoms;
  for (int i = 0; i < n_lig; ++i) {
    const TypeParams& t = kLigandTypes[i == 0 ? 0 : uniform_int(0, n_types - 1)];
    Atom a;
    a.type_name = t.name;
    a.epsilon = t.epsilon;
    a.rmin_half = t.rmin_half;
    a.charge = uniform(-0.5, 0.5);
    a.position = ligand_position();
    lig_atoms.push_back(std::move(a));
  }
  std::vector<std::vector<Vec3>> lig_alts;
  for (int c = 1; c < spec.ligand_conformations; ++c) {
    std::vector<Vec3> alt;
    for (int i = 0; i < n_lig; ++i) alt.push_back(ligand_position());
    lig_alts.push_back(std::move(alt));
  }
  sys.ligand = Molecule(std::move(lig_atoms), std::move(lig_alts));

  // Protein atoms on a shell 2..4 Angstrom outside the box along a random
  // face, away from every node.
  const double span_x = spec.spacing * (spec.dims[0] - 1);
  const double span_y = spec.spacing * (spec.dims[1] - 1);
  const double span_z = spec.spacing * (spec.dims[2] - 1);
  auto protein_position = [&]() {
    Vec3 p{uniform(0.0, span_x), uniform(0.0, span_y), uniform(0.0, span_z)};
    const int face_axis = uniform_int(0, 2);
    const bool positive = uniform_int(0, 1) == 1;
    const double offset = uniform(2.0, 4.0);
    const double span = face_axis == 0 ? span_x : (face_axis == 1 ? span_y : span_z);
    p[face_axis] = positive ? span + offset : -offset;
    return p;
  };

  std::vector<Atom> prot_atoms;
  for (int i = 0; i < n_prot; ++i) {
    Atom a;
    a.type_name = "P" + std::to_string(i % 3);
    a.epsilon = uniform(0.05, 0.3);
    a.rmin_half = uniform(1.5, 2.2);
    a.charge = uniform(-0.8, 0.8);
    a.position = protein_position();
    prot_atoms.push_back(std::move(a));
  }
  std::vector<std::vector<Vec3>> prot_alts;
  for (int c = 1; c < spec.protein_conformations; ++c) {
    std::vector<Vec3> alt;
    for (int i = 0; i < n_prot; ++i) alt.push_back(protein_position());
    prot_alts.push_back(std::move(alt));
  }
  sys.protein = Molecule(std::move(prot_atoms), std::move(prot_alts));
  return sys;
}

} // namespace qvs
