// Molecule and force-field parameter handling: atoms with partial charges
// and Lennard-Jones parameters, plain-text molecule files with optional
// alternative conformations, and the ligand atom-type registry.
#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qvs {

using Vec3 = std::array<double, 3>;

double distance(const Vec3& a, const Vec3& b);

// Coulomb prefactor 1/(4 pi eps0) in kcal mol^-1 A e^-2, CHARMM convention.
inline constexpr double kCoulombKcalPerMolAngstrom = 332.0636;

// Reduced units set the Coulomb prefactor to 1 so analytic fixtures are exact.
enum class UnitsMode { physical, reduced };

inline double coulomb_prefactor(UnitsMode mode) {
  return mode == UnitsMode::physical ? kCoulombKcalPerMolAngstrom : 1.0;
}

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Atom {
  std::string type_name;
  Vec3 position{};        // Angstrom
  double charge = 0.0;    // elementary charges
  double epsilon = 0.0;   // kcal/mol, LJ well depth, >= 0
  double rmin_half = 1.0; // Angstrom, R_min/2, > 0
};

// Ordered atom list plus optional alternative coordinate sets. Conformation 0
// is the primary coordinate set; alternates follow in file order. Immutable
// after construction.
class Molecule {
public:
  Molecule() = default;
  explicit Molecule(std::vector<Atom> atoms,
                    std::vector<std::vector<Vec3>> alternates = {});

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  std::size_t conformation_count() const { return 1 + alternates_.size(); }
  const std::vector<std::vector<Vec3>>& alternates() const { return alternates_; }

  // Copy of this molecule with the coordinates of conformation `index`
  // (0 = primary) as its primary coordinates and no alternates.
  Molecule conformation(std::size_t index) const;

  double total_charge() const;

private:
  std::vector<Atom> atoms_;
  std::vector<std::vector<Vec3>> alternates_;
};

struct AtomType {
  std::string name;
  double epsilon = 0.0;
  double rmin_half = 1.0;
};

// Distinct ligand atom types in order of first appearance. Index assignment
// is dense, 0-based and deterministic for identical input.
class AtomTypeRegistry {
public:
  static AtomTypeRegistry from_ligand(const Molecule& ligand);

  std::size_t size() const { return types_.size(); }
  const AtomType& type(std::size_t t) const { return types_.at(t); }
  const std::vector<AtomType>& types() const { return types_; }
  std::size_t index_of(std::string_view name) const;

  // Per-atom type indices for a molecule using this registry's naming.
  std::vector<std::size_t> assign(const Molecule& ligand) const;

private:
  std::vector<AtomType> types_;
};

// Molecule file format: `#` starts a comment; one atom per line as
// `type_name x y z charge epsilon rmin_half`; an optional `CONFORMATION`
// line starts an alternative coordinate block of `x y z` lines matching the
// atom count and order.
Molecule parse_molecule(std::string_view text);
std::string serialize_molecule(const Molecule& mol);
Molecule load_molecule_file(const std::string& path);

} // namespace qvs
