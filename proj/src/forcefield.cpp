#include "qvs/forcefield.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace qvs {

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Molecule::Molecule(std::vector<Atom> atoms, std::vector<std::vector<Vec3>> alternates)
    : atoms_(std::move(atoms)), alternates_(std::move(alternates)) {
  for (const auto& alt : alternates_) {
    if (alt.size() != atoms_.size())
      throw std::invalid_argument("conformation atom-count mismatch");
  }
}

Molecule Molecule::conformation(std::size_t index) const {
  if (index >= conformation_count())
    throw std::out_of_range("conformation index out of range");
  std::vector<Atom> atoms = atoms_;
  if (index > 0) {
    const auto& alt = alternates_[index - 1];
    for (std::size_t i = 0; i < atoms.size(); ++i) atoms[i].position = alt[i];
  }
  return Molecule(std::move(atoms));
}

double Molecule::total_charge() const {
  double q = 0.0;
  for (const auto& a : atoms_) q += a.charge;
  return q;
}

AtomTypeRegistry AtomTypeRegistry::from_ligand(const Molecule& ligand) {
  if (ligand.empty()) throw std::invalid_argument("ligand has no atoms");
  AtomTypeRegistry reg;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& atom : ligand.atoms()) {
    auto it = seen.find(atom.type_name);
    if (it == seen.end()) {
      seen.emplace(atom.type_name, reg.types_.size());
      reg.types_.push_back({atom.type_name, atom.epsilon, atom.rmin_half});
    } else {
      const AtomType& t = reg.types_[it->second];
      if (t.epsilon != atom.epsilon || t.rmin_half != atom.rmin_half)
        throw std::invalid_argument("inconsistent parameters for type '" +
                                    atom.type_name + "'");
    }
  }
  return reg;
}

std::size_t AtomTypeRegistry::index_of(std::string_view name) const {
  for (std::size_t t = 0; t < types_.size(); ++t)
    if (types_[t].name == name) return t;
  throw std::out_of_range("unknown atom type '" + std::string(name) + "'");
}

std::vector<std::size_t> AtomTypeRegistry::assign(const Molecule& ligand) const {
  std::vector<std::size_t> idx;
  idx.reserve(ligand.size());
  for (const auto& atom : ligand.atoms()) idx.push_back(index_of(atom.type_name));
  return idx;
}

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream ss{std::string(line)};
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, int line_no, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " +
                     what + " '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " +
                     what + " '" + tok + "'");
  if (!std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": non-finite " +
                     what + " '" + tok + "'");
  return v;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace

Molecule parse_molecule(std::string_view text) {
  std::vector<Atom> atoms;
  std::vector<std::vector<Vec3>> alternates;
  bool in_conformation = false;
  int block_start_line = 0;

  std::istringstream stream{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto finish_block = [&]() {
    if (in_conformation && alternates.back().size() != atoms.size())
      throw ParseError("conformation starting at line " +
                       std::to_string(block_start_line) +
                       ": atom-count mismatch (expected " +
                       std::to_string(atoms.size()) + " coordinates, got " +
                       std::to_string(alternates.back().size()) + ")");
  };

  while (std::getline(stream, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto fields = split_fields(line);
    if (fields.empty()) continue;

    if (fields.size() == 1 && fields[0] == "CONFORMATION") {
      finish_block();
      in_conformation = true;
      block_start_line = line_no;
      alternates.emplace_back();
      continue;
    }

    if (in_conformation) {
      if (fields.size() != 3)
        throw ParseError("line " + std::to_string(line_no) +
                         ": expected 3 coordinate fields, got " +
                         std::to_string(fields.size()));
      Vec3 p{parse_number(fields[0], line_no, "coordinate"),
             parse_number(fields[1], line_no, "coordinate"),
             parse_number(fields[2], line_no, "coordinate")};
      auto& block = alternates.back();
      if (block.size() == atoms.size())
        throw ParseError("line " + std::to_string(line_no) +
                         ": conformation atom-count mismatch (more than " +
                         std::to_string(atoms.size()) + " coordinates)");
      block.push_back(p);
      continue;
    }

    if (fields.size() != 7)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 7 fields 'type x y z charge epsilon "
                       "rmin_half', got " +
                       std::to_string(fields.size()));
    Atom a;
    a.type_name = fields[0];
    a.position = {parse_number(fields[1], line_no, "coordinate"),
                  parse_number(fields[2], line_no, "coordinate"),
                  parse_number(fields[3], line_no, "coordinate")};
    a.charge = parse_number(fields[4], line_no, "charge");
    a.epsilon = parse_number(fields[5], line_no, "epsilon");
    a.rmin_half = parse_number(fields[6], line_no, "rmin_half");
    if (a.epsilon < 0.0)
      throw ParseError("line " + std::to_string(line_no) + ": epsilon < 0");
    if (a.rmin_half <= 0.0)
      throw ParseError("line " + std::to_string(line_no) + ": rmin_half <= 0");
    atoms.push_back(std::move(a));
  }
  finish_block();

  if (atoms.empty()) throw ParseError("no atoms");
  return Molecule(std::move(atoms), std::move(alternates));
}

std::string serialize_molecule(const Molecule& mol) {
  std::string out;
  for (const auto& a : mol.atoms()) {
    out += a.type_name;
    for (double c : a.position) out += " " + format_g17(c);
    out += " " + format_g17(a.charge);
    out += " " + format_g17(a.epsilon);
    out += " " + format_g17(a.rmin_half);
    out += "\n";
  }
  for (const auto& alt : mol.alternates()) {
    out += "CONFORMATION\n";
    for (const auto& p : alt) {
      out += format_g17(p[0]) + " " + format_g17(p[1]) + " " + format_g17(p[2]);
      out += "\n";
    }
  }
  return out;
}

Molecule load_molecule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open molecule file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_molecule(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

} // namespace qvs
