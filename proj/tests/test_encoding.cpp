#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "qvs/encoding.hpp"

using namespace qvs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Molecule one_atom(const Vec3& pos, double charge, double epsilon = 0.1,
                  double rmin_half = 1.9, const char* type = "C") {
  Atom a;
  a.type_name = type;
  a.position = pos;
  a.charge = charge;
  a.epsilon = epsilon;
  a.rmin_half = rmin_half;
  return Molecule({a});
}

struct SmallSystem {
  GridSpec grid;
  PotentialMaps maps;
  LigandGridVector lig;
};

SmallSystem coulomb_fixture() {
  SmallSystem s;
  s.grid = GridSpec{{0, 0, 0}, 1.0, {2, 2, 2}};
  const auto protein = one_atom({-2.0, 0.0, 0.0}, 1.0, 0.2, 1.7, "P");
  const auto ligand = one_atom({0.0, 0.0, 0.0}, 1.0, 0.0, 1.9, "C");
  const auto reg = AtomTypeRegistry::from_ligand(ligand);
  s.maps = build_potential_maps(protein, reg, s.grid, {}, UnitsMode::reduced, kInf);
  s.lig = deposit_ligand(ligand, reg, s.grid);
  return s;
}

} // namespace

TEST_CASE("normalize_row basics") {
  const auto [unit, norm] = normalize_row(std::vector<double>{3.0, 4.0});
  CHECK(norm == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(unit[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(unit[1] == doctest::Approx(0.8).epsilon(1e-15));

  const auto [single, c] = normalize_row(std::vector<double>{2.5});
  CHECK(single[0] == 1.0);
  CHECK(c == 2.5);

  CHECK_THROWS_WITH_AS(normalize_row(std::vector<double>{0.0, 0.0}),
                       doctest::Contains("degenerate"), std::invalid_argument);
}

TEST_CASE("register auto-sizing uses the strict type inequality") {
  CHECK(auto_nt(1) == 2); // 2^2 = 4 > 2
  CHECK(auto_nt(2) == 2); // 4 > 3
  CHECK(auto_nt(3) == 3); // 8 > 4
  CHECK(auto_ng(8, false) == 3);
  CHECK(auto_ng(8, true) == 4); // offset slot needs one spare entry
  CHECK(auto_ng(9, false) == 4);
}

TEST_CASE("assembled problem is a unit vector times L_type") {
  auto s = coulomb_fixture();
  const auto p = assemble_o_grid(s.maps, s.lig, 0.0);
  CHECK(p.nt == 2);
  CHECK(p.ng == 3);
  CHECK(p.o_grid.size() == 32);
  double sq = 0.0;
  for (double v : p.o_grid) sq += v * v;
  CHECK(std::sqrt(sq) / p.l_type == doctest::Approx(1.0).epsilon(1e-12));
  // Blocks beyond 1 + n_types stay exactly zero.
  for (std::size_t i = 2 * 8; i < 32; ++i) CHECK(p.o_grid[i] == 0.0);
}

TEST_CASE("offset occupies the first padding slot and extends the norm") {
  auto s = coulomb_fixture();
  const auto p = assemble_o_grid(s.maps, s.lig, 100.0);
  REQUIRE(p.offset_slot.has_value());
  CHECK(*p.offset_slot == 8);  // first slot past the 8 grid nodes
  CHECK(p.ng == 4);            // grew to fit the offset slot
  double phi_sq = 0.0;
  for (double v : s.maps.phi) phi_sq += v * v;
  CHECK(p.phi_norm ==
        doctest::Approx(std::sqrt(phi_sq + 100.0 * 100.0)).epsilon(1e-14));
  CHECK(p.o_grid[*p.offset_slot] == doctest::Approx(p.phi_norm).epsilon(1e-14));
}

TEST_CASE("offset with a zero ligand decodes to the offset before subtraction") {
  auto s = coulomb_fixture();
  for (double& q : s.lig.q_grid) q = 0.0;
  for (auto& occ : s.lig.occupancy)
    for (double& v : occ) v = 0.0;
  const auto p = assemble_o_grid(s.maps, s.lig, 100.0);
  // Only the offset entry contributes: the pipeline's raw decode must give
  // exactly the offset constant. Emulate the inner product directly: the
  // normalized block-0 row dotted with block 0 of o_grid.
  double inner = 0.0;
  for (std::size_t k = 0; k < p.block_size(); ++k) {
    const double row_k =
        (k < p.n_grid() ? s.maps.phi[k]
                        : (k == *p.offset_slot ? p.offset_c : 0.0)) /
        p.phi_norm;
    inner += row_k * p.o_grid[k];
  }
  CHECK(inner == doctest::Approx(100.0).epsilon(1e-12));
  // Raw decode (before subtracting the offset).
  const double a0 = inner / (std::exp2(p.nt / 2.0) * p.l_type);
  CHECK(decode_energy_amplitude(a0, p) ==
        doctest::Approx(100.0 - p.offset_c).epsilon(1e-12));
}

TEST_CASE("zero ligand with zero offset is a degenerate encoding") {
  auto s = coulomb_fixture();
  for (double& q : s.lig.q_grid) q = 0.0;
  for (auto& occ : s.lig.occupancy)
    for (double& v : occ) v = 0.0;
  CHECK_THROWS_WITH_AS(assemble_o_grid(s.maps, s.lig, 0.0),
                       doctest::Contains("L_type = 0"), std::runtime_error);
}

TEST_CASE("explicit register sizes are validated structurally") {
  auto s = coulomb_fixture();
  RegisterSizing sizing;
  sizing.ng = 2; // 4 < 8 nodes
  CHECK_THROWS_WITH_AS(assemble_o_grid(s.maps, s.lig, 0.0, sizing),
                       doctest::Contains("grid register too small"),
                       std::invalid_argument);
  sizing = {};
  sizing.nt = 0;
  CHECK_THROWS_WITH_AS(assemble_o_grid(s.maps, s.lig, 0.0, sizing),
                       doctest::Contains("type register too small"),
                       std::invalid_argument);
  // nt = 1 fits 1 + 1 blocks exactly; allowed at the library level.
  sizing = {};
  sizing.nt = 1;
  const auto p = assemble_o_grid(s.maps, s.lig, 0.0, sizing);
  CHECK(p.nt == 1);
}

TEST_CASE("grid mismatch between maps and deposit is rejected") {
  auto s = coulomb_fixture();
  auto lig = s.lig;
  lig.grid.spacing = 0.5;
  CHECK_THROWS_AS(assemble_o_grid(s.maps, lig, 0.0), std::invalid_argument);
}

TEST_CASE("decode arithmetic") {
  EncodedProblem p;
  p.nt = 2;
  p.l_type = 10.0;
  p.offset_c = 0.0;
  // sqrt(0.25) * 2^(2/2) * 10 = 0.5 * 2 * 10
  CHECK(decode_energy_probability(0.25, p, true) ==
        doctest::Approx(10.0).epsilon(1e-15));
  CHECK(decode_energy_amplitude(0.0, p) == 0.0);
  p.offset_c = 3.5;
  CHECK(decode_energy_amplitude(0.0, p) == -3.5);
  // Linearity in a0.
  CHECK(decode_energy_amplitude(0.2, p) - decode_energy_amplitude(0.1, p) ==
        doctest::Approx(decode_energy_amplitude(0.1, p) -
                        decode_energy_amplitude(0.0, p))
            .epsilon(1e-15));
}

TEST_CASE("probability decode refuses ambiguous sign by default") {
  EncodedProblem p;
  p.nt = 1;
  p.l_type = 1.0;
  p.offset_c = 0.0;
  CHECK_THROWS_WITH_AS(decode_energy_probability(0.5, p),
                       doctest::Contains("sign-ambiguous"), std::runtime_error);
  CHECK_NOTHROW(decode_energy_probability(0.5, p, true));
  p.offset_c = 1.0;
  CHECK_NOTHROW(decode_energy_probability(0.5, p));
  CHECK_THROWS_AS(decode_energy_probability(1.5, p), std::invalid_argument);
}

TEST_CASE("probability decode equals |amplitude decode + offset| shifted") {
  EncodedProblem p;
  p.nt = 3;
  p.l_type = 7.5;
  p.offset_c = 2.0;
  for (double a0 : {-0.3, -0.1, 0.0, 0.2, 0.6}) {
    const double e_amp = decode_energy_amplitude(a0, p);
    const double e_prob = decode_energy_probability(a0 * a0, p);
    CHECK(e_prob == doctest::Approx(std::abs(e_amp + p.offset_c) - p.offset_c)
                        .epsilon(1e-12));
  }
}

TEST_CASE("auto offset bounds the elementwise energy sum") {
  auto s = coulomb_fixture();
  const double c = auto_offset(s.maps, s.lig);
  double bound = 0.0;
  for (std::size_t k = 0; k < s.grid.num_nodes(); ++k)
    bound += std::abs(s.maps.phi[k] * s.lig.q_grid[k]);
  for (std::size_t t = 0; t < s.maps.evdw.size(); ++t)
    for (std::size_t k = 0; k < s.grid.num_nodes(); ++k)
      bound += std::abs(s.maps.evdw[t][k] * s.lig.occupancy[t][k]);
  CHECK(c == doctest::Approx(1.1 * bound).epsilon(1e-14));
}

TEST_CASE("encoded problem serializes and reloads bit-exactly") {
  auto s = coulomb_fixture();
  const auto p = assemble_o_grid(s.maps, s.lig, 0.25);
  std::ostringstream out;
  write_encoded_problem(out, p);
  std::istringstream in(out.str());
  const auto q = read_encoded_problem(in);
  CHECK(q.nt == p.nt);
  CHECK(q.ng == p.ng);
  CHECK(q.n_types == p.n_types);
  CHECK(q.l_type == p.l_type);
  CHECK(q.phi_norm == p.phi_norm);
  CHECK(q.evdw_norms == p.evdw_norms);
  CHECK(q.offset_c == p.offset_c);
  CHECK(q.offset_slot == p.offset_slot);
  CHECK(q.o_grid == p.o_grid);
  CHECK(q.grid == p.grid);
}
