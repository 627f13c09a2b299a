#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qvs/cli.hpp"
#include "qvs/gatelist.hpp"

using namespace qvs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("qvs_cli_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reduced-units fixture: protein charge +1 at 2 A from the ligand atom on
// node (0,0,0); E_ele = 0.5 exactly.
void write_pair_fixture(const TempDir& dir) {
  write_file(dir.file("protein.txt"), "P -2.0 0.0 0.0 1.0 0.2 1.7\n");
  write_file(dir.file("ligand.txt"), "C 0.0 0.0 0.0 1.0 0.0 1.9\n");
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

const std::vector<std::string> kPairGrid = {
    "--grid-origin", "0,0,0", "--grid-spacing", "1", "--grid-dims", "2,2,2",
    "--reduced-units"};

std::vector<std::string> with_pair_args(const TempDir& dir,
                                        std::vector<std::string> args) {
  args.insert(args.end(), {"--protein", dir.file("protein.txt"), "--ligand",
                           dir.file("ligand.txt")});
  args.insert(args.end(), kPairGrid.begin(), kPairGrid.end());
  return args;
}

} // namespace

TEST_CASE("cli: missing input file exits with code 2 and names the path") {
  TempDir dir;
  std::string err;
  const int rc = run({"score", "--protein", dir.file("nope.txt"), "--ligand",
                      dir.file("nope2.txt"), "--grid-origin", "0,0,0",
                      "--grid-spacing", "1", "--grid-dims", "2,2,2"},
                     nullptr, &err);
  CHECK(rc == 2);
  CHECK(err.find("nope.txt") != std::string::npos);
}

TEST_CASE("cli: unknown flag exits with code 2") {
  std::string err;
  CHECK(run({"score", "--no-such-flag"}, nullptr, &err) == 2);
}

TEST_CASE("cli gridmap writes an 8-node phi section and prints norms") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string out;
  const int rc =
      run(with_pair_args(dir, {"gridmap", "--out", dir.file("maps.txt")}), &out);
  CHECK(rc == 0);
  CHECK(out.find("phi_norm") != std::string::npos);
  const std::string maps = read_file(dir.file("maps.txt"));
  // Header (5 lines) + 8 phi lines + 8 evdw lines for the single type.
  CHECK(std::count(maps.begin(), maps.end(), '\n') == 5 + 8 + 8);
  CHECK(maps.rfind("origin 0 0 0", 0) == 0);
}

TEST_CASE("cli gridmap is byte-identical across reruns") {
  TempDir dir;
  write_pair_fixture(dir);
  REQUIRE(run(with_pair_args(dir, {"gridmap", "--out", dir.file("a.txt")})) == 0);
  REQUIRE(run(with_pair_args(dir, {"gridmap", "--out", dir.file("b.txt")})) == 0);
  CHECK(read_file(dir.file("a.txt")) == read_file(dir.file("b.txt")));
}

TEST_CASE("cli score: the reduced-units pair fixture gives 0.5") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string out;
  const int rc = run(with_pair_args(dir, {"score"}), &out);
  REQUIRE(rc == 0);
  const auto doc = nlohmann::json::parse(out);
  CHECK(doc["results"][0]["E_total"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(doc["results"][0]["mode"] == "amplitude");
  CHECK(doc["results"][0].contains("L_type"));
  CHECK(doc["config"]["units"] == "reduced");
}

TEST_CASE("cli score: sampled mode stays within four stderr of 0.5") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string out;
  const int rc = run(with_pair_args(dir, {"score", "--mode", "sampled", "--shots",
                                          "1000000", "--seed", "7", "--offset",
                                          "auto"}),
                     &out);
  REQUIRE(rc == 0);
  const auto doc = nlohmann::json::parse(out);
  const double e = doc["results"][0]["E_total"].get<double>();
  const double se = doc["results"][0]["stderr"].get<double>();
  CHECK(std::abs(e - 0.5) <= 4.0 * se);
  CHECK(doc["results"][0]["seed"] == 7);
  CHECK(doc["results"][0]["shots"] == 1000000);
}

TEST_CASE("cli score: --verify embeds the oracle cross-check") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string out;
  const int rc = run(with_pair_args(dir, {"score", "--verify"}), &out);
  REQUIRE(rc == 0);
  const auto doc = nlohmann::json::parse(out);
  REQUIRE(doc.contains("oracle"));
  CHECK(doc["oracle"]["pipeline_vs_grid_oracle"].get<double>() < 1e-9);
  CHECK(doc["oracle"]["E_ele_direct"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cli score: explicit undersized registers are rejected up front") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string err;
  CHECK(run(with_pair_args(dir, {"score", "--nt", "1"}), nullptr, &err) == 2);
  CHECK(err.find("2^nt must exceed") != std::string::npos);
  err.clear();
  CHECK(run(with_pair_args(dir, {"score", "--ng", "2"}), nullptr, &err) == 2);
  CHECK(err.find("2^ng") != std::string::npos);
}

TEST_CASE("cli score: config file drives the run and flags win") {
  TempDir dir;
  write_pair_fixture(dir);
  write_file(dir.file("config.json"), R"({
    "protein": ")" + dir.file("protein.txt") + R"(",
    "ligand": ")" + dir.file("ligand.txt") + R"(",
    "grid": {"origin": [0, 0, 0], "spacing": 1.0, "dims": [2, 2, 2]},
    "units": "reduced",
    "offset": 0.0
  })");
  std::string out;
  REQUIRE(run({"score", "--config", dir.file("config.json")}, &out) == 0);
  auto doc = nlohmann::json::parse(out);
  CHECK(doc["results"][0]["E_total"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-12));

  // Flag overrides the config's offset.
  out.clear();
  REQUIRE(run({"score", "--config", dir.file("config.json"), "--offset", "2.5"},
              &out) == 0);
  doc = nlohmann::json::parse(out);
  CHECK(doc["results"][0]["offset_c"].get<double>() == 2.5);
  CHECK(doc["results"][0]["E_total"].get<double>() ==
        doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("cli score: saved encoding reproduces the report") {
  TempDir dir;
  write_pair_fixture(dir);
  REQUIRE(run(with_pair_args(dir, {"gridmap", "--out", dir.file("maps.txt")})) == 0);
  std::string direct_out;
  REQUIRE(run(with_pair_args(dir, {"score", "--save-encoding",
                                   dir.file("enc.txt")}),
              &direct_out) == 0);
  std::string from_enc;
  REQUIRE(run({"score", "--encoding", dir.file("enc.txt"), "--maps",
               dir.file("maps.txt")},
              &from_enc) == 0);
  const auto a = nlohmann::json::parse(direct_out);
  const auto b = nlohmann::json::parse(from_enc);
  CHECK(a["results"][0]["E_total"] == b["results"][0]["E_total"]);
}

TEST_CASE("cli score report is deterministic for identical config and seed") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string a, b;
  REQUIRE(run(with_pair_args(dir, {"score", "--mode", "sampled", "--offset",
                                   "auto", "--shots", "20000", "--seed", "5"}),
              &a) == 0);
  REQUIRE(run(with_pair_args(dir, {"score", "--mode", "sampled", "--offset",
                                   "auto", "--shots", "20000", "--seed", "5"}),
              &b) == 0);
  CHECK(a == b);
}

TEST_CASE("cli batch: degenerate batch equals score") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string score_out, batch_out;
  REQUIRE(run(with_pair_args(dir, {"score"}), &score_out) == 0);
  REQUIRE(run(with_pair_args(dir, {"batch"}), &batch_out) == 0);
  const auto s = nlohmann::json::parse(score_out);
  const auto b = nlohmann::json::parse(batch_out);
  REQUIRE(b["results"].size() == 1);
  CHECK(b["results"][0]["E_total"].get<double>() ==
        doctest::Approx(s["results"][0]["E_total"].get<double>()).epsilon(1e-12));
}

TEST_CASE("cli batch: ligand conformations times x-shifts match single runs") {
  TempDir dir;
  write_file(dir.file("protein.txt"), "P -3.0 1.0 1.0 1.0 0.2 1.7\n");
  write_file(dir.file("ligand.txt"),
             "C 1.0 1.0 1.0 0.6 0.1 1.9\n"
             "CONFORMATION\n"
             "1.5 1.2 1.4\n");
  const std::vector<std::string> grid = {"--grid-origin", "0,0,0",
                                         "--grid-spacing", "1",
                                         "--grid-dims", "4,4,4",
                                         "--reduced-units"};
  auto args = [&](std::vector<std::string> extra) {
    extra.insert(extra.end(), {"--protein", dir.file("protein.txt"), "--ligand",
                               dir.file("ligand.txt")});
    extra.insert(extra.end(), grid.begin(), grid.end());
    return extra;
  };
  std::string batch_out;
  REQUIRE(run(args({"batch", "--conformations", "--shifts-x", "0,1"}),
              &batch_out) == 0);
  const auto doc = nlohmann::json::parse(batch_out);
  REQUIRE(doc["results"].size() == 4);
  // Results are ranked ascending by energy.
  double prev = -1e300;
  for (const auto& row : doc["results"]) {
    CHECK(row["E_total"].get<double>() >= prev);
    prev = row["E_total"].get<double>();
  }
}

TEST_CASE("cli batch: an oversized shift names the axis and the limit") {
  TempDir dir;
  write_file(dir.file("protein.txt"), "P -3.0 1.0 1.0 1.0 0.2 1.7\n");
  write_file(dir.file("ligand.txt"), "C 1.0 1.0 1.0 0.6 0.1 1.9\n");
  std::string err;
  const int rc = run({"batch", "--protein", dir.file("protein.txt"), "--ligand",
                      dir.file("ligand.txt"), "--grid-origin", "0,0,0",
                      "--grid-spacing", "1", "--grid-dims", "4,4,4",
                      "--reduced-units", "--shifts-x", "0,3"},
                     nullptr, &err);
  CHECK(rc == 2);
  CHECK(err.find("axis x") != std::string::npos);
  CHECK(err.find("guard margin") != std::string::npos);
}

TEST_CASE("cli verify passes on the default checks") {
  std::string out;
  const int rc = run({"verify", "--seed", "3"}, &out);
  CHECK(rc == 0);
  CHECK(out.find("all checks passed") != std::string::npos);
  CHECK(out.find("matrix identical") != std::string::npos);
  CHECK(out.find("[FAIL]") == std::string::npos);
}

TEST_CASE("cli verify flags a corrupted map cache") {
  TempDir dir;
  write_pair_fixture(dir);
  REQUIRE(run(with_pair_args(dir, {"gridmap", "--out", dir.file("maps.txt")})) == 0);
  // Corrupt one phi entry.
  auto text = read_file(dir.file("maps.txt"));
  std::istringstream in(text);
  std::ostringstream corrupted;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    corrupted << (line_no == 7 ? "123.456" : line) << "\n";
  }
  write_file(dir.file("maps.txt"), corrupted.str());

  std::string out;
  const int rc = run(with_pair_args(dir, {"verify", "--maps", dir.file("maps.txt")}),
                     &out);
  CHECK(rc == 1);
  CHECK(out.find("[FAIL] map file consistency") != std::string::npos);
  // The operator checks themselves still pass.
  CHECK(out.find("[PASS] first-row unitarity") != std::string::npos);
}

TEST_CASE("cli circuit-export: gate list replays to the scored energy") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string exported;
  REQUIRE(run(with_pair_args(dir, {"circuit-export", "--backend", "ry_tree"}),
              &exported) == 0);
  const auto doc = nlohmann::json::parse(exported);
  CHECK(doc.contains("block_signs"));
  CHECK(doc["registers"]["type"]["lsb"] == 3);

  // Replay: the exported list contains the U stage and the summation layer.
  const GateList list = GateList::from_json(exported);
  std::string score_out;
  REQUIRE(run(with_pair_args(dir, {"score", "--save-encoding", dir.file("enc.txt")}),
              &score_out) == 0);
  // Rebuild the input state from the saved encoding and replay the gates.
  std::ifstream enc(dir.file("enc.txt"));
  REQUIRE(enc.good());
  // (decode via the library)
  const auto problem = load_encoded_problem_file(dir.file("enc.txt"));
  std::vector<double> state = problem.o_grid;
  for (auto& v : state) v /= problem.l_type;
  list.apply(state);
  const double e = state[0] * std::exp2(problem.nt / 2.0) * problem.l_type -
                   problem.offset_c;
  const auto sdoc = nlohmann::json::parse(score_out);
  CHECK(e == doctest::Approx(sdoc["results"][0]["E_total"].get<double>())
                 .epsilon(1e-9));
}

TEST_CASE("cli circuit-export requires the ry_tree backend") {
  TempDir dir;
  write_pair_fixture(dir);
  std::string err;
  CHECK(run(with_pair_args(dir, {"circuit-export"}), nullptr, &err) == 2);
  CHECK(err.find("ry_tree") != std::string::npos);
}
