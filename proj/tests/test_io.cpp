#include "wsm/app/commands.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace wsm;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("wsm_test_io_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path &p, const std::string &s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

struct CliResult {
  int code;
  std::string err;
};

CliResult run_cli(const std::string &args, const fs::path &dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(WSM_CLI_PATH) + " " + args + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(err)};
}

std::vector<std::vector<double>> data_rows(const std::string &csv) {
  std::vector<std::vector<double>> out;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#')
      continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      row.push_back(std::strtod(cell.c_str(), nullptr));
    out.push_back(row);
  }
  return out;
}

std::vector<EigenState> sample_states() {
  std::vector<EigenState> s(2);
  s[0].energy = 1.4028196132276209;
  s[0].spacing = 0.123;
  s[0].centroid = 1.1;
  s[0].spread = 0.3;
  s[0].well_index = 1;
  s[0].wavefunction = {0.0, 1e-300, -2.5, 3.25};
  s[1].energy = -0.0;
  s[1].well_index = 2;
  s[1].clustered = true;
  s[1].wavefunction = {std::nextafter(1.0, 2.0)};
  return s;
}

} // namespace

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  io::ConfigValues v;
  EXPECT_THROW(v.set("trap", "dept", "3"), ValidationError);
  EXPECT_THROW(v.set("trapp", "depth", "3"), ValidationError);
  EXPECT_THROW(v.set_override("trap.bogus=1"), ValidationError);
  EXPECT_THROW(v.set_override("trapdepth=1"), ValidationError);
  EXPECT_THROW(v.set_override("trap.depth"), ValidationError);
  std::istringstream ini("[trap]\ndepth = 10\n[nonsense]\nx = 1\n");
  EXPECT_THROW(v.merge_ini(ini, "test.ini"), ValidationError);
  std::istringstream top("depth = 10\n");
  EXPECT_THROW(v.merge_ini(top, "test.ini"), ValidationError);
}

TEST(Config, FileThenOverridesResolveInOrder) {
  const auto dir = scratch("cfg");
  spit(dir / "a.ini", "; header\n[trap]\ndepth = 10   ; U\nmesh_points = 200000\n[surface]\n"
                      "temperature = 300\n[species]\nmass =   ; default\n");
  const auto c = io::load_run_config((dir / "a.ini").string(), {"trap.depth=20"});
  EXPECT_DOUBLE_EQ(c.lattice.depth, 20.0);
  EXPECT_EQ(c.lattice.mesh_points, 200000u);
  EXPECT_DOUBLE_EQ(c.surface.temperature, 300.0);
  // untouched keys keep their defaults
  EXPECT_DOUBLE_EQ(c.lattice.z_max, 30.0);
  EXPECT_EQ(c.correction_wells, 12);
  EXPECT_EQ(c.raw.get("species", "mass"), "");
  EXPECT_NEAR(c.lattice.gravity_step, 0.0700682, 1e-6);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto &e : fs::directory_iterator(fs::path(WSM_SOURCE_DIR) / "configs")) {
    const auto c = io::load_run_config(e.path().string(), {});
    EXPECT_EQ(c.hash().size(), 64u) << e.path();
  }
  const auto d = io::load_run_config(std::string(WSM_SOURCE_DIR) + "/configs/default.ini", {});
  EXPECT_EQ(d.hash(), io::load_run_config("", {}).hash());
}

TEST(Config, BadValuesAreConfigErrors) {
  EXPECT_THROW(io::load_run_config("", {"trap.depth=abc"}), ValidationError);
  EXPECT_THROW(io::load_run_config("", {"trap.depth=-1"}), ValidationError);
  EXPECT_THROW(io::load_run_config("", {"trap.mesh_points=10"}), ValidationError);
  EXPECT_THROW(io::load_run_config("", {"surface.model=copper"}), ValidationError);
  EXPECT_THROW(io::load_run_config("", {"atom.profiles=gaussian"}), ValidationError);
  EXPECT_THROW(io::load_run_config("", {"exclusion.scenarios=near,far90"}), ValidationError);
  EXPECT_THROW(io::load_run_config("", {"cache.enabled=maybe"}), ValidationError);
  EXPECT_THROW(io::load_run_config("/nonexistent/x.ini", {}), ValidationError);
}

TEST(Config, ResolvedConfigRoundTripsAndHashTracksPhysicsOnly) {
  const auto a = io::load_run_config("", {"trap.depth=10", "yukawa.exponent_factor=2"});
  io::ConfigValues again;
  std::istringstream in(a.raw.resolved());
  again.merge_ini(in, "resolved");
  const auto b = io::interpret(again);
  EXPECT_EQ(a.raw.resolved(), b.raw.resolved());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 64u);

  const auto moved = io::load_run_config(
      "", {"trap.depth=10", "yukawa.exponent_factor=2", "output.directory=elsewhere",
           "cache.enabled=false", "run.threads=4"});
  EXPECT_EQ(a.hash(), moved.hash());
  const auto changed =
      io::load_run_config("", {"trap.depth=10", "yukawa.exponent_factor=1"});
  EXPECT_NE(a.hash(), changed.hash());
}

TEST(Hash, KnownDigest) {
  EXPECT_EQ(io::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Csv, SeventeenSignificantDigitsRoundTrip) {
  io::CsvTable t({"a", "b", "c"});
  t.meta("config_sha256", "x");
  const double v = 0.1 + 0.2;
  t.row({v, 7LL, std::string("uniform")});
  t.row({-1e-300, -3LL, std::string("p")});
  const std::string s = t.str();
  EXPECT_EQ(s.rfind("# config_sha256: x\na,b,c\n", 0), 0u);
  const auto rows = data_rows(s);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][0], v); // bit-exact
  EXPECT_EQ(rows[1][0], -1e-300);
  EXPECT_NE(s.find("3.0000000000000004e-01"), std::string::npos);
  EXPECT_THROW(t.row({1.0}), std::logic_error);
}

TEST(Csv, AtomicWriteLeavesNoTemporaries) {
  const auto dir = scratch("atomic");
  io::write_file_atomic(dir / "sub" / "f.csv", "one\n");
  io::write_file_atomic(dir / "sub" / "f.csv", "two\n");
  EXPECT_EQ(slurp(dir / "sub" / "f.csv"), "two\n");
  int files = 0;
  for ([[maybe_unused]] const auto &e : fs::directory_iterator(dir / "sub"))
    ++files;
  EXPECT_EQ(files, 1);
}

TEST(Cache, RoundTripIsBitExact) {
  const auto dir = scratch("cache_rt");
  io::FileStateStore store(dir);
  EXPECT_FALSE(store.load("missing").has_value());
  const auto s = sample_states();
  store.store("key", s);
  const auto back = store.load("key");
  ASSERT_TRUE(back.has_value());
  ASSERT_EQ(back->size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(std::memcmp(&(*back)[i].energy, &s[i].energy, sizeof(double)), 0);
    EXPECT_EQ((*back)[i].spacing, s[i].spacing);
    EXPECT_EQ((*back)[i].well_index, s[i].well_index);
    EXPECT_EQ((*back)[i].clustered, s[i].clustered);
    EXPECT_EQ((*back)[i].wavefunction, s[i].wavefunction);
  }
  EXPECT_EQ(store.hits(), 1u);
  EXPECT_EQ(store.writes(), 1u);
}

TEST(Cache, EveryCorruptionIsACacheError) {
  const auto dir = scratch("cache_bad");
  io::FileStateStore store(dir);
  store.store("key", sample_states());
  const auto path = store.path_for("key");
  const std::string good = slurp(path);

  auto expect_bad = [&](const std::string &content, const char *what) {
    spit(path, content);
    EXPECT_THROW((void)store.load("key"), CacheError) << what;
  };
  std::string flipped = good;
  flipped[flipped.size() - 3] ^= 0x01;
  expect_bad(flipped, "payload bit flip");
  expect_bad(good.substr(0, good.size() - 5), "truncated");
  expect_bad(good.substr(0, 10), "truncated header");
  expect_bad(good + "x", "trailing byte");
  std::string magic = good;
  magic[0] = 'X';
  expect_bad(magic, "magic");
  std::string version = good;
  version[8] = 9;
  expect_bad(version, "version");

  // a valid file stored under another key's name
  store.store("other", sample_states());
  spit(path, slurp(store.path_for("other")));
  EXPECT_THROW((void)store.load("key"), CacheError);
}

TEST(Cache, WarmSolveSkipsEigensolverAndMatchesBitExactly) {
  const auto dir = scratch("cache_solve");
  io::FileStateStore store(dir);
  LatticeConfig cfg;
  cfg.mesh_points = 20000;
  SolveOptions opt;
  opt.store = &store;
  const auto before = eigensolve_counter().load();
  const auto cold = first_band_states(cfg, 5, opt);
  const auto mid = eigensolve_counter().load();
  EXPECT_GT(mid, before);
  const auto warm = first_band_states(cfg, 5, opt);
  EXPECT_EQ(eigensolve_counter().load(), mid);
  ASSERT_EQ(cold.size(), warm.size());
  for (std::size_t i = 0; i < cold.size(); ++i) {
    EXPECT_EQ(cold[i].energy, warm[i].energy);
    EXPECT_EQ(cold[i].wavefunction, warm[i].wavefunction);
  }
  // any relevant change misses
  cfg.depth = 3.5;
  (void)first_band_states(cfg, 5, opt);
  EXPECT_GT(eigensolve_counter().load(), mid);
}

TEST(Cli, WarmCacheGivesByteIdenticalOutputWithoutEigensolves) {
  const auto dir = scratch("cli_warm");
  const std::string common = "spectrum --set trap.mesh_points=100000 --cache " +
                             (dir / "c").string() + " --out ";
  const auto cold = run_cli(common + (dir / "a").string(), dir);
  ASSERT_EQ(cold.code, 0) << cold.err;
  EXPECT_NE(cold.err.find("eigensolves: 1"), std::string::npos) << cold.err;
  const auto warm = run_cli(common + (dir / "b").string(), dir);
  ASSERT_EQ(warm.code, 0) << warm.err;
  EXPECT_NE(warm.err.find("eigensolves: 0"), std::string::npos) << warm.err;
  EXPECT_NE(warm.err.find("cache hits: 1"), std::string::npos) << warm.err;
  for (const char *f : {"spectrum.csv", "spectrum.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;

  const std::string csv = slurp(dir / "a" / "spectrum.csv");
  const auto cfg = io::load_run_config("", {"trap.mesh_points=100000"});
  EXPECT_NE(csv.find("# config_sha256: " + cfg.hash()), std::string::npos);
  EXPECT_NE(csv.find("sha256=" + io::sha256_hex(bundled_rb_transitions())), std::string::npos);
  EXPECT_NE(csv.find("n,E_n[E_r],dE_n[E_r],dE_n[Hz]"), std::string::npos);
  const auto rows = data_rows(csv);
  ASSERT_EQ(rows.size(), 13u);
  EXPECT_NEAR(rows[0][1], 1.4028, 2e-4 * 1.4028);
  EXPECT_TRUE(fs::exists(dir / "a" / "config.resolved.ini"));
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli_codes");
  EXPECT_EQ(run_cli("spectrum --set trap.bogus=1", dir).code, 2);
  EXPECT_EQ(run_cli("spectrum --set trap.depth=-3", dir).code, 2);
  EXPECT_EQ(run_cli("frobnicate", dir).code, 2);
  EXPECT_EQ(run_cli("spectrum --config /nonexistent.ini", dir).code, 2);

  // corrupt the one cache file a spectrum run writes
  const std::string args = "spectrum --set trap.mesh_points=2000 --cache " +
                           (dir / "c").string() + " --out " + (dir / "o").string();
  ASSERT_EQ(run_cli(args, dir).code, 0);
  fs::path file;
  for (const auto &e : fs::directory_iterator(dir / "c"))
    file = e.path();
  std::string bytes = slurp(file);
  bytes[bytes.size() / 2] ^= 0x10;
  spit(file, bytes);
  const auto bad = run_cli(args, dir);
  EXPECT_EQ(bad.code, 4);
  EXPECT_NE(bad.err.find("checksum"), std::string::npos) << bad.err;
  EXPECT_EQ(run_cli(args + " --no-cache", dir).code, 0);
}

TEST(Cli, PotentialFilesAndFirstWell) {
  const auto dir = scratch("cli_potential");
  const auto r = run_cli("potential --set yukawa.alpha=0 --out " + (dir / "o").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(dir / "o" / "potential.csv");
  EXPECT_NE(csv.find("# first_well: absent"), std::string::npos);
  const auto rows = data_rows(csv);
  ASSERT_EQ(rows.size(), 200u);
  for (const auto &row : rows) {
    ASSERT_EQ(row.size(), 6u);
    EXPECT_EQ(row[5], 0.0); // alpha_Y = 0
    EXPECT_LT(row[2], 0.0);
    EXPECT_LT(row[3], 0.0);
  }
  // exponent runs from near 3 to 4 and crosses 3.5 between 100 nm and 1 um
  const auto ex = data_rows(slurp(dir / "o" / "exponent.csv"));
  EXPECT_LT(ex.front()[2], 3.2);
  EXPECT_NEAR(ex.back()[2], 4.0, 1e-3);
  double cross = 0.0;
  for (std::size_t i = 1; i < ex.size(); ++i)
    if (ex[i - 1][2] < 3.5 && ex[i][2] >= 3.5)
      cross = ex[i][1];
  EXPECT_GT(cross, 1e-7);
  EXPECT_LT(cross, 1e-6);
}

TEST(Cli, ExclusionWritesOneCurvePerScenarioAndScalesWithSensitivity) {
  const auto dir = scratch("cli_exclusion");
  const std::string base = "exclusion --set trap.mesh_points=100000 --set exclusion.points=5 "
                           "--set exclusion.lambda_min=1e-6 --set exclusion.verify=false "
                           "--cache " + (dir / "c").string();
  ASSERT_EQ(run_cli(base + " --out " + (dir / "a").string(), dir).code, 0);
  const auto r = run_cli(base + " --set exclusion.sensitivity=2e-4 --out " + (dir / "b").string(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("eigensolves: 0"), std::string::npos) << r.err;
  for (const char *s : {"near", "far40", "far70"}) {
    const std::string name = std::string("exclusion_") + s + ".csv";
    const auto a = data_rows(slurp(dir / "a" / name));
    const auto b = data_rows(slurp(dir / "b" / name));
    ASSERT_EQ(a.size(), 5u) << s;
    ASSERT_EQ(b.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i][0], b[i][0]);
      EXPECT_DOUBLE_EQ(b[i][1], 2.0 * a[i][1]);
    }
  }
}
