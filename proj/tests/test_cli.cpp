/// @file test_cli.cpp
/// @brief Configuration parsing, snapshot format, run/diagnose orchestration and the CLI binary.

#include <gtest/gtest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "ism/ism.hpp"
#include "test_util.hpp"

namespace ism {
namespace {

namespace fs = std::filesystem;
using test::unit_grid;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ism_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

std::string config_text(const std::string& ic, const std::string& extra = "") {
  return "nx=17\nnz=17\nLx=1\nLz=1\nt_end=0.05\n" + extra + "initial_condition=" + ic + "\n";
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool same_bits(const ScalarField& a, const ScalarField& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(ISM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// --- configuration ---------------------------------------------------------

TEST(Config, MinimalExampleGetsDefaults) {
  const SimConfig c = parse_config("nx=65\nnz=65\nLx=1\nLz=1\nt_end=1\ncfl=0.5\ninitial_condition=eady(1)");
  EXPECT_EQ(c.nx, 65);
  EXPECT_EQ(c.nz, 65);
  EXPECT_EQ(c.s_order, 3);
  EXPECT_FALSE(c.dt.has_value());
  EXPECT_DOUBLE_EQ(c.cfl, 0.5);
  EXPECT_DOUBLE_EQ(c.f, 1.0);
  EXPECT_DOUBLE_EQ(c.theta0, 1.0);
  const auto* e = std::get_if<EadyIC>(&c.initial_condition);
  ASSERT_NE(e, nullptr);
  EXPECT_DOUBLE_EQ(e->C, 1.0);
  EXPECT_TRUE(e->g_poly.empty());
}

TEST(Config, CommentsBlankLinesAndWhitespace) {
  const SimConfig c = parse_config(
      "# header\n\n  nx = 17  # trailing\nnz=21\nLx=2\nLz=0.5\nt_end=3\ndt=0.01\n"
      "initial_condition = random_smooth(seed=4, amplitude=0.2, modes=2)\ns=2.5\n");
  EXPECT_EQ(c.nz, 21);
  ASSERT_TRUE(c.dt.has_value());
  EXPECT_DOUBLE_EQ(*c.dt, 0.01);
  EXPECT_DOUBLE_EQ(c.s, 2.5);
  const auto& r = std::get<RandomSmoothIC>(c.initial_condition);
  EXPECT_EQ(r.seed, 4u);
  EXPECT_DOUBLE_EQ(r.amplitude, 0.2);
  EXPECT_EQ(r.modes, 2);
}

TEST(Config, InitialConditionForms) {
  const auto e = std::get<EadyIC>(parse_config(config_text("eady(0.5, 1, 0, -2)")).initial_condition);
  EXPECT_DOUBLE_EQ(e.C, 0.5);
  EXPECT_EQ(e.g_poly, (std::vector<double>{1.0, 0.0, -2.0}));
  const auto r = std::get<RandomSmoothIC>(parse_config(config_text("random_smooth(9, 0.3)")).initial_condition);
  EXPECT_EQ(r.seed, 9u);
  EXPECT_EQ(r.modes, 3);
  const auto f = std::get<FileIC>(parse_config(config_text("file(/tmp/x.ismsnap)")).initial_condition);
  EXPECT_EQ(f.path, "/tmp/x.ismsnap");
}

TEST(Config, BothDtAndCflNamesBothKeys) {
  const std::string msg = error_of(config_text("eady(1)", "dt=0.01\ncfl=0.5\n"));
  EXPECT_NE(msg.find("'dt'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'cfl'"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 7"), std::string::npos) << msg;
}

TEST(Config, NegativeEndTimeIsConstraintError) {
  const std::string msg = error_of("nx=17\nnz=17\nLx=1\nLz=1\nt_end=-1\ninitial_condition=eady(1)\n");
  EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
  EXPECT_NE(msg.find("t_end"), std::string::npos) << msg;
}

TEST(Config, ErrorsAreLineNumbered) {
  EXPECT_NE(error_of(config_text("eady(1)", "colour=red\n")).find("line 6: unknown key 'colour'"), std::string::npos);
  EXPECT_NE(error_of(config_text("eady(1)", "nx=33\n")).find("line 6: duplicate key 'nx'"), std::string::npos);
  EXPECT_NE(error_of(config_text("eady(1)", "oops\n")).find("line 6"), std::string::npos);
  EXPECT_NE(error_of("nx=8\nnz=17\nLx=1\nLz=1\nt_end=1\ninitial_condition=eady(1)\n").find("line 1"),
            std::string::npos);
  EXPECT_NE(error_of(config_text("eady(1)", "cfl=abc\n")).find("line 6"), std::string::npos);
  EXPECT_NE(error_of(config_text("vortex(1)")).find("line 6"), std::string::npos);
  EXPECT_NE(error_of(config_text("random_smooth(amplitude=1)")).find("seed"), std::string::npos);
}

TEST(Config, MissingRequiredKey) {
  EXPECT_NE(error_of("nx=17\nnz=17\nLx=1\nLz=1\ninitial_condition=eady(1)\n").find("missing required key 't_end'"),
            std::string::npos);
}

TEST(Config, SmallGridRejectsHighSobolevOrder) {
  EXPECT_NE(error_of(config_text("eady(1)", "s_order=7\n")).find("s_order"), std::string::npos);
  EXPECT_NO_THROW(parse_config(config_text("eady(1)", "s_order=6\n")));
}

// --- snapshots -------------------------------------------------------------

TEST(Snapshot, RoundTripIsBitExact) {
  const fs::path dir = scratch("roundtrip");
  State st = random_smooth_state(make_grid(17, 23, 1.7, 0.9), 3, 0.4, 3, Constants{0.5, 2.0, 9.81, 300.0});
  st.t = 0.1 + 0.2;
  write_snapshot(dir / "a.ismsnap", st);
  const State back = read_snapshot(dir / "a.ismsnap");
  EXPECT_TRUE(back.grid() == st.grid());
  EXPECT_EQ(back.t, st.t);
  EXPECT_TRUE(back.constants == st.constants);
  EXPECT_TRUE(same_bits(back.u_s.x, st.u_s.x));
  EXPECT_TRUE(same_bits(back.u_s.z, st.u_s.z));
  EXPECT_TRUE(same_bits(back.u_t, st.u_t));
  EXPECT_TRUE(same_bits(back.theta_s, st.theta_s));
  write_snapshot(dir / "b.ismsnap", back);
  EXPECT_EQ(slurp(dir / "a.ismsnap"), slurp(dir / "b.ismsnap"));
}

TEST(Snapshot, LayoutIsLittleEndianWithFixedHeader) {
  State st(make_grid(9, 10, 1.0, 2.0));
  st.u_t(1, 0) = 1.0;
  const std::vector<unsigned char> b = encode_snapshot(st);
  ASSERT_EQ(b.size(), kSnapshotHeaderBytes + 4 * 90 * 8);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 8), "ISMSNAP1");
  EXPECT_EQ(b[8], 9);
  EXPECT_EQ(b[12], 10);
  // f64 1.0 = 0x3FF0000000000000, little-endian; u_T is the third array, node (1, 0) its second entry.
  const std::size_t off = kSnapshotHeaderBytes + 2 * 90 * 8 + 8;
  EXPECT_EQ(b[off + 7], 0x3F);
  EXPECT_EQ(b[off + 6], 0xF0);
}

TEST(Snapshot, BadMagicRejected) {
  std::vector<unsigned char> b = encode_snapshot(State(unit_grid(9)));
  b[3] = 'X';
  EXPECT_THROW(decode_snapshot(b), FormatError);
}

TEST(Snapshot, PayloadLengthMismatchRejected) {
  std::vector<unsigned char> b = encode_snapshot(State(unit_grid(9)));
  b.pop_back();
  EXPECT_THROW(decode_snapshot(b), FormatError);
  b.resize(kSnapshotHeaderBytes - 1);
  EXPECT_THROW(decode_snapshot(b), FormatError);
}

TEST(Snapshot, ExpectedGridMismatchRejected) {
  const std::vector<unsigned char> b = encode_snapshot(State(unit_grid(9)));
  EXPECT_THROW(decode_snapshot(b, unit_grid(11)), FormatError);
  EXPECT_NO_THROW(decode_snapshot(b, unit_grid(9)));
}

TEST(Snapshot, MissingFileIsFormatError) {
  EXPECT_THROW(read_snapshot(fs::temp_directory_path() / "ism_no_such_file.ismsnap"), FormatError);
}

TEST(Snapshot, WriteLeavesNoTemporaryBehind) {
  const fs::path dir = scratch("atomic");
  write_snapshot(dir / "s.ismsnap", State(unit_grid(9)));
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++files;
    EXPECT_EQ(e.path().filename(), "s.ismsnap");
  }
  EXPECT_EQ(files, 1);
}

// --- run / diagnose --------------------------------------------------------

TEST(Run, CsvHeaderIsExact) {
  const fs::path dir = scratch("header");
  run(parse_config(config_text("eady(1)")), dir);
  const std::string csv = slurp(dir / "diagnostics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,h,casimir_q1,casimir_q2,E_hs,sup_grad_uS,sup_grad_uT,sup_grad_theta,bkm_integral");
}

TEST(Run, EadyCompletesWithSteadyEnergy) {
  const fs::path dir = scratch("eady");
  const RunResult res = run(parse_config(config_text("eady(1)", "dt=0.01\nsnapshot_every=2\n")), dir);
  EXPECT_EQ(res.status, kExitOk);
  EXPECT_EQ(res.steps, 5);
  EXPECT_NEAR(res.t_final, 0.05, 1e-15);
  ASSERT_EQ(res.records.size(), 6u);
  const double e0 = res.records.front().energy_h;
  for (const auto& r : res.records) EXPECT_LE(std::abs(r.energy_h - e0), 1e-6 * std::abs(e0));
  // initial, steps 2 and 4, final
  EXPECT_EQ(res.snapshots.size(), 4u);
  EXPECT_EQ(res.snapshots.back().filename(), "snap_00000005.ismsnap");
}

TEST(Run, HugeStepAbortsAndKeepsOutputs) {
  const fs::path dir = scratch("abort");
  SimConfig cfg = parse_config(config_text("random_smooth(seed=7, amplitude=1)", "dt=10\n"));
  cfg.t_end = 1000.0;
  const RunResult res = run(cfg, dir);
  EXPECT_EQ(res.status, kExitNumerical);
  EXPECT_FALSE(res.message.empty());
  EXPECT_TRUE(fs::exists(dir / "diagnostics.csv"));
  ASSERT_FALSE(res.snapshots.empty());
  EXPECT_NO_THROW(read_snapshot(res.snapshots.front()));
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".ismsnap") EXPECT_NO_THROW(read_snapshot(e.path()));
  }
}

TEST(Run, RepeatedRunsAreByteIdentical) {
  const std::string text = config_text("random_smooth(seed=5, amplitude=0.3)", "snapshot_every=3\n");
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const RunResult ra = run(parse_config(text), a);
  const RunResult rb = run(parse_config(text), b);
  ASSERT_EQ(ra.snapshots.size(), rb.snapshots.size());
  EXPECT_EQ(slurp(a / "diagnostics.csv"), slurp(b / "diagnostics.csv"));
  for (std::size_t k = 0; k < ra.snapshots.size(); ++k) {
    EXPECT_EQ(ra.snapshots[k].filename(), rb.snapshots[k].filename());
    EXPECT_EQ(slurp(ra.snapshots[k]), slurp(rb.snapshots[k]));
  }
}

TEST(Run, FileInitialConditionRestartsFromSnapshot) {
  const fs::path dir = scratch("restart");
  State st = random_smooth_state(unit_grid(17), 8, 0.2, 2);
  st.t = 0.25;
  write_snapshot(dir / "ic.ismsnap", st);
  const RunResult res = run(parse_config(config_text("file(" + (dir / "ic.ismsnap").string() + ")")), dir / "out");
  EXPECT_EQ(res.status, kExitOk);
  EXPECT_EQ(res.records.front().t, 0.25);
  EXPECT_NEAR(res.t_final, 0.30, 1e-14);
}

TEST(Diagnose, ZeroStateRowIsZero) {
  const fs::path dir = scratch("diag_zero");
  write_snapshot(dir / "z.ismsnap", State(unit_grid(17)));
  const DiagnoseResult d = diagnose({dir / "z.ismsnap"}, 3);
  ASSERT_EQ(d.records.size(), 1u);
  const auto& r = d.records[0];
  for (double v : {r.t, r.energy_h, r.casimir_moment(1), r.casimir_moment(2), r.E_hs, r.sup_grad_uS, r.sup_grad_uT,
                   r.sup_grad_theta, r.bkm_integral}) {
    EXPECT_EQ(v, 0.0);
  }
}

TEST(Diagnose, EadyPairAccumulatesUnitBkm) {
  const fs::path dir = scratch("diag_eady");
  State st = eady_state(unit_grid(33), EadyParams{1.0, {}});
  write_snapshot(dir / "a.ismsnap", st);
  st.t = 1.0;
  write_snapshot(dir / "b.ismsnap", st);
  const DiagnoseResult d = diagnose({dir / "a.ismsnap", dir / "b.ismsnap"}, 3);
  ASSERT_EQ(d.records.size(), 2u);
  const auto& r0 = d.records[0];
  const auto& r1 = d.records[1];
  EXPECT_EQ(r0.energy_h, r1.energy_h);
  EXPECT_EQ(r0.E_hs, r1.E_hs);
  EXPECT_EQ(r0.sup_grad_uS, r1.sup_grad_uS);
  EXPECT_NEAR(r0.sup_grad_uS, 1.0, 1e-13);
  EXPECT_EQ(r0.bkm_integral, 0.0);
  EXPECT_NEAR(r1.bkm_integral, 1.0, 1e-12);
  const double h = 1.0 / 32;
  EXPECT_NEAR(r1.E_hs, 4.0, 3 * h * h / 6.0 + 1e-12);
}

TEST(Diagnose, ShuffledOrderRejected) {
  const fs::path dir = scratch("diag_shuffle");
  State st(unit_grid(9));
  write_snapshot(dir / "a.ismsnap", st);
  st.t = 1.0;
  write_snapshot(dir / "b.ismsnap", st);
  EXPECT_THROW(diagnose({dir / "b.ismsnap", dir / "a.ismsnap"}, 3), std::invalid_argument);
  EXPECT_THROW(diagnose({dir / "a.ismsnap", dir / "a.ismsnap"}, 3), std::invalid_argument);
}

TEST(Diagnose, ReproducesInlineRows) {
  const fs::path dir = scratch("diag_repro");
  const RunResult res = run(parse_config(config_text("random_smooth(seed=2, amplitude=0.3)", "snapshot_every=1\n")), dir);
  ASSERT_EQ(res.status, kExitOk);
  ASSERT_EQ(res.snapshots.size(), res.records.size());
  const DiagnoseResult d = diagnose(res.snapshots, 3);
  ASSERT_EQ(d.records.size(), res.records.size());
  for (std::size_t k = 0; k < d.records.size(); ++k) {
    const auto& a = d.records[k];
    const auto& b = res.records[k];
    EXPECT_EQ(a.t, b.t);
    for (auto [x, y] : {std::pair{a.energy_h, b.energy_h}, {a.casimir_moment(1), b.casimir_moment(1)},
                        {a.casimir_moment(2), b.casimir_moment(2)}, {a.E_hs, b.E_hs}, {a.sup_grad_uS, b.sup_grad_uS},
                        {a.sup_grad_uT, b.sup_grad_uT}, {a.sup_grad_theta, b.sup_grad_theta},
                        {a.bkm_integral, b.bkm_integral}}) {
      EXPECT_LE(std::abs(x - y), 1e-12 * std::max(1.0, std::abs(y)));
    }
  }
}

TEST(RandomSmooth, SeedDeterministicAndNormalised) {
  const State a = random_smooth_state(unit_grid(17), 42, 0.3, 3);
  const State b = random_smooth_state(unit_grid(17), 42, 0.3, 3);
  const State c = random_smooth_state(unit_grid(17), 43, 0.3, 3);
  EXPECT_EQ(encode_snapshot(a), encode_snapshot(b));
  EXPECT_NE(encode_snapshot(a), encode_snapshot(c));
  EXPECT_NEAR(std::max(a.u_s.x.max_abs(), a.u_s.z.max_abs()), 0.3, 1e-14);
  EXPECT_NEAR(a.u_t.max_abs(), 0.3, 1e-14);
  EXPECT_NEAR(a.theta_s.max_abs(), 0.3, 1e-14);
}

// --- command-line binary -----------------------------------------------------

TEST(Cli, ExitStatuses) {
  const fs::path dir = scratch("cli");
  spit(dir / "ok.cfg", config_text("eady(1)"));
  spit(dir / "bad.cfg", config_text("eady(1)", "colour=red\n"));
  spit(dir / "boom.cfg", "nx=17\nnz=17\nLx=1\nLz=1\nt_end=1000\ndt=10\ninitial_condition=random_smooth(7, 1)\n");
  spit(dir / "junk.ismsnap", "not a snapshot at all");
  const std::string d = dir.string();

  EXPECT_EQ(cli("run " + d + "/ok.cfg --out " + d + "/ok"), 0);
  EXPECT_EQ(cli("run " + d + "/bad.cfg --out " + d + "/bad"), 2);
  EXPECT_EQ(cli("run " + d + "/missing.cfg --out " + d + "/missing"), 2);
  EXPECT_EQ(cli("run " + d + "/boom.cfg --out " + d + "/boom"), 3);
  EXPECT_EQ(cli("diagnose " + d + "/junk.ismsnap"), 4);
  EXPECT_EQ(cli("stability " + d + "/junk.ismsnap"), 4);
  EXPECT_EQ(cli("frobnicate"), 2);

  const std::string s0 = d + "/ok/snap_00000000.ismsnap";
  EXPECT_EQ(cli("diagnose " + s0 + " --s-order 3 --out " + d + "/diag.csv"), 0);
  EXPECT_EQ(slurp(dir / "diag.csv").rfind(kDiagnosticsHeader, 0), 0u);
  EXPECT_EQ(cli("stability " + s0 + " --out " + d + "/phi.csv"), 0);
  EXPECT_EQ(slurp(dir / "phi.csv").rfind("i,j,x,z,phi_pp,degenerate\n", 0), 0u);
  EXPECT_EQ(cli("equilibrium " + d + "/ok.cfg --phi-prime 0,1"), 0);
}

}  // namespace
}  // namespace ism
