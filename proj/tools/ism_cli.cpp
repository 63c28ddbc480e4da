/// @file ism_cli.cpp
/// @brief Command-line front end: run, diagnose, equilibrium, stability.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ism/ism.hpp"

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ism::ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ism::SimConfig load_config(const std::string& path) {
  ism::SimConfig cfg = ism::parse_config(read_text(path));
  if (cfg.s_order < 3) {
    std::cerr << "warning: s_order = " << cfg.s_order << " is below 3; blow-up diagnostics are not meaningful\n";
  }
  return cfg;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const ism::SimConfig cfg = load_config(config_path);
  const ism::RunResult res = ism::run(cfg, out_dir);
  std::printf("steps=%ld t_final=%.17g csv=%s snapshots=%zu\n", res.steps, res.t_final, res.csv_path.c_str(),
              res.snapshots.size());
  if (res.status != ism::kExitOk) {
    std::fprintf(stderr, "numerical abort: %s\n", res.message.c_str());
    std::fprintf(stderr, "last finite record: %s\n", ism::csv_row(res.records.back()).c_str());
  }
  return res.status;
}

int cmd_diagnose(const std::vector<std::string>& snaps, int s_order, const std::string& out_csv) {
  std::vector<std::filesystem::path> paths(snaps.begin(), snaps.end());
  const ism::DiagnoseResult d = ism::diagnose(paths, s_order);
  std::ostringstream text;
  text << ism::kDiagnosticsHeader << '\n';
  for (const auto& r : d.records) text << ism::csv_row(r) << '\n';
  text << ism::gronwall_summary(d) << '\n';
  if (out_csv.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw ism::FormatError("cannot open " + out_csv);
    out << text.str();
  }
  return ism::kExitOk;
}

int cmd_equilibrium(const std::string& config_path, const std::vector<double>& phi_prime) {
  const ism::SimConfig cfg = load_config(config_path);
  ism::State st = ism::initial_state(cfg);
  st.constants = ism::constants_of(cfg);
  const auto res = ism::steady_residual(st);
  std::printf("steady_residual u_S=%.6e u_T=%.6e theta_S=%.6e\n", res[0], res[1], res[2]);
  if (phi_prime.empty()) {
    std::printf("ec_conditions skipped (no --phi-prime given)\n");
    return ism::kExitOk;
  }
  auto fn = [phi_prime](double q) {
    double v = 0.0;
    for (auto it = phi_prime.rbegin(); it != phi_prime.rend(); ++it) v = v * q + *it;
    return v;
  };
  const ism::EcResidual ec = ism::ec_conditions_residual(st, fn);
  std::printf("ec_conditions u_S=%.6e u_T=%.6e gamma=%.6e wall_spread=%.6e\n", ec.u_s, ec.u_t, ec.gamma,
              ec.a0_spread);
  return ism::kExitOk;
}

int cmd_stability(const std::string& snap, const std::string& out_csv) {
  const ism::State st = ism::read_snapshot(snap);
  const ism::StabilityReport rep = ism::formal_stability_field(st);
  if (!out_csv.empty()) {
    std::ofstream out(out_csv, std::ios::trunc);
    if (!out) throw ism::FormatError("cannot open " + out_csv);
    const ism::Grid& g = st.grid();
    out << "i,j,x,z,phi_pp,degenerate\n";
    char buf[160];
    for (int j = 0; j < g.nz(); ++j) {
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t k = g.index(i, j);
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%d\n", i, j, g.x(i), g.z(j), rep.phi_pp[k],
                      rep.degenerate_mask[k] ? 1 : 0);
        out << buf;
      }
    }
  }
  std::printf("lambda1=%.17g lambda2=%.17g masked_fraction=%.6f threshold=%.6e formal=%s nonlinear=%s\n",
              rep.lambda1, rep.lambda2, rep.masked_fraction, rep.threshold, ism::to_string(rep.formal),
              ism::to_string(rep.nonlinear));
  return ism::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incompressible slice model solver and analysis tools"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "ism_out";
  auto* run = app.add_subcommand("run", "integrate a configuration, writing snapshots and diagnostics.csv");
  run->add_option("config", config_path, "configuration file")->required();
  run->add_option("--out", out_dir, "output directory");

  std::vector<std::string> snaps;
  int s_order = 3;
  std::string diag_out;
  auto* diag = app.add_subcommand("diagnose", "recompute diagnostics from a time-ordered snapshot sequence");
  diag->add_option("snapshots", snaps, "snapshot files in increasing time")->required();
  diag->add_option("--s-order", s_order, "Sobolev order for E(t)")->check(CLI::NonNegativeNumber);
  diag->add_option("--out", diag_out, "write CSV here instead of stdout");

  std::vector<double> phi_prime;
  auto* eq = app.add_subcommand("equilibrium", "report steady and critical-point residuals");
  eq->add_option("config", config_path, "configuration file")->required();
  eq->add_option("--phi-prime", phi_prime, "coefficients of Phi'(q), lowest order first")->delimiter(',');

  std::string snap;
  std::string stab_out;
  auto* stab = app.add_subcommand("stability", "formal and nonlinear stability report for a snapshot");
  stab->add_option("snapshot", snap, "snapshot file")->required();
  stab->add_option("--out", stab_out, "write per-node phi_pp CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ism::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*diag) return cmd_diagnose(snaps, s_order, diag_out);
    if (*eq) return cmd_equilibrium(config_path, phi_prime);
    if (*stab) return cmd_stability(snap, stab_out);
  } catch (const ism::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return ism::kExitConfig;
  } catch (const ism::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return ism::kExitNumerical;
  } catch (const ism::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return ism::kExitFormat;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return ism::kExitFormat;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return ism::kExitConfig;
  }
  return ism::kExitConfig;
}
