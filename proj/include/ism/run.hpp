/// @file run.hpp
/// @brief Run orchestration, the diagnostics CSV and snapshot post-processing.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ism/config.hpp"
#include "ism/diagnostics.hpp"
#include "ism/dynamics.hpp"
#include "ism/initial.hpp"
#include "ism/snapshot.hpp"

namespace ism {

inline constexpr const char* kDiagnosticsHeader =
    "t,h,casimir_q1,casimir_q2,E_hs,sup_grad_uS,sup_grad_uT,sup_grad_theta,bkm_integral";

/// Exit statuses shared by the library entry points and the CLI.
enum ExitStatus : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitFormat = 4 };

inline std::string csv_row(const DiagnosticsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.t, r.energy_h,
                r.casimir_moment(1), r.casimir_moment(2), r.E_hs, r.sup_grad_uS, r.sup_grad_uT, r.sup_grad_theta,
                r.bkm_integral);
  return buf;
}

inline std::string snapshot_name(long step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snap_%08ld.ismsnap", step);
  return buf;
}

struct RunResult {
  int status = kExitOk;
  std::string message;
  double t_final = 0.0;  ///< last time at which the state was finite
  long steps = 0;
  std::vector<DiagnosticsRecord> records;
  std::vector<std::filesystem::path> snapshots;
  std::filesystem::path csv_path;
};

/// Integrates cfg to t_end, writing snapshots and diagnostics.csv into
/// out_dir. A non-finite state stops the run with kExitNumerical; outputs
/// written so far are kept and the last finite record is reported.
inline RunResult run(const SimConfig& cfg, const std::filesystem::path& out_dir) {
  RunResult res;
  std::filesystem::create_directories(out_dir);
  State st = initial_state(cfg);
  st.constants = constants_of(cfg);
  const double t_end = st.t + cfg.t_end;

  res.csv_path = out_dir / "diagnostics.csv";
  std::ofstream csv(res.csv_path, std::ios::trunc);
  if (!csv) throw FormatError("cannot open " + res.csv_path.string());
  csv << kDiagnosticsHeader << '\n';

  auto record = [&](const State& s) {
    const DiagnosticsRecord* prev = res.records.empty() ? nullptr : &res.records.back();
    res.records.push_back(make_record(s, cfg.s_order, prev));
    csv << csv_row(res.records.back()) << '\n';
    csv.flush();
  };
  auto snapshot = [&](const State& s, long step) {
    const auto path = out_dir / snapshot_name(step);
    write_snapshot(path, s);
    res.snapshots.push_back(path);
  };

  record(st);
  snapshot(st, 0);
  res.t_final = st.t;

  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  long step = 0;
  while (st.t < t_end - eps) {
    double dt = cfg.dt ? *cfg.dt : cfl_dt(st, cfg.cfl, cfg.dt_max);
    if (st.t + dt > t_end - eps) dt = t_end - st.t;
    try {
      st = step_rk4(st, dt);
    } catch (const NumericalError& e) {
      res.status = kExitNumerical;
      res.message = e.what();
      if (res.records.back().t != st.t) record(st);
      break;
    }
    ++step;
    res.t_final = st.t;
    const bool last = st.t >= t_end - eps;
    if (step % cfg.diagnostics_every == 0 || last) record(st);
    if ((cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) || last) snapshot(st, step);
  }
  res.steps = step;
  return res;
}

struct DiagnoseResult {
  std::vector<DiagnosticsRecord> records;
  GronwallReport gronwall;
};

/// Recomputes diagnostics rows from a time-ordered snapshot sequence.
inline DiagnoseResult diagnose(const std::vector<std::filesystem::path>& paths, int s_order) {
  if (paths.empty()) throw std::invalid_argument("diagnose needs at least one snapshot");
  DiagnoseResult out;
  for (const auto& p : paths) {
    const State st = read_snapshot(p);
    if (!out.records.empty() && !(st.t > out.records.back().t)) {
      throw std::invalid_argument("snapshot " + p.string() + " is not later than its predecessor (t = " +
                                  std::to_string(st.t) + ")");
    }
    const DiagnosticsRecord* prev = out.records.empty() ? nullptr : &out.records.back();
    out.records.push_back(make_record(st, s_order, prev));
  }
  const auto& first = out.records.front();
  out.gronwall = gronwall_check(out.records, first.sup_grad_uT + first.sup_grad_theta);
  return out;
}

inline std::string gronwall_summary(const DiagnoseResult& d) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# gronwall M=%.17g argmax_t=%.17g init_grad=%.17g degenerate=%d", d.gronwall.M,
                d.records[d.gronwall.argmax].t, d.gronwall.init_grad, d.gronwall.degenerate ? 1 : 0);
  return buf;
}

}  // namespace ism
