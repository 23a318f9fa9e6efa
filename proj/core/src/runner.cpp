#include "nflow/runner.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nflow {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string events_string(const Trajectory& traj, std::int64_t step) {
  std::string s;
  for (const auto& ev : traj.events) {
    if (ev.step != step) continue;
    if (!s.empty()) s += ";";
    s += ev.type;
  }
  return s;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, std::uint64_t config_hash) {
  std::ostringstream os;
  char head[64];
  std::snprintf(head, sizeof head, "# config_hash=%016" PRIx64 "\n", config_hash);
  os << head;
  os << "t,step,energy_n,energy_variant,dissipation,el_sup,guard_rejects,degree,"
        "concentrations,events\n";
  for (const auto& s : traj.samples) {
    os << fmt(s.t) << "," << s.step << "," << fmt(s.energy_n) << ","
       << fmt(s.energy_variant) << "," << fmt(s.dissipation) << "," << fmt(s.el_sup)
       << "," << s.guard_rejects << "," << fmt(s.degree) << "," << s.concentration_count
       << "," << events_string(traj, s.step) << "\n";
  }
  return os.str();
}

RunOutputs execute(const RunConfig& cfg, bool verbose) {
  RunOutputs out;
  namespace fs = std::filesystem;
#ifdef _OPENMP
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
  try {
    fs::create_directories(cfg.output_dir);
    DomainGrid grid(cfg.domain);
    SphereTarget target(cfg.target_m);

    MapField u0;
    if (!cfg.init_checkpoint.empty()) {
      Checkpoint cp = read_checkpoint(cfg.init_checkpoint);
      if (cp.domain.kind != cfg.domain.kind || cp.domain.dim != cfg.domain.dim)
        throw std::invalid_argument("init checkpoint domain does not match config");
      for (int i = 0; i < cfg.domain.dim; ++i)
        if (cp.domain.resolution[i] != cfg.domain.resolution[i])
          throw std::invalid_argument("init checkpoint resolution does not match config");
      u0 = std::move(cp.u);
    } else {
      u0 = init_map(cfg.init, grid, target);
    }

    const std::uint64_t h = cfg.hash();
    std::ostringstream report;
    report.precision(17);

    if (cfg.mode == RunMode::Check) {
      // Config parsed, grid/target/init all constructed without throwing;
      // nothing to execute.
      FunctionalSpec en{FunctionalKind::EnergyN, cfg.domain.dim, 0.0, 0.0};
      char hh[24];
      std::snprintf(hh, sizeof hh, "%016" PRIx64, h);
      report << "{\"mode\":\"check\",\"ok\":true,\"config_hash\":\"" << hh
             << "\",\"energy_n\":" << energy(u0, grid, en) << "}";
    } else if (cfg.mode == RunMode::Flow) {
      FlowParams fp = cfg.flow;
      RunResult rr = run(u0, grid, target, fp);

      out.csv_path = cfg.output_dir + "/monitors.csv";
      std::ofstream csv(out.csv_path, std::ios::trunc | std::ios::binary);
      csv << trajectory_csv(rr.traj, h);

      out.checkpoint_path = cfg.output_dir + "/final.nflw";
      write_checkpoint(out.checkpoint_path, rr.state.u, cfg.domain, rr.state.t,
                       cfg.canonical_json());

      double ident = energy_identity_residual(rr.traj, rr.state.t);
      report << "{\"mode\":\"run\",\"t_final\":" << rr.state.t
             << ",\"steps\":" << rr.state.step_count
             << ",\"converged\":" << (rr.traj.converged ? "true" : "false")
             << ",\"energy_n\":" << rr.traj.samples.back().energy_n
             << ",\"energy_variant\":" << rr.traj.samples.back().energy_variant
             << ",\"el_sup\":" << rr.traj.samples.back().el_sup
             << ",\"energy_identity_residual\":" << ident
             << ",\"guard_rejects\":" << rr.state.guard_rejects << ",\"events\":[";
      for (std::size_t i = 0; i < rr.traj.events.size(); ++i) {
        if (i) report << ",";
        report << "{\"type\":\"" << rr.traj.events[i].type
               << "\",\"t\":" << rr.traj.events[i].t
               << ",\"step\":" << rr.traj.events[i].step << "}";
      }
      report << "]}";
    } else if (cfg.mode == RunMode::Minimize) {
      ScheduleParams sp;
      sp.flow = cfg.flow;
      sp.epsilons = cfg.schedule_epsilons;
      sp.stage_t_end = cfg.stage_t_end;
      sp.stage_el_tol = cfg.flow.el_tol;
      ScheduleResult sr = minimize_in_class(u0, grid, target, sp);

      out.checkpoint_path = cfg.output_dir + "/final.nflw";
      write_checkpoint(out.checkpoint_path, sr.u, cfg.domain, 0.0, cfg.canonical_json());

      report << "{\"mode\":\"minimize\",\"stages\":[";
      for (std::size_t i = 0; i < sr.stages.size(); ++i) {
        const auto& st = sr.stages[i];
        if (i) report << ",";
        report << "{\"epsilon\":" << st.epsilon << ",\"energy_n\":" << st.energy_n
               << ",\"energy_variant\":" << st.energy_variant
               << ",\"eps_term_l2\":" << st.eps_term_l2
               << ",\"eps_term_np1\":" << st.eps_term_np1 << ",\"el_sup\":" << st.el_sup
               << ",\"degree\":" << st.degree_raw
               << ",\"converged\":" << (st.converged ? "true" : "false") << "}";
      }
      report << "]}";
    } else {  // Bubbles
      std::vector<MapField> snaps;
      if (cfg.bubble_checkpoints.empty()) {
        snaps.push_back(u0);
      } else {
        for (const auto& p : cfg.bubble_checkpoints) {
          Checkpoint cp = read_checkpoint(p);
          snaps.push_back(std::move(cp.u));
        }
      }
      BubbleReport br = decompose(snaps, grid, target, cfg.bubble_x0, cfg.bubble);
      report << report_to_json(br);
    }

    out.report_path = cfg.output_dir + "/report.json";
    std::ofstream rep(out.report_path, std::ios::trunc | std::ios::binary);
    rep << report.str() << "\n";
    if (verbose) std::fprintf(stderr, "report: %s\n", report.str().c_str());
    return out;
  } catch (const std::invalid_argument& e) {
    out.exit_code = 1;
    out.error = e.what();
    return out;
  } catch (const std::exception& e) {
    out.exit_code = 2;
    out.error = e.what();
    return out;
  }
}

}  // namespace nflow
