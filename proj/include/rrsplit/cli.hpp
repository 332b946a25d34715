#pragma once

// Command-line front end. All flags live on the top-level app so that a
// key=value config file can set any of them; subcommands pick the action.
//
// Exit codes: 0 success, 1 a check or run failed, 2 usage error,
// 3 invalid configuration.

#include "rrsplit/study.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rrsplit::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failed = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_invalid = 3;

struct Options {
  std::string case_name;
  std::optional<int> k;
  std::optional<double> dt;
  std::optional<double> dt_min, dt_max;
  std::optional<double> alpha;
  double nu_f = 1.0;
  double nu_s = 1.0;
  std::optional<double> t_final;
  std::string out;
  std::uint64_t seed = 1;
  bool oracle = false;
  bool emit_plot = false;
  std::vector<std::string> norms;
};

namespace detail {

inline void require(bool present, const std::string& flag, const std::string& sub) {
  if (!present) throw CLI::RequiredError(flag + " (for '" + sub + "')");
}

inline std::filesystem::path output_file(const Options& o, const std::string& name) {
  std::filesystem::create_directories(o.out);
  return std::filesystem::path(o.out) / name;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

inline std::vector<Norm> default_norms(const ManufacturedCase& c) {
  if (c.k == 2) return {Norm::l2_u, Norm::l2_w, Norm::l2_q};
  if (c.geometry.kind == InterfaceGeometry::Kind::slanted) {
    return {Norm::l2_u, Norm::l2_w, Norm::grad_u, Norm::grad_w};
  }
  return {Norm::l2_u, Norm::l2_w};
}

inline ManufacturedCase checked_case(const Options& o) {
  auto c = get_case(o.case_name, o.nu_f, o.nu_s);
  if (o.k && *o.k != c.k) {
    throw std::invalid_argument("--k " + std::to_string(*o.k) + " does not match case '" + c.name +
                                "' (k = " + std::to_string(c.k) + ")");
  }
  return c;
}

inline int cmd_run(const Options& o, std::ostream& out) {
  require(!o.case_name.empty(), "--case", "run");
  require(o.dt.has_value(), "--dt", "run");
  const auto c = checked_case(o);
  const StudyConfig cfg{o.case_name, {*o.dt}, o.t_final.value_or(0.25), o.alpha.value_or(c.alpha),
                        o.nu_f, o.nu_s, default_mesh_policy(c)};
  cfg.validate();
  const CoupledMesh mesh = study_mesh(cfg.mesh_policy, *o.dt);
  const Operators op = build_operators(mesh);
  const SchemeParams p{c.k, *o.dt, cfg.alpha, o.nu_f, o.nu_s, cfg.final_time};
  RunOptions ro;
  ro.stepper = o.oracle ? Stepper::monolithic : Stepper::robin_robin;
  const auto r = run(p, mesh, op, SourceData::from_case(c), initial_state_from_case(c, mesh, op), ro);

  const double T = cfg.final_time;
  out << std::setprecision(6) << "case " << c.name << " k=" << c.k << " dt=" << *o.dt
      << " steps=" << p.n_steps() << " stepper=" << (o.oracle ? "monolithic" : "robin-robin") << "\n"
      << "errU " << l2_error(mesh, op.dofs_f, r.final.u, c.exact_u, T) << "\n"
      << "errW " << l2_error(mesh, op.dofs_s, r.final.w, c.exact_w, T) << "\n"
      << "errQ " << l2_error(mesh, op.dofs_s, r.final.q, c.exact_q, T) << "\n";
  if (!o.out.empty()) {
    auto cp = open_out(output_file(o, c.name + "_checkpoint.txt"));
    write_checkpoint(cp, r.final);
    auto en = open_out(output_file(o, c.name + "_energy.csv"));
    write_energy_csv(en, r.ledger);
  }
  return exit_ok;
}

inline int cmd_convergence(const Options& o, std::ostream& out, std::ostream& log) {
  require(!o.case_name.empty(), "--case", "convergence");
  const auto c = checked_case(o);
  StudyConfig cfg;
  cfg.case_name = o.case_name;
  cfg.dt_list = dyadic_range(o.dt_max.value_or(0.25), o.dt_min.value_or(1.0 / 64.0));
  cfg.final_time = o.t_final.value_or(0.25);
  cfg.alpha = o.alpha.value_or(c.alpha);
  cfg.nu_f = o.nu_f;
  cfg.nu_s = o.nu_s;
  cfg.mesh_policy = default_mesh_policy(c);
  cfg.stepper = o.oracle ? Stepper::monolithic : Stepper::robin_robin;
  cfg.k = o.k.value_or(0);
  cfg.norms = default_norms(c);
  if (!o.norms.empty()) {
    cfg.norms.clear();
    for (const auto& n : o.norms) cfg.norms.push_back(parse_norm(n));
  }
  if (o.emit_plot && o.out.empty()) throw std::invalid_argument("--emit-plot needs --out");
  cfg.validate();

  const auto table = run_study(cfg);
  write_convergence_csv(out, table);
  write_table_notes(log, table);
  if (!o.out.empty()) {
    const auto csv = output_file(o, c.name + "_convergence.csv");
    auto f = open_out(csv);
    write_convergence_csv(f, table);
    if (o.emit_plot) {
      auto gp = open_out(output_file(o, c.name + "_convergence.gp"));
      write_gnuplot_script(gp, table, csv.filename().string());
    }
  }
  const bool any_failed = std::any_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.failed; });
  return any_failed ? exit_failed : exit_ok;
}

inline int cmd_energy_audit(const Options& o, std::ostream& out) {
  std::vector<int> ks{1, 2};
  std::vector<double> alphas{0.1, 1.0, 10.0};
  std::vector<double> dts{0.5, 0.05};
  if (o.k) ks = {*o.k};
  if (o.alpha) alphas = {*o.alpha};
  if (o.dt) dts = {*o.dt};
  std::vector<EnergyAuditReport> reports;
  for (int k : ks) {
    for (double a : alphas) {
      for (double dt : dts) {
        EnergyAuditConfig cfg;
        cfg.k = k;
        cfg.alpha = a;
        cfg.dt = dt;
        if (o.t_final) cfg.steps = static_cast<Index>(std::llround(*o.t_final / dt));
        cfg.nu_f = o.nu_f;
        cfg.nu_s = o.nu_s;
        cfg.seed = o.seed;
        if (cfg.steps < 1) throw std::invalid_argument("--t-final must cover at least one step");
        reports.push_back(energy_audit(cfg));
      }
    }
  }
  write_energy_audit_csv(out, reports);
  if (!o.out.empty()) {
    auto f = open_out(output_file(o, "energy_audit.csv"));
    write_energy_audit_csv(f, reports);
  }
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
  return ok ? exit_ok : exit_failed;
}

inline int cmd_cutoff(const Options& o, std::ostream& out, std::ostream& log) {
  const auto dts = dyadic_range(o.dt_max.value_or(0.25), o.dt_min.value_or(std::ldexp(1.0, -10)));
  std::ostringstream csv;
  cutoff_report(csv, dts);
  out << csv.str();
  if (!o.out.empty()) {
    auto f = open_out(output_file(o, "cutoff.csv"));
    f << csv.str();
  }
  bool ok = true;
  for (double dt : dts) ok = ok && cutoff::verify_assumptions({dt}).all_pass();
  if (dts.size() >= 2) {
    const double a = dts[dts.size() - 2], b = dts.back();
    log << std::setprecision(6) << "log slope " << cutoff::measured_log_slope(a, b)
        << " (closed-form coefficient " << cutoff::log_coefficient(b) << ")\n";
  }
  return ok ? exit_ok : exit_failed;
}

inline int cmd_mesh_dump(const Options& o, std::ostream& out) {
  require(!o.case_name.empty(), "--case", "mesh-dump");
  require(o.dt.has_value(), "--dt", "mesh-dump");
  const auto c = checked_case(o);
  const auto policy = default_mesh_policy(c);
  StudyConfig cfg{o.case_name, {*o.dt}, *o.dt, 1.0, o.nu_f, o.nu_s, policy};
  cfg.validate();
  const auto mesh = study_mesh(policy, *o.dt);
  if (o.out.empty()) {
    write_mesh(out, mesh);
  } else {
    auto f = open_out(output_file(o, c.name + "_mesh.txt"));
    write_mesh(f, mesh);
  }
  return exit_ok;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Robin-Robin partitioned solver for coupled heat/heat and heat/wave problems", "rrsplit"};
  app.set_config("--config", "", "key=value file setting any of the flags below");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  std::string case_help = "manufactured case:";
  for (const auto& n : case_names()) case_help += " " + n;
  app.add_option("--case", o.case_name, case_help);
  app.add_option("--k", o.k, "1 parabolic/parabolic, 2 parabolic/hyperbolic; must match the case")
      ->check(CLI::IsMember({1, 2}));
  app.add_option("--dt", o.dt, "time step")->check(CLI::PositiveNumber);
  app.add_option("--dt-min", o.dt_min, "smallest time step of a sweep")->check(CLI::PositiveNumber);
  app.add_option("--dt-max", o.dt_max, "largest time step of a sweep, rounded down to a power of two")
      ->check(CLI::PositiveNumber);
  app.add_option("--alpha", o.alpha, "Robin parameter")->check(CLI::PositiveNumber);
  app.add_option("--nu-f", o.nu_f, "fluid diffusion")->check(CLI::PositiveNumber);
  app.add_option("--nu-s", o.nu_s, "solid diffusion")->check(CLI::PositiveNumber);
  app.add_option("--t-final", o.t_final, "final time")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "output directory")->envname("RRSPLIT_OUTPUT_DIR");
  app.add_option("--seed", o.seed, "seed for random initial data");
  app.add_option("--norms", o.norms, "error norms: U W Q GradU GradW")->delimiter(',');
  app.add_flag("--oracle", o.oracle, "use the monolithic stepper");
  app.add_flag("--emit-plot", o.emit_plot, "write a gnuplot script next to the CSV");

  auto* run = app.add_subcommand("run", "one run; prints final errors");
  auto* conv = app.add_subcommand("convergence", "dyadic dt sweep with h = dt; CSV table");
  auto* audit = app.add_subcommand("energy-audit", "energy identity with random data and zero sources");
  auto* cut = app.add_subcommand("cutoff-verify", "cut-off function checks over a dt sweep");
  auto* dump = app.add_subcommand("mesh-dump", "write the mesh used for a case at --dt");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return detail::cmd_run(o, out);
    if (conv->parsed()) return detail::cmd_convergence(o, out, err);
    if (audit->parsed()) return detail::cmd_energy_audit(o, out);
    if (cut->parsed()) return detail::cmd_cutoff(o, out, err);
    if (dump->parsed()) return detail::cmd_mesh_dump(o, out);
    return exit_usage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::out_of_range& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return exit_invalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_failed;
  }
}

}  // namespace rrsplit::cli
