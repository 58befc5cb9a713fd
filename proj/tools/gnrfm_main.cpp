// gnrfm: data generation, solving, clustering, evaluation and benchmark sweeps.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gnrfm/commands.hpp"
#include "gnrfm/io.hpp"
#include "gnrfm/kernels.hpp"

namespace {

using namespace gnrfm;

void add_solver_flags(CLI::App* app, SolverConfig& c, std::string& inner_mode, std::string& q_form,
                      bool& no_prune) {
  app->add_option("--mu-u", c.mu_U, "group-norm weight on U")->capture_default_str();
  app->add_option("--mu-v", c.mu_V, "Frobenius weight on V")->capture_default_str();
  app->add_option("--k", c.K, "initial rank (0 = min(rows, cols))")->capture_default_str();
  app->add_option("--beta0", c.beta0, "initial penalty")->capture_default_str();
  app->add_option("--beta-max", c.beta_max, "penalty cap")->capture_default_str();
  app->add_option("--rho", c.rho, "penalty growth factor")->capture_default_str();
  app->add_option("--zeta", c.zeta, "residual decrease factor")->capture_default_str();
  app->add_option("--nu", c.nu, "multiplier-norm exponent")->capture_default_str();
  app->add_option("--eps", c.eps, "relative residual tolerance")->capture_default_str();
  app->add_option("--max-outer", c.max_outer, "outer iteration cap")->capture_default_str();
  app->add_option("--inner-mode", inner_mode, "one_step | fixed | converge")->capture_default_str();
  app->add_option("--inner-steps", c.inner_steps, "inner steps for fixed mode")->capture_default_str();
  app->add_option("--eps-inner", c.eps_inner, "inner tolerance for converge mode")->capture_default_str();
  app->add_option("--max-inner", c.max_inner, "inner step cap for converge mode")->capture_default_str();
  app->add_flag("--no-prune", no_prune, "keep zero columns instead of deleting them");
  app->add_option("--q-form", q_form, "literal | consistent")->capture_default_str();
}

int run(int argc, char** argv) {
  CLI::App app{"Group norm regularized factorization for subspace segmentation"};
  app.require_subcommand(1);
  int threads = 0;
  if (const char* env = std::getenv("GNRFM_NUM_THREADS")) threads = std::atoi(env);
  app.add_option("--threads", threads, "OpenMP threads (default: $GNRFM_NUM_THREADS or runtime default)");

  // gen
  auto* gen = app.add_subcommand("gen", "generate a noisy union-of-subspaces instance");
  SyntheticSpec spec;
  std::string gen_out = ".";
  gen->add_option("--s", spec.s, "number of subspaces")->capture_default_str();
  gen->add_option("--p", spec.p, "samples per subspace")->capture_default_str();
  gen->add_option("--d-tilde", spec.d_tilde, "ambient dimension")->capture_default_str();
  gen->add_option("--r-tilde", spec.r_tilde, "subspace dimension")->capture_default_str();
  gen->add_option("--sigma", spec.sigma, "noise intensity")->capture_default_str();
  gen->add_option("--contamination", spec.contamination, "fraction of noisy columns")->capture_default_str();
  gen->add_option("--seed", spec.seed, "RNG seed")->capture_default_str();
  gen->add_flag("--fresh-rotation", spec.fresh_rotation, "new rotation for every subspace step");
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();

  // solve
  auto* slv = app.add_subcommand("solve", "factorize X = UV + E");
  cli::SolveOptions sopt;
  std::string inner_mode = "one_step", q_form = "literal";
  bool no_prune = false;
  std::string e0_path;
  slv->add_option("--data", sopt.data, "data matrix CSV")->required();
  slv->add_option("--out", sopt.out_dir, "output directory")->default_val(".");
  add_solver_flags(slv, sopt.cfg, inner_mode, q_form, no_prune);
  slv->add_flag("--trace", sopt.trace, "write trace.csv");
  slv->add_option("--e0", e0_path, "injected noise CSV; adds E recovery error to the trace");

  // cluster
  auto* clu = app.add_subcommand("cluster", "segment samples from solver factors");
  cli::ClusterOptions copt;
  std::string factors, affinity = "squared";
  clu->add_option("--data", copt.data, "data matrix CSV")->required();
  clu->add_option("--factors", factors, "directory holding U.csv and V.csv");
  clu->add_option("--u", copt.u, "U factor CSV");
  clu->add_option("--v", copt.v, "V factor CSV");
  clu->add_option("--k", copt.k, "number of clusters")->required();
  clu->add_option("--affinity", affinity, "squared | abs")->capture_default_str();
  clu->add_option("--seed", copt.seed, "k-means seed")->capture_default_str();
  clu->add_option("--rank-tol", copt.rank_tol, "relative cutoff for the SVD of Z")->capture_default_str();
  clu->add_option("--out", copt.out_dir, "output directory")->default_val(".");
  clu->add_flag("--heatmap", copt.heatmap, "also write affinity.pgm");

  // eval
  auto* ev = app.add_subcommand("eval", "accuracy and NMI of predicted labels");
  std::string pred, truth, nmi_norm = "sqrt", eval_out;
  ev->add_option("--pred", pred, "predicted labels")->required();
  ev->add_option("--truth", truth, "ground-truth labels")->required();
  ev->add_option("--nmi-norm", nmi_norm, "sqrt | mean")->capture_default_str();
  ev->add_option("--out", eval_out, "also write the JSON to this file");

  // bench
  auto* bn = app.add_subcommand("bench", "seeded benchmark sweep");
  std::string bench_cfg, bench_out = "bench_out";
  bn->add_option("--config", bench_cfg, "JSON experiment config")->required();
  bn->add_option("--out", bench_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  kernels::set_threads(threads);

  if (gen->parsed()) {
    cli::cmd_gen(spec, gen_out);
    std::cout << "wrote " << gen_out << "/{X.csv,labels.csv,E0.csv,meta.json}\n";
  } else if (slv->parsed()) {
    sopt.cfg.inner_mode = parse_inner_mode(inner_mode);
    sopt.cfg.q_form = parse_q_form(q_form);
    if (no_prune) sopt.cfg.prune_zero_columns = false;
    if (!e0_path.empty()) sopt.e0 = e0_path;
    const SolveReport rep = cli::cmd_solve(sopt);
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "iterations " << rep.iterations << " converged " << (rep.converged ? "yes" : "no")
              << " rank " << rep.final.K_t() << " residual "
              << (rep.residual_history.empty() ? 1.0 : rep.residual_history.back()) << "\n";
  } else if (clu->parsed()) {
    if (!factors.empty()) {
      if (copt.u.empty()) copt.u = cli::fs::path(factors) / "U.csv";
      if (copt.v.empty()) copt.v = cli::fs::path(factors) / "V.csv";
    }
    if (copt.u.empty() || copt.v.empty()) throw ParameterError("cluster: pass --factors or both --u and --v");
    copt.affinity = parse_affinity_mode(affinity);
    const Segmentation seg = cli::cmd_cluster(copt);
    for (const auto& w : seg.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote labels.csv and affinity.csv for " << seg.labels.size() << " samples\n";
  } else if (ev->parsed()) {
    NmiNorm norm;
    if (nmi_norm == "sqrt")
      norm = NmiNorm::sqrt;
    else if (nmi_norm == "mean")
      norm = NmiNorm::mean;
    else
      throw ParameterError("eval: --nmi-norm must be sqrt or mean");
    const auto j = cli::cmd_eval(pred, truth, norm);
    std::cout << j.dump() << "\n";
    if (!eval_out.empty()) io::write_text(eval_out, j.dump(2) + "\n");
  } else if (bn->parsed()) {
    const auto cfg = cli::bench_config_from_json(cli::json::parse(io::read_text(bench_cfg)));
    const auto rows = cli::cmd_bench(cfg, bench_out);
    std::cout << cli::bench_markdown(rows);
    for (const auto& r : rows)
      if (!r.error.empty()) std::cerr << "row " << r.instance << " " << r.method << ": " << r.error << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gnrfm::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const gnrfm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: bad JSON: " << e.what() << "\n";
    return 2;
  } catch (const gnrfm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
