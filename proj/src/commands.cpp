#include "gnrfm/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "gnrfm/io.hpp"
#include "gnrfm/linalg.hpp"
#include "gnrfm/rng.hpp"

namespace gnrfm::cli {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ParameterError(where + ": unknown key '" + key + "'");
}

template <class T>
void take(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParameterError(where + ": bad value for '" + key + "': " + e.what());
  }
}

double e_rel_error(const Matrix& E, const Matrix& E0) {
  const double n0 = frobenius_norm(E0);
  if (n0 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return frobenius_norm(E - E0) / n0;
}

std::string fmt(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

struct TraceRow {
  std::size_t iter;
  double time_s;
  double log10_residual;
  std::size_t rank;
  double e_err;
};

std::string trace_csv(const std::vector<TraceRow>& rows, bool with_e) {
  std::string out = with_e ? "iter,time_s,log10_residual,rank,e_rel_error\n"
                           : "iter,time_s,log10_residual,rank\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter) + "," + fmt(r.time_s, 9) + "," + fmt(r.log10_residual, 12) + "," +
           std::to_string(r.rank);
    if (with_e) out += "," + fmt(r.e_err, 12);
    out += "\n";
  }
  return out;
}

// Solves with an observer that records one trace row per outer iteration.
SolveReport traced_solve(const Matrix& X, const SolverConfig& cfg, const Matrix* E0,
                         std::vector<TraceRow>& rows) {
  SolveObserver obs;
  obs.on_iteration = [&](const FactorState& s, const SolveReport& r) {
    TraceRow row;
    row.iter = r.iterations;
    row.time_s = r.time_history.back();
    row.log10_residual = std::log10(r.residual_history.back());
    row.rank = r.rank_history.back();
    row.e_err = E0 ? e_rel_error(s.E, *E0) : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  };
  return solve(X, cfg, &obs);
}

}  // namespace

json spec_to_json(const SyntheticSpec& s) {
  return json{{"s", s.s},
              {"p", s.p},
              {"d_tilde", s.d_tilde},
              {"r_tilde", s.r_tilde},
              {"sigma", s.sigma},
              {"contamination", s.contamination},
              {"seed", s.seed},
              {"fresh_rotation", s.fresh_rotation}};
}

SyntheticSpec spec_from_json(const json& j) {
  const std::string where = "synthetic spec";
  reject_unknown(j, {"s", "p", "d_tilde", "r_tilde", "sigma", "contamination", "seed", "fresh_rotation"},
                 where);
  SyntheticSpec s;
  take(j, "s", s.s, where);
  take(j, "p", s.p, where);
  take(j, "d_tilde", s.d_tilde, where);
  take(j, "r_tilde", s.r_tilde, where);
  take(j, "sigma", s.sigma, where);
  take(j, "contamination", s.contamination, where);
  take(j, "seed", s.seed, where);
  take(j, "fresh_rotation", s.fresh_rotation, where);
  return s;
}

json config_to_json(const SolverConfig& c) {
  return json{{"mu_U", c.mu_U},
              {"mu_V", c.mu_V},
              {"K", c.K},
              {"beta0", c.beta0},
              {"beta_max", c.beta_max},
              {"rho", c.rho},
              {"zeta", c.zeta},
              {"nu", c.nu},
              {"eps", c.eps},
              {"max_outer", c.max_outer},
              {"inner_mode", to_string(c.inner_mode)},
              {"inner_steps", c.inner_steps},
              {"eps_inner", c.eps_inner},
              {"max_inner", c.max_inner},
              {"prune_zero_columns", c.prune_zero_columns},
              {"q_form", to_string(c.q_form)},
              {"lagrangian_cap", c.lagrangian_cap}};
}

SolverConfig config_from_json(const json& j, SolverConfig c) {
  const std::string where = "solver config";
  reject_unknown(j,
                 {"mu_U", "mu_V", "K", "beta0", "beta_max", "rho", "zeta", "nu", "eps", "max_outer",
                  "inner_mode", "inner_steps", "eps_inner", "max_inner", "prune_zero_columns", "q_form",
                  "lagrangian_cap"},
                 where);
  take(j, "mu_U", c.mu_U, where);
  take(j, "mu_V", c.mu_V, where);
  take(j, "K", c.K, where);
  take(j, "beta0", c.beta0, where);
  take(j, "beta_max", c.beta_max, where);
  take(j, "rho", c.rho, where);
  take(j, "zeta", c.zeta, where);
  take(j, "nu", c.nu, where);
  take(j, "eps", c.eps, where);
  take(j, "max_outer", c.max_outer, where);
  if (j.contains("inner_mode")) c.inner_mode = parse_inner_mode(j.at("inner_mode").get<std::string>());
  take(j, "inner_steps", c.inner_steps, where);
  take(j, "eps_inner", c.eps_inner, where);
  take(j, "max_inner", c.max_inner, where);
  take(j, "prune_zero_columns", c.prune_zero_columns, where);
  if (j.contains("q_form")) c.q_form = parse_q_form(j.at("q_form").get<std::string>());
  take(j, "lagrangian_cap", c.lagrangian_cap, where);
  return c;
}

json report_to_json(const SolveReport& r, const SolverConfig& cfg) {
  std::vector<double> log_res;
  for (double x : r.residual_history) log_res.push_back(std::log10(x));
  return json{{"iterations", r.iterations},
              {"converged", r.converged},
              {"degenerate", r.degenerate},
              {"wall_time", r.wall_time},
              {"final_rank", r.rank_history.empty() ? r.final.K_t() : r.rank_history.back()},
              {"factor_columns", r.final.K_t()},
              {"final_beta", r.final.beta},
              {"residual_history", r.residual_history},
              {"log10_residual_history", log_res},
              {"rank_history", r.rank_history},
              {"objective_history", r.objective_history},
              {"beta_history", r.beta_history},
              {"time_history", r.time_history},
              {"inner_history", r.inner_history},
              {"warnings", r.warnings},
              {"config", config_to_json(cfg)}};
}

void cmd_gen(const SyntheticSpec& spec, const fs::path& out_dir) {
  const SyntheticInstance inst = generate(spec);
  io::write_matrix_csv(out_dir / "X.csv", inst.X);
  io::write_labels(out_dir / "labels.csv", inst.labels);
  io::write_matrix_csv(out_dir / "E0.csv", inst.E0);
  const json meta{{"spec", spec_to_json(spec)},
                  {"rng", std::string(Rng::kName)},
                  {"rows", inst.X.rows()},
                  {"cols", inst.X.cols()},
                  {"contaminated_columns", inst.contaminated}};
  io::write_text(out_dir / "meta.json", meta.dump(2) + "\n");
}

SolveReport cmd_solve(const SolveOptions& opt) {
  opt.cfg.validate();
  const Matrix X = io::read_matrix_csv(opt.data);
  std::optional<Matrix> E0;
  if (opt.e0) {
    E0 = io::read_matrix_csv(*opt.e0);
    require_same_shape(X, *E0, "solve: E0 vs X");
  }
  std::vector<TraceRow> rows;
  SolveReport rep = traced_solve(X, opt.cfg, E0 ? &*E0 : nullptr, rows);

  io::write_text(opt.out_dir / "report.json", report_to_json(rep, opt.cfg).dump(2) + "\n");
  if (opt.trace) io::write_text(opt.out_dir / "trace.csv", trace_csv(rows, E0.has_value()));
  io::write_matrix_csv(opt.out_dir / "E.csv", rep.final.E);
  if (rep.degenerate)
    throw NumericalError("solve: every factor column was shrunk to zero (rank-0 solution); "
                         "report.json written, try a smaller mu_U");
  io::write_matrix_csv(opt.out_dir / "U.csv", rep.final.U);
  io::write_matrix_csv(opt.out_dir / "V.csv", rep.final.V);
  return rep;
}

Segmentation cmd_cluster(const ClusterOptions& opt) {
  const Matrix X = io::read_matrix_csv(opt.data);
  const Matrix U = io::read_matrix_csv(opt.u);
  const Matrix V = io::read_matrix_csv(opt.v);
  if (U.rows() != X.rows() || V.cols() != X.cols() || U.cols() != V.rows())
    throw DimensionError("cluster: X " + shape_string(X) + ", U " + shape_string(U) + ", V " +
                         shape_string(V) + " are incompatible");
  Segmentation seg = segment(X, U, V, opt.k, opt.affinity, opt.seed, opt.rank_tol);
  io::write_labels(opt.out_dir / "labels.csv", seg.labels);
  io::write_matrix_csv(opt.out_dir / "affinity.csv", seg.W);
  if (opt.heatmap) io::write_pgm(opt.out_dir / "affinity.pgm", seg.W);
  return seg;
}

json cmd_eval(const fs::path& pred, const fs::path& truth, NmiNorm norm) {
  const Labels a = io::read_labels(pred);
  const Labels b = io::read_labels(truth);
  return json{{"acc_percent", 100.0 * accuracy(a, b)},
              {"nmi", nmi(a, b, norm)},
              {"n", a.size()},
              {"nmi_norm", norm == NmiNorm::sqrt ? "sqrt" : "mean"}};
}

std::string BenchInstance::id() const {
  return "(" + std::to_string(s) + "," + std::to_string(p) + "," + std::to_string(d_tilde) + "," +
         std::to_string(r_tilde) + ")";
}

void BenchConfig::validate() const {
  if (trials < 1) throw ParameterError("bench: trials must be >= 1");
  if (instances.empty()) throw ParameterError("bench: no instances");
  if (hyper.empty()) throw ParameterError("bench: no (mu_U, mu_V) pairs");
  if (k_clusters == 1) throw ParameterError("bench: k_clusters must be >= 2");
  for (const auto& inst : instances) {
    if (inst.sigmas.empty()) throw ParameterError("bench: instance " + inst.id() + " has no sigma");
    if (k_clusters == 0 && inst.s < 2)
      throw ParameterError("bench: instance " + inst.id() + " has fewer than 2 subspaces");
  }
  for (const auto& m : methods) (void)method_config(m, solver, 1.0, 1.0);
  for (const auto& e : external) {
    if (e.instance >= instances.size()) throw ParameterError("bench: external labels refer to a missing instance");
    if (e.trials.size() != trials)
      throw ParameterError("bench: external method '" + e.method + "' needs one label file per trial");
  }
}

BenchConfig bench_config_from_json(const json& j) {
  const std::string where = "bench config";
  reject_unknown(j,
                 {"trials", "base_seed", "instances", "hyper", "methods", "solver", "affinity",
                  "k_clusters", "traces", "external"},
                 where);
  BenchConfig c;
  take(j, "trials", c.trials, where);
  take(j, "base_seed", c.base_seed, where);
  if (j.contains("instances")) {
    for (const auto& ji : j.at("instances")) {
      reject_unknown(ji, {"s", "p", "d_tilde", "r_tilde", "contamination", "fresh_rotation", "sigma"},
                     "bench instance");
      BenchInstance bi;
      take(ji, "s", bi.s, where);
      take(ji, "p", bi.p, where);
      take(ji, "d_tilde", bi.d_tilde, where);
      take(ji, "r_tilde", bi.r_tilde, where);
      take(ji, "contamination", bi.contamination, where);
      take(ji, "fresh_rotation", bi.fresh_rotation, where);
      if (ji.contains("sigma")) {
        if (ji.at("sigma").is_array())
          bi.sigmas = ji.at("sigma").get<std::vector<double>>();
        else
          bi.sigmas = {ji.at("sigma").get<double>()};
      }
      c.instances.push_back(bi);
    }
  }
  if (j.contains("hyper")) {
    c.hyper.clear();
    for (const auto& h : j.at("hyper")) {
      if (!h.is_array() || h.size() != 2) throw ParameterError("bench config: hyper entries are [mu_U, mu_V]");
      c.hyper.emplace_back(h.at(0).get<double>(), h.at(1).get<double>());
    }
  }
  take(j, "methods", c.methods, where);
  if (j.contains("solver")) c.solver = config_from_json(j.at("solver"), c.solver);
  if (j.contains("affinity")) c.affinity = parse_affinity_mode(j.at("affinity").get<std::string>());
  take(j, "k_clusters", c.k_clusters, where);
  take(j, "traces", c.traces, where);
  if (j.contains("external")) {
    for (const auto& je : j.at("external")) {
      reject_unknown(je, {"method", "instance", "sigma", "labels"}, "bench external");
      ExternalLabels e;
      take(je, "method", e.method, where);
      take(je, "instance", e.instance, where);
      take(je, "sigma", e.sigma, where);
      for (const auto& p : je.at("labels")) e.trials.emplace_back(p.get<std::string>());
      c.external.push_back(e);
    }
  }
  c.validate();
  return c;
}

SolverConfig method_config(const std::string& method, const SolverConfig& base, double mu_U, double mu_V) {
  SolverConfig c = base;
  c.mu_U = mu_U;
  c.mu_V = mu_V;
  if (method == "aalm") {
    c.inner_mode = InnerMode::one_step;
    c.prune_zero_columns = true;
  } else if (method == "aalm_noprune") {
    c.inner_mode = InnerMode::one_step;
    c.prune_zero_columns = false;
  } else if (method == "alm_fixed") {
    c.inner_mode = InnerMode::fixed;
    c.prune_zero_columns = false;
  } else if (method == "alm_converge") {
    c.inner_mode = InnerMode::converge;
    c.prune_zero_columns = false;
  } else {
    throw ParameterError("unknown method '" + method + "' (aalm, aalm_noprune, alm_fixed, alm_converge)");
  }
  return c;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool with_time) {
  std::string out = "instance,sigma,mu_U,mu_V,method,trials_ok,";
  if (with_time) out += "time_s,";
  out += "iterations,acc_percent,nmi,final_rank,converged,e_rel_error,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (char& ch : err)
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    out += "\"" + r.instance + "\"," + fmt(r.sigma) + "," + fmt(r.mu_U) + "," + fmt(r.mu_V) + "," +
           r.method + "," + std::to_string(r.trials_ok) + ",";
    if (with_time) out += fmt(r.time_s, 6) + ",";
    out += fmt(r.iterations, 6) + "," + fmt(r.acc_percent, 8) + "," + fmt(r.nmi, 8) + "," +
           fmt(r.final_rank, 6) + "," + fmt(r.converged, 4) + "," + fmt(r.e_rel_error, 8) + "," + err +
           "\n";
  }
  return out;
}

std::string bench_markdown(const std::vector<BenchRow>& rows) {
  // One table per sigma; rows are (instance, method), column groups per (mu_U, mu_V).
  std::vector<double> sigmas;
  std::vector<std::pair<double, double>> hyper;
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& r : rows) {
    if (std::find(sigmas.begin(), sigmas.end(), r.sigma) == sigmas.end()) sigmas.push_back(r.sigma);
    if (std::isnan(r.mu_U)) continue;  // external label rows get their own table
    const std::pair<double, double> h{r.mu_U, r.mu_V};
    if (std::find(hyper.begin(), hyper.end(), h) == hyper.end()) hyper.push_back(h);
    const std::pair<std::string, std::string> k{r.instance, r.method};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::ostringstream md;
  for (double sg : sigmas) {
    md << "### sigma = " << fmt(sg) << "\n\n| (s,p,d,r) | Method |";
    for (const auto& h : hyper)
      md << " Time(s) (" << fmt(h.first) << "," << fmt(h.second) << ") | Ite | Acc(%) | NMI |";
    md << "\n|---|---|";
    for (std::size_t i = 0; i < hyper.size(); ++i) md << "---|---|---|---|";
    md << "\n";
    for (const auto& k : keys) {
      bool any = false;
      std::ostringstream line;
      line << "| " << k.first << " | " << k.second << " |";
      for (const auto& h : hyper) {
        const BenchRow* hit = nullptr;
        for (const auto& r : rows)
          if (r.sigma == sg && r.instance == k.first && r.method == k.second && r.mu_U == h.first &&
              r.mu_V == h.second)
            hit = &r;
        if (!hit || hit->trials_ok == 0) {
          line << " - | - | - | - |";
          continue;
        }
        any = true;
        line << " " << fixed(hit->time_s, 4) << " | " << fixed(hit->iterations, 1) << " | "
             << fixed(hit->acc_percent, 2) << " | " << fixed(hit->nmi, 4) << " |";
      }
      if (any) md << line.str() << "\n";
    }
    md << "\n";
    bool header = false;
    for (const auto& r : rows) {
      if (r.sigma != sg || !std::isnan(r.mu_U)) continue;
      if (!header) {
        md << "| (s,p,d,r) | External method | Acc(%) | NMI |\n|---|---|---|---|\n";
        header = true;
      }
      md << "| " << r.instance << " | " << r.method << " | "
         << (r.trials_ok ? fixed(r.acc_percent, 2) : "-") << " | "
         << (r.trials_ok ? fixed(r.nmi, 4) : "-") << " |\n";
    }
    if (header) md << "\n";
  }
  return md.str();
}

std::vector<BenchRow> cmd_bench(const BenchConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  static const std::vector<std::string> kTraceVariants{"aalm", "aalm_noprune", "alm_fixed", "alm_converge"};

  for (std::size_t ii = 0; ii < cfg.instances.size(); ++ii) {
    const BenchInstance& bi = cfg.instances[ii];
    const std::size_t k = cfg.k_clusters == 0 ? bi.s : cfg.k_clusters;
    for (double sigma : bi.sigmas) {
      std::vector<SyntheticInstance> data;
      for (std::size_t t = 0; t < cfg.trials; ++t) {
        SyntheticSpec spec{bi.s, bi.p, bi.d_tilde, bi.r_tilde, sigma, bi.contamination,
                           cfg.base_seed + t, bi.fresh_rotation};
        data.push_back(generate(spec));
      }
      for (const auto& [mu_U, mu_V] : cfg.hyper) {
        for (const auto& method : cfg.methods) {
          BenchRow row;
          row.instance = bi.id();
          row.sigma = sigma;
          row.mu_U = mu_U;
          row.mu_V = mu_V;
          row.method = method;
          const SolverConfig sc = method_config(method, cfg.solver, mu_U, mu_V);
          double e_sum = 0.0;
          std::size_t e_count = 0;
          for (std::size_t t = 0; t < cfg.trials; ++t) {
            try {
              const auto t0 = clock::now();
              const SolveReport rep = solve(data[t].X, sc, nullptr);
              if (rep.degenerate) throw NumericalError("all factor columns pruned");
              const Segmentation seg =
                  segment(data[t].X, rep.final.U, rep.final.V, k, cfg.affinity, cfg.base_seed + t);
              const double secs = std::chrono::duration<double>(clock::now() - t0).count();
              row.time_s += secs;
              row.iterations += static_cast<double>(rep.iterations);
              row.acc_percent += 100.0 * accuracy(seg.labels, data[t].labels);
              row.nmi += nmi(seg.labels, data[t].labels);
              row.final_rank += static_cast<double>(rep.rank_history.empty() ? rep.final.K_t() : rep.rank_history.back());
              row.converged += rep.converged ? 1.0 : 0.0;
              const double ee = e_rel_error(rep.final.E, data[t].E0);
              if (!std::isnan(ee)) {
                e_sum += ee;
                ++e_count;
              }
              ++row.trials_ok;
            } catch (const std::exception& e) {
              if (row.error.empty()) row.error = "trial " + std::to_string(t) + ": " + e.what();
            }
          }
          if (row.trials_ok > 0) {
            const double n = static_cast<double>(row.trials_ok);
            row.time_s /= n;
            row.iterations /= n;
            row.acc_percent /= n;
            row.nmi /= n;
            row.final_rank /= n;
            row.converged /= n;
          }
          row.e_rel_error = e_count ? e_sum / static_cast<double>(e_count)
                                    : std::numeric_limits<double>::quiet_NaN();
          rows.push_back(row);
        }

        if (cfg.traces) {
          char tag[160];
          std::snprintf(tag, sizeof tag, "%zu-%zu-%zu-%zu_sigma%g_muU%g_muV%g", bi.s, bi.p, bi.d_tilde,
                        bi.r_tilde, sigma, mu_U, mu_V);
          for (const auto& variant : kTraceVariants) {
            const fs::path path = out_dir / "traces" / (std::string(tag) + "_" + variant + ".csv");
            try {
              std::vector<TraceRow> trace;
              traced_solve(data[0].X, method_config(variant, cfg.solver, mu_U, mu_V), &data[0].E0, trace);
              io::write_text(path, trace_csv(trace, true));
            } catch (const NumericalError& e) {
              io::write_text(path, std::string("# error: ") + e.what() + "\n");
            }
          }
        }
      }

      for (const auto& ext : cfg.external) {
        if (ext.instance != ii || ext.sigma != sigma) continue;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        BenchRow row;
        row.instance = bi.id();
        row.sigma = sigma;
        row.method = ext.method;
        row.mu_U = row.mu_V = row.time_s = row.iterations = row.final_rank = row.converged =
            row.e_rel_error = nan;
        double acc = 0.0, nm = 0.0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
          try {
            const Labels pred = io::read_labels(ext.trials[t]);
            acc += 100.0 * accuracy(pred, data[t].labels);
            nm += nmi(pred, data[t].labels);
            ++row.trials_ok;
          } catch (const std::exception& e) {
            if (row.error.empty()) row.error = "trial " + std::to_string(t) + ": " + e.what();
          }
        }
        if (row.trials_ok) {
          row.acc_percent = acc / static_cast<double>(row.trials_ok);
          row.nmi = nm / static_cast<double>(row.trials_ok);
        }
        rows.push_back(row);
      }
    }
  }

  io::write_text(out_dir / "bench.csv", bench_csv(rows));
  io::write_text(out_dir / "bench.md", bench_markdown(rows));
  return rows;
}

}  // namespace gnrfm::cli
