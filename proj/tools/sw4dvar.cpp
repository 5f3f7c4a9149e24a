#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sw4dvar/dd.hpp"
#include "sw4dvar/harness.hpp"
#include "sw4dvar/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sw4dvar;

namespace {

// Output paths are resolved under $SW4DVAR_OUTPUT_ROOT when relative.
std::string resolve_out(const std::string& path) {
  const char* root = std::getenv("SW4DVAR_OUTPUT_ROOT");
  fs::path p(path);
  if (root && *root && !p.is_absolute()) p = fs::path(root) / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p.string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

struct GridFlags {
  int nlon = 72;
  int nlat = 36;
};

struct ModelFlags {
  double dt = 50.0;
  double alpha = 1.0 / 3.0;
  int p = 4;
  int q = 2;
  std::string variant = "as-printed";

  ModelParams params() const {
    ModelParams mp;
    mp.dt = dt;
    mp.alpha = alpha;
    mp.p = p;
    mp.q = q;
    mp.variant = variant == "corrected" ? StencilVariant::Corrected : StencilVariant::AsPrinted;
    return mp;
  }
};

void add_grid_flags(CLI::App* cmd, GridFlags& g) {
  cmd->add_option("--nlon", g.nlon, "longitude points");
  cmd->add_option("--nlat", g.nlat, "latitude points");
}

void add_model_flags(CLI::App* cmd, ModelFlags& m) {
  cmd->add_option("--dt", m.dt, "time step [s]");
  cmd->add_option("--alpha", m.alpha, "Coriolis averaging weight");
  cmd->add_option("--p", m.p, "zonal stencil half-width");
  cmd->add_option("--q", m.q, "meridional stencil half-width");
  cmd->add_option("--variant", m.variant, "stencil variant")
      ->check(CLI::IsMember({"as-printed", "corrected"}));
}

std::string status_name(MinStatus s) {
  switch (s) {
    case MinStatus::Converged: return "converged";
    case MinStatus::MaxIterations: return "max-iterations";
    case MinStatus::LineSearchFailure: return "line-search-failure";
    case MinStatus::PreconFailure: return "precon-failure";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4D-Var toolkit for the spherical shallow-water equations"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML-style config file; command-line flags override it");

  // run-model
  auto* run_model = app.add_subcommand("run-model", "integrate the nonlinear model");
  GridFlags rm_g;
  ModelFlags rm_m;
  int rm_steps = 30;
  uint64_t rm_seed = 42;
  std::string rm_out;
  add_grid_flags(run_model, rm_g);
  add_model_flags(run_model, rm_m);
  run_model->add_option("--steps", rm_steps, "number of model steps");
  run_model->add_option("--seed", rm_seed, "RNG seed for the initial state");
  run_model->add_option("--out", rm_out, "output SWE1 file")->required();

  // gen-obs
  auto* gen_obs = app.add_subcommand("gen-obs", "synthesize twin-experiment observations");
  GridFlags go_g;
  ModelFlags go_m;
  int go_problem = 1, go_ntobs = 10, go_steps = 30;
  uint64_t go_seed = 42;
  std::string go_dir;
  add_grid_flags(gen_obs, go_g);
  add_model_flags(gen_obs, go_m);
  gen_obs->add_option("--problem", go_problem)->check(CLI::Range(1, 4));
  gen_obs->add_option("--ntobs", go_ntobs)->check(CLI::PositiveNumber);
  gen_obs->add_option("--steps", go_steps, "total window steps");
  gen_obs->add_option("--seed", go_seed);
  gen_obs->add_option("--out-dir", go_dir)->required();

  // assimilate
  auto* assim = app.add_subcommand("assimilate", "run the 4D-Var minimization");
  GridFlags as_g;
  ModelFlags as_m;
  int as_problem = 1, as_ntobs = 10, as_nsvs = 1, as_steps = 30, as_maxiter = 200;
  uint64_t as_seed = 42;
  double as_rtol = 1e-14, as_gtol = 1e-8, as_lambda = 1.0;
  int as_nsub_space = 1, as_nsub_time = 1, as_halo = 1;
  double as_mu = 1.0;
  std::string as_out, as_log;
  add_grid_flags(assim, as_g);
  add_model_flags(assim, as_m);
  assim->add_option("--problem", as_problem)->check(CLI::Range(1, 4));
  assim->add_option("--ntobs", as_ntobs)->check(CLI::PositiveNumber);
  assim->add_option("--nsvs", as_nsvs, "retained singular values");
  assim->add_option("--rtol", as_rtol, "TSVD relative rank tolerance");
  assim->add_option("--steps", as_steps, "total window steps");
  assim->add_option("--seed", as_seed);
  assim->add_option("--gtol", as_gtol, "gradient stopping tolerance");
  assim->add_option("--maxiter", as_maxiter);
  assim->add_option("--lambda", as_lambda, "observation-term weight");
  assim->add_option("--nsub-space", as_nsub_space, "longitude subdomains");
  assim->add_option("--nsub-time", as_nsub_time, "time subdomains");
  assim->add_option("--halo", as_halo, "subdomain halo width");
  assim->add_option("--mu", as_mu, "overlap penalty weight");
  assim->add_option("--out", as_out, "output SWE1 file for x_DA")->required();
  assim->add_option("--log", as_log, "JSON-lines iteration log (default <out>.jsonl)");

  // verify-adjoint
  auto* verify = app.add_subcommand("verify-adjoint", "dot-product and Taylor tests");
  GridFlags va_g{8, 6};
  ModelFlags va_m;
  va_m.p = 2;
  int va_steps = 10;
  uint64_t va_seed = 42;
  add_grid_flags(verify, va_g);
  add_model_flags(verify, va_m);
  verify->add_option("--steps", va_steps, "window length");
  verify->add_option("--seed", va_seed);

  // sweep-dt
  auto* sweep = app.add_subcommand("sweep-dt", "drift as a function of dt");
  GridFlags sw_g;
  ModelFlags sw_m;
  int sw_steps = 30;
  uint64_t sw_seed = 42;
  std::vector<double> sw_dts = {50.0, 100.0, 150.0, 200.0};
  std::string sw_out;
  add_grid_flags(sweep, sw_g);
  add_model_flags(sweep, sw_m);
  sweep->add_option("--steps", sw_steps);
  sweep->add_option("--seed", sw_seed);
  sweep->add_option("--dt-list", sw_dts, "time steps to sweep");
  sweep->add_option("--out", sw_out, "output CSV")->required();

  // tests-set1
  auto* set1 = app.add_subcommand("tests-set1", "full (problem, dt, ntobs, nSVs) error sweep");
  GridFlags s1_g;
  ModelFlags s1_m;
  uint64_t s1_seed = 42;
  int s1_maxiter = 200;
  std::vector<double> s1_dts = {50.0, 100.0, 150.0, 200.0};
  std::vector<int> s1_ntobs = {1, 2, 4, 6, 8, 10};
  std::vector<int> s1_nsvs = {4, 6, 8, 10, 12};
  std::vector<int> s1_problems = {1, 2, 3, 4};
  std::string s1_out;
  add_grid_flags(set1, s1_g);
  add_model_flags(set1, s1_m);
  set1->add_option("--seed", s1_seed);
  set1->add_option("--maxiter", s1_maxiter);
  set1->add_option("--dt-list", s1_dts);
  set1->add_option("--ntobs-list", s1_ntobs);
  set1->add_option("--nsvs-list", s1_nsvs);
  set1->add_option("--problems", s1_problems);
  set1->add_option("--out", s1_out, "output CSV")->required();

  // trends
  auto* trends = app.add_subcommand("trends", "relative-misfit trend series");
  GridFlags tr_g;
  ModelFlags tr_m;
  uint64_t tr_seed = 42;
  std::string tr_mode = "set2";
  int tr_ntobs = 10, tr_nsvs = 1, tr_problem = 1, tr_maxiter = 200;
  std::string tr_out;
  add_grid_flags(trends, tr_g);
  add_model_flags(trends, tr_m);
  trends->add_option("--mode", tr_mode)->check(CLI::IsMember({"set2", "set3"}));
  trends->add_option("--seed", tr_seed);
  trends->add_option("--ntobs", tr_ntobs, "window length for set2");
  trends->add_option("--nsvs", tr_nsvs);
  trends->add_option("--problem", tr_problem)->check(CLI::Range(1, 4));
  trends->add_option("--maxiter", tr_maxiter);
  trends->add_option("--out", tr_out, "output CSV")->required();

  // export-image
  auto* image = app.add_subcommand("export-image", "render one field as a PGM image");
  std::string im_in, im_out, im_field = "h";
  image->add_option("--in", im_in, "input SWE1 file")->required();
  image->add_option("--field", im_field)->check(CLI::IsMember({"u", "v", "h"}));
  image->add_option("--out", im_out, "output PGM file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_model->parsed()) {
      const SphereGrid grid = build_grid(rm_g.nlon, rm_g.nlat);
      ModelParams mp = rm_m.params();
      mp.msteps = rm_steps;
      const StateVector x0 = synth_initial(rm_seed, grid, SynthFieldParams{});
      const StateVector xm = integrate(x0, grid, mp);
      dump_state(xm, resolve_out(rm_out));
      std::cout << "wrote " << resolve_out(rm_out) << "\n";
      return 0;
    }

    if (gen_obs->parsed()) {
      const SphereGrid grid = build_grid(go_g.nlon, go_g.nlat);
      const ModelParams mp = go_m.params();
      const StateVector x0 = synth_initial(go_seed, grid, SynthFieldParams{});
      const WindowData wd =
          generate_window_data(x0, grid, mp, go_ntobs, go_problem, go_seed, go_steps);
      const std::string dir = resolve_out(go_dir + "/manifest.csv").substr(
          0, resolve_out(go_dir + "/manifest.csv").size() - std::string("/manifest.csv").size());
      fs::create_directories(dir);

      std::string manifest = "step,file,problem,seed\n";
      const int base = go_steps - go_ntobs + 1;
      dump_state(wd.x_b, dir + "/x_b.swe");
      manifest += std::to_string(base) + ",x_b.swe," + std::to_string(go_problem) + "," +
                  std::to_string(go_seed) + "\n";
      for (size_t k = 0; k < wd.obs.obs.size(); ++k) {
        StateVector v(grid.nlon, grid.nlat);
        v.data = wd.obs.obs[k];
        char name[32];
        std::snprintf(name, sizeof(name), "obs_%03zu.swe", k);
        dump_state(v, dir + "/" + name);
        manifest += std::to_string(base + static_cast<int>(k)) + "," + name + "," +
                    std::to_string(go_problem) + "," + std::to_string(go_seed) + "\n";
      }
      write_text(dir + "/manifest.csv", manifest);
      std::cout << "wrote " << wd.obs.obs.size() << " observations to " << dir << "\n";
      return 0;
    }

    if (assim->parsed()) {
      const SphereGrid grid = build_grid(as_g.nlon, as_g.nlat);
      const ModelParams mp = as_m.params();
      const StateVector x0 = synth_initial(as_seed, grid, SynthFieldParams{});
      const WindowData wd =
          generate_window_data(x0, grid, mp, as_ntobs, as_problem, as_seed, as_steps);

      AssimilationSetup setup;
      setup.x_b = wd.x_b;
      setup.obs = wd.obs;
      setup.H = build_obs_operator(as_problem, grid);
      setup.rinv = build_obs_err_weights(grid);
      setup.lambda = as_lambda;
      setup.grid = grid;
      setup.params = mp;

      const std::string out = resolve_out(as_out);
      const TsvdResult ts = tsvd(build_background_cov(wd.x_b), as_nsvs, as_rtol);
      std::string svals = "i,S_i\n";
      for (size_t i = 0; i < ts.precon.singular_values.size(); ++i)
        svals += std::to_string(i) + "," + std::to_string(ts.precon.singular_values[i]) + "\n";
      write_text(out + ".svals.csv", svals);
      if (!ts.ok()) {
        std::cerr << "TSVD failure: requested nSVs=" << as_nsvs
                  << " exceeds the numerical rank of B\n";
        return 2;
      }
      setup.precon = ts.precon;

      MinimizeOptions mo;
      mo.gtol = as_gtol;
      mo.maxiter = as_maxiter;

      const std::string logpath = resolve_out(as_log.empty() ? as_out + ".jsonl" : as_log);
      std::ofstream log(logpath, std::ios::binary);

      DAResult res;
      if (as_nsub_space == 1 && as_nsub_time == 1) {
        res = minimize(setup, mo, [&](const IterRecord& r) {
          log << json{{"iter", r.iter},
                      {"J", r.j},
                      {"grad_norm", r.grad_norm},
                      {"step_length", r.step_length}}
                     .dump()
              << "\n";
        });
      } else {
        const DomainDecomposition dd =
            decompose(grid, as_ntobs, as_nsub_space, as_nsub_time, as_halo, as_mu);
        DDOptions opts;
        opts.inner = mo;
        opts.log = [&](int sweep, int sub, const IterRecord& r) {
          log << json{{"sweep", sweep},
                      {"subdomain", sub},
                      {"iter", r.iter},
                      {"J", r.j},
                      {"grad_norm", r.grad_norm},
                      {"step_length", r.step_length}}
                     .dump()
              << "\n";
        };
        res = solve_dd(setup, dd, opts);
      }

      dump_state(res.x_da, out);
      std::cout << "status=" << status_name(res.status) << " iterations=" << res.iterations
                << " J0=" << res.j_initial << " J=" << res.j_final
                << " |grad|=" << res.grad_norm_final << "\n";
      return res.j_final <= res.j_initial ? 0 : 1;
    }

    if (verify->parsed()) {
      const SphereGrid grid = build_grid(va_g.nlon, va_g.nlat);
      const ModelParams mp = va_m.params();
      const StateVector x0 = synth_initial(va_seed, grid, SynthFieldParams{});
      const LinearizationPoint lin = linearize(x0, grid, mp, va_steps);
      Rng rng(va_seed + 7);

      auto random_state = [&]() {
        StateVector s(grid.nlon, grid.nlat);
        for (double& v : s.data) v = rng.normal();
        return s;
      };

      double worst_dot = 0.0;
      for (int trial = 0; trial < 20; ++trial) {
        const StateVector d = random_state(), y = random_state();
        const StateVector md = tlm_window(lin, d);
        const StateVector aty = adjoint_window(lin, y);
        const double lhs = dot(md.data, y.data), rhs = dot(d.data, aty.data);
        const double rel =
            std::abs(lhs - rhs) / std::max(1e-300, norm2(md.data) * norm2(y.data));
        worst_dot = std::max(worst_dot, rel);
      }

      // Taylor test: the one-step TLM is the exact Jacobian, so the residual
      // of the first-order expansion shrinks at second order in epsilon.
      const StateVector d = random_state();
      ModelParams one = mp;
      one.msteps = va_steps;
      const StateVector mx = integrate(x0, grid, one);
      const StateVector md = tlm_window(lin, d);
      double r_prev = 0.0, order = 0.0;
      for (int e = 0; e < 2; ++e) {
        const double eps = e == 0 ? 1e-1 : 1e-2;
        StateVector xp = x0;
        axpy(eps, d.data, xp.data);
        const StateVector mxp = integrate(xp, grid, one);
        double r = 0.0;
        for (size_t n = 0; n < mx.data.size(); ++n) {
          const double res = mxp.data[n] - mx.data[n] - eps * md.data[n];
          r += res * res;
        }
        r = std::sqrt(r);
        if (e == 1) order = std::log10(r_prev / r);
        r_prev = r;
      }

      std::cout << "dot-product residual (max of 20): " << worst_dot << "\n";
      std::cout << "taylor order: " << order << "\n";
      const bool pass = worst_dot <= 1e-12 && order >= 1.9;
      std::cout << (pass ? "PASS" : "FAIL") << "\n";
      return pass ? 0 : 1;
    }

    if (sweep->parsed()) {
      ExperimentConfig cfg;
      cfg.nlon = sw_g.nlon;
      cfg.nlat = sw_g.nlat;
      cfg.seed = sw_seed;
      cfg.total_steps = sw_steps;
      cfg.params = sw_m.params();
      cfg.dt_list = sw_dts;
      const std::vector<DtSweepRow> rows = run_dt_sweep(cfg);
      write_text(resolve_out(sw_out), dt_sweep_csv(rows));
      bool ordered = true;
      for (size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].dt > rows[i - 1].dt && !(rows[i].rel_diff > rows[i - 1].rel_diff))
          ordered = false;
        if (!std::isfinite(rows[i].rel_diff)) ordered = false;
      }
      std::cout << dt_sweep_csv(rows);
      return ordered ? 0 : 1;
    }

    if (set1->parsed()) {
      ExperimentConfig cfg;
      cfg.nlon = s1_g.nlon;
      cfg.nlat = s1_g.nlat;
      cfg.seed = s1_seed;
      cfg.params = s1_m.params();
      cfg.dt_list = s1_dts;
      cfg.ntobs_list = s1_ntobs;
      cfg.nsvs_list = s1_nsvs;
      cfg.problems = s1_problems;
      cfg.minopts.maxiter = s1_maxiter;
      const std::vector<ErrRecord> records = run_tests_set1(cfg);
      write_text(resolve_out(s1_out), err_records_csv(records));
      std::cout << "wrote " << records.size() << " cells to " << resolve_out(s1_out) << "\n";
      return 0;
    }

    if (trends->parsed()) {
      ExperimentConfig cfg;
      cfg.nlon = tr_g.nlon;
      cfg.nlat = tr_g.nlat;
      cfg.seed = tr_seed;
      cfg.params = tr_m.params();
      cfg.trend_ntobs = tr_ntobs;
      cfg.trend_nsvs = tr_nsvs;
      cfg.problems = {tr_problem};
      cfg.minopts.maxiter = tr_maxiter;
      const std::vector<TrendSeries> series =
          run_trend_series(cfg, tr_mode == "set2" ? TrendMode::Set2 : TrendMode::Set3);
      write_text(resolve_out(tr_out), trend_csv(series));
      std::cout << trend_csv(series);
      return 0;
    }

    if (image->parsed()) {
      const StateVector x = load_state(im_in);
      export_field_image(x, im_field[0], resolve_out(im_out));
      std::cout << "wrote " << resolve_out(im_out) << "\n";
      return 0;
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
