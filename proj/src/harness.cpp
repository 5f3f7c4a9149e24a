#include "sw4dvar/harness.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sw4dvar {

namespace {

constexpr const char* kFailCell = "−";  // minus sign, matching the tables

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double rel_misfit(const StateVector& x, const ObsOperator& H, const std::vector<double>& v) {
  double num = 0.0, den = 0.0;
  for (size_t n = 0; n < v.size(); ++n) {
    const double d = H.mask[n] * x.data[n] - v[n];
    num += d * d;
    den += v[n] * v[n];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

CellSetup build_cell(const SphereGrid& grid, const ModelParams& params, const StateVector& x0,
                     int nt_obs, int problem, int nsvs, uint64_t seed, double lambda,
                     int total_steps) {
  CellSetup cell;
  const WindowData wd = generate_window_data(x0, grid, params, nt_obs, problem, seed, total_steps);
  cell.setup.x_b = wd.x_b;
  cell.setup.obs = wd.obs;
  cell.setup.H = build_obs_operator(problem, grid);
  cell.setup.rinv = build_obs_err_weights(grid);
  cell.setup.lambda = lambda;
  cell.setup.grid = grid;
  cell.setup.params = params;

  const TsvdResult ts = tsvd(build_background_cov(wd.x_b), nsvs);
  cell.tsvd_status = ts.status;
  if (ts.ok()) cell.setup.precon = ts.precon;
  return cell;
}

std::vector<DtSweepRow> run_dt_sweep(const ExperimentConfig& cfg) {
  const SphereGrid grid = build_grid(cfg.nlon, cfg.nlat);
  const StateVector x0 = synth_initial(cfg.seed, grid, cfg.field);
  const double x0norm = norm2(x0.data);

  std::vector<DtSweepRow> rows;
  for (double dt : cfg.dt_list) {
    ModelParams p = cfg.params;
    p.dt = dt;
    p.msteps = cfg.total_steps;
    const StateVector xm = integrate(x0, grid, p);
    double diff = 0.0;
    for (size_t n = 0; n < x0.data.size(); ++n) {
      const double d = xm.data[n] - x0.data[n];
      diff += d * d;
    }
    rows.push_back({dt, std::sqrt(diff) / x0norm});
  }
  return rows;
}

namespace {

// R^-1-weighted observation misfit accumulated over the whole window,
// relative to the weighted observation norm. This is the observation part
// of the functional up to the lambda factor, so any iterate with
// J(x) <= J(x_b) has a misfit <= the background's (the background term
// vanishes at x_b).
double weighted_window_misfit(const StateVector& x, const AssimilationSetup& setup) {
  double num = 0.0, den = 0.0;
  StateVector cur = x;
  for (int k = 0; k < setup.nt_obs(); ++k) {
    if (k > 0)
      for (int s = 0; s < setup.steps_per_obs; ++s) cur = step(cur, setup.grid, setup.params);
    const std::vector<double>& v = setup.obs.obs[static_cast<size_t>(k)];
    for (size_t n = 0; n < v.size(); ++n) {
      const double d = setup.H.mask[n] * cur.data[n] - v[n];
      num += setup.rinv.rinv[n] * d * d;
      den += setup.rinv.rinv[n] * v[n] * v[n];
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

std::pair<double, double> compute_err_metrics(const StateVector& x,
                                              const AssimilationSetup& setup) {
  if (setup.obs.obs.empty()) throw std::invalid_argument("compute_err_metrics: no observations");
  return {weighted_window_misfit(setup.x_b, setup), weighted_window_misfit(x, setup)};
}

std::vector<ErrRecord> run_tests_set1(const ExperimentConfig& cfg) {
  const SphereGrid grid = build_grid(cfg.nlon, cfg.nlat);
  const StateVector x0 = synth_initial(cfg.seed, grid, cfg.field);

  std::vector<ErrRecord> out;
  for (int problem : cfg.problems)
    for (double dt : cfg.dt_list)
      for (int ntobs : cfg.ntobs_list)
        for (int nsvs : cfg.nsvs_list) {
          ModelParams p = cfg.params;
          p.dt = dt;
          const CellSetup cell =
              build_cell(grid, p, x0, ntobs, problem, nsvs, cfg.seed, cfg.lambda, cfg.total_steps);
          ErrRecord rec;
          rec.dt = dt;
          rec.ntobs = ntobs;
          rec.nsvs = nsvs;
          rec.problem = problem;
          if (!cell.usable()) {
            rec.err_b = compute_err_metrics(cell.setup.x_b, cell.setup).first;
            rec.da_failed = true;
          } else {
            const DAResult da = minimize(cell.setup, cfg.minopts);
            const auto [eb, eda] = compute_err_metrics(da.x_da, cell.setup);
            rec.err_b = eb;
            rec.err_da = eda;
          }
          out.push_back(rec);
        }
  return out;
}

std::vector<TrendSeries> run_trend_series(const ExperimentConfig& cfg, TrendMode mode) {
  const SphereGrid grid = build_grid(cfg.nlon, cfg.nlat);
  const StateVector x0 = synth_initial(cfg.seed, grid, cfg.field);
  const int problem = cfg.problems.empty() ? 1 : cfg.problems.front();

  std::vector<int> ntobs_values;
  if (mode == TrendMode::Set2)
    ntobs_values = {cfg.trend_ntobs};
  else
    ntobs_values = {2, 6, 10};

  std::vector<TrendSeries> out;
  for (int ntobs : ntobs_values) {
    const CellSetup cell = build_cell(grid, cfg.params, x0, ntobs, problem, cfg.trend_nsvs,
                                      cfg.seed, cfg.lambda, cfg.total_steps);
    if (!cell.usable()) throw std::runtime_error("run_trend_series: TSVD failed for nSVs requested");
    const DAResult da = minimize(cell.setup, cfg.minopts);

    TrendSeries series;
    series.ntobs = ntobs;
    StateVector xb = cell.setup.x_b;
    StateVector xda = da.x_da;
    for (int n = 0; n < ntobs; ++n) {
      const std::vector<double>& vn = cell.setup.obs.obs[static_cast<size_t>(n)];
      series.err_b.push_back(rel_misfit(xb, cell.setup.H, vn));
      series.err_da.push_back(rel_misfit(xda, cell.setup.H, vn));
      if (n + 1 < ntobs) {
        for (int s = 0; s < cell.setup.steps_per_obs; ++s) {
          xb = step(xb, grid, cell.setup.params);
          xda = step(xda, grid, cell.setup.params);
        }
      }
    }
    out.push_back(series);
  }
  return out;
}

std::string dt_sweep_csv(const std::vector<DtSweepRow>& rows) {
  std::string s = "dt,rel_diff\n";
  for (const DtSweepRow& r : rows) s += fmt_double(r.dt) + "," + fmt_double(r.rel_diff) + "\n";
  return s;
}

std::string err_records_csv(const std::vector<ErrRecord>& records) {
  std::string s = "problem,dt,ntobs,nsvs,err_b,err_da\n";
  for (const ErrRecord& r : records) {
    s += std::to_string(r.problem) + "," + fmt_double(r.dt) + "," + std::to_string(r.ntobs) + "," +
         std::to_string(r.nsvs) + "," + fmt_double(r.err_b) + ",";
    s += r.da_failed ? std::string(kFailCell) : fmt_double(r.err_da);
    s += "\n";
  }
  return s;
}

std::vector<ErrRecord> parse_err_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "problem,dt,ntobs,nsvs,err_b,err_da")
    throw std::runtime_error("parse_err_records_csv: bad header");
  std::vector<ErrRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
      const size_t c = line.find(',', pos);
      fields.push_back(line.substr(pos, c == std::string::npos ? c : c - pos));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (fields.size() != 6) throw std::runtime_error("parse_err_records_csv: bad row");
    ErrRecord rec;
    rec.problem = std::stoi(fields[0]);
    rec.dt = std::stod(fields[1]);
    rec.ntobs = std::stoi(fields[2]);
    rec.nsvs = std::stoi(fields[3]);
    rec.err_b = std::stod(fields[4]);
    if (fields[5] == kFailCell) {
      rec.da_failed = true;
    } else {
      rec.err_da = std::stod(fields[5]);
    }
    out.push_back(rec);
  }
  return out;
}

std::string trend_csv(const std::vector<TrendSeries>& series) {
  std::string s = "ntobs,n,err_b,err_da\n";
  for (const TrendSeries& ts : series)
    for (size_t n = 0; n < ts.err_b.size(); ++n)
      s += std::to_string(ts.ntobs) + "," + std::to_string(n) + "," + fmt_double(ts.err_b[n]) +
           "," + fmt_double(ts.err_da[n]) + "\n";
  return s;
}

}  // namespace sw4dvar
