#include "vibrow/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "vibrow/errors.hpp"

#ifndef VIBROW_VERSION
#define VIBROW_VERSION "0.0.0"
#endif

namespace vibrow {

const char* const kCodeVersion = VIBROW_VERSION;

namespace {

constexpr double kHbarMevFs = 658.211957;  // hbar in meV fs

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  if (n > 1) x.back() = b;
  return x;
}

LindbladOptions lindblad_options(const RunConfig& c) {
  LindbladOptions o;
  o.method = c.integrator == Integrator::split_spectral ? LindbladMethod::split_spectral : LindbladMethod::fixed_rk4;
  o.max_step = c.max_step;
  o.split_step = c.split_step;
  return o;
}

Table fig5_table(const InjectionRun& r) {
  Table t;
  t.add("beta", r.grid.beta);
  t.add("time", r.grid.times);
  t.add("fidelity_plus", r.fidelity_plus);
  t.add("fidelity_minus", r.fidelity_minus);
  t.add("particles", r.particles);
  return t;
}

Table fig2_table(const SpectralMap& m) {
  std::vector<double> d, e;
  d.reserve(m.a.size());
  e.reserve(m.a.size());
  for (double dv : m.delta)
    for (double ev : m.eps) {
      d.push_back(dv);
      e.push_back(ev);
    }
  Table t;
  t.add("delta", std::move(d));
  t.add("epsilon", std::move(e));
  t.add("A", m.a);
  return t;
}

bool is_axis(const std::string& name) {
  return name == "beta" || name == "time" || name == "delta" || name == "epsilon";
}

Json convergence_report(const Table& a, const Table& b, int n_max_rerun) {
  Json j;
  j["n_max"] = n_max_rerun;
  Json per = Json::object();
  double overall = 0.0;
  for (std::size_t c = 0; c < a.names.size(); ++c) {
    if (is_axis(a.names[c])) continue;
    const auto& x = a.cols[c];
    const auto& y = b.column(a.names[c]);
    double d = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) d = std::max(d, std::abs(x[k] - y[k]));
    per[a.names[c]] = d;
    overall = std::max(overall, d);
  }
  j["max_deviation"] = per;
  j["overall"] = overall;
  return j;
}

Json describe(const RunConfig& c) {
  Json d;
  const ModelParams& p = c.params;
  if (c.experiment != Experiment::fig2_spectral) {
    const double om = effective_coupling(p);
    d["omega_eff"] = om;
    d["t_beta1"] = time_from_beta(1.0, om);
    d["t_max"] = time_from_beta(c.beta_max, om);
    d["t_beta1_fs"] = time_from_beta(1.0, om) * kHbarMevFs / c.omega_mev;
  }
  if (p.equal_frequencies()) d["lambda"] = {p.lambda(0), p.lambda(1), p.lambda(2)};
  d["time_unit_fs"] = kHbarMevFs / c.omega_mev;
  d["omega_mev"] = c.omega_mev;
  switch (c.experiment) {
    case Experiment::fig2_spectral:
      d["hilbert_dim"] = p.layout().total();
      d["levels"] = "eigenvalues of the lab-frame Hamiltonian plus (sum g^2 + sum_{n<m} g_n g_m) / omega";
      break;
    case Experiment::fig3_closed:
      d["hilbert_dim"] = p.layout().total();
      d["initial_state"] = "|100>|00>";
      break;
    case Experiment::fig4_dephasing:
      d["hilbert_dim"] = p.layout().total();
      d["initial_state"] = "|100>|00>";
      d["collapse_ops"] = p.gamma_dephase > 0.0 ? Json::array({"sqrt(gamma_dephase) sigma_z on qubit A"})
                                                : Json::array();
      break;
    case Experiment::fig5_injection: {
      const SqModelParams sq = injection_params(c, p.n_max);
      d["hilbert_dim"] = sq.layout().total();
      d["initial_state"] = "|111111>|00>";
      d["eps"] = sq.eps;
      d["sq_t_hop"] = sq.t_hop;
      d["sq_g"] = sq.g;
      d["sq_omega"] = sq.omega;
      Json segs = Json::array();
      for (const auto& s : sq.pulse.segments)
        segs.push_back({{"channel", s.channel}, {"start", s.start}, {"stop", s.stop}, {"rate", s.rate}});
      d["pulse"] = segs;
      d["jump_ops"] = "sqrt(rate) d_i^dag on the pulsed dots";
      break;
    }
    case Experiment::sweep:
      break;
  }
  return d;
}

Json integrator_block(const RunConfig& c) {
  Json j;
  j["name"] = integrator_name(c.integrator);
  switch (c.integrator) {
    case Integrator::exact:
      j["method"] = "spectral propagation V exp(-i Lambda t) V^dag";
      break;
    case Integrator::fixed_rk4:
      j["max_step"] = c.max_step;
      break;
    case Integrator::split_spectral:
      j["split_step"] = c.split_step;
      break;
    case Integrator::mcwf:
      j["n_traj"] = c.n_traj;
      j["seed"] = c.seed;
      j["threads"] = c.threads;
      break;
  }
  return j;
}

RunResult run_single(const RunConfig& cfg, const std::filesystem::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());

  const ExperimentData data = compute(cfg);
  RunResult res;
  Json manifest;
  manifest["code"] = {{"name", "vibro-w"}, {"version", kCodeVersion}};
  manifest["experiment"] = experiment_name(cfg.experiment);
  manifest["config"] = config_to_json(cfg);
  manifest["derived"] = describe(cfg);
  manifest["integrator"] = integrator_block(cfg);
  manifest["seed"] = cfg.seed;
  manifest["truncation"] = {{"n_max", cfg.params.n_max}, {"fock_dim", cfg.params.n_max + 1}};
  if (cfg.convergence) {
    const int n1 = cfg.params.n_max + 1;
    manifest["convergence"] = convergence_report(data.table, compute(cfg, n1).table, n1);
  } else {
    manifest["convergence"] = nullptr;
  }

  const auto csv = dir / "data.csv";
  write_csv(csv, data.table);
  res.files.push_back(csv);
  Json files = {{"data", "data.csv"}};
  if (!data.peak_columns.empty()) {
    const auto pj = dir / "peaks.json";
    write_json(pj, peak_report(data.table, data.peak_columns, cfg.peak_prominence));
    res.files.push_back(pj);
    files["peaks"] = "peaks.json";
  }
  files["manifest"] = "manifest.json";
  manifest["files"] = files;
  manifest["rows"] = data.table.rows();
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto mj = dir / "manifest.json";
  write_json(mj, manifest);
  res.files.push_back(mj);
  res.manifest = std::move(manifest);
  return res;
}

}  // namespace

PureState initial_w_state(int n_max) { return PureState::basis(SpaceLayout::full_model(n_max), {1, 0, 0, 0, 0}); }

MetricSeries closed_series(const ModelParams& p, Frame frame, const TimeGrid& grid) {
  const Operator h = hamiltonian_in_frame(p, frame);
  return compute_metrics(evolve_pure(h, initial_w_state(p.n_max), grid));
}

MetricSeries dephased_series(const ModelParams& p, Frame frame, const TimeGrid& grid, const DissipativeOptions& opts) {
  const Operator h = hamiltonian_in_frame(p, frame);
  const auto ls = dephasing_collapse_ops(p);
  const PureState psi0 = initial_w_state(p.n_max);
  if (opts.integrator == Integrator::mcwf) {
    McwfObservables obs{{0, 1, 2}, {target_w_state(+1, p.n_max), target_w_state(-1, p.n_max)}};
    return compute_metrics(mcwf_evolve(h, ls, psi0, grid, opts.mcwf, obs));
  }
  if (opts.integrator == Integrator::exact) throw ConfigError("dephased dynamics need a Lindblad or trajectory integrator");
  LindbladOptions lo = opts.lindblad;
  lo.method = opts.integrator == Integrator::split_spectral ? LindbladMethod::split_spectral : LindbladMethod::fixed_rk4;
  MetricSeries out;
  const PureState tp = target_w_state(+1, p.n_max);
  const PureState tm = target_w_state(-1, p.n_max);
  evolve_lindblad(h, ls, DensityMatrix::from_pure(psi0), grid, lo, [&](std::size_t k, const DensityMatrix& rho) {
    const double fp = tp.amp.dot(rho.m * tp.amp).real();
    const double fm = tm.amp.dot(rho.m * tm.amp).real();
    out.push(grid.beta.at(k), entanglement_metrics(rho), fp, fm);
  });
  return out;
}

SpectralMap spectral_map(const ModelParams& p, const SpectralGrid& g) {
  SpectralMap m;
  m.delta = linspace(g.delta_min, g.delta_max, g.delta_points);
  m.eps = linspace(g.eps_min, g.eps_max, g.eps_points);
  m.a.reserve(m.delta.size() * m.eps.size());
  m.levels.reserve(m.delta.size());
  double pair = 0.0, sq = 0.0;
  for (std::size_t n = 0; n < 3; ++n) {
    sq += p.g[n] * p.g[n];
    for (std::size_t k = n + 1; k < 3; ++k) pair += p.g[n] * p.g[k];
  }
  if (!p.equal_frequencies()) throw ConfigError("fig2_spectral needs omega_1 == omega_2 for the energy reference");
  const double restore = (sq + pair) / p.omega[0];
  for (double d : m.delta) {
    ModelParams q = p;
    q.delta = {d, d, d};
    const EigenSystem es = hermitian_eig(build_full_hamiltonian(q));
    std::vector<double> e(static_cast<std::size_t>(es.values.size()));
    for (Eigen::Index i = 0; i < es.values.size(); ++i) e[static_cast<std::size_t>(i)] = es.values(i) + restore;
    const auto a = spectral_function(e, m.eps, g.eta);
    m.a.insert(m.a.end(), a.begin(), a.end());
    std::vector<double> in;
    for (double x : e)
      if (x >= g.eps_min && x <= g.eps_max) in.push_back(x);
    m.levels.push_back(std::move(in));
  }
  return m;
}

SqModelParams injection_params(const RunConfig& cfg, int n_max) {
  ModelParams p = cfg.params;
  p.n_max = n_max;
  SqModelParams sq = SqModelParams::calibrated(p);
  sq.pulse = cfg.pulse_duration > 0.0 && cfg.pulse_rate > 0.0
                 ? SqModelParams::injection_pulse(cfg.pulse_rate, cfg.pulse_duration)
                 : PulseSchedule{};
  sq.freeze_during_pulse = cfg.freeze_during_pulse;
  return sq;
}

TimeGrid beta_grid(const RunConfig& cfg) {
  return TimeGrid::uniform_beta(cfg.beta_min, cfg.beta_max, static_cast<std::size_t>(cfg.samples),
                                effective_coupling(cfg.params));
}

ExperimentData compute(const RunConfig& cfg, int n_max_override) {
  RunConfig c = cfg;
  if (n_max_override > 0) c.params.n_max = n_max_override;
  c.validate();
  ExperimentData out;
  static const std::vector<std::string> series_peaks{"e_tau", "c_min_sq", "c_ab", "c_ac", "c_bc", "fidelity_plus",
                                                     "fidelity_minus"};
  switch (c.experiment) {
    case Experiment::fig2_spectral:
      out.table = fig2_table(spectral_map(c.params, c.spectral));
      break;
    case Experiment::fig3_closed:
      out.table = to_table(closed_series(c.params, c.frame, beta_grid(c)));
      out.peak_columns = series_peaks;
      break;
    case Experiment::fig4_dephasing: {
      DissipativeOptions o;
      o.integrator = c.integrator;
      o.lindblad = lindblad_options(c);
      o.mcwf = {c.n_traj, c.seed, c.threads};
      out.table = to_table(dephased_series(c.params, c.frame, beta_grid(c), o));
      out.peak_columns = series_peaks;
      break;
    }
    case Experiment::fig5_injection: {
      InjectionOptions o;
      o.lindblad = lindblad_options(c);
      out.table = fig5_table(injection_fidelity(injection_params(c, c.params.n_max), beta_grid(c), o));
      out.peak_columns = {"fidelity_plus", "fidelity_minus"};
      break;
    }
    case Experiment::sweep:
      throw ConfigError("compute: a sweep has no single data set");
  }
  return out;
}

Json peak_report(const Table& t, const std::vector<std::string>& columns, double prominence) {
  Json j;
  j["prominence"] = prominence;
  Json cols = Json::object();
  const auto& beta = t.column("beta");
  for (const auto& name : columns) {
    Json arr = Json::array();
    for (const Peak& pk : detect_peaks(beta, t.column(name), prominence))
      arr.push_back({{"beta", pk.beta}, {"height", pk.height}, {"prominence", pk.prominence}});
    cols[name] = arr;
  }
  j["columns"] = cols;
  return j;
}

RunResult run(const RunConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir(cfg.out);
  if (cfg.experiment != Experiment::sweep) return run_single(cfg, dir);

  RunResult res;
  Json points = Json::array();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < cfg.sweep_values.size(); ++i) {
    Json doc = cfg.base;
    doc[cfg.sweep_key] = cfg.sweep_values[i];
    const std::string name = cfg.sweep_key + "_" + std::to_string(i);
    doc["out"] = (dir / name).string();
    const RunConfig point = parse_config(doc);
    RunResult r = run_single(point, dir / name);
    res.files.insert(res.files.end(), r.files.begin(), r.files.end());
    points.push_back({{"dir", name}, {"value", cfg.sweep_values[i]}});
  }
  Json manifest;
  manifest["code"] = {{"name", "vibro-w"}, {"version", kCodeVersion}};
  manifest["experiment"] = "sweep";
  manifest["config"] = config_to_json(cfg);
  manifest["points"] = points;
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto mj = dir / "manifest.json";
  write_json(mj, manifest);
  res.files.push_back(mj);
  res.manifest = std::move(manifest);
  return res;
}

}  // namespace vibrow
