#include "dynlaw/harness.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"
#include "dynlaw/rank_theory.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#ifndef DYNLAW_VERSION
#define DYNLAW_VERSION "0.0.0"
#endif

namespace dynlaw {

namespace {

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown field '" + key + "'");
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": bad field '" + key + "': " + e.what());
  }
}

Vector scalar_or_vector(const Json& j, const char* key, std::size_t n, double fallback, const std::string& where) {
  if (!j.contains(key)) return Vector::Constant(static_cast<Eigen::Index>(n), fallback);
  const Json& v = j.at(key);
  if (v.is_number()) return Vector::Constant(static_cast<Eigen::Index>(n), v.get<double>());
  const auto values = get_or<std::vector<double>>(j, key, {}, where);
  if (values.size() != n)
    throw ConfigError(where + ": '" + key + "' needs " + std::to_string(n) + " entries");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(n));
}

std::vector<Interval> parse_intervals(const Json& j, const std::string& where) {
  std::vector<Interval> out;
  for (const auto& pair : j.get<std::vector<std::vector<double>>>()) {
    if (pair.size() != 2) throw ConfigError(where + ": each interval needs two endpoints");
    out.push_back({pair[0], pair[1]});
  }
  return out;
}

void log_line(bool quiet, const std::string& msg) {
  if (!quiet) std::cerr << msg << '\n';
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

void ExperimentConfig::validate() const {
  if (d == 0) throw ConfigError("config: d must be at least 1");
  if (M.empty()) throw ConfigError("config: the M grid is empty");
  if (sigma.empty()) throw ConfigError("config: the sigma grid is empty");
  for (std::size_t m : M)
    if (m == 0) throw ConfigError("config: M grid entries must be positive");
  for (double s : sigma)
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("config: sigma grid entries must be finite and >= 0");
  if (lambda < 0) throw ConfigError("config: lambda must be non-negative");
  if (rho < 1) throw ConfigError("config: rho must be at least 1");
  if (L < 0) throw ConfigError("config: L must be non-negative");
  if (residuum_samples == 0) throw ConfigError("config: residuum_samples must be positive");
  if (intervals && intervals->size() != d) throw ConfigError("config: one sampling interval per mode expected");
  train.validate();
  if (system != "planted") spec.validate();
}

ExperimentConfig parse_config(const Json& j) {
  check_keys(j, {"system", "dictionary", "lambda", "rho", "L", "train", "M", "sigma", "seed", "residuum_samples",
                 "out_dir"},
             "config");
  ExperimentConfig cfg;
  cfg.raw = j;
  if (!j.contains("system")) throw ConfigError("config: missing 'system'");
  const Json& sys = j.at("system");
  check_keys(sys, {"kind", "d", "kappa", "beta", "random_constants", "moments", "inertia", "positions", "q",
                   "intervals"},
             "system");
  cfg.system = get_or<std::string>(sys, "kind", "", "system");
  cfg.d = get_or<std::size_t>(sys, "d", 0, "system");
  if (cfg.d == 0) throw ConfigError("system: d must be at least 1");
  if (sys.contains("intervals")) cfg.intervals = parse_intervals(sys.at("intervals"), "system");

  if (cfg.system == "fput") {
    if (get_or<bool>(sys, "random_constants", false, "system")) {
      cfg.spec = make_fput_random(cfg.d, get_or<std::uint64_t>(j, "seed", 0, "config"));
    } else {
      cfg.spec = make_fput(cfg.d);
      cfg.spec.fput.kappa = scalar_or_vector(sys, "kappa", cfg.d + 1, 1.0, "system");
      cfg.spec.fput.beta = scalar_or_vector(sys, "beta", cfg.d + 1, 1.0, "system");
    }
  } else if (cfg.system == "dipole") {
    cfg.spec = make_dipole(cfg.d);
    cfg.spec.dipole.moments = scalar_or_vector(sys, "moments", cfg.d, 1.0, "system");
    cfg.spec.dipole.inertia = scalar_or_vector(sys, "inertia", cfg.d, 1.0, "system");
    if (sys.contains("positions")) cfg.spec.dipole.positions = scalar_or_vector(sys, "positions", cfg.d, 0.0, "system");
  } else if (cfg.system == "lj") {
    cfg.spec = make_lennard_jones(cfg.d, get_or<int>(sys, "q", 2, "system"));
  } else if (cfg.system != "planted") {
    throw ConfigError("system: unknown kind '" + cfg.system + "' (expected fput, dipole, lj or planted)");
  }

  if (j.contains("dictionary")) {
    const Json& dict = j.at("dictionary");
    check_keys(dict, {"kind", "degree"}, "dictionary");
    cfg.dictionary = get_or<std::string>(dict, "kind", cfg.dictionary, "dictionary");
    cfg.degree = get_or<int>(dict, "degree", cfg.degree, "dictionary");
    dictionary_kind_from_string(cfg.dictionary);
  }
  cfg.lambda = get_or<int>(j, "lambda", cfg.lambda, "config");
  cfg.rho = get_or<std::size_t>(j, "rho", cfg.rho, "config");
  cfg.L = get_or<int>(j, "L", cfg.L, "config");
  if (j.contains("train")) {
    const Json& t = j.at("train");
    check_keys(t, {"max_sweeps", "loss_rel_tol", "ridge", "restarts", "chunk_rows", "revert_on_increase",
                  "normal_equations_from"}, "train");
    cfg.train.max_sweeps = get_or<int>(t, "max_sweeps", cfg.train.max_sweeps, "train");
    cfg.train.loss_rel_tol = get_or<double>(t, "loss_rel_tol", cfg.train.loss_rel_tol, "train");
    cfg.train.ridge = get_or<double>(t, "ridge", cfg.train.ridge, "train");
    cfg.train.restarts = get_or<int>(t, "restarts", cfg.train.restarts, "train");
    cfg.train.chunk_rows = get_or<std::size_t>(t, "chunk_rows", cfg.train.chunk_rows, "train");
    cfg.train.revert_on_increase = get_or<bool>(t, "revert_on_increase", cfg.train.revert_on_increase, "train");
    cfg.train.normal_equations_from =
        get_or<std::size_t>(t, "normal_equations_from", cfg.train.normal_equations_from, "train");
  }
  cfg.M = get_or<std::vector<std::size_t>>(j, "M", {}, "config");
  cfg.sigma = get_or<std::vector<double>>(j, "sigma", {0.0}, "config");
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "config");
  cfg.residuum_samples = get_or<std::size_t>(j, "residuum_samples", cfg.residuum_samples, "config");
  cfg.out_dir = get_or<std::string>(j, "out_dir", cfg.out_dir.string(), "config");
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_json_file(path)); }

SeedPlan SeedPlan::from(std::uint64_t master) {
  return {derive_key(master, "data"), derive_key(master, "init"), derive_key(master, "eval"),
          derive_key(master, "truth")};
}

Experiment::Experiment(ExperimentConfig config) : cfg_(std::move(config)), seeds_(SeedPlan::from(cfg_.seed)) {
  cfg_.validate();
  if (cfg_.system == "planted") planted_ = make_ensemble(dictionary(), table(), cfg_.lambda, cfg_.rho, seeds_.truth);
}

SamplerSpec Experiment::sampler(double sigma) const {
  SamplerSpec s;
  if (cfg_.system == "planted") s.intervals.assign(cfg_.d, Interval{-1.0, 1.0});
  else s = default_sampler(cfg_.spec, sigma, seeds_.data);
  if (cfg_.intervals) s.intervals = *cfg_.intervals;
  s.sigma = sigma;
  s.seed = seeds_.data;
  if (cfg_.system != "planted") s.validate(cfg_.spec);
  return s;
}

Dictionary Experiment::dictionary() const { return make_dictionary(cfg_.dictionary, cfg_.degree, sampler(0.0).intervals); }

SelectionTable Experiment::table() const { return local_selection_table(cfg_.d, cfg_.L); }

Matrix Experiment::truth(const Matrix& states) const {
  if (planted_) return planted_->evaluate_batch(states);
  return system_targets(cfg_.spec, states);
}

TrainingSet Experiment::dataset(std::size_t M, double sigma) const {
  const SamplerSpec s = sampler(sigma);
  if (!planted_) return sample_dataset(cfg_.spec, s, M);
  if (M == 0) throw ConfigError("dataset: M must be at least 1");
  TrainingSet data;
  data.X = sample_states(s, M, derive_key(s.seed, "states"));
  data.Y = truth(data.X);
  if (sigma > 0.0) {
    const std::uint64_t noise = derive_key(s.seed, "noise");
    for (Eigen::Index m = 0; m < data.Y.rows(); ++m) {
      CounterRng rng(derive_key(noise, static_cast<std::uint64_t>(m)));
      for (Eigen::Index l = 0; l < data.Y.cols(); ++l) data.Y(m, l) += sigma * rng.normal();
    }
  }
  data.domains = s.intervals;
  return data;
}

std::uint64_t Experiment::restart_seed(int restart) const {
  return restart == 0 ? seeds_.init : derive_key(seeds_.init, static_cast<std::uint64_t>(restart));
}

ModelEnsemble Experiment::initial_model(int restart) const {
  ModelEnsemble base = make_ensemble(dictionary(), table(), cfg_.lambda, cfg_.rho, seeds_.init);
  if (restart == 0) return base;
  return reinitialize(base, restart_seed(restart));
}

double Experiment::residuum(const ModelEnsemble& model) const {
  const SamplerSpec s = sampler(0.0);
  return dynlaw::residuum([&](const Matrix& X) { return model.evaluate_batch(X); },
                          [&](const Matrix& X) { return truth(X); }, s, cfg_.residuum_samples, seeds_.eval);
}

double Experiment::relative_noise_level(double sigma) const {
  const SamplerSpec s = sampler(0.0);
  const Matrix X = sample_states(s, cfg_.residuum_samples, derive_key(seeds_.eval, "residuum"));
  const double norm = truth(X).norm();
  if (!(norm > 0.0)) throw DomainError("relative_noise_level: the law vanishes on every sample");
  return sigma * std::sqrt(static_cast<double>(cfg_.residuum_samples * cfg_.d)) / norm;
}

std::string cell_hash(const ExperimentConfig& cfg, const CellSpec& cell) {
  Json key = cfg.raw;
  key.erase("out_dir");
  key.erase("M");
  key.erase("sigma");
  key["cell"] = {{"M", cell.M}, {"sigma", cell.sigma}, {"restart", cell.restart}};
  return config_hash(key);
}

CellResult run_cell(const Experiment& exp, const CellSpec& cell) {
  const ExperimentConfig& cfg = exp.config();
  CellResult out;
  out.row.system = cfg.system;
  out.row.d = cfg.d;
  out.row.M = cell.M;
  out.row.sigma = cell.sigma;
  out.row.rho = cfg.rho;
  out.row.L = cfg.L;
  out.row.restart = cell.restart;
  out.row.config_hash = cell_hash(cfg, cell);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const TrainingSet data = exp.dataset(cell.M, cell.sigma);
    TrainOptions opts = cfg.train;
    opts.restarts = 1;
    opts.seed = exp.restart_seed(cell.restart);
    TrainResult result = train(exp.initial_model(cell.restart), data, opts);
    out.row.residuum = exp.residuum(result.model);
    out.row.status = "ok";
    out.history = std::move(result.history);
    out.history.restart = cell.restart;
    out.model.emplace(std::move(result.model));
  } catch (const NumericalError& e) {
    out.row.residuum = std::numeric_limits<double>::quiet_NaN();
    out.row.status = "numerical_error";
  }
  out.row.seconds = seconds_since(t0);
  return out;
}

namespace {

struct Resolved {
  ExperimentConfig cfg;
  std::filesystem::path out;
};

Resolved resolve(const CommandArgs& args) {
  if (args.config.empty()) throw ConfigError("--config is required");
  Resolved r{load_config(args.config), {}};
  if (args.seed) {
    r.cfg.seed = *args.seed;
    r.cfg.train.seed = *args.seed;
    r.cfg.raw["seed"] = *args.seed;
    if (r.cfg.system == "fput" && r.cfg.raw["system"].value("random_constants", false))
      r.cfg.spec = make_fput_random(r.cfg.d, *args.seed);
  }
  r.out = args.out_dir ? *args.out_dir : r.cfg.out_dir;
  return r;
}

Json sampler_json(const SamplerSpec& s) {
  Json iv = Json::array();
  for (const Interval& i : s.intervals) iv.push_back({i.lo, i.hi});
  return {{"intervals", std::move(iv)}, {"sigma", s.sigma}, {"seed", s.seed}};
}

Json history_summary(const TrainHistory& h) {
  return {{"sweep_loss", h.sweep_loss},   {"converged", h.converged}, {"restart", h.restart},
          {"seed", h.seed},               {"restart_losses", h.restart_losses}, {"seconds", h.seconds},
          {"steps", h.steps.size()}};
}

} // namespace

int cmd_generate(const CommandArgs& args) {
  const Resolved r = resolve(args);
  const Experiment exp(r.cfg);
  const std::size_t M = r.cfg.M.front();
  const double sigma = r.cfg.sigma.front();
  DatasetFile file;
  file.data = exp.dataset(M, sigma);
  file.header = {{"schema_version", kSchemaVersion},
                 {"system", r.cfg.raw.at("system")},
                 {"sampler", sampler_json(exp.sampler(sigma))},
                 {"M", M},
                 {"sigma", sigma},
                 {"seed", r.cfg.seed},
                 {"config_hash", config_hash(r.cfg.raw)}};
  write_dataset(r.out / "dataset.json", file);
  if (args.csv) write_dataset_csv(r.out / "dataset.csv", file.data);
  log_line(args.quiet, "wrote " + (r.out / "dataset.json").string());
  return kExitOk;
}

int cmd_train(const CommandArgs& args) {
  const Resolved r = resolve(args);
  const Experiment exp(r.cfg);
  const std::filesystem::path path = args.dataset.empty() ? r.out / "dataset.json" : args.dataset;
  const DatasetFile file = read_dataset(path);
  if (file.data.modes() != r.cfg.d)
    throw ConfigError("dataset has " + std::to_string(file.data.modes()) + " modes, config expects " +
                      std::to_string(r.cfg.d));
  const Dictionary dict = make_dictionary(r.cfg.dictionary, r.cfg.degree, file.data.domains);
  const ModelEnsemble init = make_ensemble(dict, exp.table(), r.cfg.lambda, r.cfg.rho, exp.seeds().init);
  TrainOptions opts = r.cfg.train;
  opts.seed = exp.seeds().init;
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result = train(init, file.data, opts);
  Json model = to_json(result.model);
  model["config_hash"] = config_hash(r.cfg.raw);
  write_json_file(r.out / "model.json", model);
  write_text_file(r.out / "history.csv", history_csv(result.history));
  Json summary = history_summary(result.history);
  summary["schema_version"] = kSchemaVersion;
  summary["config_hash"] = config_hash(r.cfg.raw);
  summary["wall_seconds"] = seconds_since(t0);
  write_json_file(r.out / "train.json", summary);
  log_line(args.quiet, "final loss " + std::to_string(result.history.sweep_loss.back()) + " after " +
                           std::to_string(result.history.sweep_loss.size()) + " sweeps");
  return kExitOk;
}

int cmd_evaluate(const CommandArgs& args) {
  const Resolved r = resolve(args);
  const Experiment exp(r.cfg);
  const std::filesystem::path path = args.model.empty() ? r.out / "model.json" : args.model;
  const ModelEnsemble model = model_from_json(read_json_file(path));
  if (model.order() != r.cfg.d) throw ConfigError("model order does not match the config");
  const SamplerSpec s = exp.sampler(0.0);
  for (std::size_t l = 0; l < r.cfg.d; ++l) {
    const Interval dom = model.dictionary().domains()[l];
    if (s.intervals[l].lo < dom.lo || s.intervals[l].hi > dom.hi)
      log_line(args.quiet, "warning: evaluation interval of mode " + std::to_string(l + 1) +
                               " leaves the model's dictionary domain");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const double res = exp.residuum(model);
  ResultRow row;
  row.system = r.cfg.system;
  row.d = r.cfg.d;
  row.M = r.cfg.M.front();
  row.sigma = r.cfg.sigma.front();
  row.rho = r.cfg.rho;
  row.L = r.cfg.L;
  row.residuum = res;
  row.seconds = seconds_since(t0);
  row.status = "ok";
  row.config_hash = config_hash(r.cfg.raw);
  write_json_file(r.out / "evaluation.json", {{"schema_version", kSchemaVersion},
                                              {"config_hash", row.config_hash},
                                              {"residuum", res},
                                              {"samples", r.cfg.residuum_samples},
                                              {"seconds", row.seconds}});
  append_result_row(r.out / "results.csv", row);
  if (!args.quiet) std::cout << "residuum " << res << '\n';
  return kExitOk;
}

int cmd_sweep(const CommandArgs& args) {
  const Resolved r = resolve(args);
  const Experiment exp(r.cfg);
  const std::filesystem::path results = r.out / "results.csv";
  std::set<std::string> done;
  for (const ResultRow& row : read_results_csv(results))
    if (row.status == "ok") done.insert(row.config_hash);

  std::vector<CellSpec> cells;
  for (std::size_t M : r.cfg.M)
    for (double sigma : r.cfg.sigma)
      for (int restart = 0; restart < r.cfg.train.restarts; ++restart) {
        const CellSpec cell{M, sigma, restart};
        if (!done.contains(cell_hash(r.cfg, cell))) cells.push_back(cell);
      }
  log_line(args.quiet, std::to_string(cells.size()) + " cells to run, " + std::to_string(done.size()) + " done");

  std::mutex write_lock;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        CellResult res = run_cell(exp, cells[i]);
        std::lock_guard lock(write_lock);
        if (res.row.status == "ok")
          write_text_file(r.out / ("history_" + res.row.config_hash + ".csv"), history_csv(res.history));
        append_result_row(results, res.row);
        log_line(args.quiet, "M=" + std::to_string(res.row.M) + " sigma=" + std::to_string(res.row.sigma) +
                                 " restart=" + std::to_string(res.row.restart) +
                                 " residuum=" + std::to_string(res.row.residuum) + " (" + res.row.status + ")");
      } catch (...) {
        std::lock_guard lock(write_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(args.threads, cells.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  const SeedPlan seeds = exp.seeds();
  write_json_file(r.out / "run.json", {{"schema_version", kSchemaVersion},
                                       {"version", DYNLAW_VERSION},
                                       {"config_hash", config_hash(r.cfg.raw)},
                                       {"seeds",
                                        {{"master", r.cfg.seed},
                                         {"data", seeds.data},
                                         {"init", seeds.init},
                                         {"eval", seeds.eval}}},
                                       {"results", results.filename().string()}});
  return kExitOk;
}

Json exact_report(const ExperimentConfig& cfg, std::size_t samples) {
  const Experiment exp(cfg);
  const Dictionary dict = exp.dictionary();
  const SamplerSpec s = exp.sampler(0.0);
  const Matrix X = sample_states(s, samples, derive_key(exp.seeds().eval, "exact"));
  const Matrix F = system_targets(cfg.spec, X);

  std::vector<TensorTrain> components;
  std::vector<double> label_bounds;
  TensorTrain labeled;
  std::size_t bound = 0;
  if (cfg.system == "fput") {
    const LocalSystemDescriptor desc = fput_descriptor(cfg.spec);
    for (std::size_t k = 1; k <= cfg.d; ++k) components.push_back(exact_tt_local(desc, dict, k));
    labeled = labeled_tt_local(desc, dict);
    label_bounds = local_label_rank_bounds(cfg.d, desc.L, desc.N);
    bound = desc.N;
  } else if (cfg.system == "dipole") {
    const KModeDescriptor desc = dipole_descriptor(cfg.spec);
    for (std::size_t k = 1; k <= cfg.d; ++k) components.push_back(exact_tt_kmode(desc, dict, k));
    labeled = labeled_tt_kmode(desc, dict);
    label_bounds = kmode_label_rank_bounds(cfg.d, desc.K, desc.N);
    bound = desc.N * static_cast<std::size_t>(binomial(static_cast<std::int64_t>(cfg.d) - 1, desc.K - 1));
  } else {
    throw ConfigError("exact: only fput and dipole systems have exact witnesses");
  }

  Json comps = Json::array();
  double worst_error = 0.0;
  std::size_t worst_rank = 0;
  std::vector<double> row(cfg.d);
  for (std::size_t k = 1; k <= cfg.d; ++k) {
    const TensorTrain& tt = components[k - 1];
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index m = 0; m < X.rows(); ++m) {
      for (std::size_t l = 0; l < cfg.d; ++l) row[l] = X(m, static_cast<Eigen::Index>(l));
      const double v = tt_evaluate_scalar(tt, featurize(dict, row));
      const double f = F(m, static_cast<Eigen::Index>(k - 1));
      num += (v - f) * (v - f);
      den += f * f;
    }
    const double err = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    worst_error = std::max(worst_error, err);
    std::vector<std::size_t> ranks = tt.ranks();
    worst_rank = std::max(worst_rank, tt.max_rank());
    comps.push_back({{"k", k}, {"ranks", std::move(ranks)}, {"relative_error", err}});
  }
  const RankComparison cmp = compare_ranks(labeled, label_bounds);
  return {{"schema_version", kSchemaVersion},
          {"config_hash", config_hash(cfg.raw)},
          {"system", cfg.system},
          {"d", cfg.d},
          {"samples", samples},
          {"rank_bound", bound},
          {"max_rank", worst_rank},
          {"max_relative_error", worst_error},
          {"components", std::move(comps)},
          {"labeled",
           {{"measured", cmp.measured}, {"bound", cmp.bound}, {"violations", cmp.violations}}}};
}

Json diagnose_report(const ModelEnsemble& model, double rel_tol) {
  Json comps = Json::array();
  for (std::size_t k = 1; k <= model.order(); ++k) {
    Json interfaces = Json::array();
    for (const InterfaceDiagnostics& diag : diagnose(model.assemble_law(k), rel_tol)) interfaces.push_back(to_json(diag));
    comps.push_back({{"k", k}, {"interfaces", std::move(interfaces)}});
  }
  return {{"schema_version", kSchemaVersion}, {"rel_tol", rel_tol}, {"components", std::move(comps)}};
}

int cmd_exact(const CommandArgs& args) {
  const Resolved r = resolve(args);
  const Json report = exact_report(r.cfg);
  write_json_file(r.out / "exact.json", report);
  if (!args.quiet)
    std::cout << "max rank " << report.at("max_rank") << " (bound " << report.at("rank_bound") << "), max error "
              << report.at("max_relative_error") << '\n';
  return kExitOk;
}

int cmd_diagnose(const CommandArgs& args) {
  const Resolved r = resolve(args);
  const std::filesystem::path path = args.model.empty() ? r.out / "model.json" : args.model;
  Json report = diagnose_report(model_from_json(read_json_file(path)));
  report["config_hash"] = config_hash(r.cfg.raw);
  write_json_file(r.out / "diagnostics.json", report);
  log_line(args.quiet, "wrote " + (r.out / "diagnostics.json").string());
  return kExitOk;
}

} // namespace dynlaw
