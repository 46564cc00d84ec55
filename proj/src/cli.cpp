#include "ersav/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string_view>

#include "CLI11.hpp"

namespace ersav::cli {

using core::ConfigError;
using core::DenseVector;
using core::InsufficientData;
using core::NumericalFailure;
using core::PositivityViolation;
using core::SplittingOperator;
using optimizers::Method;
using optimizers::RunResult;
using optimizers::RunStatus;

const char* const kTraceHeader =
    "iter,f_raw,loss,grad_norm,dt_used,alpha,eta_min,eta_max,r_min,r_max,"
    "modified_energy,dissipation_margin,proposal_event";

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(what + ": cannot parse real value '" + text + "'");
  }
  return v;
}

std::uint64_t parse_integer(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError(what + ": cannot parse integer value '" + text + "'");
  }
  return v;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string piece =
        comma == std::string::npos ? text.substr(pos) : text.substr(pos, comma - pos);
    out.push_back(parse_real(piece, what));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError(what + ": expected at least one value");
  return out;
}

void apply_lambda_spec(ExperimentConfig& config, const std::string& value) {
  if (value == "zero") {
    config.lambda_source = LambdaSource::Zero;
    config.lambda_values.clear();
  } else if (value == "hessian") {
    config.lambda_source = LambdaSource::HessianDiagonal;
    config.lambda_values.clear();
  } else {
    config.lambda_source = LambdaSource::Explicit;
    config.lambda_values = parse_real_list(value, "lambda");
  }
}

void apply_key(ExperimentConfig& config, const std::string& key, const std::string& value) {
  if (key == "method") {
    config.method = optimizers::method_from_string(value);
  } else if (key == "benchmark") {
    config.benchmark = value;
  } else if (key == "dt0" || key == "dt") {
    config.dt0 = parse_real(value, key);
    if (!(config.dt0 > 0.0) || !std::isfinite(config.dt0)) {
      throw ConfigError("dt0 must be a positive real");
    }
  } else if (key == "psi") {
    config.psi = parse_real(value, key);
    if (!(config.psi > 0.0 && config.psi < 1.0)) {
      throw ConfigError("psi must lie in (0,1)");
    }
  } else if (key == "beta") {
    config.beta = parse_real(value, key);
    if (!(config.beta >= 0.0) || !std::isfinite(config.beta)) {
      throw ConfigError("beta must be a nonnegative real");
    }
  } else if (key == "max_iters" || key == "iters") {
    config.max_iters = static_cast<std::size_t>(parse_integer(value, key));
    if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  } else if (key == "x0") {
    config.x0 = parse_real_list(value, key);
  } else if (key == "lambda") {
    apply_lambda_spec(config, value);
  } else if (key == "clamp_lambda") {
    if (value == "true" || value == "1") {
      config.clamp_lambda = true;
    } else if (value == "false" || value == "0") {
      config.clamp_lambda = false;
    } else {
      throw ConfigError("clamp_lambda must be true or false");
    }
  } else if (key == "seed") {
    config.seed = parse_integer(value, key);
  } else if (key == "out") {
    config.out = value;
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing output file '" + path + "'");
}

std::string opt_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

std::optional<double> parse_opt_cell(const std::string& cell, const std::string& what) {
  if (cell.empty()) return std::nullopt;
  return parse_real(cell, what);
}

}  // namespace

void validate(const ExperimentConfig& config) {
  if (!(config.dt0 > 0.0) || !std::isfinite(config.dt0)) {
    throw ConfigError("dt0 must be a positive real");
  }
  if (!(config.psi > 0.0 && config.psi < 1.0)) {
    throw ConfigError("psi must lie in (0,1)");
  }
  if (!(config.beta >= 0.0) || !std::isfinite(config.beta)) {
    throw ConfigError("beta must be a nonnegative real");
  }
  if (config.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (config.lambda_source == LambdaSource::Explicit && config.lambda_values.empty()) {
    throw ConfigError("explicit lambda requires at least one value");
  }
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string context = path + ":" + std::to_string(lineno);
    std::string body = line.substr(0, line.find('#'));
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(context + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(context + ": expected 'key = value'");
    }
    try {
      apply_key(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(context + ": " + e.what());
    }
  }
  validate(config);
  return config;
}

std::string render_csv(const std::vector<diagnostics::TraceRecord>& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& rec : trace) {
    out += std::to_string(rec.iter);
    out += ',';
    out += format_double(rec.f_raw);
    out += ',';
    out += format_double(rec.loss);
    out += ',';
    out += format_double(rec.grad_norm);
    out += ',';
    out += format_double(rec.dt_used);
    out += ',';
    out += opt_cell(rec.alpha);
    out += ',';
    out += opt_cell(rec.eta_min);
    out += ',';
    out += opt_cell(rec.eta_max);
    out += ',';
    out += opt_cell(rec.r_min);
    out += ',';
    out += opt_cell(rec.r_max);
    out += ',';
    out += opt_cell(rec.modified_energy);
    out += ',';
    out += opt_cell(rec.dissipation_margin);
    out += ',';
    out += rec.proposal_event;
    out += '\n';
  }
  return out;
}

std::vector<diagnostics::TraceRecord> parse_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  if (lines.empty() || lines[0] != kTraceHeader) {
    throw ConfigError("unexpected CSV header");
  }
  std::vector<diagnostics::TraceRecord> trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split(lines[i], ',');
    if (cells.size() != 13) {
      throw ConfigError("CSV row " + std::to_string(i) + ": expected 13 cells, got " +
                        std::to_string(cells.size()));
    }
    diagnostics::TraceRecord rec;
    rec.iter = static_cast<std::size_t>(parse_integer(cells[0], "iter"));
    rec.f_raw = parse_real(cells[1], "f_raw");
    rec.loss = parse_real(cells[2], "loss");
    rec.grad_norm = parse_real(cells[3], "grad_norm");
    rec.dt_used = parse_real(cells[4], "dt_used");
    rec.alpha = parse_opt_cell(cells[5], "alpha");
    rec.eta_min = parse_opt_cell(cells[6], "eta_min");
    rec.eta_max = parse_opt_cell(cells[7], "eta_max");
    rec.r_min = parse_opt_cell(cells[8], "r_min");
    rec.r_max = parse_opt_cell(cells[9], "r_max");
    rec.modified_energy = parse_opt_cell(cells[10], "modified_energy");
    rec.dissipation_margin = parse_opt_cell(cells[11], "dissipation_margin");
    rec.proposal_event = cells[12];
    trace.push_back(std::move(rec));
  }
  return trace;
}

std::string render_table_loss(double loss, RunStatus status) {
  if (status == RunStatus::NumericalFailure || !std::isfinite(loss)) return "NAN";
  // Positive results below the smallest positive normal double (including
  // exact zeros after underflow) are reported as a bound, not a digit string.
  if (loss < 2.2250738585072014e-308) return "<2.23e-308";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.4g", loss);
  return buf;
}

SplittingOperator build_splitting(const ExperimentConfig& config, const core::Objective& obj,
                                  const DenseVector& x0) {
  switch (config.lambda_source) {
    case LambdaSource::Zero:
      return SplittingOperator::zero();
    case LambdaSource::Explicit: {
      std::vector<double> values = config.lambda_values;
      if (values.size() == 1 && obj.dim > 1) values.assign(obj.dim, values[0]);
      return SplittingOperator::diagonal(DenseVector(std::move(values)), config.clamp_lambda);
    }
    case LambdaSource::HessianDiagonal: {
      // ersavl sources its uniform curvature bound inside the run loop.
      if (config.method == Method::ERSAVL) return SplittingOperator::zero();
      if (!obj.hessian_diagonal) {
        throw ConfigError("benchmark '" + obj.name + "' provides no Hessian diagonal");
      }
      return SplittingOperator::diagonal(obj.hessian_diagonal(x0), config.clamp_lambda);
    }
  }
  return SplittingOperator::zero();
}

RunResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const core::Objective obj = objectives::make_benchmark(config.benchmark);
  const DenseVector x0 = config.x0 ? DenseVector(*config.x0) : obj.default_x0;
  const SplittingOperator L = build_splitting(config, obj, x0);
  optimizers::StepController controller;
  controller.dt0 = config.dt0;
  controller.beta = config.beta;
  relaxation::RelaxationParams params;
  params.psi = config.psi;
  optimizers::StopRule stop;
  stop.max_iters = config.max_iters;
  return optimizers::run(config.method, obj, L, x0, controller, params, stop);
}

int cmd_run(const ExperimentConfig& config) {
  const RunResult result = run_experiment(config);
  write_output(config.out, render_csv(result.trace));
  if (result.status == RunStatus::NumericalFailure) {
    std::fprintf(stderr, "numerical failure: %s\n", result.failure_detail.c_str());
    return 1;
  }
  return 0;
}

std::vector<TableCell> table1_cells() {
  const Method methods[] = {Method::GD, Method::RSAV, Method::ESAV, Method::ERSAV,
                            Method::ERSAVL};
  const double dts[] = {0.1, 1.0, 10.0, 20.0, 30.0};
  std::vector<TableCell> cells;
  for (const Method method : methods) {
    for (const double dt : dts) {
      ExperimentConfig config;
      config.method = method;
      config.benchmark = "quadratic100";
      config.dt0 = dt;
      config.max_iters = 1000;
      const RunResult result = run_experiment(config);
      TableCell cell;
      cell.method = method;
      cell.dt = dt;
      cell.final_loss = result.trace.back().loss;
      cell.status = result.status;
      cell.rendered = render_table_loss(cell.final_loss, cell.status);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

int cmd_table1(const std::string& out_path) {
  const auto cells = table1_cells();
  const double dts[] = {0.1, 1.0, 10.0, 20.0, 30.0};

  std::string table;
  auto pad = [](std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
  };
  table += pad("method", 14);
  for (const double dt : dts) table += pad("dt=" + format_double(dt), 14);
  table += '\n';
  for (std::size_t m = 0; m < 5; ++m) {
    table += pad(optimizers::method_name(cells[m * 5].method), 14);
    for (std::size_t d = 0; d < 5; ++d) table += pad(cells[m * 5 + d].rendered, 14);
    table += '\n';
  }
  std::fwrite(table.data(), 1, table.size(), stdout);

  if (!out_path.empty()) {
    std::string csv = "method,dt,final_loss,rendered,status\n";
    for (const auto& cell : cells) {
      csv += optimizers::method_name(cell.method);
      csv += ',';
      csv += format_double(cell.dt);
      csv += ',';
      csv += format_double(cell.final_loss);
      csv += ',';
      csv += cell.rendered;
      csv += ',';
      csv += optimizers::run_status_name(cell.status);
      csv += '\n';
    }
    write_output(out_path, csv);
  }
  return 0;
}

RunResult rosenbrock_run(Method method, double dt, std::size_t iters, double beta) {
  ExperimentConfig config;
  config.method = method;
  config.benchmark = "rosenbrock";
  config.dt0 = dt;
  config.beta = beta;
  config.max_iters = iters;
  return run_experiment(config);
}

int cmd_rosenbrock(const std::string& out_dir) {
  const std::string dir = out_dir.empty() ? "." : out_dir;
  std::filesystem::create_directories(dir);
  const double dts[] = {3e-4, 1.5e-3};
  const Method methods[] = {Method::GD, Method::ESAV, Method::AERSAV};
  for (const double dt : dts) {
    const std::string dt_label = format_double(dt);
    for (const Method method : methods) {
      const RunResult result = rosenbrock_run(method, dt);
      const std::string tag = optimizers::method_name(method) + "_" + dt_label;

      std::string loss_txt;
      for (const auto& rec : result.trace) {
        loss_txt += std::to_string(rec.iter);
        loss_txt += ' ';
        loss_txt += format_double(rec.loss);
        loss_txt += '\n';
      }
      write_output(dir + "/rosenbrock_loss_" + tag + ".dat", loss_txt);

      std::string traj_txt;
      for (std::size_t i = 0; i < result.iterates.size(); ++i) {
        traj_txt += format_double(result.iterates[i][0]);
        traj_txt += ' ';
        traj_txt += format_double(result.iterates[i][1]);
        traj_txt += ' ';
        traj_txt += (i % 500 == 0) ? '1' : '0';
        traj_txt += '\n';
      }
      write_output(dir + "/rosenbrock_traj_" + tag + ".dat", traj_txt);

      if (method == Method::AERSAV) {
        const core::Objective obj = objectives::make_benchmark("rosenbrock");
        std::string energy_txt;
        for (const auto& rec : result.trace) {
          if (!rec.alpha) continue;
          const double original = rec.f_raw + obj.shift;
          const double modified = (*rec.alpha) * (*rec.alpha) * original;
          energy_txt += std::to_string(rec.iter);
          energy_txt += ' ';
          energy_txt += format_double(original);
          energy_txt += ' ';
          energy_txt += format_double(modified);
          energy_txt += '\n';
        }
        write_output(dir + "/rosenbrock_energy_aersav_" + dt_label + ".dat", energy_txt);
      }
      std::printf("%s: %s at dt=%s, final loss %s\n", tag.c_str(),
                  optimizers::run_status_name(result.status).c_str(), dt_label.c_str(),
                  format_double(result.trace.back().loss).c_str());
    }
  }
  return 0;
}

RateRow superlinear_sweep_one(const core::Objective& obj, double start,
                              std::size_t max_iters) {
  if (obj.dim != 1) throw ConfigError("superlinear sweep needs a univariate benchmark");
  if (!obj.optimum_x) throw ConfigError("superlinear sweep needs a known optimum");
  if (!obj.domain.empty() &&
      (start < obj.domain[0].first || start > obj.domain[0].second)) {
    throw ConfigError("start " + format_double(start) + " lies outside the domain of " +
                      obj.name);
  }
  optimizers::StepController controller;
  relaxation::RelaxationParams params;
  optimizers::StopRule stop;
  stop.max_iters = max_iters;
  const RunResult result =
      optimizers::run(Method::Superlinear, obj, SplittingOperator::zero(),
                      DenseVector(std::vector<double>{start}), controller, params, stop);
  const double x_star = (*obj.optimum_x)[0];
  RateRow row;
  row.benchmark = obj.name;
  row.start = start;
  for (const auto& x : result.iterates) {
    const double eps = std::abs(x[0] - x_star);
    row.epsilons.push_back(eps);
    if (eps <= 1e-12) break;
  }
  row.estimate = diagnostics::estimate_rate(row.epsilons);
  return row;
}

int cmd_superlinear(const std::optional<std::vector<double>>& starts,
                    const std::string& out_path) {
  struct Grid {
    const char* benchmark;
    std::vector<double> defaults;
  };
  const Grid grids[] = {{"cubic1d", {10.5, 11.0, 12.0, 15.0}},
                        {"sine1d", {-0.2, 0.0, 0.3, 0.8}}};
  std::string csv = "benchmark,start,n,epsilon,q\n";
  for (const auto& grid : grids) {
    const core::Objective obj = objectives::make_benchmark(grid.benchmark);
    std::vector<double> points;
    if (starts) {
      for (const double s : *starts) {
        if (s >= obj.domain[0].first && s <= obj.domain[0].second) points.push_back(s);
      }
      if (points.empty()) {
        throw ConfigError("no provided start lies inside the domain of " +
                          std::string(grid.benchmark));
      }
    } else {
      points = grid.defaults;
    }
    for (const double start : points) {
      const RateRow row = superlinear_sweep_one(obj, start);
      for (std::size_t n = 0; n < row.epsilons.size(); ++n) {
        csv += grid.benchmark;
        csv += ',';
        csv += format_double(start);
        csv += ',';
        csv += std::to_string(n);
        csv += ',';
        csv += format_double(row.epsilons[n]);
        csv += ',';
        if (n >= 2 && n - 2 < row.estimate.q_values.size() &&
            row.estimate.q_values[n - 2]) {
          csv += format_double(*row.estimate.q_values[n - 2]);
        }
        csv += '\n';
      }
    }
  }
  write_output(out_path, csv);
  return 0;
}

namespace {

struct CheckContext {
  int failures = 0;
  void report(const char* name, bool ok, const std::string& detail = {}) {
    if (ok) {
      std::printf("ok   %s\n", name);
    } else {
      ++failures;
      std::printf("FAIL %s%s%s\n", name, detail.empty() ? "" : ": ", detail.c_str());
    }
  }
};

void check_relaxation_randomized(CheckContext& ctx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_mag(std::log(1e-6), std::log(1e3));
  std::uniform_real_distribution<double> log_dt(std::log(1e-4), std::log(50.0));
  std::uniform_real_distribution<double> unit(-10.0, 10.0);
  relaxation::RelaxationParams params;
  std::string detail;
  bool ok = true;
  for (int i = 0; i < 10000 && ok; ++i) {
    const double r_tilde = std::exp(log_mag(rng));
    const double s = std::exp(log_mag(rng));
    const double dx = unit(rng);
    const double dt = std::exp(log_dt(rng));
    const auto rel = relaxation::solve_eta(r_tilde, s, dx, dt, params);
    // Feasibility: r_new may exceed r_tilde only by the released share of the
    // step's dissipation, (psi / dt) dx^2 in squared-energy terms.
    const double budget = params.psi / dt * dx * dx;
    const double scale = std::max(1.0, s * s);
    const double r_new = rel.eta * r_tilde + (1.0 - rel.eta) * s;
    const double slack = r_new * r_new - r_tilde * r_tilde - budget;
    if (!(rel.eta >= 0.0 && rel.eta <= 1.0)) {
      ok = false;
      detail = "eta outside [0,1] at sample " + std::to_string(i);
    } else if (slack > 1e-9 * scale) {
      ok = false;
      detail = "infeasible relaxation at sample " + std::to_string(i) +
               " (slack " + format_double(slack) + ")";
    } else if (rel.eta > 1e-6) {
      const double eta_less = rel.eta - 1e-4;
      const double r_less = eta_less * r_tilde + (1.0 - eta_less) * s;
      const double slack_less = r_less * r_less - r_tilde * r_tilde - budget;
      if (slack_less < -1e-9 * scale) {
        // A strictly feasible smaller eta would contradict minimality.
        ok = false;
        detail = "non-minimal eta at sample " + std::to_string(i);
      }
    }
  }
  ctx.report("relaxation_feasibility_minimality", ok, detail);
}

void check_element_dissipation(CheckContext& ctx, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> log_dt(std::log(1e-4), std::log(50.0));
  relaxation::RelaxationParams params;
  bool ok = true;
  std::string detail;
  for (const char* name : {"quadratic100", "rosenbrock"}) {
    const core::Objective obj = objectives::make_benchmark(name);
    for (const Method method : {Method::ESAV, Method::ERSAV}) {
      for (int trial = 0; trial < 5 && ok; ++trial) {
        const double dt = std::exp(log_dt(rng));
        auto st = core::make_element_state(obj, obj.default_x0);
        for (int step = 0; step < 100 && ok; ++step) {
          const optimizers::StepOutcome out =
              method == Method::ESAV
                  ? optimizers::esav_step(st, obj, SplittingOperator::zero(), dt)
                  : optimizers::ersav_step(st, obj, SplittingOperator::zero(), dt, params);
          for (std::size_t i = 0; i < obj.dim; ++i) {
            const double dxi = out.x_next[i] - st.x[i];
            const double lhs = out.r_next[i] * out.r_next[i] - st.r[i] * st.r[i];
            const double bound = method == Method::ESAV
                                     ? -(dxi * dxi) / dt
                                     : -(1.0 - params.psi) / dt * (dxi * dxi);
            if (lhs > bound + 1e-9) {
              ok = false;
              detail = std::string(name) + " " + optimizers::method_name(method) +
                       " coordinate " + std::to_string(i) + " at dt " + format_double(dt);
              break;
            }
          }
          st.x = out.x_next;
          st.r = out.r_next;
          st.iter += 1;
          st.dt_current = out.dt_used;
        }
      }
    }
  }
  ctx.report("element_dissipation", ok, detail);
}

void check_bitwise_univariate(CheckContext& ctx) {
  bool ok = true;
  std::string detail;
  relaxation::RelaxationParams params;
  for (const char* name : {"cubic1d", "sine1d"}) {
    const core::Objective obj = objectives::make_benchmark(name);
    for (const double dt : {0.01, 2.0}) {
      auto es = core::make_element_state(obj, obj.default_x0);
      auto ss = core::make_scalar_state(obj, obj.default_x0);
      for (int step = 0; step < 50 && ok; ++step) {
        const auto eo = optimizers::ersav_step(es, obj, SplittingOperator::zero(), dt, params);
        const auto so = optimizers::rsav_step(ss, obj, SplittingOperator::zero(), dt, params);
        const double ex = eo.x_next[0];
        const double sx = so.x_next[0];
        const double er = eo.r_next[0];
        const double sr = so.r_next[0];
        if (std::memcmp(&ex, &sx, sizeof(double)) != 0 ||
            std::memcmp(&er, &sr, sizeof(double)) != 0) {
          ok = false;
          detail = std::string(name) + " diverged bitwise at step " + std::to_string(step) +
                   ", dt " + format_double(dt);
        }
        es.x = eo.x_next;
        es.r = eo.r_next;
        es.iter += 1;
        ss.x = so.x_next;
        ss.r = so.r_next[0];
        ss.iter += 1;
      }
    }
  }
  ctx.report("univariate_scalar_element_bitwise", ok, detail);
}

void check_rate_reference(CheckContext& ctx) {
  // Known-good error sequences with independently computed rates.
  const std::vector<double> seq_a = {0.4931, 0.1604, 0.0098, 7.54e-5, 3.69e-8, 1.39e-13};
  const std::vector<double> ref_a = {2.4921, 1.7382, 1.5673, 1.6385};
  const std::vector<double> seq_b = {0.1096, 0.0201, 0.0016, 2.70e-5, 3.72e-8, 8.68e-13};
  const std::vector<double> ref_b = {1.4949, 1.6101, 1.6140, 1.6192};
  bool ok = true;
  std::string detail;
  for (const auto& [seq, ref] : {std::pair{seq_a, ref_a}, std::pair{seq_b, ref_b}}) {
    const auto est = diagnostics::estimate_rate(seq);
    if (est.q_values.size() != ref.size()) {
      ok = false;
      detail = "rate count mismatch";
      break;
    }
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (!est.q_values[i] || std::abs(*est.q_values[i] - ref[i]) > 0.01) {
        ok = false;
        detail = "q[" + std::to_string(i) + "] = " +
                 (est.q_values[i] ? format_double(*est.q_values[i]) : "absent") +
                 " vs reference " + format_double(ref[i]);
        break;
      }
    }
    if (!ok) break;
  }
  ctx.report("rate_estimator_reference_columns", ok, detail);
}

void check_gradients(CheckContext& ctx, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xda3e39cb94b95bdbull);
  bool ok = true;
  std::string detail;
  for (const std::string& name : objectives::benchmark_names()) {
    const core::Objective obj = objectives::make_benchmark(name);
    for (int trial = 0; trial < 100 && ok; ++trial) {
      std::vector<double> point(obj.dim);
      for (std::size_t i = 0; i < obj.dim; ++i) {
        const auto& box = obj.domain[i];
        std::uniform_real_distribution<double> coord(box.first, box.second);
        point[i] = coord(rng);
      }
      const DenseVector x(point);
      const DenseVector an = obj.gradient(x);
      const DenseVector fd = core::finite_diff_gradient(obj, x, 1e-6);
      for (std::size_t i = 0; i < obj.dim; ++i) {
        if (std::abs(fd[i] - an[i]) > 1e-6 * std::max(1.0, std::abs(an[i]))) {
          ok = false;
          detail = name + " coordinate " + std::to_string(i) + ": analytic " +
                   format_double(an[i]) + " vs finite difference " + format_double(fd[i]);
          break;
        }
      }
    }
  }
  ctx.report("benchmark_gradients_finite_difference", ok, detail);
}

void check_csv_roundtrip(CheckContext& ctx) {
  ExperimentConfig config;
  config.max_iters = 20;
  const RunResult result = run_experiment(config);
  const std::string once = render_csv(result.trace);
  bool ok = true;
  std::string detail;
  try {
    const std::string twice = render_csv(parse_csv(once));
    if (once != twice) {
      ok = false;
      detail = "re-rendered CSV differs";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  ctx.report("csv_round_trip", ok, detail);
}

void check_fresh_alpha(CheckContext& ctx) {
  const core::Objective obj = objectives::make_benchmark("quadratic100");
  const auto st = core::make_element_state(obj, obj.default_x0);
  const double alpha = optimizers::indicator_alpha(st, core::shifted_value(obj, st.x));
  ctx.report("fresh_state_alpha_exactly_one", alpha == 1.0,
             alpha == 1.0 ? "" : format_double(alpha));
}

}  // namespace

int cmd_check(std::uint64_t seed) {
  CheckContext ctx;
  check_relaxation_randomized(ctx, seed);
  check_element_dissipation(ctx, seed);
  check_bitwise_univariate(ctx);
  check_rate_reference(ctx);
  check_gradients(ctx, seed);
  check_csv_roundtrip(ctx);
  check_fresh_alpha(ctx);
  if (ctx.failures > 0) {
    std::printf("%d check(s) failed\n", ctx.failures);
    return 1;
  }
  std::printf("all checks passed\n");
  return 0;
}

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"energy-stable auxiliary-variable gradient descent benchmark"};
  app.require_subcommand(1);

  std::string method_s, benchmark_s, x0_s, lambda_s, config_path, out_path;
  double dt = 0.0, psi = 0.0, beta = 0.0;
  std::uint64_t iters = 0, seed = 12345;
  bool clamp = false;

  auto* run_cmd = app.add_subcommand("run", "run one experiment, emit the CSV trace");
  auto* opt_method = run_cmd->add_option(
      "--method", method_s, "gd|sav|rsav|esav|ersav|ersavl|superlinear|aersav");
  auto* opt_benchmark =
      run_cmd->add_option("--benchmark", benchmark_s, "quadratic100|rosenbrock|cubic1d|sine1d");
  auto* opt_dt = run_cmd->add_option("--dt", dt, "step size");
  auto* opt_psi = run_cmd->add_option("--psi", psi, "relaxation strength in (0,1)");
  auto* opt_beta = run_cmd->add_option("--beta", beta, "adaptivity gate threshold");
  auto* opt_iters = run_cmd->add_option("--iters", iters, "maximum iterations");
  auto* opt_x0 = run_cmd->add_option("--x0", x0_s, "comma-separated starting point");
  auto* opt_lambda = run_cmd->add_option(
      "--lambda", lambda_s, "zero | hessian | comma-separated diagonal (scalar broadcasts)");
  auto* opt_config = run_cmd->add_option("--config", config_path, "key = value config file");
  auto* opt_out = run_cmd->add_option("--out", out_path, "output path (default stdout)");
  auto* opt_clamp =
      run_cmd->add_flag("--clamp-lambda", clamp, "clamp negative lambda entries to zero");

  auto* table_cmd = app.add_subcommand("table1", "step-size robustness table on quadratic100");
  std::string table_out;
  table_cmd->add_option("--out", table_out, "also write the cells as CSV");

  auto* rosen_cmd = app.add_subcommand("rosenbrock", "valley benchmark traces and trajectories");
  std::string rosen_out;
  rosen_cmd->add_option("--out", rosen_out, "output directory (default .)");

  auto* super_cmd = app.add_subcommand("superlinear", "univariate convergence-rate table");
  std::string starts_s, super_out;
  auto* opt_starts =
      super_cmd->add_option("--starts", starts_s, "comma-separated starting points");
  super_cmd->add_option("--out", super_out, "output CSV path (default stdout)");

  auto* check_cmd = app.add_subcommand("check", "run the invariant suite, nonzero on violation");
  check_cmd->add_option("--seed", seed, "seed for the randomized sweeps");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) {
      ExperimentConfig config;
      if (*opt_config) config = parse_config_file(config_path);
      if (*opt_method) config.method = optimizers::method_from_string(method_s);
      if (*opt_benchmark) config.benchmark = benchmark_s;
      if (*opt_dt) config.dt0 = dt;
      if (*opt_psi) config.psi = psi;
      if (*opt_beta) config.beta = beta;
      if (*opt_iters) config.max_iters = static_cast<std::size_t>(iters);
      if (*opt_x0) config.x0 = parse_real_list(x0_s, "--x0");
      if (*opt_lambda) apply_lambda_spec(config, lambda_s);
      if (*opt_clamp) config.clamp_lambda = true;
      if (*opt_out) config.out = out_path;
      validate(config);
      return cmd_run(config);
    }
    if (table_cmd->parsed()) return cmd_table1(table_out);
    if (rosen_cmd->parsed()) return cmd_rosenbrock(rosen_out);
    if (super_cmd->parsed()) {
      std::optional<std::vector<double>> starts;
      if (*opt_starts) starts = parse_real_list(starts_s, "--starts");
      return cmd_superlinear(starts, super_out);
    }
    if (check_cmd->parsed()) return cmd_check(seed);
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const InsufficientData& e) {
    std::fprintf(stderr, "insufficient data: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace ersav::cli
