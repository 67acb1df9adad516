// osclab: command-line front end for the oscillation library.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "osclab/errors.hpp"
#include "osclab/fault.hpp"
#include "osclab/function_catalog.hpp"
#include "osclab/oscillation.hpp"
#include "osclab/verification.hpp"
#include "osclab/weak_norm.hpp"

namespace fs = std::filesystem;
using namespace osclab;

namespace {

constexpr int kUsageError = 2;

struct Options {
  std::uint64_t seed = 0x5eed;
  unsigned threads = 0;
  std::string out_dir = ".";
  std::string fault = "none";

  // catalog
  std::vector<std::string> filters;

  // oscillation / curve
  std::string function_id;
  int d = 0;
  double p = 2.0;
  double q = 1.0;
  bool pair = false;
  std::vector<double> a;
  double r = 1.0;
  int nodes = 0;

  std::optional<double> kappa_min;
  std::optional<double> kappa_max;
  double kappa_ratio = std::pow(10.0, 0.25);
  std::string omega;
  std::optional<double> r_max;
  std::optional<double> r_min;
  int samples = 4096;

  // verify
  std::vector<std::string> verify_ids;
  double effort = 1.0;
};

double parse_number(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw CLI::ValidationError("not a number: " + s);
  return v;
}

// "lo:hi" for every axis, or "lo:hi,lo:hi,..." per axis.
Box parse_omega(const std::string& text, int d) {
  std::vector<std::pair<double, double>> axes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--omega: expected lo:hi, got " + item);
    axes.emplace_back(parse_number(item.substr(0, colon)), parse_number(item.substr(colon + 1)));
  }
  if (axes.size() == 1) axes.resize(static_cast<std::size_t>(d), axes.front());
  if (static_cast<int>(axes.size()) != d)
    throw CLI::ValidationError("--omega: expected 1 or " + std::to_string(d) + " axes");
  Box box;
  for (const auto& [lo, hi] : axes) {
    box.lo.push_back(lo);
    box.hi.push_back(hi);
  }
  box.validate();
  return box;
}

TestFunction resolve_function(const Options& o) {
  if (o.function_id.empty()) throw CLI::ValidationError("--function is required");
  TestFunction f = parse_function_id(o.function_id);
  if (o.d != 0 && o.d != f.dim())
    throw CLI::ValidationError("--d does not match the dimension of " + o.function_id);
  return f;
}

QuadratureSpec resolve_spec(const Options& o, int d) {
  if (d == 1 && o.nodes == 0) return QuadratureSpec::gauss(8);
  return QuadratureSpec::monte_carlo(o.nodes == 0 ? 1024 : o.nodes, o.seed);
}

std::string fmt_value(const EstimatedValue& v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.15g +- %.3g", v.value, v.std_error);
  return buf;
}

nlohmann::json box_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

nlohmann::json optional_json(std::optional<double> v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

int cmd_catalog(const Options& o) {
  std::optional<int> want_dim;
  std::optional<std::string> want_tag;
  for (const std::string& filter : o.filters) {
    const auto eq = filter.find('=');
    const std::string key = filter.substr(0, eq);
    if (eq == std::string::npos) throw CLI::ValidationError("--filter: expected key=value");
    const std::string value = filter.substr(eq + 1);
    if (key == "d")
      want_dim = static_cast<int>(parse_number(value));
    else if (key == "tag")
      want_tag = value;
    else
      throw CLI::ValidationError("--filter: unknown key '" + key + "' (known: d, tag)");
  }
  for (const std::string& id : default_catalog_ids()) {
    const TestFunction f = parse_function_id(id);
    if (want_dim && f.dim() != *want_dim) continue;
    if (want_tag && to_string(f.smoothness()) != *want_tag) continue;
    std::printf("%-32s d=%d tag=%s", id.c_str(), f.dim(), to_string(f.smoothness()).c_str());
    if (f.grad_lipschitz()) std::printf(" grad_lipschitz=%.6g", *f.grad_lipschitz());
    if (f.support_radius()) std::printf(" support_radius=%.6g", *f.support_radius());
    std::printf(" gradient=%s\n", f.differentiable() ? "yes" : "no");
  }
  return 0;
}

int cmd_oscillation(const Options& o) {
  const TestFunction f = resolve_function(o);
  std::vector<double> a = o.a;
  if (a.empty()) a.assign(static_cast<std::size_t>(f.dim()), 0.0);
  if (static_cast<int>(a.size()) != f.dim())
    throw CLI::ValidationError("--a needs " + std::to_string(f.dim()) + " coordinates");
  if (!(o.r > 0.0)) throw CLI::ValidationError("--r must be positive");
  const BallSample ball{a, o.r};
  const QuadratureSpec spec = resolve_spec(o, f.dim());
  const EstimatedValue v = o.pair ? pair_oscillation(f, ball, o.q, spec)
                                  : q_oscillation(f, ball, o.q, spec);
  std::cout << fmt_value(v) << '\n';
  return 0;
}

int cmd_curve(const Options& o) {
  const TestFunction f = resolve_function(o);
  const int d = f.dim();
  Domain domain = Domain::default_for(f);
  if (!o.omega.empty()) {
    domain.omega = parse_omega(o.omega, d);
    domain.r_max = 10.0 * (domain.omega.diameter() + f.support_radius().value_or(0.0));
  }
  if (o.r_max) domain.r_max = *o.r_max;
  if (o.r_min) domain.r_min = *o.r_min;
  domain.validate();

  std::vector<double> grid = default_kappa_grid(f, domain);
  if (o.kappa_min || o.kappa_max || o.kappa_ratio != std::pow(10.0, 0.25))
    grid = geometric_kappa_grid(o.kappa_max.value_or(grid.front()),
                                o.kappa_min.value_or(grid.back()), o.kappa_ratio);

  const QuadratureSpec spec = resolve_spec(o, d);
  CurveOptions curve_options;
  curve_options.a_samples = o.samples;
  curve_options.threads = o.threads;
  CurveOptions seeded = curve_options;
  QuadratureSpec seeded_spec = spec;
  seeded_spec.seed = o.seed;
  const DistributionCurve curve = distribution_curve(f, o.p, grid, domain, seeded_spec, seeded);
  const SupEstimate sup = weak_sup(curve);
  const LimitEstimate limit = limit_extrapolate(curve);
  const std::optional<double> reference = reference_limit(f, o.p, domain);

  fs::create_directories(o.out_dir);
  const fs::path csv_path = fs::path(o.out_dir) / "curve.csv";
  const fs::path json_path = fs::path(o.out_dir) / "summary.json";
  {
    std::ofstream csv(csv_path);
    if (!csv) throw Error("cannot write " + csv_path.string());
    write_curve_csv(csv, curve);
  }

  nlohmann::json summary;
  summary["function_id"] = f.id();
  summary["d"] = d;
  summary["p"] = o.p;
  summary["domain"] = {{"omega", box_json(domain.omega)},
                       {"r_min", domain.r_min},
                       {"r_max", domain.r_max}};
  summary["sup_estimate"] = sup.value;
  summary["sup_kappa"] = sup.argmax_kappa;
  summary["limit_estimate"] = limit.converged ? nlohmann::json(limit.value) : nlohmann::json(nullptr);
  summary["limit_uncertainty"] =
      limit.converged ? nlohmann::json(limit.uncertainty) : nlohmann::json(nullptr);
  summary["limit_alpha"] = limit.converged ? nlohmann::json(limit.alpha) : nlohmann::json(nullptr);
  summary["limit_converged"] = limit.converged;
  if (!limit.converged) summary["limit_diagnostic"] = limit.diagnostic;
  summary["reference_value"] = optional_json(reference);
  summary["ambiguity"] = curve.ambiguity;
  summary["seeds"] = {{"master", o.seed}, {"quadrature", seeded_spec.seed}};
  summary["csv_schema"] = kCurveCsvSchema;
  summary["config"] = {{"function", o.function_id},
                       {"p", o.p},
                       {"kappa_grid", grid},
                       {"omega", box_json(domain.omega)},
                       {"r_min", domain.r_min},
                       {"r_max", domain.r_max},
                       {"samples", curve.a_samples},
                       {"quadrature",
                        {{"method", spec.method == QuadratureMethod::gauss_1d ? "gauss_1d" : "monte_carlo"},
                         {"node_count", spec.node_count}}},
                       {"seed", o.seed},
                       {"fault_inject", o.fault}};
  {
    std::ofstream js(json_path);
    if (!js) throw Error("cannot write " + json_path.string());
    js << summary.dump(2) << '\n';
  }
  std::cout << csv_path.string() << '\n' << json_path.string() << '\n';
  if (limit.converged)
    std::printf("limit %.8g +- %.3g", limit.value, limit.uncertainty);
  else
    std::printf("limit not converged: %s", limit.diagnostic.c_str());
  if (reference) std::printf(" (reference %.8g)", *reference);
  std::printf("\n");
  return 0;
}

int cmd_verify(const Options& o) {
  RunConfig config;
  if (!o.verify_ids.empty()) config.function_ids = o.verify_ids;
  config.seed = o.seed;
  config.threads = o.threads;
  config.effort = o.effort;
  const AggregateReport report = run_all(config);

  nlohmann::json j = to_json(report);
  j["config"] = {{"functions", config.function_ids},
                 {"seed", config.seed},
                 {"effort", config.effort},
                 {"fault_inject", o.fault}};
  fs::create_directories(o.out_dir);
  const fs::path path = fs::path(o.out_dir) / "report.json";
  {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
  }
  for (const VerificationReport& suite : report.suites) {
    const ReportSummary s = suite.summary();
    std::printf("%-4s %-56s pass=%d fail=%d inconclusive=%d%s%s\n",
                suite.passed() ? "ok" : "FAIL", suite.suite_name.c_str(), s.passed, s.failed,
                s.inconclusive, suite.error.empty() ? "" : " error: ", suite.error.c_str());
  }
  const ReportSummary s = report.summary();
  std::printf("total: %d passed, %d failed, %d inconclusive; report %s\n", s.passed, s.failed,
              s.inconclusive, path.string().c_str());
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean oscillation and weak-L^p superlevel statistics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI config file ([section] per subcommand, key = value)");
  Options o;

  app.add_option("--seed", o.seed, "master seed")->envname("OSCLAB_SEED");
  app.add_option("--threads", o.threads, "worker threads (0: all cores)");
  app.add_option("--out-dir", o.out_dir, "directory for output files");
  app.add_option("--fault-inject", o.fault, "corrupt a constant: c_d_prime, weight_exponent, local_constant")
      ->check(CLI::IsMember({"none", "c_d_prime", "weight_exponent", "local_constant"}));

  auto* catalog = app.add_subcommand("catalog", "list catalog functions");
  catalog->add_option("--filter", o.filters, "key=value (keys: d, tag)");

  auto add_function = [&](CLI::App* sub) {
    sub->add_option("--function", o.function_id, "catalog identifier")->required();
    sub->add_option("--d", o.d, "expected dimension");
    sub->add_option("--nodes", o.nodes, "Monte-Carlo nodes per ball (0: split Gauss in d = 1)");
  };

  auto* osc = app.add_subcommand("oscillation", "evaluate m_f on one ball");
  add_function(osc);
  osc->add_option("--a", o.a, "center coordinates")->delimiter(',');
  osc->add_option("--r", o.r, "radius");
  osc->add_option("--q", o.q, "inner exponent (>= 1)");
  osc->add_flag("--pair", o.pair, "pairwise variant");

  auto* curve = app.add_subcommand("curve", "distribution curve and its kappa -> 0 limit");
  add_function(curve);
  curve->add_option("--p", o.p, "exponent (>= 1)");
  curve->add_option("--kappa-min", o.kappa_min);
  curve->add_option("--kappa-max", o.kappa_max);
  curve->add_option("--kappa-ratio", o.kappa_ratio);
  curve->add_option("--omega", o.omega, "box: lo:hi or lo:hi,lo:hi,...");
  curve->add_option("--r-max", o.r_max);
  curve->add_option("--r-min", o.r_min);
  curve->add_option("--samples", o.samples, "centers drawn from omega");

  auto* verify = app.add_subcommand("verify", "run the verification suites");
  verify->add_option("--function", o.verify_ids, "restrict to these catalog identifiers");
  verify->add_option("--effort", o.effort, "scale factor for sample counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    const ScopedFault fault(parse_fault(o.fault));
    if (*catalog) return cmd_catalog(o);
    if (*osc) return cmd_oscillation(o);
    if (*curve) return cmd_curve(o);
    if (*verify) return cmd_verify(o);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}
