// Acceptance driver: `acceptance --criterion N` prints one PASS/FAIL line and
// exits 0 on PASS.

#include <sys/wait.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "osclab/fault.hpp"
#include "osclab/function_catalog.hpp"
#include "osclab/oscillation.hpp"
#include "osclab/verification.hpp"
#include "osclab/weak_norm.hpp"

using namespace osclab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string summarize(const VerificationReport& r) {
  const ReportSummary s = r.summary();
  std::string out = fmt("%s pass=%d fail=%d inconclusive=%d", r.suite_name.c_str(), s.passed,
                        s.failed, s.inconclusive);
  if (!r.error.empty()) out += " error=" + r.error;
  return out;
}

Outcome constants() {
  const double e1 = std::abs(c_d_prime(1) - 0.5);
  const double e3 = std::abs(c_d_prime(3) - 0.375);
  const double e12 = std::abs(c_dp(1, 2.0) - 0.125);
  return {e1 <= 1e-12 && e3 <= 1e-12 && e12 <= 1e-12,
          fmt("errors c'_1=%.3g c'_3=%.3g c_12=%.3g", e1, e3, e12)};
}

Outcome linear_exactness() {
  Outcome o{true, ""};
  {
    const TestFunction f = make_linear(1, {-2.5});
    for (double r : {1e-3, 0.3, 7.0}) {
      const double m = mean_oscillation(f, {{0.4}, r}, QuadratureSpec::gauss(8)).value;
      const double exact = 0.5 * r * 2.5;
      const double rel = std::abs(m - exact) / exact;
      o.pass = o.pass && rel <= 1e-10;
      o.detail += fmt("d=1 r=%g rel=%.2g; ", r, rel);
    }
  }
  const std::vector<std::vector<double>> vs{{3.0, 4.0}, {1.0, 2.0, 2.0}};
  for (const auto& v : vs) {
    const int d = static_cast<int>(v.size());
    const TestFunction f = make_linear(d, v);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    const double r = 0.25;
    const auto est = mean_oscillation(f, {std::vector<double>(v.size(), 0.3), r},
                                      QuadratureSpec::monte_carlo(1000000, 2024 + d));
    const double exact = c_d_prime(d) * r * norm;
    const double dev = std::abs(est.value - exact);
    const double rel_se = est.std_error / est.value;
    o.pass = o.pass && dev <= 3.0 * est.std_error && rel_se <= 1e-3;
    o.detail += fmt("d=%d dev/se=%.2f se/value=%.2g; ", d, dev / est.std_error, rel_se);
  }
  return o;
}

Outcome linear_distribution() {
  Outcome o{true, ""};
  const std::vector<TestFunction> fs{make_linear(1, {1.0}), make_linear(2, {1.0, 0.0})};
  for (const TestFunction& f : fs) {
    const int d = f.dim();
    for (double p : {1.5, 2.0, 3.0}) {
      CurveOptions curve;
      curve.a_samples = d == 1 ? 16 : 64;
      const auto spec = d == 1 ? QuadratureSpec::gauss(8) : QuadratureSpec::monte_carlo(8192, 31);
      const auto r = check_linear_distribution(f, p, spec, curve);
      o.pass = o.pass && r.passed();
      o.detail += summarize(r) + "; ";
    }
  }
  return o;
}

// ||grad f||_2^2 for the radial plateau bump, from adaptive quadrature of the
// radial profile.
double gradient_l2_squared(const TestFunction& f, int d) {
  auto g2 = [&](double rho) {
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    x[0] = rho;
    const double g = f.grad_norm(x);
    return g * g;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (d == 1) return 2.0 * GK::integrate(g2, 0.0, 1.0, 15, 1e-14);
  return GK::integrate([&](double rho) { return 2.0 * M_PI * rho * g2(rho); }, 0.0, 1.0, 15, 1e-14);
}

Outcome limit_theorem() {
  Outcome o{true, ""};
  struct Run {
    int d;
    int samples;
    double tol;
    QuadratureSpec spec;
  };
  const std::vector<Run> runs{{1, 2048, 0.05, QuadratureSpec::gauss(8)},
                              {2, 4096, 0.10, QuadratureSpec::monte_carlo(1024, 7)}};
  for (const Run& run : runs) {
    const TestFunction f = make_plateau_bump(run.d, 1.0, 0.5, 1.0);
    const Domain dom = Domain::default_for(f);
    const double reference = c_dp(run.d, 2.0) * gradient_l2_squared(f, run.d);
    CurveOptions curve;
    curve.a_samples = run.samples;
    const auto c = distribution_curve(f, 2.0, default_kappa_grid(f, dom), dom, run.spec, curve);
    const auto lim = limit_extrapolate(c);
    const double rel = std::abs(lim.value - reference) / reference;
    const bool ok = lim.converged && rel <= run.tol;
    o.pass = o.pass && ok;
    if (lim.converged)
      o.detail += fmt("d=%d limit=%.6g+-%.2g reference=%.6g rel=%.3g; ", run.d, lim.value,
                      lim.uncertainty, reference, rel);
    else
      o.detail += fmt("d=%d not converged (%s); ", run.d, lim.diagnostic.c_str());
  }
  return o;
}

Outcome local_expansion() {
  Outcome o{true, ""};
  for (int d : {1, 2}) {
    const TestFunction f = make_plateau_bump(d, 1.0, 0.5, 1.0);
    SuiteOptions literal;
    literal.family_alpha = 0.0;
    const auto r =
        check_local_expansion(f, 200, 0.05, default_spec_for(d, 1 << 16, 11), literal);
    const ReportSummary s = r.summary();
    o.pass = o.pass && r.error.empty() && s.failed == 0 && s.inconclusive == 0;
    o.detail += summarize(r) + "; ";
  }
  return o;
}

Outcome mollification() {
  Outcome o{true, ""};
  const std::vector<TestFunction> fs{make_linear(1, {1.0}), make_plateau_bump(1, 1.0, 0.5, 1.0),
                                     make_ball_indicator(1, 0.5)};
  for (const TestFunction& f : fs) {
    for (double t : {0.05, 0.2}) {
      const auto r = check_mollification(f, Mollifier{1, t}, 50, QuadratureSpec::gauss(8));
      const ReportSummary s = r.summary();
      o.pass = o.pass && r.error.empty() && s.failed == 0 && s.inconclusive <= 0.05 * s.total();
      o.detail += summarize(r) + fmt(" t=%g; ", t);
    }
  }
  return o;
}

Outcome q_sandwich() {
  std::vector<TestFunction> fs;
  for (const auto& id : default_catalog_ids()) fs.push_back(parse_function_id(id));
  SuiteOptions literal;
  literal.family_alpha = 0.0;
  const auto r = check_q_sandwich(fs, 100, literal);
  return {r.error.empty() && r.summary().failed == 0, summarize(r)};
}

Outcome tail_bounds() {
  Outcome o{true, ""};
  for (const auto& id : default_catalog_ids()) {
    const TestFunction f = parse_function_id(id);
    if (!f.support_radius()) continue;
    const auto r = check_tail_bounds(f, 50, default_spec_for(f.dim(), 4096, 3));
    o.pass = o.pass && r.passed();
    o.detail += summarize(r) + "; ";
  }
  return o;
}

Outcome bv_divergence() {
  const double R = 0.5;
  Domain dom;
  dom.omega = Box::cube(1, -2.0 * R, 2.0 * R);
  dom.r_min = 1e-4 * R;
  dom.r_max = 10.0 * (dom.omega.diameter() + R);
  const auto r =
      check_bv_divergence(R, geometric_kappa_grid(0.1, 1e-4, std::pow(10.0, 0.25)), dom);
  std::string detail = summarize(r);
  for (const auto& c : r.cases)
    detail += fmt("; [%s] margin=%.4g tol=%.4g %s", c.inputs.c_str(), c.measured_margin,
                  c.tolerance, to_string(c.verdict).c_str());
  return {r.passed(), detail};
}

Outcome mutation_sensitivity() {
  RunConfig cfg;
  cfg.function_ids = {"linear:d=1:v=1", "linear:d=2:v=1,0", "plateau:d=1:a=1:ri=0.5:ro=1"};
  cfg.effort = 0.25;
  auto failing = [&](Fault fault) {
    ScopedFault guard(fault);
    int n = 0;
    for (const auto& s : run_all(cfg).suites)
      if (!s.passed()) ++n;
    return n;
  };
  const int clean = failing(Fault::none);
  const int cd = failing(Fault::c_d_prime);
  const int weight = failing(Fault::weight_exponent);
  return {clean == 0 && cd > 0 && weight > 0,
          fmt("failing suites: clean=%d c_d_prime=%d weight_exponent=%d", clean, cd, weight)};
}

int shell(const std::string& cmd) {
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const char* cli = std::getenv("OSCLAB_CLI");
  if (!cli) return {false, "OSCLAB_CLI not set"};
  const fs::path root = fs::temp_directory_path() / "osclab_acceptance_determinism";
  fs::remove_all(root);
  const std::string common =
      " --seed 99 curve --function plateau:d=2:a=1:ri=0.5:ro=1 --p 2 --samples 64 --nodes 256"
      " > /dev/null";
  int status = 0;
  for (int t : {1, 2}) {
    const fs::path dir = root / ("threads" + std::to_string(t));
    status |= shell(std::string(cli) + " --threads " + std::to_string(t) + " --out-dir " +
                    dir.string() + common);
  }
  if (status != 0) return {false, "cli exited with an error"};
  const std::string a = slurp(root / "threads1" / "curve.csv");
  const std::string b = slurp(root / "threads2" / "curve.csv");
  return {!a.empty() && a == b, fmt("csv bytes %zu vs %zu, identical=%d", a.size(), b.size(),
                                    static_cast<int>(a == b))};
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--criterion") criterion = std::atoi(argv[i + 1]);
  const std::vector<std::function<Outcome()>> all{
      constants,     linear_exactness, linear_distribution, limit_theorem,
      local_expansion, mollification,  q_sandwich,          tail_bounds,
      bv_divergence, mutation_sensitivity, determinism};
  if (criterion < 1 || criterion > static_cast<int>(all.size())) {
    std::fprintf(stderr, "usage: acceptance --criterion N (1..%zu)\n", all.size());
    return 2;
  }
  Outcome o;
  try {
    o = all[static_cast<std::size_t>(criterion - 1)]();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::printf("criterion %d: %s %s\n", criterion, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  return o.pass ? 0 : 1;
}
