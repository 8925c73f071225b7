// Acceptance checks, one PASS/FAIL line per criterion. Exit status is
// nonzero when any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "torusdyn/torusdyn.hpp"

using namespace torusdyn;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

DiskCoeff random_in_disk(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return DiskCoeff(std::polar(radius * std::sqrt(u(rng)), kTwoPi * u(rng)));
}

Jacobian2 random_positive(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (;;) {
    const Jacobian2 j{u(rng), u(rng), u(rng), u(rng)};
    if (j.det() > 1e-3) return j;
  }
}

std::vector<MapSpec> catalog() {
  return {MapSpec::translation(0.3, 0.4),
          MapSpec::cat(),
          MapSpec::linear(1, 1, 0, 1),
          MapSpec::skew(0.1, 0.2, 0.3, 2),
          MapSpec::standard_map(1.5),
          MapSpec::standard_map(6.0),
          MapSpec::perturbed_translation(0.41421356237309515, 0.7320508075688772, {0.5, 0.5}, 0.2, 1.5)};
}

const double kLogLambda1 = std::log((3.0 + std::sqrt(5.0)) / 2.0);
const double kWx = std::sqrt(2.0) - 1.0;
const double kWy = std::sqrt(3.0) - 1.0;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TORUSDYN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion1() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_in_disk(rng, 0.99), z = random_in_disk(rng, 0.99), w = random_in_disk(rng, 0.99);
    worst = std::max(worst, std::abs(hyp_dist(mobius_T(a, z), mobius_T(a, w)) - hyp_dist(z, w)));
  }
  report(1, worst <= 1e-10, "Mobius isometry (1e4 triples)", fmt("max error %.3e", worst));
}

void criterion2() {
  std::mt19937_64 rng(102);
  double product = 0.0, forms = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto jf = random_positive(rng), jg = random_positive(rng);
    const auto sf = beltrami_from_jacobian(jf), sg = beltrami_from_jacobian(jg);
    const auto m = compose_beltrami(sf, sg);
    product = std::max(product, std::abs(m.value() - beltrami_from_jacobian(jg * jf).mu.value()));
    forms = std::max(forms, std::abs(m.value() - compose_beltrami_quotient(sf, sg).value()));
  }
  report(2, product <= 1e-10 && forms <= 1e-12, "Beltrami composition oracle (1e4 pairs)",
         fmt("vs matrix product %.3e, Mobius vs quotient %.3e", product, forms));
}

void criterion3() {
  std::mt19937_64 rng(103);
  double k_err = 0.0, s_err = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto j = random_positive(rng);
    const double k_sv = K_from_singular(j).k;
    k_err = std::max(k_err, std::abs(K_from_mu(beltrami_from_jacobian(j)).k - k_sv));
    const double s1 = singular_values(j).s1;
    s_err = std::max(s_err, std::abs(std::sqrt(k_sv * j.det()) - s1));
  }
  report(3, k_err <= 1e-10 && s_err <= 1e-10, "K from mu vs singular values, sqrt(K J) = s1 (1e4 matrices)",
         fmt("max absolute errors %.3e, %.3e", k_err, s_err));
}

void criterion4() {
  std::mt19937_64 rng(104);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto maps = catalog();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto& g = maps[rng() % maps.size()];
    const auto& f = maps[rng() % maps.size()];
    const auto r = log_K_identity_check(g, f, TorusPoint(u(rng), u(rng)));
    worst = std::max(worst, std::abs(r.lhs - r.rhs));
  }
  report(4, worst <= 1e-8, "log K of g o f^-1 equals hyperbolic distance (1e3 cases)", fmt("max error %.3e", worst));
}

void criterion5() {
  const auto nodes = midpoint_grid(64);
  double worst = 0.0;
  for (int n = 1; n <= 30; ++n) {
    worst = std::max(worst, std::abs(dilatation_bound(MapSpec::cat(), n, nodes) - kLogLambda1));
    worst = std::max(worst, std::abs(przytycki_bound(MapSpec::cat(), n, nodes) - kLogLambda1));
  }
  report(5, worst <= 1e-6, "cat map bounds equal log lambda1 for n <= 30", fmt("max deviation %.3e", worst));
}

void criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::array<int, 5> n_values{2, 3, 4, 5, 6};
  const auto fit = entropy_estimate(MapSpec::cat(), 0.2, n_values, entropy_candidates(200, 0.25, 0));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(6, fit.slope >= 0.77 && fit.slope <= 1.06 && secs <= 60.0, "cat map entropy slope in [0.77, 1.06]",
         fmt("slope %.4f in %.2f s", fit.slope, secs));
}

void criterion7() {
  const auto f = MapSpec::translation(kWx, kWy);
  const std::array<int, 5> n_values{2, 3, 4, 5, 6};
  const auto fit = entropy_estimate(f, 0.2, n_values, entropy_candidates(200, 0.25, 0));
  const auto nodes = midpoint_grid(64);
  bool zero = true;
  for (int n = 1; n <= 30; ++n) zero = zero && dilatation_bound(f, n, nodes) == 0.0 && przytycki_bound(f, n, nodes) == 0.0;
  const auto fam = build_translation_family({kWx, kWy, 200, 0.01, 0.98, {0, 0}});
  const auto bd = bounded_dilatation_diagnostic(f, fam, 10, 2000, 0);
  const double beta = beta_of(fam);
  const bool ok = std::abs(fit.slope) <= 0.02 && zero && bd.max_K == 1.0 && beta == 1.0;
  report(7, ok, "translation: zero slope, zero bounds, K = 1 on S, beta = 1",
         fmt("slope %.4f, max K on S %.17g", fit.slope, bd.max_K) + (zero ? ", bounds exactly 0" : ", bounds nonzero") +
             fmt(", beta %.17g", beta));
}

void criterion8() {
  const auto k = lipschitz_constants(std::sqrt(3.0), 0.5);
  std::mt19937_64 rng(108);
  double worst_ratio = 0.0;
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto a = random_in_disk(rng, k.delta_prime), b = random_in_disk(rng, k.delta_prime);
    const auto z = random_in_disk(rng, k.delta);
    const double lhs = hyp_dist(mobius_T(a, z), mobius_T(b, z));
    const double rhs = k.c1 * hyp_dist(a, b);
    if (lhs > rhs) ++violations;
    if (rhs > 0.0) worst_ratio = std::max(worst_ratio, lhs / rhs);
  }
  report(8, violations == 0, "Mobius Lipschitz bound, beta = sqrt 3, delta' = 0.5 (1e5 samples)",
         fmt("c1 %.4f, max lhs/rhs %.4f", k.c1, worst_ratio) + ", violations " + std::to_string(violations));
}

void criterion9() {
  std::vector<double> ell;
  for (int k = 0; k < 101; ++k) ell.push_back(std::pow(2.0, -k));
  const double half = xi(ell, 0.5, 100) / 100.0;
  const double zero = xi(ell, 0.0, 100) / 100.0;
  report(9, half <= 0.035 && zero >= 0.99, "xi(n)/n at n = 100 for alpha = 0.5 and alpha = 0",
         fmt("alpha 0.5: %.5f, alpha 0: %.5f", half, zero));
}

void criterion10() {
  std::mt19937_64 rng(110);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto maps = catalog();
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const auto& f = maps[i % maps.size()];
    const TorusPoint p(u(rng), u(rng));
    const TorusPoint q = p + Vec2{0.05 * (u(rng) - 0.5), 0.05 * (u(rng) - 0.5)};
    worst = std::min(worst, telescoping_check(f, p, q, static_cast<int>(rng() % 11)).margin());
  }
  report(10, worst >= -1e-10, "telescoping inequality (1e2 instances, n <= 10)", fmt("min margin %.3e", worst));
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("torusdyn_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "translation.toml") << "seed = 0\n"
                                               "[map]\n"
                                               "kind = \"translation\"\n"
                                               "omega = [0.41421356237309515, 0.7320508075688772]\n"
                                               "[domains]\n"
                                               "family = \"family.json\"\n"
                                               "[family]\n"
                                               "omega = [0.41421356237309515, 0.7320508075688772]\n"
                                               "count = 200\n"
                                               "c = 0.01\n"
                                               "rho = 0.98\n";
    std::ofstream(dir / "cat.toml") << "seed = 0\n"
                                       "[map]\n"
                                       "kind = \"linear\"\n"
                                       "matrix = [2, 1, 1, 1]\n"
                                       "[field]\n"
                                       "grid = 16\n";
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void criterion11(const Workspace& ws) {
  const std::string cfg = " --config " + ws.path("translation.toml");
  const int build = run_cli("build-family" + cfg + " --out " + ws.dir.string());
  const int check = run_cli("check-domains" + cfg + " --out " + ws.path("e2e"));
  const int chain = run_cli("bound-chain" + cfg + " --out " + ws.path("e2e"));
  bool diagnostics = false;
  double max_rate = std::numeric_limits<double>::infinity();
  try {
    const auto c = nlohmann::json::parse(slurp(ws.dir / "e2e" / "check_domains.json"));
    diagnostics = c["collection"]["passed"].get<bool>() && c["permutation"]["passed"].get<bool>() &&
                  c["null_sequence"]["passed"].get<bool>() && c["sum_diam"]["passed"].get<bool>() &&
                  !c["bounded_dilatation"]["flagged"].get<bool>() && c["flags"].empty();
    const auto b = nlohmann::json::parse(slurp(ws.dir / "e2e" / "bound_chain.json"));
    max_rate = -std::numeric_limits<double>::infinity();
    for (const auto& r : b["records"])
      for (const auto& x : r["entropy_rate"]) max_rate = std::max(max_rate, x.get<double>());
  } catch (const std::exception&) {
    diagnostics = false;
  }
  const bool ok = build == 0 && check == 0 && chain == 0 && diagnostics && max_rate <= 0.02;
  report(11, ok, "200-disk translation family end to end",
         "exit codes " + std::to_string(build) + "/" + std::to_string(check) + "/" + std::to_string(chain) +
             (diagnostics ? ", all diagnostics pass" : ", diagnostics failing") + fmt(", max entropy_rate %.4g", max_rate));
}

void criterion12(const Workspace& ws) {
  struct Run {
    const char* command;
    const char* config;
    std::vector<std::string> files;
  };
  const std::vector<Run> runs = {
      {"entropy", "cat.toml", {"entropy.json", "entropy_counts.csv"}},
      {"bound-chain", "cat.toml", {"bound_chain.json", "bound_chain.csv"}},
      {"mu-field", "cat.toml", {"mu_field.json", "mu_field.csv"}},
      {"build-family", "translation.toml", {"family.json"}},
      {"check-domains", "translation.toml", {"check_domains.json"}},
  };
  int compared = 0;
  std::string mismatch;
  for (const auto& r : runs) {
    for (const char* tag : {"run_a", "run_b"}) {
      run_cli(std::string(r.command) + " --config " + ws.path(r.config) + " --out " + ws.path(tag));
    }
    for (const auto& f : r.files) {
      const auto a = ws.dir / "run_a" / f, b = ws.dir / "run_b" / f;
      if (!fs::exists(a) || !fs::exists(b) || slurp(a) != slurp(b)) mismatch += " " + f;
      ++compared;
    }
  }
  report(12, mismatch.empty(), "byte-identical outputs across repeated runs",
         std::to_string(compared) + " files compared" + (mismatch.empty() ? "" : ", differing:" + mismatch));
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  const Workspace ws;
  criterion11(ws);
  criterion12(ws);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
