// End-to-end acceptance run: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "finsler/cli.hpp"
#include "finsler/projective.hpp"
#include "finsler/verify.hpp"
#include "support.hpp"

using namespace finsler;
using namespace testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<SamplePoint> sample(const MetricSpec& spec, int count, std::uint64_t seed = 42) {
  SamplerConfig sc;
  sc.seed = seed;
  sc.count = count;
  sc.min_points = std::min(sc.min_points, count);
  return sample_points(spec, sc).points;
}

double max_measure(const CheckReport& r, const std::string& name) {
  double m = 0.0;
  for (const auto& p : r.points)
    for (const auto& ms : p.measures)
      if (ms.name == name) m = std::max(m, ms.residual.rel);
  return m;
}

bool no_errors(const CheckReport& r) {
  for (const auto& p : r.points)
    if (!p.error.empty()) return false;
  return !r.points.empty();
}

Outcome flat_baseline() {
  double worst = 0.0;
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::euclidean(), zoo::constant_riemannian()}) {
    for (const auto& p : sample(spec, 20)) {
      const CurvatureBundle b = build_bundle(spec, p.x, p.y, Depth::curvature);
      for (const auto& G : b.conn.G) worst = std::max(worst, std::abs(G.value()));
      for (const JetTensor* t : {&b.riemann.Rik, &b.berwald.B, &b.D, &b.weyl.W, &b.weyl.Wt})
        worst = std::max(worst, t->max_abs());
    }
  }
  return {worst <= 1e-12, fmt("max |G|,|R|,|B|,|D|,|W|,|W~| = %.2e (tol 1e-12)", worst)};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  int compared = 0;
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::family42_default()}) {
    const int n = metric_dim(spec);
    const JetConfig cfg{n, 3, 3};
    ScalarField f = [&spec](std::span<const double> x, std::span<const double> y) {
      return finsler_norm_squared<double>(spec, x, y);
    };
    for (const auto& p : sample(spec, 10)) {
      const Jet F2 = eval_F2(spec, p.x, p.y, cfg);
      for (const auto& m : indices_up_to(n, 3)) {
        const double exact = partial(F2, m);
        const double fd = fd_oracle(f, p.x, p.y, m);
        // vanishing partials are measured against F^2
        worst = std::max(worst, std::abs(exact - fd) / std::max(std::abs(exact), 1e-2 * F2.value()));
        ++compared;
      }
    }
  }
  return {worst <= 1e-4, fmt("%.0f partials, max relative difference %.2e (tol 1e-4)", compared, worst)};
}

Outcome funk_classification() {
  SamplerConfig sc;
  sc.seed = 42;
  sc.count = 20;
  const auto r = classify_metric(zoo::funk_ball3(), sc, Tolerances{});
  const auto& w = r[Flag::weyl];
  const auto& d = r[Flag::douglas];
  const auto& g = r[Flag::gdw];
  const bool ok = w.verdict && w.max_rel <= 1e-7 && !d.verdict && d.min_rel >= 1e-4 && g.verdict &&
                  r.points.size() == 20;
  return {ok, fmt("weyl max %.2e, douglas min %.2e", w.max_rel, d.min_rel) +
                  (g.verdict ? ", gdw yes" : ", gdw no")};
}

Outcome family_example() {
  const MetricSpec spec = zoo::family42_default();
  const auto pts = sample(spec, 10);
  SamplerConfig sc;
  sc.count = 10;
  const auto c = classify_metric(spec, sc, Tolerances{});
  const bool flags = !c[Flag::weyl].verdict && c[Flag::weyl].clearly_violated && c[Flag::w_quadratic].verdict &&
                     c[Flag::weakly_weyl].verdict && c[Flag::douglas].verdict;
  const CheckReport e = run_check("example42", spec, pts, Tolerances{});
  const double pairings = e.summary.count("matching_pairings") ? e.summary.at("matching_pairings") : -1.0;
  const double h = max_measure(e, "h-independence");
  const bool ok = flags && no_errors(e) && e.status == CheckStatus::pass && pairings == 1.0 && h <= 1e-8;
  std::string which;
  for (Pairing p : kAllPairings)
    if (e.summary.count(std::string("matches_") + pairing_name(p)) &&
        e.summary.at(std::string("matches_") + pairing_name(p)) == 1.0)
      which = pairing_name(p);
  return {ok, std::string(flags ? "flags as expected" : "flags differ") + fmt(", %.0f matching pairing", pairings) +
                  (which.empty() ? "" : " (" + which + ")") + fmt(", h-independence %.2e", h)};
}

Outcome weyl_douglas_identity() {
  double worst = 0.0;
  bool ok = true;
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::family42_default()}) {
    const CheckReport r = run_check("thm13", spec, sample(spec, 10), Tolerances{});
    ok = ok && no_errors(r) && r.status == CheckStatus::pass && r.points.size() == 10;
    worst = std::max(worst, r.max_rel);
  }
  return {ok && worst <= 1e-7, fmt("max residual %.2e (tol 1e-7)", worst)};
}

Outcome sakaguchi() {
  double worst = 0.0;
  int metrics = 0;
  bool ok = true;
  for (const auto& [name, spec] : zoo_metrics()) {
    SamplerConfig sc;
    sc.count = 10;
    const auto c = classify_metric(spec, sc, Tolerances{});
    if (!c[Flag::weakly_weyl].verdict) continue;
    ++metrics;
    const CheckReport r = run_check("gsakaguchi", spec, sample(spec, 10), Tolerances{});
    ok = ok && no_errors(r) && r.status != CheckStatus::fail;
    worst = std::max(worst, r.max_rel);
  }
  return {ok && metrics > 0 && worst <= 1e-7,
          fmt("%.0f weakly-Weyl metrics, max residual %.2e (tol 1e-7)", metrics, worst)};
}

Outcome projective_invariance() {
  double inv = 0.0, lemma = 0.0, expansion = 0.0;
  const Expr x1 = Expr::symbol("x1"), x2 = Expr::symbol("x2"), x3 = Expr::symbol("x3");
  const ProjectiveFactor linear = ProjectiveFactor::linear_form(
      {Expr::constant(0.3) + x1, Expr::constant(-0.2) * x2, Expr::constant(0.1) * x1 * x3});
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::family42_default()}) {
    for (const auto& p : sample(spec, 10)) {
      const SpraySource s = metric_spray(spec, p.x, p.y, standard_config(metric_dim(spec)));
      for (const ProjectiveFactor& P : {linear, ProjectiveFactor::scaled_F(0.1, spec)}) {
        const InvarianceReport r = check_invariants_under_change(s, P);
        inv = std::max({inv, r.W.rel, r.D.rel, r.Wt.rel});
        lemma = std::max(lemma, check_riemann_relation(s, P).result().rel);
        expansion = std::max(expansion, check_gww_closure(s, P, Tolerances{}).expansion.rel);
      }
    }
  }
  const bool ok = inv <= 1e-8 && lemma <= 1e-8 && expansion <= 1e-7;
  return {ok, fmt("invariants %.2e, curvature relation %.2e", inv, lemma) + fmt(", expansion %.2e", expansion)};
}

Outcome spherical_decomposition() {
  const MetricSpec spec = zoo::family42_default();
  const auto pts = sample(spec, 10);
  const CheckReport d = run_check("sph-decomp", spec, pts, Tolerances{});
  const CheckReport t = run_check("thm15", spec, pts, Tolerances{});
  const double fit = max_measure(d, "sph-fit");
  const double rel3 = max_measure(d, "omega3-relation"), rel5 = max_measure(d, "omega5-relation");
  const double wj = max_measure(d, "wjipl"), closed = max_measure(t, "thm15-formula");
  const bool ok = no_errors(d) && no_errors(t) && t.status == CheckStatus::pass && fit <= 1e-9 &&
                  std::max(rel3, rel5) <= 1e-8 && wj <= 1e-8 && closed <= 1e-6;
  return {ok, fmt("fit %.2e, omega relations %.2e", fit, std::max(rel3, rel5)) +
                  fmt(", reconstruction %.2e, closed form %.2e", wj, closed)};
}

// A compact pass over the invariants; the unit suites cover them in full.
Outcome properties() {
  double ring = 0.0, homog = 0.0, annih = 0.0, anti = 0.0, ricci = 0.0, douglas = 0.0;
  std::mt19937_64 rng(3);
  const JetConfig jc{3, 2, 4};
  for (int k = 0; k < 5; ++k) {
    const Jet a = random_jet(jc, rng), b = random_jet(jc, rng), c = random_jet(jc, rng);
    ring = std::max(ring, coeff_rel(a * (b + c), a * b + a * c));
    ring = std::max(ring, coeff_rel((a * b) * c, a * (b * c)));
  }
  for (const MetricSpec& spec : std::vector<MetricSpec>{zoo::funk_ball3(), zoo::randers_generic(), zoo::family42_default()}) {
    for (const auto& p : sample(spec, 3, 11)) {
      const CurvatureBundle b = build_bundle(spec, p.x, p.y, Depth::curvature);
      const auto& y = b.conn.y;
      JetTensor G(b.dim, {Variance::up}, b.conn.G.front().config());
      for (int i = 0; i < b.dim; ++i) G(i) = b.conn.G[static_cast<std::size_t>(i)];
      // R vanishes on some of these; its defect is measured against the curvature scale
      double r = 1e-14;
      for (std::size_t k = 0; k < b.riemann.Rik.size(); ++k) r = std::max(r, coeff_max(b.riemann.Rik.flat(k)));
      const double rs = std::max(r, curvature_scale(b));
      homog = std::max({homog, euler_defect(G, y, 2.0), euler_defect(b.riemann.Rik, y, 2.0) * r / rs,
                        euler_defect(b.berwald.B, y, -1.0)});
      const double bn = std::max(b.berwald.B.max_abs(), 1e-14);
      annih = std::max(annih, contract_y(b.berwald.B, 0, y).max_abs() / bn);
      double ad = 0.0;
      for (int i = 0; i < b.dim; ++i)
        for (int k = 0; k < b.dim; ++k)
          for (int l = 0; l < b.dim; ++l)
            ad = std::max(ad, std::abs(b.riemann.Rikl(i, k, l).value() + b.riemann.Rikl(i, l, k).value()));
      anti = std::max(anti, ad / std::max(b.riemann.Rikl.max_abs(), 1e-14));
    }
    const auto pts = sample(spec, 3, 11);
    ricci = std::max(ricci, run_check("ricci", spec, pts, Tolerances{}).max_rel);
    douglas = std::max(douglas, run_check("douglas-forms", spec, pts, Tolerances{}).max_rel);
  }
  const bool ok = ring <= 1e-12 && homog <= 1e-9 && annih <= 1e-10 && anti <= 1e-12 && ricci <= 1e-8 &&
                  douglas <= 1e-10;
  return {ok, fmt("ring %.1e, Euler %.1e", ring, homog) + fmt(", annihilation %.1e, antisymmetry %.1e", annih, anti) +
                  fmt(", Ricci %.1e, Douglas forms %.1e", ricci, douglas)};
}

Outcome determinism() {
  using namespace finsler::cli;
  const auto doc = nlohmann::json::parse(R"({"metric": {"family": "funk_ball3"}, "sampler": {"seed": 42, "count": 5}})");
  bool same = true;
  for (Command c : {Command::eval, Command::classify, Command::verify}) {
    const RunConfig cfg = parse_run_config(c, doc);
    same = same && serialize(run_command(cfg).report) == serialize(run_command(cfg).report);
  }
  const RunConfig p = parse_run_config(
      Command::projective,
      nlohmann::json::parse(R"({"metric": {"family": "funk_ball3"}, "sampler": {"count": 5},
                                "factor": {"kind": "scaled_F", "c": 0.1}})"));
  same = same && serialize(run_command(p).report) == serialize(run_command(p).report);
  return {same, same ? "eval, classify, verify, projective reports byte-identical" : "reports differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"flat baseline", flat_baseline},
      {"jet vs finite differences", oracle_equivalence},
      {"funk classification", funk_classification},
      {"spherically symmetric family", family_example},
      {"Weyl-Douglas identity", weyl_douglas_identity},
      {"generalized Sakaguchi", sakaguchi},
      {"projective invariance", projective_invariance},
      {"spherical decomposition", spherical_decomposition},
      {"property summary", properties},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s  %s: %s [%.1f s]\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
