#include "finsler/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "finsler/curvature.hpp"
#include "finsler/errors.hpp"
#include "finsler/projective.hpp"
#include "finsler/verify.hpp"

namespace finsler::cli {

namespace {

const std::vector<std::string> kProjectiveChecks = {"lemma", "invariance", "weakly-weyl-closure",
                                                    "gww-closure"};

const std::vector<std::string> kTensorNames = {"F",     "G",     "N",     "R",      "Rikl",
                                               "Rjikl", "B",     "E",     "H",      "D",
                                               "W",     "Wjikl", "Wt",    "D_h0",   "theta",
                                               "Wt_h0", "D_h00", "theta_h0"};

const std::set<std::string>& tolerance_names() {
  static const std::set<std::string> names = [] {
    std::set<std::string> s = {"sph-fit",       "omega3-relation", "omega5-relation", "wjipl",
                               "thm15-formula", "h-independence",  "rie-ber",         "rie-e",
                               "rie-e-trace",   "rie-h",           "rie-h-dot",       "lemma",
                               "invariance-W",  "invariance-D",    "invariance-Wt",   "gww-expansion",
                               "weakly_weyl_closure", "gww_closure"};
    for (Flag f : kAllFlags) s.insert(flag_name(f));
    for (const auto& c : check_names()) s.insert(c);
    return s;
  }();
  return names;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

Depth tensor_depth(const std::string& t) {
  if (t == "D_h00" || t == "theta_h0") return Depth::deep;
  if (t == "H" || t == "D_h0" || t == "theta" || t == "Wt_h0") return Depth::flow;
  return Depth::curvature;
}

bool tensor_needs_weyl(const std::string& t) {
  return t == "W" || t == "Wjikl" || t == "Wt" || t == "Wt_h0";
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("cannot parse " + what + " '" + text + "'");
  return v;
}

void set_tolerance(Tolerances& tol, const std::string& name, double value) {
  if (!(value > 0.0)) throw ConfigError("tolerance '" + name + "' must be positive");
  if (name == "rel")
    tol.rel = value;
  else if (name == "nonzero")
    tol.nonzero = value;
  else if (tolerance_names().count(name))
    tol.overrides[name] = value;
  else
    throw ConfigError("unknown tolerance name '" + name + "'");
}

std::vector<double> vec_of(const nlohmann::json& j, const std::string& what, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ConfigError(what + " must be an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + " must contain numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

void parse_sampler(RunConfig& cfg, const nlohmann::json& s, int n) {
  if (!s.is_object()) throw ConfigError("sampler must be an object");
  static const std::set<std::string> keys = {"seed",       "count",           "x_box",
                                             "y_radius",   "y_sphere_radius", "max_parallel_cos", "min_points",
                                             "min_x_norm", "max_attempts_per_point", "points"};
  for (const auto& [k, v] : s.items())
    if (!keys.count(k)) throw ConfigError("unknown sampler key '" + k + "'");
  auto& sc = cfg.sampler;
  if (s.contains("seed")) {
    if (!s.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
    sc.seed = s.at("seed").get<std::uint64_t>();
  }
  if (s.contains("count")) sc.count = s.at("count").get<int>();
  if (s.contains("min_points")) sc.min_points = s.at("min_points").get<int>();
  if (s.contains("y_radius")) sc.y_radius = s.at("y_radius").get<double>();
  if (s.contains("y_sphere_radius")) sc.y_radius = s.at("y_sphere_radius").get<double>();
  if (s.contains("max_parallel_cos")) sc.max_parallel_cos = s.at("max_parallel_cos").get<double>();
  if (s.contains("min_x_norm")) sc.min_x_norm = s.at("min_x_norm").get<double>();
  if (s.contains("max_attempts_per_point"))
    sc.max_attempts_per_point = s.at("max_attempts_per_point").get<int>();
  if (s.contains("x_box")) {
    const auto& box = s.at("x_box");
    if (!box.is_array() || box.empty()) throw ConfigError("x_box must be a non-empty array");
    if (box[0].is_number()) {
      const auto lh = vec_of(box, "x_box", 2);
      sc.x_box.assign(static_cast<std::size_t>(n), {lh[0], lh[1]});
    } else {
      if (static_cast<int>(box.size()) != n) throw ConfigError("x_box needs one interval per axis");
      for (const auto& iv : box) {
        const auto lh = vec_of(iv, "x_box interval", 2);
        sc.x_box.push_back({lh[0], lh[1]});
      }
    }
    for (const auto& iv : sc.x_box)
      if (!(iv[0] < iv[1])) throw ConfigError("x_box intervals must have lo < hi");
  }
  if (s.contains("points")) {
    const auto& pts = s.at("points");
    if (!pts.is_array() || pts.empty()) throw ConfigError("points must be a non-empty array");
    for (const auto& p : pts) {
      if (!p.is_object() || !p.contains("x") || !p.contains("y"))
        throw ConfigError("each point needs \"x\" and \"y\"");
      cfg.explicit_points.push_back({vec_of(p.at("x"), "point x", n), vec_of(p.at("y"), "point y", n)});
    }
  }
  if (sc.count < 1) throw ConfigError("count must be positive");
  if (sc.min_points < 1) throw ConfigError("min_points must be positive");
  if (!(sc.y_radius > 0.0)) throw ConfigError("y_radius must be positive");
  if (!(sc.max_parallel_cos > 0.0 && sc.max_parallel_cos <= 1.0))
    throw ConfigError("max_parallel_cos must lie in (0, 1]");
}

Json residual_json(const Residual& r) {
  Json j;
  j["abs"] = r.abs;
  j["scale"] = r.scale;
  j["rel"] = r.rel;
  return j;
}

Json point_header(int index, const std::vector<double>& x, const std::vector<double>& y) {
  Json j;
  j["index"] = index;
  j["x"] = x;
  j["y"] = y;
  return j;
}

Json check_json(const CheckReport& rep) {
  Json j;
  j["name"] = rep.name;
  j["status"] = check_status_name(rep.status);
  Json summary = Json::object();
  for (const auto& [k, v] : rep.summary) summary[k] = v;
  j["summary"] = summary;
  j["notes"] = rep.notes;
  Json pts = Json::array();
  for (const auto& p : rep.points) {
    Json pj = point_header(p.index, p.x, p.y);
    pj["status"] = check_status_name(p.status);
    if (!p.error.empty()) pj["error"] = p.error;
    Json ms = Json::object();
    for (const auto& m : p.measures) {
      Json mj = residual_json(m.residual);
      mj["tolerance"] = m.tolerance;
      mj["passed"] = m.passed();
      ms[m.name] = mj;
    }
    pj["measures"] = ms;
    Json vals = Json::object();
    for (const auto& [k, v] : p.values) vals[k] = v;
    pj["values"] = vals;
    pts.push_back(pj);
  }
  j["points"] = pts;
  return j;
}

void finish_check(CheckReport& rep) {
  int n_pass = 0, n_fail = 0, n_inc = 0, n_hyp = 0;
  for (const auto& p : rep.points) {
    for (const auto& m : p.measures) rep.max_rel = std::max(rep.max_rel, m.residual.rel);
    switch (p.status) {
      case CheckStatus::pass: ++n_pass; break;
      case CheckStatus::fail: ++n_fail; break;
      case CheckStatus::inconclusive: ++n_inc; break;
      case CheckStatus::hypothesis_not_met: ++n_hyp; break;
    }
  }
  rep.summary["points"] = static_cast<double>(rep.points.size());
  rep.summary["passed"] = n_pass;
  rep.summary["failed"] = n_fail;
  rep.summary["inconclusive"] = n_inc;
  rep.summary["hypothesis_not_met"] = n_hyp;
  rep.summary["max_rel"] = rep.max_rel;
  if (n_fail > 0)
    rep.status = CheckStatus::fail;
  else if (n_pass > 0)
    rep.status = CheckStatus::pass;
  else if (n_hyp > 0)
    rep.status = CheckStatus::hypothesis_not_met;
  else
    rep.status = CheckStatus::inconclusive;
}

CheckPoint projective_point(const std::string& check, const RunConfig& cfg,
                            const ProjectiveFactor& P, const SamplePoint& pt) {
  const int n = metric_dim(cfg.metric);
  const JetConfig f2 = cfg.jet ? *cfg.jet : standard_config(n);
  const SpraySource src = metric_spray(cfg.metric, pt.x, pt.y, f2);
  const Tolerances& tol = cfg.tolerances;
  CheckPoint cp;
  cp.x = pt.x;
  cp.y = pt.y;
  auto& ms = cp.measures;
  if (check == "lemma") {
    const RiemannRelationReport r = check_riemann_relation(src, P);
    ms.push_back({"lemma", r.result(), tol.get("lemma", 1e-8)});
    cp.values["barred_connection_rel"] = r.barred.rel;
  } else if (check == "invariance") {
    const InvarianceReport r = check_invariants_under_change(src, P);
    ms.push_back({"invariance-D", r.D, tol.get("invariance-D", 1e-8)});
    if (n >= 3) {
      ms.push_back({"invariance-W", r.W, tol.get("invariance-W", 1e-8)});
      ms.push_back({"invariance-Wt", r.Wt, tol.get("invariance-Wt", 1e-8)});
    }
  } else if (check == "weakly-weyl-closure") {
    const WeaklyWeylClosureReport r = check_weakly_weyl_closure(src, P, tol);
    cp.values["P"] = r.P;
    switch (r.status) {
      case ClosureStatus::hypothesis_not_met:
        cp.status = CheckStatus::hypothesis_not_met;
        return cp;
      case ClosureStatus::vacuous:
        cp.values["vacuous"] = 1.0;
        return cp;
      default:
        break;
    }
    cp.values["muF"] = r.muF;
    cp.values["muF_bar"] = r.muF_bar;
    const double t = tol.get("weakly_weyl_closure");
    ms.push_back({"relation", r.relation, t});
    ms.push_back({"mu-law", r.mu_law, t});
  } else if (check == "gww-closure") {
    const GwwClosureReport r = check_gww_closure(src, P, tol);
    ms.push_back({"gww-expansion", r.expansion, tol.get("gww-expansion", 1e-7)});
    cp.values["law_status"] = static_cast<double>(r.law_status);
    if (r.law_status == ClosureStatus::pass || r.law_status == ClosureStatus::fail) {
      const double t = tol.get("gww_closure");
      ms.push_back({"mu-law", r.mu_law, t});
      ms.push_back({"lambda-law", r.lambda_law, t});
    }
  } else {
    throw ConfigError("unknown projective check '" + check + "'");
  }
  cp.status = measure_status(ms);
  return cp;
}

struct Points {
  std::vector<SamplePoint> valid;
  Json sampling;
};

Points gather_points(const RunConfig& cfg) {
  Points out;
  Json s;
  if (!cfg.explicit_points.empty()) {
    Json rejected = Json::array();
    for (std::size_t k = 0; k < cfg.explicit_points.size(); ++k) {
      const auto& p = cfg.explicit_points[k];
      const PointValidation v = validate_point(cfg.metric, p.x, p.y);
      if (v.status == PointStatus::ok) {
        out.valid.push_back(p);
      } else {
        Json r = point_header(static_cast<int>(k), p.x, p.y);
        r["status"] = v.status == PointStatus::outside_domain ? "outside_domain" : "not_finsler";
        r["failures"] = v.failures;
        rejected.push_back(r);
      }
    }
    s["mode"] = "explicit";
    s["given"] = cfg.explicit_points.size();
    s["accepted"] = out.valid.size();
    s["rejected"] = rejected;
    out.sampling = s;
    if (out.valid.empty()) throw InsufficientSamplesError("no given point passes validation");
    return out;
  }
  const SampleSet set = sample_points(cfg.metric, cfg.sampler);
  out.valid = set.points;
  s["mode"] = "sampled";
  s["requested"] = cfg.sampler.count;
  s["accepted"] = set.points.size();
  s["attempts"] = set.attempts;
  s["rejected_domain"] = set.rejected_domain;
  s["rejected_parallel"] = set.rejected_parallel;
  out.sampling = s;
  return out;
}

const JetTensor& tensor_of(const CurvatureBundle& b, const std::string& t, JetTensor& scratch) {
  if (t == "F") return scratch = JetTensor::scalar(b.F);
  if (t == "G") {
    scratch = make_tensor(b.dim, {Variance::up}, [&](std::span<const int> i) { return b.conn.G[i[0]]; });
    return scratch;
  }
  if (t == "N") return b.conn.N;
  if (t == "R") return b.riemann.Rik;
  if (t == "Rikl") return b.riemann.Rikl;
  if (t == "Rjikl") return b.riemann.Rjikl;
  if (t == "B") return b.berwald.B;
  if (t == "E") return b.berwald.E;
  if (t == "H") return b.berwald.H;
  if (t == "D") return b.D;
  if (t == "W") return b.weyl.W;
  if (t == "Wjikl") return b.weyl.Wjikl;
  if (t == "Wt") return b.weyl.Wt;
  if (t == "D_h0") return b.D_h0;
  if (t == "theta") return b.theta;
  if (t == "Wt_h0") return b.Wt_h0;
  if (t == "D_h00") return b.D_h00;
  if (t == "theta_h0") return b.theta_h0;
  throw ConfigError("unknown tensor '" + t + "'");
}

Json run_eval(const RunConfig& cfg, const Points& pts, int& exit_code) {
  Depth depth = Depth::curvature;
  for (const auto& t : cfg.tensors)
    if (static_cast<int>(tensor_depth(t)) > static_cast<int>(depth)) depth = tensor_depth(t);
  const int n = metric_dim(cfg.metric);
  std::vector<Json> rows(pts.valid.size());
  std::vector<std::vector<double>> maxima(pts.valid.size(), std::vector<double>(cfg.tensors.size()));
  parallel_for(static_cast<int>(pts.valid.size()), [&](int k) {
    const auto& p = pts.valid[static_cast<std::size_t>(k)];
    const CurvatureBundle b = cfg.jet ? build_bundle(cfg.metric, p.x, p.y, depth, *cfg.jet)
                                      : build_bundle(cfg.metric, p.x, p.y, depth);
    Json row = point_header(k, p.x, p.y);
    Json ts = Json::object();
    for (std::size_t q = 0; q < cfg.tensors.size(); ++q) {
      JetTensor scratch;
      const JetTensor& t = tensor_of(b, cfg.tensors[q], scratch);
      Json tj;
      tj["rank"] = t.rank();
      tj["values"] = t.values();
      tj["max_abs"] = t.max_abs();
      maxima[static_cast<std::size_t>(k)][q] = t.max_abs();
      ts[cfg.tensors[q]] = tj;
    }
    row["tensors"] = ts;
    rows[static_cast<std::size_t>(k)] = row;
  });
  Json out;
  out["dim"] = n;
  Json summary = Json::object();
  for (std::size_t q = 0; q < cfg.tensors.size(); ++q) {
    double m = 0.0;
    for (const auto& mk : maxima) m = std::max(m, mk[q]);
    summary[cfg.tensors[q]] = Json{{"max_abs", m}};
  }
  out["summary"] = summary;
  out["points"] = rows;
  exit_code = kExitOk;
  return out;
}

Json run_classify(const RunConfig& cfg, const Points& pts, int& exit_code) {
  std::vector<PointClassification> pcs(pts.valid.size());
  parallel_for(static_cast<int>(pts.valid.size()), [&](int k) {
    const auto& p = pts.valid[static_cast<std::size_t>(k)];
    const CurvatureBundle b = cfg.jet ? build_bundle(cfg.metric, p.x, p.y, Depth::flow, *cfg.jet)
                                      : build_bundle(cfg.metric, p.x, p.y, Depth::flow);
    pcs[static_cast<std::size_t>(k)] = classify_point(b, cfg.tolerances);
  });
  const ClassificationReport rep = aggregate_classification(std::move(pcs), cfg.tolerances);

  Json flags = Json::object();
  for (const auto& name : cfg.checks) {
    Flag f{};
    parse_flag(name, f);
    const FlagAggregate& a = rep[f];
    Json j;
    j["applicable"] = a.applicable;
    j["verdict"] = a.verdict;
    j["all_vacuous"] = a.all_vacuous;
    j["clearly_violated"] = a.clearly_violated;
    j["tolerance"] = a.tolerance;
    j["passed"] = a.passed;
    j["min_rel"] = a.min_rel;
    j["max_rel"] = a.max_rel;
    j["mean_rel"] = a.mean_rel;
    flags[name] = j;
  }
  Json imps = Json::array();
  for (const auto& imp : rep.implications) imps.push_back(Json{{"name", imp.name}, {"holds", imp.holds}});

  Json points = Json::array();
  for (std::size_t k = 0; k < rep.points.size(); ++k) {
    const auto& pc = rep.points[k];
    Json pj = point_header(static_cast<int>(k), pc.x, pc.y);
    pj["companion_metric"] = pc.companion_metric;
    Json fj = Json::object();
    for (const auto& name : cfg.checks) {
      Flag f{};
      parse_flag(name, f);
      const FlagResult& r = pc[f];
      Json j;
      j["applicable"] = r.applicable;
      j["pass"] = r.pass;
      j["vacuous"] = r.vacuous;
      j["primary"] = residual_json(r.primary);
      j["secondary"] = residual_json(r.secondary);
      fj[name] = j;
    }
    pj["flags"] = fj;
    Json fit;
    fit["c"] = pc.c;
    fit["mu"] = pc.mu;
    fit["mu_spread"] = pc.mu_spread;
    fit["gww_mu"] = pc.gww_mu;
    fit["gww_lambda"] = pc.gww_lambda;
    fit["gww_rank"] = pc.gww_rank;
    fit["omega_reconstruction"] = pc.Omega_reconstruction;
    pj["fits"] = fit;
    points.push_back(pj);
  }
  Json out;
  out["flags"] = flags;
  out["implications"] = imps;
  out["implications_ok"] = rep.implications_ok;
  out["points"] = points;
  exit_code = rep.implications_ok ? kExitOk : kExitCheckFailed;
  return out;
}

template <class Fn>
Json run_checks(const RunConfig& cfg, int& exit_code, Fn&& one) {
  Json checks = Json::array();
  bool failed = false;
  for (const auto& name : cfg.checks) {
    const auto t0 = std::chrono::steady_clock::now();
    const CheckReport rep = one(name);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json j = check_json(rep);
    if (cfg.timing) j["wall_time_s"] = wall;
    checks.push_back(j);
    failed = failed || rep.status == CheckStatus::fail;
  }
  exit_code = failed ? kExitCheckFailed : kExitOk;
  Json out;
  out["checks"] = checks;
  return out;
}

}  // namespace

const char* command_name(Command c) {
  switch (c) {
    case Command::eval: return "eval";
    case Command::classify: return "classify";
    case Command::verify: return "verify";
    case Command::projective: return "projective";
  }
  return "?";
}

bool parse_command(const std::string& s, Command& out) {
  for (Command c : {Command::eval, Command::classify, Command::verify, Command::projective})
    if (s == command_name(c)) {
      out = c;
      return true;
    }
  return false;
}

std::vector<std::string> known_checks(Command command, const MetricSpec& metric, bool deep) {
  std::vector<std::string> out;
  switch (command) {
    case Command::eval: break;
    case Command::classify:
      for (Flag f : kAllFlags) out.emplace_back(flag_name(f));
      break;
    case Command::verify:
      for (const auto& c : check_names()) {
        if ((c == "sph-decomp" || c == "thm15") && !is_spherically_symmetric(metric)) continue;
        if (c == "example42" && !std::holds_alternative<Family42Metric>(metric)) continue;
        if (c == "prop53" && !deep) continue;
        out.push_back(c);
      }
      break;
    case Command::projective: out = kProjectiveChecks; break;
  }
  return out;
}

RunConfig parse_run_config(Command command, const nlohmann::json& doc, const Overrides& ov) {
  if (!doc.is_object()) throw ConfigError("configuration must be an object");
  static const std::set<std::string> keys = {"command", "metric",  "sampler", "jet",   "tolerances",
                                             "checks",  "tensors", "factor",  "deep",  "output"};
  for (const auto& [k, v] : doc.items())
    if (!keys.count(k)) throw ConfigError("unknown configuration key '" + k + "'");
  if (!doc.contains("metric")) throw ConfigError("configuration needs a \"metric\"");

  // an echoed configuration carries these; they must agree with the invocation
  if (doc.contains("command") && doc.at("command") != command_name(command))
    throw ConfigError("configuration is for '" + doc.at("command").get<std::string>() + "', not " +
                      command_name(command));

  RunConfig cfg;
  cfg.command = command;
  cfg.deep = ov.deep;
  if (doc.contains("deep")) {
    if (!doc.at("deep").is_boolean()) throw ConfigError("deep must be true or false");
    cfg.deep = cfg.deep || doc.at("deep").get<bool>();
  }
  cfg.timing = ov.timing;
  cfg.metric = parse_metric(doc.at("metric"));
  const int n = metric_dim(cfg.metric);

  if (doc.contains("sampler")) parse_sampler(cfg, doc.at("sampler"), n);
  if (ov.seed) cfg.sampler.seed = *ov.seed;
  if (ov.points) {
    if (*ov.points < 1) throw ConfigError("--points must be positive");
    cfg.sampler.count = *ov.points;
  }
  cfg.sampler.min_points = std::min(cfg.sampler.min_points, cfg.sampler.count);

  if (doc.contains("jet") && doc.at("jet") != "default") {
    const auto& j = doc.at("jet");
    if (!j.is_object() || !j.contains("x_order") || !j.contains("y_order"))
      throw ConfigError("jet needs x_order and y_order");
    const int xo = j.at("x_order").get<int>(), yo = j.at("y_order").get<int>();
    if (xo < 0 || xo > 4 || yo < 0 || yo > 12)
      throw ConfigError("jet orders must satisfy x_order <= 4 and y_order <= 12");
    cfg.jet = JetConfig{n, xo, yo};
  }

  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    if (!t.is_object()) throw ConfigError("tolerances must be an object");
    for (const auto& [k, v] : t.items()) {
      if (!v.is_number()) throw ConfigError("tolerance '" + k + "' must be a number");
      set_tolerance(cfg.tolerances, k, v.get<double>());
    }
  }
  for (const auto& nv : ov.tolerances) {
    const auto eq = nv.find('=');
    if (eq == std::string::npos) throw ConfigError("--tolerance expects NAME=VALUE, got '" + nv + "'");
    set_tolerance(cfg.tolerances, nv.substr(0, eq),
                  parse_number(nv.substr(eq + 1), "tolerance value"));
  }

  const auto known = known_checks(command, cfg.metric, cfg.deep);
  std::vector<std::string> requested;
  if (doc.contains("checks")) {
    if (!doc.at("checks").is_array()) throw ConfigError("checks must be an array");
    for (const auto& c : doc.at("checks")) requested.push_back(c.get<std::string>());
  }
  if (!ov.checks.empty()) requested = ov.checks;
  if (command == Command::eval && !requested.empty())
    throw ConfigError("eval takes \"tensors\", not checks");
  for (const auto& c : requested) {
    if (contains(known, c)) continue;
    if (c == "prop53" && command == Command::verify) throw ConfigError("check 'prop53' needs --deep");
    throw ConfigError("unknown or inapplicable check '" + c + "' for " + command_name(command));
  }
  if (requested.empty()) {
    cfg.checks = known;
  } else {
    // canonical order, duplicates dropped
    for (const auto& c : known)
      if (contains(requested, c)) cfg.checks.push_back(c);
  }

  if (doc.contains("tensors")) {
    if (command != Command::eval) throw ConfigError("\"tensors\" only applies to eval");
    for (const auto& t : doc.at("tensors")) {
      const auto name = t.get<std::string>();
      if (!contains(kTensorNames, name)) throw ConfigError("unknown tensor '" + name + "'");
      if (tensor_needs_weyl(name) && n < 3) throw ConfigError("tensor '" + name + "' needs n >= 3");
      if (tensor_depth(name) == Depth::deep && !cfg.deep)
        throw ConfigError("tensor '" + name + "' needs --deep");
      if (!contains(cfg.tensors, name)) cfg.tensors.push_back(name);
    }
  } else if (command == Command::eval) {
    cfg.tensors = {"G", "R", "B", "D"};
    if (n >= 3) cfg.tensors.push_back("W");
  }

  if (doc.contains("factor")) {
    if (command != Command::projective) throw ConfigError("\"factor\" only applies to projective");
    parse_factor(doc.at("factor"), cfg.metric);  // validates
    cfg.factor = doc.at("factor");
  } else if (command == Command::projective) {
    throw ConfigError("projective needs a \"factor\"");
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    if (o.is_string()) {
      cfg.output_path = o.get<std::string>();
    } else if (o.is_object()) {
      cfg.output_path = o.value("path", std::string());
      cfg.format = o.value("format", std::string("json"));
    } else {
      throw ConfigError("output must be a path or an object");
    }
  }
  if (ov.output) cfg.output_path = *ov.output;
  if (cfg.format != "json") throw ConfigError("unsupported output format '" + cfg.format + "'");

  return cfg;
}

Json echo_config(const RunConfig& cfg) {
  Json j;
  j["command"] = command_name(cfg.command);
  j["metric"] = Json::parse(to_json(cfg.metric).dump());
  Json s;
  s["seed"] = cfg.sampler.seed;
  s["count"] = cfg.sampler.count;
  const int n = metric_dim(cfg.metric);
  Json box = Json::array();
  if (cfg.sampler.x_box.empty())
    for (int i = 0; i < n; ++i) box.push_back(Json::array({-0.5, 0.5}));
  else
    for (const auto& iv : cfg.sampler.x_box) box.push_back(Json::array({iv[0], iv[1]}));
  s["x_box"] = box;
  s["y_radius"] = cfg.sampler.y_radius;
  s["max_parallel_cos"] = cfg.sampler.max_parallel_cos;
  s["min_x_norm"] = cfg.sampler.min_x_norm;
  s["min_points"] = cfg.sampler.min_points;
  s["max_attempts_per_point"] = cfg.sampler.max_attempts_per_point;
  if (!cfg.explicit_points.empty()) {
    Json pts = Json::array();
    for (const auto& p : cfg.explicit_points) pts.push_back(Json{{"x", p.x}, {"y", p.y}});
    s["points"] = pts;
  }
  j["sampler"] = s;
  if (cfg.jet)
    j["jet"] = Json{{"x_order", cfg.jet->x_order}, {"y_order", cfg.jet->y_order}};
  else
    j["jet"] = "default";
  Json t;
  t["rel"] = cfg.tolerances.rel;
  t["nonzero"] = cfg.tolerances.nonzero;
  for (const auto& [k, v] : cfg.tolerances.overrides) t[k] = v;
  j["tolerances"] = t;
  j["checks"] = cfg.checks;
  if (cfg.command == Command::eval) j["tensors"] = cfg.tensors;
  if (cfg.factor) j["factor"] = Json::parse(cfg.factor->dump());
  j["deep"] = cfg.deep;
  j["output"] = Json{{"path", cfg.output_path}, {"format", cfg.format}};
  return j;
}

CommandResult run_command(const RunConfig& cfg) {
  CommandResult res;
  Json rep;
  rep["tool"] = kToolName;
  rep["version"] = kToolVersion;
  rep["command"] = command_name(cfg.command);
  rep["config"] = echo_config(cfg);

  if (cfg.jet) {
    Depth need = cfg.command == Command::eval ? Depth::curvature : Depth::flow;
    for (const auto& t : cfg.tensors)
      if (static_cast<int>(tensor_depth(t)) > static_cast<int>(need)) need = tensor_depth(t);
    if (contains(cfg.checks, "prop53")) need = Depth::deep;
    check_budget(*cfg.jet, need);
  }
  const Points pts = gather_points(cfg);
  rep["sampling"] = pts.sampling;

  int code = kExitOk;
  Json results;
  switch (cfg.command) {
    case Command::eval: results = run_eval(cfg, pts, code); break;
    case Command::classify: results = run_classify(cfg, pts, code); break;
    case Command::verify:
      results = run_checks(cfg, code, [&](const std::string& name) {
        return run_check(name, cfg.metric, pts.valid, cfg.tolerances, cfg.jet);
      });
      break;
    case Command::projective: {
      const ProjectiveFactor P = parse_factor(*cfg.factor, cfg.metric);
      results = run_checks(cfg, code, [&](const std::string& name) {
        CheckReport r;
        r.name = name;
        r.points.resize(pts.valid.size());
        parallel_for(static_cast<int>(pts.valid.size()), [&](int k) {
          const auto idx = static_cast<std::size_t>(k);
          r.points[idx] = projective_point(name, cfg, P, pts.valid[idx]);
          r.points[idx].index = k;
        });
        finish_check(r);
        const auto vac = std::count_if(r.points.begin(), r.points.end(),
                                       [](const CheckPoint& p) { return p.values.count("vacuous") > 0; });
        if (vac > 0)
          r.notes.push_back(std::to_string(vac) +
                            " point(s) vacuous: omega vanishes, so the closure law holds trivially");
        return r;
      });
      results["factor"] = P.describe();
      break;
    }
  }
  rep["results"] = results;
  rep["verdict"] = code == kExitOk ? "pass" : "fail";
  rep["exit_status"] = code;
  res.report = std::move(rep);
  res.exit_code = code;
  return res;
}

Json budget_report(const RunConfig& cfg) {
  const int n = metric_dim(cfg.metric);
  Depth depth = cfg.command == Command::eval ? Depth::curvature : Depth::flow;
  for (const auto& t : cfg.tensors)
    if (static_cast<int>(tensor_depth(t)) > static_cast<int>(depth)) depth = tensor_depth(t);
  if (cfg.deep) depth = Depth::deep;
  JetConfig f2 = cfg.jet ? *cfg.jet
                         : (depth == Depth::curvature && cfg.command == Command::eval ? JetConfig{n, 2, 9}
                                                                                      : standard_config(n));
  Json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command_name(cfg.command);
  j["dim"] = n;
  j["f2_orders"] = Json{{"x_order", f2.x_order}, {"y_order", f2.y_order}};
  const JetConfig need = required_config(n, depth);
  j["required_orders"] = Json{{"x_order", need.x_order}, {"y_order", need.y_order}};
  bool ok = true;
  try {
    check_budget(f2, depth);
  } catch (const TruncationError&) {
    ok = false;
  }
  j["sufficient"] = ok;
  Json rows = Json::array();
  std::size_t total = 0;
  for (const auto& row : order_budget(f2)) {
    Json r;
    r["tensor"] = row.name;
    r["x_order"] = row.x_order;
    r["y_order"] = row.y_order;
    r["components"] = row.components;
    r["coefficients_per_component"] = row.coefficients_per_component;
    r["coefficients"] = row.components * row.coefficients_per_component;
    total += row.components * row.coefficients_per_component;
    rows.push_back(r);
  }
  j["tensors"] = rows;
  j["total_coefficients_per_point"] = total;
  j["points"] = cfg.explicit_points.empty() ? cfg.sampler.count
                                            : static_cast<int>(cfg.explicit_points.size());
  return j;
}

std::string serialize(const Json& report) { return report.dump(2) + "\n"; }

int main_entry(Command command, const std::string& config_path, const Overrides& ov, bool budget,
               std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open configuration '" + config_path + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    cfg = parse_run_config(command, doc, ov);
  } catch (const nlohmann::json::exception& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::string text;
  int code = kExitOk;
  if (budget) {
    text = serialize(budget_report(cfg));
  } else {
    try {
      CommandResult r = run_command(cfg);
      text = serialize(r.report);
      code = r.exit_code;
    } catch (const InsufficientSamplesError& e) {
      err << "sampling failed: " << e.what() << "\n";
      return kExitDomain;
    } catch (const ConfigError& e) {
      err << "configuration error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const DimensionError& e) {
      err << "configuration error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const TruncationError& e) {
      err << "configuration error: " << e.what() << "\n";
      return kExitConfig;
    } catch (const Error& e) {
      err << "evaluation failed: " << e.what() << "\n";
      return kExitDomain;
    }
  }

  if (cfg.output_path.empty() || budget) {
    out << text;
  } else {
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) {
      err << "cannot write '" << cfg.output_path << "'\n";
      return kExitConfig;
    }
    f << text;
  }
  return code;
}

}  // namespace finsler::cli
