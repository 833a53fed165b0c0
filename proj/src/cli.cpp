#include "eqport/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "eqport/errors.hpp"
#include "eqport/spec_parse.hpp"
#include "eqport/statics.hpp"
#include "eqport/verify.hpp"

namespace eqport::cli {

namespace {

using json = nlohmann::ordered_json;
using Dist = RiskAversionDistribution;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

json finite_or_null(double x) {
  return std::isfinite(x) ? json(x) : json(nullptr);
}

json schema(const std::string& cmd) { return {{"schema", "eqport." + cmd + "/1"}}; }

struct Common {
  bool json_out = false;
  std::string config_path;
  std::uint64_t seed = 20240601;
  std::size_t grid = 0;
  std::string csv_path;
  std::string report_path;

  NumericConfig cfg() const {
    return config_path.empty() ? NumericConfig{} : read_config_file(config_path);
  }
  std::size_t intervals(const NumericConfig& c) const { return grid ? grid : c.grid_intervals; }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw PreconditionError("cannot write " + path);
  out << text;
}

void emit(const Common& o, const json& report, const std::string& csv) {
  if (!o.csv_path.empty()) write_file(o.csv_path, csv);
  if (!o.report_path.empty()) write_file(o.report_path, report.dump(2) + "\n");
  if (o.json_out || csv.empty()) std::cout << report.dump(2) << "\n";
  else std::cout << csv;
}

json verdict_json(const OrderVerdict& v) {
  const char* s = v.status == OrderVerdict::Status::dominates ? "dominates"
                  : v.status == OrderVerdict::Status::fails   ? "fails"
                                                              : "inapplicable";
  json j{{"status", s}};
  if (v.status == OrderVerdict::Status::fails) j["fails_at"] = v.fails_at;
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

json report_json(const EquilibriumReport& r) {
  json j{{"regime", to_string(r.regime)},
         {"h_infinity", {{"kind", to_string(r.h_infinity.kind)},
                         {"value", finite_or_null(r.h_infinity.value)}}},
         {"h_zero", {{"regime", to_string(r.h_zero.regime)},
                     {"exponent", r.h_zero.exponent},
                     {"approximate", r.h_zero.approximate}}},
         {"lambda0", r.lambda0}};
  if (r.mean.is_finite()) j["mean"] = r.mean.value;
  else j["mean"] = r.mean.is_infinite() ? "infinite" : "unknown";
  if (r.eta_set)
    j["eta_set"] = {{"lo", r.eta_set->lo}, {"hi", r.eta_set->hi}, {"lo_open", r.eta_set->lo_open}};
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

std::string curve_csv(const StrategyCurve& c) {
  std::ostringstream s;
  s << "t,v";
  for (int i = 1; i <= c.dimension; ++i) s << ",a_" << i;
  for (int i = 1; i <= c.dimension; ++i) s << ",pi_" << i;
  s << ",J0\n";
  for (std::size_t k = 0; k < c.size(); ++k) {
    s << num(c.t[k]) << "," << num(c.v[k]);
    for (int i = 0; i < c.dimension; ++i) s << "," << num(c.a[k][i]);
    for (int i = 0; i < c.dimension; ++i) s << "," << num(c.pi[k][i]);
    s << "," << num(c.j0[k]) << "\n";
  }
  return s.str();
}

json curve_summary(const StrategyCurve& c) {
  json j{{"points", c.size()},
         {"v0", c.v.front()},
         {"abs_a0", c.a.front().norm()},
         {"J0_0", c.j0.front()}};
  if (c.family_t0) j["t0"] = *c.family_t0;
  return j;
}

std::string traces_csv(const std::vector<double>& t, const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& cols) {
  std::ostringstream s;
  s << "t";
  for (const auto& n : names) s << "," << n;
  s << "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    s << num(t[i]);
    for (const auto* c : cols) s << "," << num((*c)[i]);
    s << "\n";
  }
  return s.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

json crossing_json(const CrossingReport& r) {
  json j{{"found", r.found},
         {"d_at_0", r.d_at_0},
         {"d_at_T", r.d_at_T},
         {"grid_sign_changes", r.grid_sign_changes}};
  if (r.found) {
    j["t_star"] = r.t_star;
    j["d_prime"] = r.d_prime;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json reversal_json(const ReversalOutcome& r) {
  json j{{"found", r.found}, {"t_max", r.t_max}};
  if (r.found) j["bracket"] = {r.lo, r.hi};
  return j;
}

// Contiguous runs of grid points where `flag` holds.
json regions(const std::vector<double>& t, const std::vector<bool>& flag) {
  json out = json::array();
  for (std::size_t i = 0; i < t.size();) {
    if (!flag[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < t.size() && flag[j + 1]) ++j;
    out.push_back({t[i], t[j]});
    i = j + 1;
  }
  return out;
}

int regime_failure(const json& report, const std::string& message) {
  std::cout << report.dump(2) << "\n";
  json e = schema("error");
  e["kind"] = "regime";
  e["message"] = message;
  std::cerr << e.dump() << "\n";
  return 2;
}

int cmd_solve(const Common& o, const std::string& dist, const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const PreferenceKernel k(parse_distribution(dist), cfg);
  const EquilibriumReport rep = classify(k, m);
  json j = schema("solve");
  j["dist"] = k.dist().describe();
  j["report"] = report_json(rep);
  if (rep.regime == Regime::nonexistent_deterministic || rep.regime == Regime::undetermined)
    return regime_failure(j, rep.reason.empty() ? to_string(rep.regime) : rep.reason);
  const StrategyCurve c = solve_equilibrium(k, m, TimeGrid::uniform(m, o.intervals(cfg)));
  j["curve"] = curve_summary(c);
  j["fixed_point_residual"] = c.fixed_point_residual(k, m);
  emit(o, j, curve_csv(c));
  return 0;
}

int cmd_enumerate(const Common& o, const std::string& dist, const std::string& market,
                  std::size_t eta_points) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const PreferenceKernel k(parse_distribution(dist), cfg);
  const auto rep = classify(k, m);
  json j = schema("enumerate");
  j["report"] = report_json(rep);
  if (rep.regime != Regime::family_infinite)
    return regime_failure(j, std::string("enumerate needs the family regime, got ") +
                                 to_string(rep.regime));
  const auto members = enumerate_family(k, m, TimeGrid::uniform(m, o.intervals(cfg)),
                                        eta_points ? eta_points : cfg.eta_points);
  std::ostringstream csv;
  csv << "eta,t0,J0_0,abs_a0\n";
  j["members"] = json::array();
  for (const auto& mem : members) {
    csv << num(mem.eta) << "," << num(mem.t0) << "," << num(mem.curve.j0.front()) << ","
        << num(mem.curve.a.front().norm()) << "\n";
    j["members"].push_back({{"eta", mem.eta},
                            {"t0", mem.t0},
                            {"J0_0", mem.curve.j0.front()},
                            {"abs_a0", mem.curve.a.front().norm()}});
  }
  emit(o, j, csv.str());
  return 0;
}

int cmd_optimal(const Common& o, const std::string& dist, const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const PreferenceKernel k(parse_distribution(dist), cfg);
  const auto out = optimal_equilibrium(k, m, TimeGrid::uniform(m, o.intervals(cfg)));
  json j = schema("optimal");
  j["exists"] = out.exists;
  if (!out.exists) {
    json r = j;
    r["report"] = report_json(classify(k, m));
    return regime_failure(r, "no optimal equilibrium: the law is not in the family regime");
  }
  j["t0"] = out.t0;
  j["optimal"] = out.optimal;
  j["uniformly_optimal"] = out.uniformly_optimal;
  j["uniformly_strictly_optimal"] = out.uniformly_strictly_optimal;
  j["eta_set"] = {{"lo", out.eta_set.lo}, {"hi", out.eta_set.hi}, {"lo_open", out.eta_set.lo_open}};
  j["curve"] = curve_summary(out.curve);
  emit(o, j, curve_csv(out.curve));
  return 0;
}

int cmd_compare(const Common& o, const std::string& d1, const std::string& d2,
                const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const PreferenceKernel k1(parse_distribution(d1), cfg), k2(parse_distribution(d2), cfg);
  const auto r = compare_pointwise(k1, k2, m, TimeGrid::uniform(m, o.intervals(cfg)));
  json j = schema("compare");
  j["rh"] = verdict_json(r.rh);
  j["fsd"] = verdict_json(r.fsd);
  j["violations"] = r.violations;
  j["tie_tol"] = r.tie_tol;
  j["crossing_cells"] = json::array();
  for (const auto& [a, b] : r.crossing_cells) j["crossing_cells"].push_back({a, b});
  emit(o, j, traces_csv(r.t, {"abs_a1", "abs_a2"}, {&r.abs_a1, &r.abs_a2}));
  return 0;
}

int cmd_crossing(const Common& o, const std::string& d1, const std::string& d2,
                 const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const auto l1 = TwoPointLaw::from(parse_distribution(d1));
  const auto l2 = TwoPointLaw::from(parse_distribution(d2));
  const auto r = find_crossing(l1, l2, m, cfg);
  const PreferenceKernel k1(l1.dist(), cfg), k2(l2.dist(), cfg);
  const auto cmp = compare_pointwise(k1, k2, m, TimeGrid::uniform(m, o.intervals(cfg)));
  json j = schema("crossing");
  j["crossing"] = crossing_json(r);
  j["fsd"] = verdict_json(cmp.fsd);
  emit(o, j, traces_csv(cmp.t, {"abs_a1", "abs_a2"}, {&cmp.abs_a1, &cmp.abs_a2}));
  return 0;
}

int cmd_reversal(const Common& o, const std::string& d1, const std::string& d2,
                 const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const PreferenceKernel k1(parse_distribution(d1), cfg), k2(parse_distribution(d2), cfg);
  json j = schema("reversal");
  j["reversal"] = reversal_json(reversal_horizon(k1, k2, m, cfg));
  emit(o, j, "");
  return 0;
}

int cmd_sweep(const Common& o, const std::string& d1, const std::string& d2,
              const std::string& market, const std::string& param,
              const std::vector<double>& values) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  SweepParameter which;
  if (param == "both_p") which = SweepParameter::both_p;
  else if (param == "p1") which = SweepParameter::p1;
  else if (param == "p2") which = SweepParameter::p2;
  else throw PreconditionError("--param must be both_p, p1 or p2");
  const auto tr = crossing_sensitivity(TwoPointLaw::from(parse_distribution(d1)),
                                       TwoPointLaw::from(parse_distribution(d2)), m, which,
                                       values, cfg);
  json j = schema("sweep-crossing");
  j["param"] = to_string(tr.which);
  j["expected_increasing"] = tr.expected_increasing;
  j["monotone"] = tr.monotone;
  j["rows"] = json::array();
  std::ostringstream csv;
  csv << "p,t_star,found\n";
  for (std::size_t i = 0; i < tr.p.size(); ++i) {
    csv << num(tr.p[i]) << "," << num(tr.t_star[i]) << "," << (tr.found[i] ? 1 : 0) << "\n";
    j["rows"].push_back({{"p", tr.p[i]}, {"t_star", tr.t_star[i]}, {"found", bool(tr.found[i])}});
  }
  emit(o, j, csv.str());
  return 0;
}

int cmd_aggregate(const Common& o, const std::string& mode, const std::string& components,
                  const std::vector<double>& weights, const std::string& base,
                  const std::vector<int>& ns, const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const TimeGrid grid = TimeGrid::uniform(m, o.intervals(cfg));
  if (mode == "combination") {
    std::vector<Dist> comps;
    for (const auto& s : split(components, ';')) comps.push_back(parse_distribution(s));
    const auto r = convex_combination_compare(comps, weights, m, grid, cfg);
    json j = schema("aggregate");
    j["mode"] = mode;
    j["above_count"] = r.above_count;
    j["above_first"] = r.above_first;
    j["iid_equal_weights"] = r.iid_equal_weights;
    j["regions"] = regions(r.t, r.above_all);
    std::vector<std::string> names{"abs_mix"};
    std::vector<const std::vector<double>*> cols{&r.abs_mix};
    for (std::size_t i = 0; i < r.abs_components.size(); ++i) {
      names.push_back("abs_a" + std::to_string(i + 1));
      cols.push_back(&r.abs_components[i]);
    }
    emit(o, j, traces_csv(r.t, names, cols));
    return 0;
  }
  if (mode == "sample-mean") {
    const auto tr = sample_mean_aggregation(parse_distribution(base), ns, m, grid, cfg);
    json j = schema("aggregate");
    j["mode"] = mode;
    j["n"] = tr.n;
    j["monotone"] = tr.monotone;
    j["limit_rel_deviation"] = tr.limit_rel_deviation;
    std::vector<std::string> names;
    std::vector<const std::vector<double>*> cols;
    for (std::size_t i = 0; i < tr.n.size(); ++i) {
      names.push_back("abs_a_n" + std::to_string(tr.n[i]));
      cols.push_back(&tr.exposure[i]);
    }
    emit(o, j, traces_csv(tr.t, names, cols));
    return 0;
  }
  throw PreconditionError("--mode must be combination or sample-mean");
}

int cmd_verify(const Common& o, const std::string& dist_spec, const std::string& market,
               std::size_t paths, std::size_t directions, std::size_t times, double scale,
               std::vector<double> mc_times) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const Dist dist = parse_distribution(dist_spec);
  const PreferenceKernel k(dist, cfg);
  const TimeGrid grid = TimeGrid::uniform(m, o.intervals(cfg), {0.5 * m.horizon()});
  StrategyCurve c = solve_equilibrium(k, m, grid);
  if (scale != 1.0) c = scale_exposure(c, m, dist, scale);
  const auto cert =
      equilibrium_certificate(c, m, dist, directions, times, o.seed, cfg.certificate_tol);
  json j = schema("verify");
  j["dist"] = dist.describe();
  j["exposure_scale"] = scale;
  j["certificate"] = {{"kind", "necessary-condition check"},
                      {"pass", cert.pass},
                      {"tol", cert.tol},
                      {"seed", cert.seed},
                      {"worst_scaled_slope", cert.worst_slope},
                      {"worst", {{"t", cert.worst.t},
                                 {"k", std::vector<double>(cert.worst.k.data(),
                                                           cert.worst.k.data() + cert.worst.k.size())},
                                 {"slope", cert.worst.slope},
                                 {"J0", cert.worst.j0}}}};
  std::ostringstream csv;
  csv << "t,k_norm,slope,J0\n";
  json probes = json::array();
  for (const auto& p : cert.probes) {
    csv << num(p.t) << "," << num(p.k.norm()) << "," << num(p.slope) << "," << num(p.j0) << "\n";
    probes.push_back({{"t", p.t},
                      {"k", std::vector<double>(p.k.data(), p.k.data() + p.k.size())},
                      {"slope", p.slope},
                      {"J0", p.j0}});
  }
  j["certificate"]["probes"] = probes;
  if (mc_times.empty()) mc_times = {0.0, 0.5 * m.horizon()};
  if (paths > 0) {
    SimConfig sim;
    sim.paths = paths;
    sim.seed = o.seed;
    j["monte_carlo"] = json::array();
    for (double t : mc_times) {
      const auto e = mc_objective(c, m, dist, t, sim);
      const auto it = std::lower_bound(c.t.begin(), c.t.end(), t - 1e-12 * m.horizon());
      const std::size_t i = static_cast<std::size_t>(it - c.t.begin());
      const double closed = std::exp(c.y[i] + dist.log_laplace(0.5 * c.v[i]));
      j["monte_carlo"].push_back({{"t", t},
                                  {"estimate", e.value},
                                  {"stderr", e.stderr_},
                                  {"closed_form", closed},
                                  {"z", e.stderr_ > 0 ? (e.value - closed) / e.stderr_ : 0.0},
                                  {"paths", e.paths},
                                  {"seed", e.seed},
                                  {"threads", e.threads}});
    }
  }
  emit(o, j, csv.str());
  return 0;
}

int cmd_converge(const Common& o, const std::string& dist, const std::vector<int>& ns,
                 const std::string& market) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = parse_market(market);
  const Dist limit = parse_distribution(dist);
  std::vector<Dist> seq;
  for (int n : ns) seq.push_back(quantile_discretization(limit, n));
  const auto tr = kernel_sequence_convergence(seq, limit, m, TimeGrid::uniform(m, o.intervals(cfg)), cfg);
  json j = schema("converge");
  j["n"] = ns;
  j["sup_error"] = tr.sup_error;
  j["decreasing"] = tr.decreasing;
  std::ostringstream csv;
  csv << "n,sup_error\n";
  for (std::size_t i = 0; i < ns.size(); ++i) csv << ns[i] << "," << num(tr.sup_error[i]) << "\n";
  emit(o, j, csv.str());
  return 0;
}

int cmd_fig1(const Common& o) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = MarketModel::constant(0.4, 0.2, 20.0);
  const TwoPointLaw l1{1.0, 2.0, 0.9}, l2{1.0, 1.0, 0.9};
  const PreferenceKernel k1(l1.dist(), cfg), k2(l2.dist(), cfg);
  const auto cmp = compare_pointwise(k1, k2, m, TimeGrid::uniform(m, o.intervals(cfg)));
  const auto cr = find_crossing(l1, l2, m, cfg);
  json j = schema("fig1");
  j["lambda"] = 0.4;
  j["T"] = 20.0;
  j["dist1"] = l1.dist().describe();
  j["dist2"] = l2.dist().describe();
  j["fsd"] = verdict_json(cmp.fsd);
  j["rh"] = verdict_json(cmp.rh);
  j["crossing"] = crossing_json(cr);
  std::vector<bool> reversal;
  for (int s : cmp.profile) reversal.push_back(s > 0);
  j["reversal_regions"] = regions(cmp.t, reversal);
  j["reversal_horizon"] = reversal_json(reversal_horizon(k1, k2, m, cfg));
  emit(o, j, traces_csv(cmp.t, {"abs_a1", "abs_a2"}, {&cmp.abs_a1, &cmp.abs_a2}));
  return 0;
}

int cmd_fig2(const Common& o) {
  const NumericConfig cfg = o.cfg();
  const MarketModel m = MarketModel::constant(0.5, 0.2, 50.0);
  const std::vector<Dist> comps{Dist::discrete({0.1, 8.0}, {0.2, 0.8}), Dist::point(1.5)};
  const auto r = convex_combination_compare(comps, {0.5, 0.5}, m,
                                            TimeGrid::uniform(m, o.intervals(cfg)), cfg);
  json j = schema("fig2");
  j["lambda"] = 0.5;
  j["T"] = 50.0;
  j["dist1"] = comps[0].describe();
  j["dist2"] = comps[1].describe();
  j["weights"] = {0.5, 0.5};
  j["above_count"] = r.above_count;
  j["reversal_regions"] = regions(r.t, r.above_all);
  emit(o, j, traces_csv(r.t, {"abs_mix", "abs_a1", "abs_a2"},
                        {&r.abs_mix, &r.abs_components[0], &r.abs_components[1]}));
  return 0;
}

void apply_thread_cap() {
  if (const char* env = std::getenv("EQPORT_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw PreconditionError("EQPORT_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(n));
  }
}

int error_exit(const Error& e, int code) {
  json j = schema("error");
  j["kind"] = e.kind();
  j["message"] = e.what();
  if (const auto* p = dynamic_cast<const ParseError*>(&e)) {
    j["line"] = p->line();
    j["column"] = p->column();
  }
  if (const auto* n = dynamic_cast<const NoSolution*>(&e)) {
    j["z"] = n->z();
    j["h_infinity"] = n->h_infinity();
  }
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Equilibrium portfolios under random risk aversion"};
  app.require_subcommand(1);
  app.fallthrough();
  Common o;
  app.add_flag("--json", o.json_out, "Write the JSON report to stdout instead of CSV");
  app.add_option("--config", o.config_path, "key = value file overriding numerical settings");
  app.add_option("--seed", o.seed, "Seed for random probes and Monte Carlo");
  app.add_option("--grid", o.grid, "Uniform grid intervals (default from config: 2000)");
  app.add_option("--csv", o.csv_path, "Also write the CSV output to this file");
  app.add_option("--report", o.report_path, "Also write the JSON report to this file");

  std::string dist, dist2, market, param = "both_p", mode, components, base;
  std::vector<double> values, weights, mc_times;
  std::vector<int> ns;
  std::size_t eta_points = 0, paths = 200000, directions = 100, times = 10;
  double scale = 1.0;

  auto add_dist = [&](CLI::App* s) { s->add_option("--dist", dist, "Law of R")->required(); };
  auto add_market = [&](CLI::App* s) {
    s->add_option("--market", market, "Market spec")->required();
  };
  auto add_pair = [&](CLI::App* s) {
    s->add_option("--dist1", dist, "First law")->required();
    s->add_option("--dist2", dist2, "Second law")->required();
    add_market(s);
  };

  auto* solve = app.add_subcommand("solve", "Classify and solve the equilibrium curve");
  add_dist(solve);
  add_market(solve);
  auto* enumerate = app.add_subcommand("enumerate", "Members of the infinite-mean family");
  add_dist(enumerate);
  add_market(enumerate);
  enumerate->add_option("--eta-grid", eta_points, "Number of levels (default 11)");
  auto* optimal = app.add_subcommand("optimal", "Optimal family member and its flags");
  add_dist(optimal);
  add_market(optimal);
  auto* compare = app.add_subcommand("compare", "Pointwise |a1| vs |a2| with order verdicts");
  add_pair(compare);
  auto* crossing = app.add_subcommand("crossing", "Crossing time for two two-point laws");
  add_pair(crossing);
  auto* reversal = app.add_subcommand("reversal", "Smallest horizon with |a1(0)| > |a2(0)|");
  add_pair(reversal);
  auto* sweep = app.add_subcommand("sweep-crossing", "Crossing time over a grid of p");
  add_pair(sweep);
  sweep->add_option("--param", param, "both_p, p1 or p2");
  sweep->add_option("--values", values, "Grid of p values")->delimiter(',')->required();
  auto* aggregate = app.add_subcommand("aggregate", "Convex combinations or sample means");
  aggregate->add_option("--mode", mode, "combination or sample-mean")->required();
  aggregate->add_option("--components", components, "Laws separated by ';'");
  aggregate->add_option("--weights", weights, "Combination weights")->delimiter(',');
  aggregate->add_option("--base", base, "Base law for sample means");
  aggregate->add_option("--n", ns, "Sample sizes")->delimiter(',');
  add_market(aggregate);
  auto* verify = app.add_subcommand("verify", "Equilibrium certificate and Monte Carlo check");
  add_dist(verify);
  add_market(verify);
  verify->add_option("--paths", paths, "Monte Carlo paths (0 skips the simulation)");
  verify->add_option("--directions", directions, "Random directions per time");
  verify->add_option("--times", times, "Random grid times");
  verify->add_option("--scale", scale, "Multiply the exposure before checking");
  verify->add_option("--mc-t", mc_times, "Simulation start times (default 0 and T/2)")
      ->delimiter(',');
  auto* converge = app.add_subcommand("converge", "Quantile discretizations converging to a law");
  add_dist(converge);
  add_market(converge);
  converge->add_option("--n", ns, "Discretization sizes")->delimiter(',')->required();
  auto* fig1 = app.add_subcommand("fig1", "Two-point crossing example (lambda 0.4, T 20)");
  auto* fig2 = app.add_subcommand("fig2", "Mixture reversal example (lambda 0.5, T 50)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    json j = schema("error");
    j["kind"] = "usage";
    j["message"] = e.what();
    std::cerr << j.dump() << "\n";
    return 2;
  }

  try {
    apply_thread_cap();
    if (*solve) return cmd_solve(o, dist, market);
    if (*enumerate) return cmd_enumerate(o, dist, market, eta_points);
    if (*optimal) return cmd_optimal(o, dist, market);
    if (*compare) return cmd_compare(o, dist, dist2, market);
    if (*crossing) return cmd_crossing(o, dist, dist2, market);
    if (*reversal) return cmd_reversal(o, dist, dist2, market);
    if (*sweep) return cmd_sweep(o, dist, dist2, market, param, values);
    if (*aggregate) return cmd_aggregate(o, mode, components, weights, base, ns, market);
    if (*verify)
      return cmd_verify(o, dist, market, paths, directions, times, scale, mc_times);
    if (*converge) return cmd_converge(o, dist, ns, market);
    if (*fig1) return cmd_fig1(o);
    if (*fig2) return cmd_fig2(o);
  } catch (const NumericError& e) {
    return error_exit(e, 3);
  } catch (const Error& e) {
    return error_exit(e, 2);
  }
  return 2;
}

}  // namespace eqport::cli
