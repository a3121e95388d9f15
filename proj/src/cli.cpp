#include "nscop/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "nscop/arrival_theory.hpp"
#include "nscop/calibration.hpp"
#include "nscop/copulas.hpp"
#include "nscop/errors.hpp"
#include "nscop/estimators.hpp"
#include "nscop/experiments.hpp"
#include "nscop/random.hpp"
#include "nscop/synthesis.hpp"

namespace nscop {

using nlohmann::json;

void write_paired_csv(std::ostream& out, const PairedSeries& p) {
  out << "# scheme=" << to_string(p.scheme) << "\n# delta=" << std::setprecision(17) << p.delta
      << "\n# raw1=" << p.raw1 << "\n# raw2=" << p.raw2 << "\n";
  out << "t1,x,t2,y,overlap,config\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    out << p.t1[i] << ',' << p.x[i] << ',' << p.t2[i] << ',' << p.y[i] << ',';
    if (i > 0) {
      out << overlap(p.t1[i - 1], p.t2[i - 1], p.t1[i], p.t2[i]) << ','
          << configuration(p.t1[i - 1], p.t2[i - 1], p.t1[i], p.t2[i]);
    } else {
      out << ',';
    }
    out << '\n';
  }
}

namespace {

double to_double(std::string_view s, std::size_t row) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    fail(ErrorKind::MalformedInput, "bad number at row " + std::to_string(row));
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == ',') {
      f.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  return f;
}

}  // namespace

PairedSeries load_paired_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::MalformedInput, "cannot open " + path.string());
  PairedSeries p;
  std::string line;
  bool header = false;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      try {
        if (key == "scheme") p.scheme = parse_scheme(value);
        else if (key == "delta") p.delta = std::stod(value);
        else if (key == "raw1") p.raw1 = std::stoul(value);
        else if (key == "raw2") p.raw2 = std::stoul(value);
      } catch (const std::logic_error&) {
        fail(ErrorKind::MalformedInput, "bad metadata line '" + line + "'");
      }
      continue;
    }
    if (!header) {
      if (line.rfind("t1,x,t2,y", 0) != 0) fail(ErrorKind::MalformedInput, "expected header t1,x,t2,y,...");
      header = true;
      continue;
    }
    ++row;
    const auto f = split(line);
    if (f.size() < 4) fail(ErrorKind::MalformedInput, "too few columns at row " + std::to_string(row));
    p.t1.push_back(to_double(f[0], row));
    p.x.push_back(to_double(f[1], row));
    p.t2.push_back(to_double(f[2], row));
    p.y.push_back(to_double(f[3], row));
  }
  if (!header) fail(ErrorKind::MalformedInput, "missing header in " + path.string());
  return p;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to --out when given, otherwise to the command's output stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) fail(ErrorKind::MalformedInput, "cannot write " + path);
    }
    os_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

std::vector<std::string> meta_lines(std::uint64_t seed) {
  return {"rng=" + std::string(kRngName), "seed=" + std::to_string(seed),
          std::string("version=") + NSCOP_VERSION};
}

json diagnostics_json(const PairDiagnostics& d, std::size_t n) {
  return {{"n", n},         {"w", d.correction_factor()}, {"m1", d.m1},      {"m2", d.m2},
          {"mI", d.mI},     {"loss1", d.loss1},           {"loss2", d.loss2}};
}

json interval_json(const IntervalEstimate& e) {
  return {{"method", to_string(e.method)}, {"point", e.point}, {"lo", e.lo},
          {"hi", e.hi}, {"level", e.level}, {"extrapolated", e.extrapolated}};
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::size_t row = 0;
  for (auto f : split(s)) v.push_back(to_double(f, ++row));
  return v;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dependence estimation for nonsynchronous tick data", "nscop"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", NSCOP_VERSION);
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_path;
  app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
  app.add_option("--threads", threads, "worker cap for Monte Carlo loops (0 = all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate two nonsynchronous tick series");
  std::string family = "gaussian", margin1 = "normal", margin2 = "normal", prefix;
  double param = 0.5, lambda1 = 1.0, lambda2 = 1.0;
  int df = 8;
  std::size_t n = 1000;
  std::optional<std::size_t> n1, n2;
  std::optional<double> horizon;
  bool synchronous = false;
  sim->add_option("--family", family, "gaussian|t|clayton|gumbel")->capture_default_str();
  sim->add_option("--param", param, "copula parameter (rho or theta)")->capture_default_str();
  sim->add_option("--df", df, "t copula degrees of freedom")->capture_default_str();
  sim->add_option("--lambda1", lambda1)->capture_default_str();
  sim->add_option("--lambda2", lambda2)->capture_default_str();
  sim->add_option("--n", n, "ticks per asset")->capture_default_str();
  sim->add_option("--n1", n1);
  sim->add_option("--n2", n2);
  sim->add_option("--horizon", horizon, "simulate over (0, horizon] instead of fixed counts");
  sim->add_option("--margin1", margin1, "normal | normal:mu,sigma | t:df")->capture_default_str();
  sim->add_option("--margin2", margin2)->capture_default_str();
  sim->add_flag("--synchronous", synchronous, "no deletion: both assets see every event");
  sim->add_option("--out", prefix, "output prefix")->required();

  // pair
  auto* pr = app.add_subcommand("pair", "synchronise two tick files");
  std::string file_a, file_b, scheme = "a0";
  std::optional<double> delta;
  pr->add_option("--a", file_a, "asset 1 tick CSV")->required()->check(CLI::ExistingFile);
  pr->add_option("--b", file_b, "asset 2 tick CSV")->required()->check(CLI::ExistingFile);
  pr->add_option("--scheme", scheme, "a0|prev-tick|refresh")->capture_default_str();
  pr->add_option("--delta", delta, "previous-tick grid spacing (default 1/l1+1/l2 estimated)");
  pr->add_option("--out", out_path);

  // theory
  auto* th = app.add_subcommand("theory", "closed-form Poisson arrival quantities");
  double tol = 1e-12;
  th->add_option("--lambda1", lambda1)->required();
  th->add_option("--lambda2", lambda2)->required();
  th->add_option("--tol", tol)->capture_default_str();
  th->add_option("--out", out_path);

  // estimate
  auto* est = app.add_subcommand("estimate", "corrected correlation or Kendall tau of paired data");
  std::string paired_file, method = "corrected-corr", basis = "all";
  double level = 0.95;
  std::vector<int> labels{1, 4};
  est->add_option("--paired", paired_file)->required()->check(CLI::ExistingFile);
  est->add_option("--method", method, "corrected-corr|kendall")->capture_default_str();
  est->add_option("--level", level)->capture_default_str();
  est->add_option("--basis", basis, "all|same-config (kendall)")->capture_default_str();
  est->add_option("--labels", labels, "configuration labels for same-config")->delimiter(',');
  est->add_option("--out", out_path);

  // select-copula
  auto* sel = app.add_subcommand("select-copula", "rank copula families by AIC");
  std::vector<std::string> families{"gaussian", "t", "clayton", "gumbel"};
  std::optional<int> fixed_df;
  sel->add_option("--paired", paired_file)->required()->check(CLI::ExistingFile);
  sel->add_option("--families", families)->delimiter(',');
  sel->add_option("--df", fixed_df, "fix t df instead of profiling 3..30");
  sel->add_option("--out", out_path);

  // plugin-eval
  auto* pe = app.add_subcommand("plugin-eval", "evaluate the plug-in copula over return space");
  double theta = 0.0;
  std::string r1_list, r2_list;
  pe->add_option("--paired", paired_file)->required()->check(CLI::ExistingFile);
  pe->add_option("--family", family)->capture_default_str();
  pe->add_option("--theta", theta, "copula parameter, e.g. the corrected estimate")->required();
  pe->add_option("--df", df)->capture_default_str();
  pe->add_option("--r1", r1_list, "comma-separated asset-1 return grid")->required();
  pe->add_option("--r2", r2_list, "comma-separated asset-2 return grid")->required();
  pe->add_option("--out", out_path);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Monte Carlo correction curve for Kendall tau");
  std::size_t k = 12, n_rep = 1000, n_ticks = 330;
  std::string fam_cal = "clayton";
  cal->add_option("--family", fam_cal)->capture_default_str();
  cal->add_option("--df", df)->capture_default_str();
  cal->add_option("--k", k, "grid points")->capture_default_str();
  cal->add_option("--n-rep", n_rep, "replicates per grid point")->capture_default_str();
  cal->add_option("--lambda1", lambda1)->capture_default_str();
  cal->add_option("--lambda2", lambda2)->capture_default_str();
  cal->add_option("--n-ticks", n_ticks, "ticks per asset per replicate")->capture_default_str();
  cal->add_option("--margin1", margin1)->capture_default_str();
  cal->add_option("--margin2", margin2)->capture_default_str();
  cal->add_flag("--synchronous", synchronous);
  cal->add_option("--out", out_path)->required();

  // intervals
  auto* iv = app.add_subcommand("intervals", "interval estimate for the true Kendall tau");
  std::string curve_file, iv_method = "quad";
  std::optional<double> tau_hat;
  iv->add_option("--curve", curve_file)->check(CLI::ExistingFile);
  iv->add_option("--tau-hat", tau_hat, "uncorrected Kendall tau");
  iv->add_option("--paired", paired_file, "paired CSV (elliptical method, or to compute tau-hat)")
      ->check(CLI::ExistingFile);
  iv->add_option("--level", level)->capture_default_str();
  iv->add_option("--method", iv_method, "quad|quantile|elliptical")->capture_default_str();
  iv->add_option("--out", out_path);

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "rerun a simulation table");
  std::string table;
  ExperimentOptions eopt;
  rep->add_option("table", table, "table1|table2|table3|coverage")->required();
  rep->add_option("--n-rep", eopt.n_rep)->capture_default_str();
  rep->add_option("--cal-k", eopt.cal_k)->capture_default_str();
  rep->add_option("--cal-rep", eopt.cal_rep)->capture_default_str();
  rep->add_option("--cal-ticks", eopt.cal_ticks)->capture_default_str();
  rep->add_option("--table3-n", eopt.table3_n)->capture_default_str();
  rep->add_option("--out", out_path);

  auto error_json = [&](std::string_view kind, const std::string& message) {
    err << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
  };

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_json("UsageError", e.what());
    return 2;
  }
  thread_cap() = threads;

  try {
    if (*sim) {
      SimSpec spec;
      spec.model = CopulaModel::make(parse_family(family), param, df);
      spec.margins = {MarginSpec::parse(margin1), MarginSpec::parse(margin2)};
      spec.lambda1 = lambda1;
      spec.lambda2 = lambda2;
      spec.n1 = n1.value_or(n);
      spec.n2 = n2.value_or(n);
      spec.horizon = horizon;
      spec.synchronous = synchronous;
      spec.seed = seed;
      const auto res = simulate(spec);
      auto meta = meta_lines(seed);
      meta.push_back("model=" + spec.model.describe());
      write_ticks(prefix + "_asset1.csv", res.a, meta);
      write_ticks(prefix + "_asset2.csv", res.b, meta);
      json truth = {{"family", to_string(res.truth.family)}, {"param", res.truth.param},
                    {"tau", res.true_tau}, {"rng", std::string(kRngName)}, {"seed", seed},
                    {"lambda1", lambda1}, {"lambda2", lambda2}, {"n1", res.a.size()},
                    {"n2", res.b.size()}, {"margin1", spec.margins.first.describe()},
                    {"margin2", spec.margins.second.describe()}, {"synchronous", synchronous},
                    {"version", NSCOP_VERSION}};
      if (res.truth.family == Family::StudentT) truth["df"] = res.truth.df;
      std::ofstream(prefix + "_truth.json") << truth.dump(2) << '\n';
      out << json{{"asset1", prefix + "_asset1.csv"}, {"asset2", prefix + "_asset2.csv"},
                  {"truth", prefix + "_truth.json"}}.dump() << '\n';
    } else if (*pr) {
      const auto a = load_ticks(file_a, "asset1");
      const auto b = load_ticks(file_b, "asset2");
      const auto s = parse_scheme(scheme);
      double d = 0.0;
      if (s == PairingScheme::PreviousTick) {
        if (delta) {
          d = *delta;
        } else {
          const auto r = estimate_rates(a, b);
          d = 1.0 / r.lambda1 + 1.0 / r.lambda2;
        }
      }
      Sink sink(out_path, out);
      write_paired_csv(*sink, pair(a, b, s, d));
    } else if (*th) {
      if (!(tol > 0.0)) fail(ErrorKind::InvalidParameter, "tol must be positive");
      const auto r = theory_report(PoissonPair(lambda1, lambda2), tol);
      Sink sink(out_path, out);
      *sink << json{{"lambda1", r.lambda1}, {"lambda2", r.lambda2},
                    {"expected_overlap", r.expected_overlap}, {"eta1", r.eta1}, {"eta2", r.eta2},
                    {"expected_dt1", r.expected_dt1}, {"expected_dt2", r.expected_dt2},
                    {"gamma", r.gamma}, {"truncation_n", r.truncation_n},
                    {"truncation_error_bound", r.truncation_error_bound}}.dump(2) << '\n';
    } else if (*est) {
      const auto p = load_paired_csv(paired_file);
      json report;
      if (method == "corrected-corr") {
        const auto c = corrected_correlation(p, level);
        report = {{"method", "corrected-corr"}, {"point", c.theta_hat}, {"rho_hat", c.rho_hat},
                  {"clamped", c.clamped},
                  {"interval", {{"lo", c.ci->lo}, {"hi", c.ci->hi}, {"level", c.ci->level}}},
                  {"diagnostics", diagnostics_json(c.diag, c.n)}};
      } else if (method == "kendall") {
        TauBasis b;
        if (basis == "all") b = TauBasis::AllPairs;
        else if (basis == "same-config") b = TauBasis::SameConfig;
        else throw UsageError("--basis must be all or same-config");
        const auto t = kendall_tau(p, b, labels);
        report = {{"method", "kendall"}, {"point", t.tau_hat}, {"basis", to_string(t.basis)},
                  {"n_used", t.n_used}, {"ties", t.ties},
                  {"diagnostics", diagnostics_json(diagnostics(p), p.size())}};
        if (b == TauBasis::SameConfig) report["labels"] = t.labels;
      } else {
        throw UsageError("--method must be corrected-corr or kendall");
      }
      Sink sink(out_path, out);
      *sink << report.dump(2) << '\n';
    } else if (*sel) {
      const auto p = load_paired_csv(paired_file);
      const auto ret = paired_returns(p);
      const auto pseudo = pseudo_observations(ret.r1, ret.r2);
      std::vector<Family> fams;
      for (const auto& f : families) fams.push_back(parse_family(f));
      FitOptions fo;
      fo.t_df = fixed_df;
      const auto fits = fit_aic(pseudo, fams, fo);
      Sink sink(out_path, out);
      *sink << "rank,family,param,df,tau,loglik,aic,n_params,at_boundary\n" << std::setprecision(10);
      for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        *sink << i + 1 << ',' << to_string(f.model.family) << ',' << f.model.param << ',';
        if (f.model.family == Family::StudentT) *sink << f.model.df;
        *sink << ',' << tau_of(f.model) << ',' << f.loglik << ',' << f.aic << ',' << f.n_params << ','
              << (f.at_boundary ? "true" : "false") << '\n';
      }
    } else if (*pe) {
      const auto p = load_paired_csv(paired_file);
      const auto plugin = plugin_copula(p, theta, parse_family(family), df);
      const auto g1 = parse_list(r1_list), g2 = parse_list(r2_list);
      Sink sink(out_path, out);
      *sink << "r1,r2,value\n" << std::setprecision(12);
      for (double a : g1)
        for (double b : g2) *sink << a << ',' << b << ',' << plugin.evaluate(a, b) << '\n';
    } else if (*cal) {
      CurveSpec spec;
      spec.family = parse_family(fam_cal);
      spec.df = df;
      spec.arrival = PoissonPair(lambda1, lambda2);
      spec.margins = {MarginSpec::parse(margin1), MarginSpec::parse(margin2)};
      spec.grid = CurveSpec::default_grid(spec.family, k);
      spec.n_rep = n_rep;
      spec.n_ticks = n_ticks;
      spec.synchronous = synchronous;
      spec.seed = seed;
      const auto curve = build_curve(spec);
      save_curve(out_path, curve);
      out << json{{"curve", out_path}, {"quad_coeffs", curve.coeffs},
                  {"resid_scale", curve.resid_scale}}.dump() << '\n';
    } else if (*iv) {
      const auto m = parse_interval_method(iv_method);
      IntervalEstimate e;
      if (m == IntervalMethod::MisspecifiedElliptical) {
        if (paired_file.empty()) throw UsageError("--method elliptical needs --paired");
        e = interval_misspecified(load_paired_csv(paired_file), level);
      } else {
        if (curve_file.empty()) throw UsageError("--method quad|quantile needs --curve");
        double t = 0.0;
        if (tau_hat) t = *tau_hat;
        else if (!paired_file.empty())
          t = kendall_tau(load_paired_csv(paired_file), TauBasis::AllPairs).tau_hat;
        else
          throw UsageError("give --tau-hat or --paired");
        const auto curve = load_curve(curve_file);
        e = m == IntervalMethod::QuadPrediction ? interval_quad(curve, t, level)
                                                : interval_quantile(curve, t, level);
      }
      Sink sink(out_path, out);
      *sink << interval_json(e).dump(2) << '\n';
    } else if (*rep) {
      eopt.seed = seed;
      const auto csv = reproduce(table, eopt);
      Sink sink(out_path, out);
      *sink << csv;
    }
  } catch (const UsageError& e) {
    error_json("UsageError", e.what());
    return 2;
  } catch (const Error& e) {
    error_json(to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_json("InternalError", e.what());
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nscop
