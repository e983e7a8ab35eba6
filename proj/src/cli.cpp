#include "rareis/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rareis/errors.hpp"

namespace rareis::cli {

namespace {

using nlohmann::json;

// A validation failure tied to one command-line flag.
class FlagError : public ValidationError {
 public:
  FlagError(std::string flag, const std::string& what)
      : ValidationError(what), flag_(std::move(flag)) {}
  const std::string& flag() const { return flag_; }

 private:
  std::string flag_;
};

double parse_number(const std::string& text, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw FlagError(flag, "'" + text + "' is not a number");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ps(item);
    std::string part;
    while (std::getline(ps, part, ':')) parts.push_back(trim(part));
    if (parts.size() == 1) {
      out.push_back(parse_number(parts[0], "--sweep-values"));
      continue;
    }
    if (parts.size() > 3) throw FlagError("--sweep-values", "bad range '" + item + "'");
    const double a = parse_number(parts[0], "--sweep-values");
    const double b = parse_number(parts[1], "--sweep-values");
    const double step = parts.size() == 3 ? parse_number(parts[2], "--sweep-values") : 1.0;
    if (!(step > 0.0) || b < a) {
      throw FlagError("--sweep-values", "range '" + item + "' needs a <= b and a positive step");
    }
    const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      const double v = a + double(i) * step;
      // snap values like 0.6 + 4·0.2 that land a few ulps off the decimal
      out.push_back(std::abs(v - std::round(v * 1e9) / 1e9) < 1e-12 * std::max(1.0, std::abs(v))
                        ? std::round(v * 1e9) / 1e9
                        : v);
    }
  }
  return out;
}

json config_to_json(const CliConfig& c) {
  json j;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(method_name(m)));
  j["methods"] = methods;
  if (c.family) {
    j["dist"] = {{"family", std::string(family_name(*c.family))}, {"params", c.params}};
  }
  if (c.n) j["n"] = *c.n;
  if (c.gamma) j["gamma"] = *c.gamma;
  j["samples"] = c.samples;
  j["epsilon"] = c.epsilon;
  j["seed"] = c.seed;
  if (c.sweep_variable || c.sweep_values) {
    json s;
    if (c.sweep_variable) s["variable"] = *c.sweep_variable;
    if (c.sweep_values) s["values"] = *c.sweep_values;
    j["sweep"] = s;
  }
  j["grid"] = c.grid;
  return j;
}

void apply_config_json(const json& j, CliConfig& c) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  try {
    if (j.contains("methods")) {
      c.methods.clear();
      const auto& m = j.at("methods");
      if (m.is_string()) {
        c.methods.push_back(parse_method(m.get<std::string>()));
      } else {
        for (const auto& e : m) c.methods.push_back(parse_method(e.get<std::string>()));
      }
    }
    if (j.contains("method")) c.methods = {parse_method(j.at("method").get<std::string>())};
    if (j.contains("dist")) {
      const auto& d = j.at("dist");
      c.family = parse_family(d.at("family").get<std::string>());
      c.params.clear();
      if (d.contains("params")) {
        for (const auto& [k, v] : d.at("params").items()) c.params[k] = v.get<double>();
      }
    }
    if (j.contains("n")) c.n = j.at("n").get<unsigned>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("samples")) c.samples = j.at("samples").get<std::uint64_t>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) c.grid = j.at("grid").get<std::uint64_t>();
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      if (s.contains("variable")) c.sweep_variable = s.at("variable").get<std::string>();
      if (s.contains("values")) {
        const auto& v = s.at("values");
        c.sweep_values = v.is_string() ? parse_values(v.get<std::string>())
                                       : v.get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

namespace {

enum class Command { Estimate, Sweep, Oracle, Compare };

struct Flags {
  std::vector<std::string> methods;
  std::string dist;
  std::vector<std::string> params;
  unsigned n = 0;
  double gamma = 0.0;
  std::uint64_t samples = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  std::string sweep_var;
  std::string sweep_values;
  std::uint64_t grid = 0;
  std::string out;
  std::string config;
  bool dump = false;
  unsigned workers = 0;
};

struct Options {
  CLI::Option* methods = nullptr;
  CLI::Option* dist = nullptr;
  CLI::Option* params = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* samples = nullptr;
  CLI::Option* epsilon = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* sweep_var = nullptr;
  CLI::Option* sweep_values = nullptr;
  CLI::Option* grid = nullptr;
};

Options add_options(CLI::App& app, Flags& f) {
  Options o;
  o.methods = app.add_option("--method", f.methods, "estimator (repeatable)");
  o.dist = app.add_option("--dist", f.dist, "summand family");
  o.params = app.add_option("--param", f.params, "family parameter key=value (repeatable)");
  o.n = app.add_option("--n", f.n, "number of summands");
  o.gamma = app.add_option("--gamma", f.gamma, "threshold");
  o.samples = app.add_option("--samples", f.samples, "Monte Carlo sample size");
  o.epsilon = app.add_option("--epsilon", f.epsilon, "target relative error");
  o.seed = app.add_option("--seed", f.seed, "random seed");
  o.sweep_var = app.add_option("--sweep-var", f.sweep_var, "sweep axis: n or gamma");
  o.sweep_values = app.add_option("--sweep-values", f.sweep_values,
                                  "axis values, e.g. 2,4,8 or 2:12 or 0.6:1.4:0.2");
  o.grid = app.add_option("--grid", f.grid, "oracle grid points");
  app.add_option("--out", f.out, "write output to this file");
  app.add_option("--config", f.config, "JSON config file; flags override it");
  app.add_flag("--dump-config", f.dump, "print the resolved config as JSON and exit");
  app.add_option("--workers", f.workers, "worker threads (default: RAREIS_WORKERS or all cores)");
  return o;
}

bool given(const CLI::Option* o) { return o && o->count() > 0; }

CliConfig resolve_config(const Flags& f, const Options& o) {
  CliConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw FlagError("--config", "cannot open config file '" + f.config + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw FlagError("--config", std::string("config file is not valid JSON: ") + e.what());
    }
    apply_config_json(j, c);
  }
  if (given(o.methods)) {
    c.methods.clear();
    for (const auto& m : f.methods) {
      try {
        c.methods.push_back(parse_method(m));
      } catch (const ValidationError& e) {
        throw FlagError("--method", e.what());
      }
    }
  }
  if (given(o.dist)) {
    Family fam;
    try {
      fam = parse_family(f.dist);
    } catch (const ValidationError& e) {
      throw FlagError("--dist", e.what());
    }
    if (c.family != fam) c.params.clear();
    c.family = fam;
  }
  if (given(o.params)) {
    for (const auto& kv : f.params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw FlagError("--param", "expected key=value, got '" + kv + "'");
      }
      c.params[trim(kv.substr(0, eq))] = parse_number(trim(kv.substr(eq + 1)), "--param");
    }
  }
  if (given(o.n)) c.n = f.n;
  if (given(o.gamma)) c.gamma = f.gamma;
  if (given(o.samples)) c.samples = f.samples;
  if (given(o.epsilon)) c.epsilon = f.epsilon;
  if (given(o.seed)) c.seed = f.seed;
  if (given(o.sweep_var)) c.sweep_variable = f.sweep_var;
  if (given(o.sweep_values)) c.sweep_values = parse_values(f.sweep_values);
  if (given(o.grid)) c.grid = f.grid;
  return c;
}

void require(bool ok, const std::string& flag, const std::string& what) {
  if (!ok) throw FlagError(flag, what);
}

DistributionSpec dist_spec(const CliConfig& c) {
  require(c.family.has_value(), "--dist", "missing required --dist");
  DistributionSpec spec{*c.family, c.params};
  try {
    make_distribution(spec);
  } catch (const ValidationError& e) {
    throw FlagError("--param", e.what());
  }
  return spec;
}

ExperimentPlan base_plan(const CliConfig& c, Method method) {
  ExperimentPlan p;
  p.method = method;
  p.dist = dist_spec(c);
  p.n = c.n.value_or(1);
  p.gamma = c.gamma.value_or(1.0);
  p.samples = c.samples;
  p.epsilon = c.epsilon;
  p.seed = c.seed;
  return p;
}

void check_samples(const CliConfig& c) {
  require(c.samples > 0, "--samples", "--samples must be positive");
  require(c.epsilon > 0.0 && c.epsilon < 1.0, "--epsilon", "--epsilon must lie in (0, 1)");
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

struct Row {
  Method method;
  Family family;
  unsigned n;
  double gamma;
  std::uint64_t samples;
  std::uint64_t seed;
  std::optional<EstimatorResult> result;
};

std::string csv_row(const Row& r) {
  std::ostringstream s;
  s << method_name(r.method) << ',' << family_name(r.family) << ',' << r.n << ',' << fmt(r.gamma)
    << ',' << r.samples << ',' << r.seed << ',';
  if (!r.result) {
    s << ",,,,,,,";
    return s.str();
  }
  const auto& e = *r.result;
  s << fmt(e.estimate) << ',' << fmt(e.scv) << ',' << fmt(e.ci95_half_width) << ','
    << fmt(e.wall_seconds) << ',' << fmt(e.wnrv) << ',' << (e.biased ? "true" : "false") << ','
    << fmt(e.bias_bound) << ',' << (e.biased ? fmt(e.adjusted_wnrv()) : "");
  return s.str();
}

// Runs every (method, value) row in method-major order.
int run_rows(const CliConfig& c, const std::vector<Method>& methods, const std::string& axis,
             const std::vector<double>& values, unsigned workers, std::ostream& out,
             std::ostream& err) {
  out << kCsvHeader << '\n';
  std::size_t ok = 0;
  for (Method m : methods) {
    for (double v : values) {
      ExperimentPlan p = base_plan(c, m);
      if (axis == "n") p.n = static_cast<unsigned>(v);
      if (axis == "gamma") p.gamma = v;
      Row row{m, p.dist.family, p.n, p.gamma, p.samples, p.seed, std::nullopt};
      try {
        row.result = run(p, workers);
        ++ok;
      } catch (const std::exception& e) {
        err << "row " << method_name(m) << " n=" << p.n << " gamma=" << fmt(p.gamma)
            << " failed: " << e.what() << '\n';
      }
      out << csv_row(row) << '\n';
      out.flush();
    }
  }
  return ok > 0 ? kExitOk : kExitRuntime;
}

int cmd_estimate(const CliConfig& c, unsigned workers, std::ostream& out) {
  require(c.methods.size() == 1, "--method", "estimate needs exactly one --method");
  dist_spec(c);
  require(c.n.has_value(), "--n", "missing required --n");
  require(c.gamma.has_value(), "--gamma", "missing required --gamma");
  check_samples(c);
  ExperimentPlan p = base_plan(c, c.methods.front());
  validate_plan(p);
  const EstimatorResult r = run(p, workers);
  out << to_json(r).dump() << '\n';
  return kExitOk;
}

int cmd_sweep(const CliConfig& c, unsigned workers, std::ostream& out, std::ostream& err) {
  require(!c.methods.empty(), "--method", "missing required --method");
  dist_spec(c);
  require(c.sweep_variable.has_value(), "--sweep-var", "missing required --sweep-var");
  const std::string axis = *c.sweep_variable;
  require(axis == "n" || axis == "gamma", "--sweep-var", "--sweep-var must be 'n' or 'gamma'");
  require(c.sweep_values && !c.sweep_values->empty(), "--sweep-values",
          "sweep axis has no values");
  for (double v : *c.sweep_values) {
    require(v > 0.0 && std::isfinite(v) && (axis != "n" || v == std::floor(v)), "--sweep-values",
            "invalid axis value " + fmt(v));
  }
  if (axis == "n") {
    require(c.gamma.has_value(), "--gamma", "missing required --gamma");
  } else {
    require(c.n.has_value(), "--n", "missing required --n");
  }
  check_samples(c);
  return run_rows(c, c.methods, axis, *c.sweep_values, workers, out, err);
}

int cmd_compare(const CliConfig& c, unsigned workers, std::ostream& out, std::ostream& err) {
  require(c.methods.size() >= 2, "--method", "compare needs at least two --method flags");
  dist_spec(c);
  require(c.n.has_value(), "--n", "missing required --n");
  require(c.gamma.has_value(), "--gamma", "missing required --gamma");
  check_samples(c);
  return run_rows(c, c.methods, "gamma", {*c.gamma}, workers, out, err);
}

int cmd_oracle(const CliConfig& c, std::ostream& out) {
  const DistributionSpec spec = dist_spec(c);
  require(c.n.has_value(), "--n", "missing required --n");
  require(c.gamma.has_value(), "--gamma", "missing required --gamma");
  require(*c.n >= 1 && *c.n <= 16, "--n", "oracle supports 1 <= n <= 16");
  require(*c.gamma > 0.0, "--gamma", "--gamma must be positive");
  require(c.grid >= 1024 && (c.grid & (c.grid - 1)) == 0, "--grid",
          "--grid must be a power of two >= 1024");
  const auto r = convolution_oracle(make_distribution(spec), *c.gamma, *c.n, c.grid);
  out << to_json(r).dump() << '\n';
  return kExitOk;
}

void report_error(std::ostream& out, std::ostream& err, const std::string& kind,
                  const std::string& message, const std::string& flag = "") {
  json j{{"error", kind}, {"message", message}};
  if (!flag.empty()) j["flag"] = flag;
  out << j.dump() << '\n';
  err << "rareis: " << message << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rare-event importance sampling for left-tail sums", "rareis"};
  app.require_subcommand(1);
  Flags f;
  struct Sub {
    Command command;
    CLI::App* app;
    Options options;
  };
  std::vector<Sub> subs;
  auto add = [&](Command cmd, const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    subs.push_back({cmd, s, add_options(*s, f)});
  };
  add(Command::Estimate, "estimate", "single estimate, JSON output");
  add(Command::Sweep, "sweep", "sweep over n or gamma, CSV output");
  add(Command::Oracle, "oracle", "deterministic convolution value of alpha, JSON output");
  add(Command::Compare, "compare", "several methods at one point, CSV output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    report_error(out, err, "usage", e.what());
    return kExitValidation;
  }

  const Sub* active = nullptr;
  for (const auto& s : subs) {
    if (s.app->parsed()) active = &s;
  }
  if (!active) {
    report_error(out, err, "usage", "a subcommand is required");
    return kExitValidation;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  try {
    const CliConfig config = resolve_config(f, active->options);
    if (f.dump) {
      out << config_to_json(config).dump(2) << '\n';
      return kExitOk;
    }
    if (!f.out.empty()) {
      file.open(f.out);
      if (!file) throw FlagError("--out", "cannot open output file '" + f.out + "'");
      sink = &file;
    }
    switch (active->command) {
      case Command::Estimate:
        return cmd_estimate(config, f.workers, *sink);
      case Command::Sweep:
        return cmd_sweep(config, f.workers, *sink, err);
      case Command::Compare:
        return cmd_compare(config, f.workers, *sink, err);
      case Command::Oracle:
        return cmd_oracle(config, *sink);
    }
  } catch (const FlagError& e) {
    report_error(out, err, "validation", e.what(), e.flag());
    return kExitValidation;
  } catch (const ValidationError& e) {
    report_error(out, err, "validation", e.what());
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    report_error(out, err, "convergence", e.what());
    return kExitRuntime;
  } catch (const Error& e) {
    report_error(out, err, "runtime", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    report_error(out, err, "runtime", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace rareis::cli
