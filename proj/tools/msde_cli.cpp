// Command-line front end: experiment runs, inequality suites, trajectory dumps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msde/experiment.hpp"
#include "msde/reference.hpp"
#include "msde/report_io.hpp"
#include "msde/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerify = 2;
constexpr int kExitNumerical = 3;

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (lo < 1 || hi < lo) throw CLI::ValidationError("--levels", "bad range " + text);
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  if (out.empty()) throw CLI::ValidationError("--levels", "empty level list");
  return out;
}

std::vector<msde::SchemeId> parse_schemes(const std::string& text) {
  std::vector<msde::SchemeId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(msde::scheme_from_string(item));
  if (out.empty()) throw CLI::ValidationError("--schemes", "empty scheme list");
  return out;
}

// "gle_exact[:quad_level]" | "gbm_exact" | "numeric_fine[:level[:scheme]]"
msde::ReferenceSpec parse_reference(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.empty()) throw CLI::ValidationError("--reference", "empty spec");
  msde::ReferenceSpec ref;
  if (parts[0] == "gle_exact") {
    ref.kind = msde::ReferenceSpec::Kind::gle_exact;
    if (parts.size() > 1) ref.quad_level = std::stoi(parts[1]);
  } else if (parts[0] == "gbm_exact") {
    ref.kind = msde::ReferenceSpec::Kind::gbm_exact;
  } else if (parts[0] == "numeric_fine") {
    ref.kind = msde::ReferenceSpec::Kind::numeric_fine;
    if (parts.size() > 1) ref.fine_level = std::stoi(parts[1]);
    if (parts.size() > 2) ref.fine_scheme = msde::scheme_from_string(parts[2]);
  } else {
    throw CLI::ValidationError("--reference", "unknown kind " + parts[0]);
  }
  return ref;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--params", "expected key=value, got " + kv);
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

void write_artifact(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << content;
}

// CSV artifacts open with a commented config echo for provenance.
std::string csv_header(const msde::ExperimentConfig& cfg) {
  const nlohmann::json j = msde::config_to_json(cfg);
  return "# config " + j.dump() + "\n";
}

struct RunOptions {
  std::string config_file;
  std::string model = "gle";
  std::vector<std::string> params;
  std::string schemes = "ssbe,bem,pem";
  std::string levels = "6..11";
  std::size_t samples = 10000;
  std::uint64_t seed = 42;
  std::string reference;
  std::string out;
  std::string format = "csv";
  int workers = 1;
};

msde::ExperimentConfig build_config(RunOptions& eff, const CLI::App& cmd) {
  const RunOptions opt = eff;
  if (!opt.config_file.empty()) {
    std::ifstream f(opt.config_file);
    if (!f) throw std::runtime_error("cannot read config file: " + opt.config_file);
    nlohmann::json j = nlohmann::json::parse(f);
    // File values fill in whatever was not given on the command line.
    auto overridden = [&](const char* flag) { return cmd.count(flag) > 0; };
    if (j.contains("model") && !overridden("--model")) eff.model = j["model"];
    if (j.contains("schemes") && !overridden("--schemes")) eff.schemes = j["schemes"];
    if (j.contains("levels") && !overridden("--levels")) eff.levels = j["levels"];
    if (j.contains("samples") && !overridden("--samples")) eff.samples = j["samples"];
    if (j.contains("seed") && !overridden("--seed")) eff.seed = j["seed"];
    if (j.contains("reference") && !overridden("--reference")) eff.reference = j["reference"];
    if (j.contains("format") && !overridden("--format")) eff.format = j["format"];
    if (j.contains("out") && !overridden("--out")) eff.out = j["out"];
    if (j.contains("workers") && !overridden("--workers")) eff.workers = j["workers"];
    if (j.contains("params") && !overridden("--params"))
      for (auto& [k, v] : j["params"].items()) eff.params.push_back(k + "=" + v.dump());
  }

  msde::ExperimentConfig cfg;
  cfg.model.name = eff.model;
  cfg.model.params = parse_params(eff.params);
  cfg.schemes = parse_schemes(eff.schemes);
  cfg.levels = parse_levels(eff.levels);
  cfg.samples = eff.samples;
  cfg.master_seed = eff.seed;
  if (!eff.reference.empty()) cfg.reference = parse_reference(eff.reference);
  cfg.workers = eff.workers;
  if (eff.format != "csv" && eff.format != "json")
    throw CLI::ValidationError("--format", "expected csv or json");
  return cfg;
}

int cmd_run(RunOptions& opt, const CLI::App& cmd) {
  const msde::ExperimentConfig cfg = build_config(opt, cmd);
  cfg.model.build();  // validate before the long run

  msde::ErrorReport report;
  try {
    report = msde::run_experiment(cfg);
  } catch (const msde::OverflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }

  const std::string csv = csv_header(cfg) + msde::to_csv(report);
  std::cout << csv;
  for (const auto& c : report.cells)
    if (c.overflow_count > 0)
      std::cerr << "warning: " << msde::to_string(c.scheme) << " at level "
                << c.level << " overflowed in " << c.overflow_count
                << " samples\n";
  for (const auto& [s, slope] : report.fitted_slopes)
    std::cout << "# slope " << msde::to_string(s) << " " << slope << "\n";

  if (!opt.out.empty()) {
    if (opt.format == "json")
      write_artifact(opt.out, msde::to_json(report).dump(2) + "\n");
    else
      write_artifact(opt.out, csv);
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, std::size_t samples, std::uint64_t seed) {
  std::vector<msde::SuiteCheck> checks;
  if (suite == "assumptions" || suite == "all") {
    auto v = msde::verify_assumptions(samples, seed);
    checks.insert(checks.end(), v.begin(), v.end());
  }
  if (suite == "resolvent" || suite == "all") {
    auto v = msde::verify_resolvent(samples, seed);
    checks.insert(checks.end(), v.begin(), v.end());
  }
  if (suite == "projection" || suite == "all") {
    auto v = msde::verify_projection(std::max<std::size_t>(samples, 1000000), seed);
    checks.insert(checks.end(), v.begin(), v.end());
  }
  if (checks.empty()) {
    std::cerr << "error: unknown suite '" << suite
              << "' (expected assumptions|resolvent|projection|all)\n";
    return kExitConfig;
  }

  bool ok = true;
  std::printf("%-34s %10s %10s %14s  %s\n", "check", "samples", "violations",
              "worst_margin", "witness");
  for (const auto& c : checks) {
    std::printf("%-34s %10zu %10zu %14.3e  %s\n", c.name.c_str(), c.samples,
                c.violations, c.worst_margin,
                c.passed() ? "" : c.witness.c_str());
    ok = ok && c.passed();
  }
  std::printf("%s\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitVerify;
}

struct TraceOptions {
  std::string model = "gle";
  std::vector<std::string> params;
  std::string schemes = "em,ssbe,bem,pem";
  int level = 6;
  std::uint64_t seed = 42;
  std::size_t sample = 0;
  std::string out;
};

int cmd_trace(const TraceOptions& opt) {
  msde::ModelSpec spec;
  spec.name = opt.model;
  spec.params = parse_params(opt.params);
  const msde::Model model = spec.build();
  const std::vector<msde::SchemeId> schemes = parse_schemes(opt.schemes);
  const msde::ReferenceSpec ref = spec.default_reference();

  const msde::TimeGrid grid = msde::TimeGrid::uniform_dyadic(opt.level, model.horizon);
  const int k_master = std::max(
      {opt.level,
       ref.kind == msde::ReferenceSpec::Kind::gle_exact ? ref.quad_level : 1,
       ref.kind == msde::ReferenceSpec::Kind::numeric_fine ? ref.fine_level : 1});
  const msde::BrownianPath path = msde::generate_path(
      opt.seed, opt.sample, model.dim_noise, k_master, model.horizon);
  const std::vector<double> inc = msde::coarsen(path, grid);

  const double mu = spec.param("mu", model.name == "gle" ? 0.5 : 0.05);
  const double sigma = spec.param("sigma", model.name == "gle" ? 1.0 : 0.2);
  const double x0 = model.initial_value[0];
  std::vector<double> reference;
  switch (ref.kind) {
    case msde::ReferenceSpec::Kind::gle_exact:
      reference = msde::gle_exact_on_grid(path, mu, sigma, x0, grid, ref.quad_level);
      break;
    case msde::ReferenceSpec::Kind::gbm_exact:
      reference = msde::gbm_exact_on_grid(path, mu, sigma, x0, grid);
      break;
    case msde::ReferenceSpec::Kind::numeric_fine:
      reference = msde::numeric_reference_on_grid(path, model, ref.fine_level,
                                                  ref.fine_scheme, grid);
      break;
  }

  std::vector<msde::GridFunction> runs;
  try {
    for (msde::SchemeId s : schemes)
      runs.push_back(msde::integrate(s, model, grid, inc));
  } catch (const msde::OverflowError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }

  const double h = std::ldexp(1.0, -opt.level);
  const double threshold = std::pow(h, -model.alpha);
  std::string csv = "t";
  for (msde::SchemeId s : schemes) csv += std::string(",") + msde::to_string(s);
  csv += ",reference,threshold";
  for (msde::SchemeId s : schemes)
    if (s == msde::SchemeId::PEM) csv += ",pem_projected";
  csv += "\n";
  char buf[64];
  for (std::size_t n = 0; n < grid.points.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%.17g", grid.points[n]);
    csv += buf;
    for (const auto& run : runs) {
      std::snprintf(buf, sizeof(buf), ",%.17g", run.at(n)[0]);
      csv += buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", reference[n], threshold);
    csv += buf;
    for (const auto& run : runs)
      if (run.scheme == msde::SchemeId::PEM)
        csv += (n > 0 && run.projection_events[n - 1]) ? ",1" : ",0";
    csv += "\n";
  }
  std::cout << csv;
  if (!opt.out.empty()) write_artifact(opt.out, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monotone SDE scheme toolkit"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Monte Carlo strong-error table");
  run->add_option("--config", run_opt.config_file, "JSON config file; flags win");
  run->add_option("--model", run_opt.model, "gle | svm32 | gbm")->envname("MSDE_MODEL");
  run->add_option("--params", run_opt.params, "model parameters key=value");
  run->add_option("--schemes", run_opt.schemes, "comma list: em,ssbe,bem,pem")
      ->envname("MSDE_SCHEMES");
  run->add_option("--levels", run_opt.levels, "dyadic exponents, e.g. 6..11 or 6,8,10")
      ->envname("MSDE_LEVELS");
  run->add_option("--samples", run_opt.samples, "Monte Carlo sample count")
      ->envname("MSDE_SAMPLES");
  run->add_option("--seed", run_opt.seed, "master seed")->envname("MSDE_SEED");
  run->add_option("--reference", run_opt.reference,
                  "gle_exact[:quad] | gbm_exact | numeric_fine[:level[:scheme]]");
  run->add_option("--out", run_opt.out, "artifact path");
  run->add_option("--format", run_opt.format, "csv | json")->envname("MSDE_FORMAT");
  run->add_option("--workers", run_opt.workers, "thread count; output-invariant")
      ->envname("MSDE_WORKERS");

  std::string verify_suite = "all";
  std::size_t verify_samples = 100000;
  std::uint64_t verify_seed = 7;
  CLI::App* verify = app.add_subcommand("verify", "sampled inequality suites");
  verify->add_option("suite", verify_suite, "assumptions | resolvent | projection | all");
  verify->add_option("--samples", verify_samples, "samples per check");
  verify->add_option("--seed", verify_seed, "sampling seed");

  TraceOptions trace_opt;
  CLI::App* trace = app.add_subcommand("trace", "single-trajectory CSV dump");
  trace->add_option("--model", trace_opt.model, "gle | svm32 | gbm");
  trace->add_option("--params", trace_opt.params, "model parameters key=value");
  trace->add_option("--schemes", trace_opt.schemes, "comma list of schemes");
  trace->add_option("--level", trace_opt.level, "dyadic exponent of the step");
  trace->add_option("--seed", trace_opt.seed, "master seed");
  trace->add_option("--sample", trace_opt.sample, "sample index on the seed");
  trace->add_option("--out", trace_opt.out, "artifact path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_opt, *run);
    if (verify->parsed()) return cmd_verify(verify_suite, verify_samples, verify_seed);
    if (trace->parsed()) return cmd_trace(trace_opt);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const msde::StepSizeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
