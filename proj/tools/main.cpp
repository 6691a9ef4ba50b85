// subreg: Monte Carlo benchmark and verification driver for subsample
// regression centering strategies.
//
// Exit codes: 0 success, 1 verification/simulation failure,
// 2 configuration error.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include "subreg/bench.hpp"
#include "subreg/estimators.hpp"
#include "subreg/samplers.hpp"
#include "subreg/variance.hpp"

namespace {

using namespace subreg;

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitConfigError = 2;

std::vector<CaseKind> parse_cases(const std::string& name) {
  if (name == "all") {
    return {CaseKind::kNormal, CaseKind::kLogNormal, CaseKind::kT5};
  }
  static const std::map<std::string, CaseKind> table = {
      {"normal", CaseKind::kNormal},
      {"lognormal", CaseKind::kLogNormal},
      {"t5", CaseKind::kT5},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw Error("unknown case: " + name);
  return {it->second};
}

std::vector<SamplerKind> parse_samplers(const std::string& name) {
  if (name == "all") {
    return {SamplerKind::kUniform, SamplerKind::kIboss, SamplerKind::kLeverage};
  }
  static const std::map<std::string, SamplerKind> table = {
      {"uniform", SamplerKind::kUniform},
      {"iboss", SamplerKind::kIboss},
      {"leverage", SamplerKind::kLeverage},
  };
  const auto it = table.find(name);
  if (it == table.end()) throw Error("unknown sampler: " + name);
  return {it->second};
}

// Stream sink: --out path or stdout.
class OutputSink {
 public:
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void print_matrix(std::ostream& out, const std::string& name, const Matrix& m,
                  OutputFormat format) {
  char buf[64];
  if (format == OutputFormat::kCsv) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%s,%lld,%lld,%.17g\n", name.c_str(),
                      static_cast<long long>(i), static_cast<long long>(j),
                      m(i, j));
        out << buf;
      }
    }
    return;
  }
  out << name << " (" << m.rows() << "x" << m.cols() << ")\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), " %12.6g", m(i, j));
      out << buf;
    }
    out << '\n';
  }
}

struct VarianceArgs {
  SimConfig cfg;
  std::string case_name = "normal";
  std::string sampler_name = "uniform";
  std::string out_path;
  std::string dump_subsample_path;
  std::string dump_data_path;
  std::string format_name = "table";
};

int run_variance(const VarianceArgs& args) {
  SimConfig cfg = args.cfg;
  cfg.cases = parse_cases(args.case_name);
  cfg.samplers = parse_samplers(args.sampler_name);
  if (cfg.cases.size() != 1 || cfg.samplers.size() != 1) {
    throw Error("variance: pick exactly one case and one sampler");
  }
  cfg.reps = 1;
  cfg.validate();
  const CaseKind case_kind = cfg.cases.front();
  const SamplerKind sampler = cfg.samplers.front();
  const OutputFormat format =
      args.format_name == "csv" ? OutputFormat::kCsv : OutputFormat::kAlignedText;

  OutputSink sink(args.out_path);
  std::ostream& out = sink.stream();
  const Dataset d = replication_dataset(cfg, case_kind, 0);
  if (!args.dump_data_path.empty()) save_csv(d, args.dump_data_path);

  if (format == OutputFormat::kCsv) {
    out << "matrix,row,col,value\n";
  } else {
    char head[160];
    std::snprintf(head, sizeof(head),
                  "variance report: case=%s sampler=%s n=%lld p=%lld r=%lld "
                  "sigma2=%g seed=%llu\n",
                  case_name(case_kind), sampler_name(sampler),
                  static_cast<long long>(cfg.n), static_cast<long long>(cfg.p),
                  static_cast<long long>(cfg.r), cfg.sigma2,
                  static_cast<unsigned long long>(cfg.base_seed));
    out << head;
  }

  if (sampler == SamplerKind::kLeverage) {
    // Random weighted subsampling: the exact finite-sample maps do not
    // exist, so report the asymptotic variances instead.
    const Vector h = leverage_scores(d);
    const Vector pi = h / double(cfg.p + 1);
    auto rng = make_stream(cfg.base_seed, StreamPurpose::kSampler, 0, 0);
    const Subsample s = probability_sample(pi, cfg.r, rng);
    if (!args.dump_subsample_path.empty()) {
      save_subsample_csv(s, args.dump_subsample_path);
    }
    const Vector w = inverse_probability_weights(pi);
    const WeightedStats ws = weighted_means(d, w);
    print_matrix(out, "avar_theta_wls",
                 wls_asymptotic_variance(d, ws, cfg.r, AvarTarget::kTheta,
                                         cfg.sigma2)
                     .m,
                 format);
    print_matrix(out, "avar_slope_plain_centered",
                 wls_asymptotic_variance(d, ws, cfg.r,
                                         AvarTarget::kSlopePlain, cfg.sigma2)
                     .m,
                 format);
    print_matrix(out, "avar_slope_weighted_centered",
                 wls_asymptotic_variance(d, ws, cfg.r,
                                         AvarTarget::kSlopeWeighted,
                                         cfg.sigma2)
                     .m,
                 format);
    return kExitOk;
  }

  auto rng = make_stream(cfg.base_seed, StreamPurpose::kSampler, 0, 0);
  const Subsample s =
      sampler == SamplerKind::kUniform
          ? uniform_sample(cfg.n, cfg.r, DrawMode::kDeterministic, rng)
          : iboss_select(d, cfg.r);
  if (!args.dump_subsample_path.empty()) {
    save_subsample_csv(s, args.dump_subsample_path);
  }

  print_matrix(out, "var_theta_intercept_model",
               exact_variance(
                   estimator_map(Variant::kSubOlsWi, d.X(), s.idx), cfg.sigma2)
                   .m,
               format);
  print_matrix(out, "var_slope_intercept_model",
               exact_variance(estimator_map(Variant::kSubOlsWi, d.X(), s.idx,
                                            MapPart::kSlope),
                              cfg.sigma2)
                   .m,
               format);
  print_matrix(out, "var_slope_shifted_no_intercept",
               exact_variance(estimator_map(Variant::kSubOlsWoi, d.X(), s.idx,
                                            MapPart::kSlope),
                              cfg.sigma2)
                   .m,
               format);
  const auto gap = slope_variance_gap(d.X(), s.idx, cfg.sigma2);
  print_matrix(out, "slope_variance_gap", gap.gap.m, format);
  print_matrix(out, "gap_d", Matrix::Constant(1, 1, gap.d), format);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subsample regression centering: benchmark and verification"};
  app.require_subcommand(1);

  SimConfig base;
  base.threads = static_cast<int>(
      std::max(1u, std::thread::hardware_concurrency()));

  // --- simulate ---
  auto* sim = app.add_subcommand(
      "simulate", "run the Monte Carlo MSE benchmark grid");
  SimConfig sim_cfg = base;
  std::string sim_case = "all", sim_sampler = "all", sim_format = "csv";
  std::string sim_out;
  sim->add_option("--n", sim_cfg.n, "full-data rows")->capture_default_str();
  sim->add_option("--p", sim_cfg.p, "slope dimension")->capture_default_str();
  sim->add_option("--r", sim_cfg.r, "subsample size")->capture_default_str();
  sim->add_option("--reps", sim_cfg.reps, "Monte Carlo replications")
      ->capture_default_str();
  sim->add_option("--sigma2", sim_cfg.sigma2, "error variance")
      ->capture_default_str();
  sim->add_option("--rho", sim_cfg.rho, "AR(1) correlation of covariates")
      ->capture_default_str();
  sim->add_option("--case", sim_case, "normal|lognormal|t5|all")
      ->capture_default_str();
  sim->add_option("--sampler", sim_sampler, "uniform|iboss|leverage|all")
      ->capture_default_str();
  sim->add_option("--seed", sim_cfg.base_seed, "base seed")
      ->capture_default_str();
  sim->add_option("--threads", sim_cfg.threads, "worker threads")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "output path (default stdout)");
  sim->add_option("--format", sim_format, "csv|table")->capture_default_str();

  // --- verify ---
  auto* ver = app.add_subcommand(
      "verify", "run the numerical verification suites");
  VerifyOptions ver_opt;
  std::string ver_out;
  ver->add_option("--seed", ver_opt.seed, "suite seed")->capture_default_str();
  ver->add_option("--out", ver_out, "CSV report path (default stdout)");
  ver->add_option("--inject-gram-perturbation", ver_opt.gram_perturbation,
                  "diagnostics hook: corrupt one Gram entry by this amount")
      ->capture_default_str();

  // --- variance ---
  auto* var = app.add_subcommand(
      "variance", "print exact/asymptotic variance matrices for one seeded "
                  "instance");
  VarianceArgs var_args;
  var_args.cfg = base;
  var_args.cfg.n = 200;
  var_args.cfg.p = 3;
  var_args.cfg.r = 20;
  var->add_option("--n", var_args.cfg.n, "rows")->capture_default_str();
  var->add_option("--p", var_args.cfg.p, "slope dimension")
      ->capture_default_str();
  var->add_option("--r", var_args.cfg.r, "subsample size")
      ->capture_default_str();
  var->add_option("--sigma2", var_args.cfg.sigma2, "error variance")
      ->capture_default_str();
  var->add_option("--rho", var_args.cfg.rho, "AR(1) correlation")
      ->capture_default_str();
  var->add_option("--case", var_args.case_name, "normal|lognormal|t5")
      ->capture_default_str();
  var->add_option("--sampler", var_args.sampler_name,
                  "uniform|iboss|leverage")
      ->capture_default_str();
  var->add_option("--seed", var_args.cfg.base_seed, "seed")
      ->capture_default_str();
  var->add_option("--out", var_args.out_path, "output path (default stdout)");
  var->add_option("--format", var_args.format_name, "csv|table")
      ->capture_default_str();
  var->add_option("--dump-subsample", var_args.dump_subsample_path,
                  "write the drawn subsample as CSV for audit");
  var->add_option("--dump-data", var_args.dump_data_path,
                  "write the generated dataset as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (sim->parsed()) {
      sim_cfg.cases = parse_cases(sim_case);
      sim_cfg.samplers = parse_samplers(sim_sampler);
      sim_cfg.out_path = sim_out;
      sim_cfg.format =
          sim_format == "table" ? OutputFormat::kAlignedText : OutputFormat::kCsv;
      if (sim_format != "table" && sim_format != "csv") {
        throw Error("unknown format: " + sim_format);
      }
      sim_cfg.validate();
      std::vector<CellResult> cells;
      for (const CaseKind c : sim_cfg.cases) {
        for (const SamplerKind s : sim_cfg.samplers) {
          std::fprintf(stderr, "cell %s/%s...\n", case_name(c),
                       sampler_name(s));
          cells.push_back(run_cell(sim_cfg, c, s));
        }
      }
      OutputSink sink(sim_cfg.out_path);
      write_table(sim_cfg, cells, sink.stream());
      return kExitOk;
    }
    if (ver->parsed()) {
      const VerifyReport report = run_verification(ver_opt);
      OutputSink sink(ver_out);
      write_verify_csv(report, sink.stream());
      if (!report.all_pass()) {
        for (const auto& check : report.checks) {
          if (!check.pass) {
            std::fprintf(stderr, "verification failure: %s (statistic %g, "
                         "threshold %g)\n",
                         check.name.c_str(), check.statistic, check.threshold);
          }
        }
        return kExitVerificationFailure;
      }
      return kExitOk;
    }
    return run_variance(var_args);
  } catch (const SimulationAborted& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitVerificationFailure;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
}
