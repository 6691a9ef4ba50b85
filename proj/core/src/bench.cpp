#include "subreg/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "subreg/estimators.hpp"
#include "subreg/samplers.hpp"

namespace subreg {

namespace {

std::uint64_t cell_id(CaseKind c, SamplerKind s) {
  return static_cast<std::uint64_t>(c) * 16 + static_cast<std::uint64_t>(s);
}

struct RepOutcome {
  double a_wi = 0.0, a_woi = 0.0, b_wi = 0.0, b_woi = 0.0;
  bool failed = false;
};

// Runs fn(i) for i in [0, count) on up to `threads` threads. Work items are
// handed out through an atomic counter; fn must write only to its own slot.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

Dataset make_replication_dataset(const SimConfig& cfg,
                                 const CovariateSampler& cov_sampler,
                                 const ModelSpec& spec, CaseKind case_kind,
                                 int rep) {
  const std::uint64_t case_tag = static_cast<std::uint64_t>(case_kind);
  auto rng_x = make_stream(cfg.base_seed, StreamPurpose::kCovariates,
                           std::uint64_t(rep), case_tag);
  auto rng_e = make_stream(cfg.base_seed, StreamPurpose::kNoise,
                           std::uint64_t(rep), case_tag);
  Matrix X = cov_sampler.sample(cfg.n, rng_x);
  Vector y = gen_response(X, spec, rng_e);
  return Dataset(std::move(X), std::move(y));
}

ReplicationResult run_one(const SimConfig& cfg,
                          const CovariateSampler& cov_sampler,
                          const ModelSpec& spec, CaseKind case_kind,
                          SamplerKind sampler, int rep) {
  auto rng_s = make_stream(cfg.base_seed, StreamPurpose::kSampler,
                           std::uint64_t(rep), cell_id(case_kind, sampler));
  const Dataset d =
      make_replication_dataset(cfg, cov_sampler, spec, case_kind, rep);

  ReplicationResult out;
  switch (sampler) {
    case SamplerKind::kUniform:
    case SamplerKind::kIboss: {
      const Subsample s =
          sampler == SamplerKind::kUniform
              ? uniform_sample(cfg.n, cfg.r, DrawMode::kDeterministic, rng_s)
              : iboss_select(d, cfg.r);
      const Dataset sub = take_rows(d, s.idx);
      const CenteringStats cs = full_means(d);

      const EstimatorOutput wi = ols_with_intercept(sub);
      out.alpha_wi = *wi.alpha;
      out.beta_wi = wi.beta;

      const Dataset sub_c = shift(sub, cs.x_bar, cs.y_bar);
      const EstimatorOutput woi = ols_slope_no_intercept(sub_c);
      out.beta_woi = woi.beta;
      out.alpha_woi = recover_intercept(cs, woi.beta);
      break;
    }
    case SamplerKind::kLeverage: {
      const Vector h = leverage_scores(d);
      const Vector pi = h / double(cfg.p + 1);
      const Subsample s = probability_sample(pi, cfg.r, rng_s);
      const Vector w_full = inverse_probability_weights(pi);
      const WeightedStats ws = weighted_means(d, w_full);
      const Dataset sub = take_rows(d, s.idx);

      const EstimatorOutput wi = wls_with_intercept(sub, s.w_star);
      out.alpha_wi = *wi.alpha;
      out.beta_wi = wi.beta;

      const Dataset sub_c = shift(sub, ws.x_bar_w, ws.y_bar_w);
      const EstimatorOutput woi = wls_slope_no_intercept(
          sub_c, s.w_star, Variant::kSubWlsWoiWeighted);
      out.beta_woi = woi.beta;
      out.alpha_woi = recover_intercept(ws, woi.beta);
      break;
    }
  }
  return out;
}

// Mean and Monte Carlo standard error of the mean, compensated summation,
// two passes.
void mean_and_se(const std::vector<double>& values, double* mean, double* se) {
  const Index m = static_cast<Index>(values.size());
  *mean = compensated_sum(values.data(), m) / double(m);
  if (m < 2) {
    *se = 0.0;
    return;
  }
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dlt = values[i] - *mean;
    sq[i] = dlt * dlt;
  }
  const double var = compensated_sum(sq.data(), m) / double(m - 1);
  *se = std::sqrt(var / double(m));
}

void format_double(std::ostream& out, double v, const char* fmt) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out << buf;
}

}  // namespace

const char* sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kIboss: return "iboss";
    case SamplerKind::kLeverage: return "leverage";
  }
  return "unknown";
}

void SimConfig::validate() const {
  if (n < 2) throw Error("config: n must be at least 2");
  if (p < 1) throw Error("config: p must be at least 1");
  if (reps < 1) throw Error("config: reps must be at least 1");
  if (r < 1) throw Error("config: r must be at least 1");
  if (r > n) {
    throw Error("config: subsample size r = " + std::to_string(r) +
                " exceeds n = " + std::to_string(n));
  }
  if (!(sigma2 > 0.0)) throw Error("config: sigma2 must be positive");
  if (!(std::abs(rho) < 1.0)) throw Error("config: |rho| must be < 1");
  if (cases.empty()) throw Error("config: no cases selected");
  if (samplers.empty()) throw Error("config: no samplers selected");
  if (threads < 1) throw Error("config: threads must be at least 1");
  for (const SamplerKind s : samplers) {
    if (s == SamplerKind::kIboss && r < 2 * p) {
      throw Error("config: IBOSS needs r >= 2p, got r = " + std::to_string(r) +
                  ", p = " + std::to_string(p));
    }
  }
}

ReplicationResult run_replication(const SimConfig& cfg, CaseKind case_kind,
                                  SamplerKind sampler, int rep) {
  const SimCase sc{case_kind, cfg.rho, cfg.p};
  const CovariateSampler cov_sampler(sc);
  const ModelSpec spec(1.0, Vector::Ones(cfg.p), cfg.sigma2);
  return run_one(cfg, cov_sampler, spec, case_kind, sampler, rep);
}

Dataset replication_dataset(const SimConfig& cfg, CaseKind case_kind,
                            int rep) {
  const SimCase sc{case_kind, cfg.rho, cfg.p};
  const CovariateSampler cov_sampler(sc);
  const ModelSpec spec(1.0, Vector::Ones(cfg.p), cfg.sigma2);
  return make_replication_dataset(cfg, cov_sampler, spec, case_kind, rep);
}

CellResult run_cell(const SimConfig& cfg, CaseKind case_kind,
                    SamplerKind sampler) {
  cfg.validate();
  const SimCase sc{case_kind, cfg.rho, cfg.p};
  const CovariateSampler cov_sampler(sc);
  const ModelSpec spec(1.0, Vector::Ones(cfg.p), cfg.sigma2);

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(cfg.reps));
  parallel_for(cfg.reps, cfg.threads, [&](int rep) {
    auto& slot = outcomes[static_cast<std::size_t>(rep)];
    try {
      const ReplicationResult rr =
          run_one(cfg, cov_sampler, spec, case_kind, sampler, rep);
      slot.a_wi = (rr.alpha_wi - spec.alpha) * (rr.alpha_wi - spec.alpha);
      slot.a_woi = (rr.alpha_woi - spec.alpha) * (rr.alpha_woi - spec.alpha);
      slot.b_wi = (rr.beta_wi - spec.beta).squaredNorm();
      slot.b_woi = (rr.beta_woi - spec.beta).squaredNorm();
    } catch (const RankDeficient&) {
      slot.failed = true;
    }
  });

  // Reduction in replication order, independent of scheduling.
  std::vector<double> a_wi, a_woi, b_wi, b_woi;
  a_wi.reserve(outcomes.size());
  a_woi.reserve(outcomes.size());
  b_wi.reserve(outcomes.size());
  b_woi.reserve(outcomes.size());
  int failures = 0;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++failures;
      continue;
    }
    a_wi.push_back(o.a_wi);
    a_woi.push_back(o.a_woi);
    b_wi.push_back(o.b_wi);
    b_woi.push_back(o.b_woi);
  }
  if (failures * 100 > cfg.reps) {
    throw SimulationAborted(
        "run_cell: " + std::to_string(failures) + " of " +
        std::to_string(cfg.reps) +
        " replications failed the rank check (> 1% budget)");
  }

  CellResult cell;
  cell.case_kind = case_kind;
  cell.sampler = sampler;
  cell.reps = static_cast<int>(a_wi.size());
  cell.failures = failures;
  mean_and_se(a_wi, &cell.mse_alpha_wi, &cell.se_alpha_wi);
  mean_and_se(a_woi, &cell.mse_alpha_woi, &cell.se_alpha_woi);
  mean_and_se(b_wi, &cell.mse_beta_wi, &cell.se_beta_wi);
  mean_and_se(b_woi, &cell.mse_beta_woi, &cell.se_beta_woi);
  return cell;
}

std::vector<CellResult> run_table(const SimConfig& cfg) {
  cfg.validate();
  std::vector<CellResult> cells;
  cells.reserve(cfg.cases.size() * cfg.samplers.size());
  for (const CaseKind c : cfg.cases) {
    for (const SamplerKind s : cfg.samplers) {
      cells.push_back(run_cell(cfg, c, s));
    }
  }
  return cells;
}

void write_table(const SimConfig& cfg, const std::vector<CellResult>& cells,
                 std::ostream& out) {
  char head[256];
  std::snprintf(head, sizeof(head),
                "# subreg simulate n=%lld p=%lld r=%lld reps=%d sigma2=%.17g "
                "rho=%.17g seed=%llu beta_mse=sum_over_coordinates",
                static_cast<long long>(cfg.n), static_cast<long long>(cfg.p),
                static_cast<long long>(cfg.r), cfg.reps, cfg.sigma2, cfg.rho,
                static_cast<unsigned long long>(cfg.base_seed));

  if (cfg.format == OutputFormat::kCsv) {
    out << head << '\n';
    out << "case,sampler,param,variant,n,p,r,reps,mse,mc_se,failures\n";
    for (const auto& cell : cells) {
      const struct {
        const char* param;
        const char* variant;
        double mse;
        double se;
      } rows[4] = {
          {"alpha", "wi", cell.mse_alpha_wi, cell.se_alpha_wi},
          {"alpha", "woi", cell.mse_alpha_woi, cell.se_alpha_woi},
          {"beta", "wi", cell.mse_beta_wi, cell.se_beta_wi},
          {"beta", "woi", cell.mse_beta_woi, cell.se_beta_woi},
      };
      for (const auto& row : rows) {
        out << case_name(cell.case_kind) << ',' << sampler_name(cell.sampler)
            << ',' << row.param << ',' << row.variant << ','
            << cfg.n << ',' << cfg.p << ',' << cfg.r << ',' << cell.reps
            << ',';
        format_double(out, row.mse, "%.10e");
        out << ',';
        format_double(out, row.se, "%.10e");
        out << ',' << cell.failures << '\n';
      }
    }
    return;
  }

  // Aligned text: one block row per case, WI/WOI column pairs per sampler.
  out << head << '\n';
  char buf[64];
  out << "case       param ";
  for (const auto& cell : cells) {
    // Header lists each sampler once, in grid order.
    if (&cell != cells.data() &&
        cell.case_kind != cells.front().case_kind)
      break;
    std::snprintf(buf, sizeof(buf), " %10s-WI %10s-WOI",
                  sampler_name(cell.sampler), sampler_name(cell.sampler));
    out << buf;
  }
  out << '\n';
  const std::size_t samplers = cfg.samplers.size();
  for (std::size_t ci = 0; ci < cells.size(); ci += samplers) {
    const char* cname = case_name(cells[ci].case_kind);
    std::snprintf(buf, sizeof(buf), "%-10s %-6s", cname, "alpha");
    out << buf;
    for (std::size_t k = 0; k < samplers; ++k) {
      std::snprintf(buf, sizeof(buf), " %13.3f %14.3f",
                    cells[ci + k].mse_alpha_wi, cells[ci + k].mse_alpha_woi);
      out << buf;
    }
    out << '\n';
    std::snprintf(buf, sizeof(buf), "%-10s %-6s", "", "beta");
    out << buf;
    for (std::size_t k = 0; k < samplers; ++k) {
      std::snprintf(buf, sizeof(buf), " %13.3f %14.3f",
                    cells[ci + k].mse_beta_wi, cells[ci + k].mse_beta_woi);
      out << buf;
    }
    out << '\n';
  }
}

std::string format_table(const SimConfig& cfg,
                         const std::vector<CellResult>& cells) {
  std::ostringstream oss;
  write_table(cfg, cells, oss);
  return oss.str();
}

bool VerifyReport::all_pass() const {
  for (const auto& check : checks) {
    if (!check.pass) return false;
  }
  return true;
}

void write_verify_csv(const VerifyReport& report, std::ostream& out) {
  out << "check_name,statistic,threshold,pass\n";
  char buf[96];
  for (const auto& check : report.checks) {
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%d", check.statistic,
                  check.threshold, check.pass ? 1 : 0);
    out << check.name << buf << '\n';
  }
}

}  // namespace subreg
