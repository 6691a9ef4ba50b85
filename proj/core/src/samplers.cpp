#include "subreg/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

namespace subreg {

namespace {

constexpr double kPiSumTol = 1e-8;

void check_subsample_size(Index r) {
  if (r < 1) {
    throw SubsampleTooSmall("subsample size must be at least 1, got " +
                            std::to_string(r));
  }
}

}  // namespace

Subsample uniform_sample(Index n, Index r, DrawMode mode, Xoshiro256pp& rng) {
  check_subsample_size(r);
  Subsample s;
  s.mode = mode;
  s.idx.resize(static_cast<std::size_t>(r));
  if (mode == DrawMode::kDeterministic) {
    if (r > n) {
      throw SizeExceedsPopulation("uniform_sample: r = " + std::to_string(r) +
                                  " > n = " + std::to_string(n));
    }
    // Partial Fisher-Yates: the first r slots of a virtual permutation.
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < r; ++i) {
      const Index j =
          i + static_cast<Index>(uniform_below(rng, std::uint64_t(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(j)]);
      s.idx[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
  } else {
    for (Index k = 0; k < r; ++k) {
      s.idx[static_cast<std::size_t>(k)] =
          static_cast<Index>(uniform_below(rng, std::uint64_t(n)));
    }
    s.pi = Vector::Constant(r, 1.0 / double(n));
    s.w_star = Vector::Constant(r, 1.0 / double(n));
  }
  return s;
}

Vector leverage_scores(const Dataset& d) {
  const Index n = d.n();
  const Index p1 = d.p() + 1;
  Matrix Z(n, p1);
  Z.col(0).setOnes();
  Z.rightCols(d.p()) = d.X();

  Eigen::ColPivHouseholderQR<Matrix> qr(Z);
  qr.setThreshold(double(std::max(n, p1)) *
                  std::numeric_limits<double>::epsilon());
  const Index rank = qr.rank();
  if (rank < p1) {
    throw RankDeficient(rank, p1);
  }
  const Matrix thin_q = qr.householderQ() * Matrix::Identity(n, p1);
  return thin_q.rowwise().squaredNorm();
}

Subsample probability_sample(const Vector& pi_full, Index r,
                             Xoshiro256pp& rng) {
  check_subsample_size(r);
  const Index n = pi_full.size();
  for (Index i = 0; i < n; ++i) {
    if (!(pi_full(i) > 0.0) || pi_full(i) > 1.0 || !std::isfinite(pi_full(i))) {
      throw NonPositiveWeight("probability_sample: pi[" + std::to_string(i) +
                              "] = " + std::to_string(pi_full(i)) +
                              " outside (0, 1]");
    }
  }
  const double total = compensated_sum(pi_full.data(), n);
  if (std::abs(total - 1.0) > kPiSumTol) {
    throw WeightNormalization("probability_sample: pi sums to " +
                              std::to_string(total) + ", expected 1");
  }

  // Inverse-CDF sampling on the cumulative probabilities, one uniform per
  // draw; renormalized so the last bucket always closes at exactly 1.
  Vector cum(n);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    acc += pi_full(i);
    cum(i) = acc;
  }
  cum /= acc;

  const Vector w_full = inverse_probability_weights(pi_full);

  Subsample s;
  s.mode = DrawMode::kWithReplacement;
  s.idx.resize(static_cast<std::size_t>(r));
  s.pi.resize(r);
  s.w_star.resize(r);
  for (Index k = 0; k < r; ++k) {
    const double u = uniform_unit(rng);
    const double* begin = cum.data();
    const double* pos = std::upper_bound(begin, begin + n, u);
    const Index i = std::min<Index>(static_cast<Index>(pos - begin), n - 1);
    s.idx[static_cast<std::size_t>(k)] = i;
    s.pi(k) = pi_full(i);
    s.w_star(k) = w_full(i);
  }
  return s;
}

Subsample leverage_sample(const Dataset& d, Index r, Xoshiro256pp& rng) {
  const Vector h = leverage_scores(d);
  return probability_sample(h / double(d.p() + 1), r, rng);
}

Vector inverse_probability_weights(const Vector& pi_full) {
  const Index n = pi_full.size();
  for (Index i = 0; i < n; ++i) {
    if (!(pi_full(i) > 0.0) || !std::isfinite(pi_full(i))) {
      throw NonPositiveWeight("inverse_probability_weights: pi[" +
                              std::to_string(i) + "] = " +
                              std::to_string(pi_full(i)));
    }
  }
  Vector w = pi_full.cwiseInverse();
  w /= compensated_sum(w.data(), n);
  return w;
}

Subsample iboss_select(const Matrix& X, Index r) {
  const Index n = X.rows();
  const Index p = X.cols();
  if (r > n) {
    throw SizeExceedsPopulation("iboss_select: r = " + std::to_string(r) +
                                " > n = " + std::to_string(n));
  }
  if (r < 2 * p) {
    throw SubsampleTooSmall("iboss_select: r = " + std::to_string(r) +
                            " < 2p = " + std::to_string(2 * p));
  }

  const Index per_end = r / (2 * p);
  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  IndexList chosen;
  chosen.reserve(static_cast<std::size_t>(r));

  struct Entry {
    double value;
    Index row;
  };
  std::vector<Entry> cand;
  cand.reserve(static_cast<std::size_t>(n));

  const auto smaller = [](const Entry& a, const Entry& b) {
    return a.value < b.value || (a.value == b.value && a.row < b.row);
  };
  const auto larger = [](const Entry& a, const Entry& b) {
    return a.value > b.value || (a.value == b.value && a.row < b.row);
  };

  const auto gather_unselected = [&](Index col) {
    cand.clear();
    for (Index i = 0; i < n; ++i) {
      if (!selected[static_cast<std::size_t>(i)]) {
        cand.push_back({X(i, col), i});
      }
    }
  };

  const auto take_front = [&](std::size_t count, auto cmp) {
    if (count == 0) return;
    if (count < cand.size()) {
      std::nth_element(cand.begin(),
                       cand.begin() + static_cast<std::ptrdiff_t>(count) - 1,
                       cand.end(), cmp);
    }
    count = std::min(count, cand.size());
    for (std::size_t k = 0; k < count; ++k) {
      selected[static_cast<std::size_t>(cand[k].row)] = 1;
      chosen.push_back(cand[k].row);
    }
  };

  for (Index j = 0; j < p; ++j) {
    gather_unselected(j);
    take_front(static_cast<std::size_t>(per_end), smaller);
    gather_unselected(j);
    take_front(static_cast<std::size_t>(per_end), larger);
  }

  // Remainder: alternate smallest/largest extremes of column 0.
  Index remaining = r - 2 * p * per_end;
  bool take_small = true;
  while (remaining > 0) {
    gather_unselected(0);
    if (take_small) {
      take_front(1, smaller);
    } else {
      take_front(1, larger);
    }
    take_small = !take_small;
    --remaining;
  }

  std::sort(chosen.begin(), chosen.end());

  Subsample s;
  s.mode = DrawMode::kDeterministic;
  s.idx = std::move(chosen);
  return s;
}

void save_subsample_csv(const Subsample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("save_subsample_csv: cannot open " + path + " for writing");
  }
  out << "draw_index,row_index,pi,w_star\n";
  char buf[64];
  const bool with_probs = s.mode == DrawMode::kWithReplacement;
  for (std::size_t k = 0; k < s.idx.size(); ++k) {
    if (with_probs) {
      std::snprintf(buf, sizeof(buf), "%zu,%lld,%.17g,%.17g", k,
                    static_cast<long long>(s.idx[k]),
                    s.pi(static_cast<Index>(k)),
                    s.w_star(static_cast<Index>(k)));
    } else {
      std::snprintf(buf, sizeof(buf), "%zu,%lld,,", k,
                    static_cast<long long>(s.idx[k]));
    }
    out << buf << '\n';
  }
  if (!out) {
    throw Error("save_subsample_csv: write failed for " + path);
  }
}

}  // namespace subreg
