#pragma once

#include <string>

#include "subreg/dataset.hpp"
#include "subreg/rng.hpp"

namespace subreg {

enum class DrawMode {
  kDeterministic,    // distinct row indices, no per-draw probabilities
  kWithReplacement,  // i.i.d. draws with recorded probabilities
};

// A subsample selection. For with-replacement draws, pi holds the selection
// probability of each draw and w_star the matching inverse-probability
// weights, normalized so that the implied full-data weight vector sums to 1.
// Both are empty for deterministic selections.
struct Subsample {
  IndexList idx;
  DrawMode mode = DrawMode::kDeterministic;
  Vector pi;
  Vector w_star;

  Index r() const { return static_cast<Index>(idx.size()); }
};

// Uniform subsample of size r from a population of n rows.
// kDeterministic draws r distinct indices via partial Fisher-Yates,
// kWithReplacement draws r i.i.d. indices and records pi_i = 1/n.
Subsample uniform_sample(Index n, Index r, DrawMode mode, Xoshiro256pp& rng);

// Leverage scores of the intercept-augmented design Z = (1 X): squared row
// norms of the thin orthogonal factor of Z. Each score lies in (0, 1] and
// they sum to p + 1.
Vector leverage_scores(const Dataset& d);

// With-replacement sample of size r where draw k picks row i with
// probability pi_full[i]. pi_full must be positive and sum to 1 (tol 1e-8).
Subsample probability_sample(const Vector& pi_full, Index r,
                             Xoshiro256pp& rng);

// Leverage sampling: probability_sample with pi proportional to the
// leverage scores of (1 X).
Subsample leverage_sample(const Dataset& d, Index r, Xoshiro256pp& rng);

// Full-data inverse-probability weight vector: w_i proportional to
// 1 / pi_full[i], normalized to sum to 1.
Vector inverse_probability_weights(const Vector& pi_full);

// Deterministic extreme-value subdata selection (IBOSS). For each covariate
// column takes the floor(r / 2p) not-yet-selected rows with the smallest and
// the largest values; any remainder is filled from column 0 extremes,
// alternating smallest/largest. Ties break toward the lowest row index.
// Never reads the responses.
Subsample iboss_select(const Matrix& X, Index r);
inline Subsample iboss_select(const Dataset& d, Index r) {
  return iboss_select(d.X(), r);
}

// Audit dump: one row per draw with (draw_index, row_index, pi, w_star).
// pi and w_star columns are empty for deterministic selections.
void save_subsample_csv(const Subsample& s, const std::string& path);

}  // namespace subreg
