#include <doctest.h>

#include <random>

#include "subreg/datagen.hpp"
#include "subreg/rng.hpp"
#include "subreg/samplers.hpp"
#include "subreg/variance.hpp"

using namespace subreg;

namespace {

Matrix random_design(Index n, Index p, Xoshiro256pp& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) X(i, j) = normal(rng);
  return X;
}

Vector random_weights(Index n, Xoshiro256pp& rng) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) w(i) = 0.1 + uniform_unit(rng);
  w /= w.sum();
  return w;
}

// The binary one-column worked instance used throughout: n = 4, p = 1,
// X = (0,0,1,1)', selection {0,1,2}.
Matrix worked_design() {
  Matrix X(4, 1);
  X << 0, 0, 1, 1;
  return X;
}

}  // namespace

TEST_SUITE_BEGIN("variance");

TEST_CASE("estimator map with identity selection is the centered full fit") {
  auto rng = make_stream(41, StreamPurpose::kSuite);
  const Matrix X = random_design(30, 3, rng);
  IndexList all(30);
  for (Index i = 0; i < 30; ++i) all[static_cast<std::size_t>(i)] = i;

  const auto map = estimator_map(Variant::kSubOlsWoi, X, all);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Vector y(30);
    for (Index i = 0; i < 30; ++i) y(i) = normal(rng);
    const Dataset d(X, y);
    const auto cs = full_means(d);
    const auto fit = ols_slope_no_intercept(shift(d, cs.x_bar, cs.y_bar));
    CHECK((map.apply(y) - fit.beta).norm() <=
          1e-10 * (1.0 + fit.beta.norm()));
  }
}

TEST_CASE("intercept-model map absorbs constant response shifts") {
  auto rng = make_stream(42, StreamPurpose::kSuite);
  const Matrix X = random_design(25, 2, rng);
  auto srng = make_stream(42, StreamPurpose::kSampler);
  const IndexList idx =
      uniform_sample(25, 10, DrawMode::kDeterministic, srng).idx;
  const auto map = estimator_map(Variant::kSubOlsWi, X, idx, MapPart::kSlope);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(25);
  for (Index i = 0; i < 25; ++i) y(i) = normal(rng);
  const Vector shifted = y.array() + 11.0;
  CHECK((map.apply(y) - map.apply(shifted)).norm() <= 1e-9 * (1.0 + y.norm()));
}

TEST_CASE("maps reproduce the estimators on the worked instance") {
  const Matrix X = worked_design();
  const IndexList idx{0, 1, 2};
  const auto map = estimator_map(Variant::kSubOlsWoi, X, idx);
  auto rng = make_stream(43, StreamPurpose::kSuite);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Vector y(4);
    for (Index i = 0; i < 4; ++i) y(i) = normal(rng);
    const Dataset d(X, y);
    const auto cs = full_means(d);
    const auto fit =
        ols_slope_no_intercept(shift(take_rows(d, idx), cs.x_bar, cs.y_bar));
    CHECK((map.apply(y) - fit.beta).norm() <= 1e-10 * (1.0 + fit.beta.norm()));
  }
}

TEST_CASE("maps handle duplicate selections exactly") {
  const Matrix X = worked_design();
  const IndexList idx{2, 2, 0, 1};
  const auto map = estimator_map(Variant::kSubOlsWi, X, idx);
  auto rng = make_stream(44, StreamPurpose::kSuite);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Vector y(4);
    for (Index i = 0; i < 4; ++i) y(i) = normal(rng);
    const auto fit = ols_with_intercept(take_rows(Dataset(X, y), idx));
    const Vector est = map.apply(y);
    CHECK(std::abs(est(0) - *fit.alpha) <= 1e-10 * (1.0 + std::abs(*fit.alpha)));
    CHECK(std::abs(est(1) - fit.beta(0)) <= 1e-10 * (1.0 + fit.beta.norm()));
  }
}

TEST_CASE("maps for weighted estimators are unsupported") {
  const Matrix X = worked_design();
  CHECK_THROWS_AS(estimator_map(Variant::kSubWlsWi, X, {0, 1, 2}),
                  UnsupportedVariant);
  CHECK_THROWS_AS(estimator_map(Variant::kSubWlsWoiWeighted, X, {0, 1, 2}),
                  UnsupportedVariant);
}

TEST_CASE("exact_variance basics") {
  LinearEstimatorMap zero{Matrix::Zero(1, 5), Variant::kSubOlsWoi,
                          MapPart::kSlope};
  CHECK(exact_variance(zero, 3.0).m.norm() == 0.0);

  LinearEstimatorMap ident{Matrix::Identity(4, 4), Variant::kFullOls,
                           MapPart::kWhole};
  const auto v = exact_variance(ident, 2.5);
  CHECK((v.m - 2.5 * Matrix::Identity(4, 4)).norm() <= 1e-14);
}

TEST_CASE("exact slope variance of the worked instance") {
  // Hand evaluation: G = 0.75, own-mean Gram = 2/3, shift = -1/6, so
  // Var(shifted slope) = 1/0.75 - (9/4)(1/36)/0.75^2 = 4/3 - 1/9 = 11/9
  // and Var(intercept-model slope) = 3/2.
  const Matrix X = worked_design();
  const IndexList idx{0, 1, 2};
  const auto woi = exact_variance(
      estimator_map(Variant::kSubOlsWoi, X, idx, MapPart::kSlope), 1.0);
  CHECK(woi.m(0, 0) == doctest::Approx(11.0 / 9.0).epsilon(1e-12));
  const auto wi = exact_variance(
      estimator_map(Variant::kSubOlsWi, X, idx, MapPart::kSlope), 1.0);
  CHECK(wi.m(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("slope_variance_gap on the worked instance") {
  const Matrix X = worked_design();
  const auto gap = slope_variance_gap(X, {0, 1, 2}, 1.0);
  CHECK(std::abs(gap.d - 1.0 / 9.0) <= 1e-12);
  CHECK(std::abs(gap.gap.m(0, 0) - 5.0 / 18.0) <= 1e-12);
  CHECK(gap.mean_shift(0) == doctest::Approx(-1.0 / 6.0));
}

TEST_CASE("gap vanishes when the subsample mean equals the full mean") {
  Matrix X(6, 1);
  X << -1, 0, 1, -1, 0, 1;
  const auto gap = slope_variance_gap(X, {0, 1, 2}, 2.0);
  CHECK(gap.d == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gap.gap.m.norm() <= 1e-14);
}

TEST_CASE("gap equals the linear-map variance difference on random draws") {
  auto rng = make_stream(45, StreamPurpose::kSuite);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Index p = 1 + Index(uniform_below(rng, 8));
    const Index n = 30 + Index(uniform_below(rng, 271));
    const Index r =
        p + 2 + Index(uniform_below(rng, std::uint64_t(n / 2 - p - 1)));
    const Matrix X = random_design(n, p, rng);
    auto srng = make_stream(46, StreamPurpose::kSampler, std::uint64_t(k));
    const IndexList idx =
        uniform_sample(n, r, DrawMode::kDeterministic, srng).idx;
    const double sigma2 = 0.5 + uniform_unit(rng);

    const auto gap = slope_variance_gap(X, idx, sigma2);
    CHECK(gap.d >= 0.0);
    CHECK(gap.d < 1.0);

    const auto wi = exact_variance(
        estimator_map(Variant::kSubOlsWi, X, idx, MapPart::kSlope), sigma2);
    const auto woi = exact_variance(
        estimator_map(Variant::kSubOlsWoi, X, idx, MapPart::kSlope), sigma2);
    const Matrix oracle = wi.m - woi.m;
    const double rel = (gap.gap.m - oracle).norm() /
                       (std::numeric_limits<double>::epsilon() + oracle.norm());
    worst = std::max(worst, rel);

    // Rank-one and positive semidefinite, as a spectral statement.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gap.gap.m,
                                              Eigen::EigenvaluesOnly);
    const double scale = gap.gap.m.norm();
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * scale);
    if (p > 1) {
      CHECK(eig.eigenvalues()(p - 2) <= 1e-10 * scale);
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("gap rejects tiny or duplicated selections") {
  const Matrix X = worked_design();
  CHECK_THROWS_AS(slope_variance_gap(X, {0, 1}, 1.0), SubsampleTooSmall);
  CHECK_THROWS_AS(slope_variance_gap(X, {0, 1, 1}, 1.0), Error);
}

TEST_CASE("loewner_leq basics") {
  CovMatrix eye{Matrix::Identity(2, 2)};
  CovMatrix zero{Matrix::Zero(2, 2)};
  {
    const auto res = loewner_leq(eye, eye, 1e-10);
    CHECK(res.leq);
    CHECK(res.min_eigenvalue == doctest::Approx(0.0));
  }
  {
    const auto res = loewner_leq(zero, eye, 1e-10);
    CHECK(res.leq);
    CHECK(res.min_eigenvalue == doctest::Approx(1.0));
  }
  {
    CovMatrix a{Matrix::Zero(2, 2)};
    a.m.diagonal() << 2.0, 0.0;
    CovMatrix b{Matrix::Identity(2, 2)};
    const auto res = loewner_leq(a, b, 1e-10);
    CHECK(!res.leq);
    CHECK(res.min_eigenvalue == doctest::Approx(-1.0));
  }
  CHECK_THROWS_AS(loewner_leq(zero, CovMatrix{Matrix::Zero(3, 3)}, 1e-10),
                  DimensionMismatch);
}

TEST_CASE("centering identities hold on random instances") {
  auto rng = make_stream(47, StreamPurpose::kSuite);
  for (int k = 0; k < 100; ++k) {
    const Index p = 1 + Index(uniform_below(rng, 8));
    const Index n = 40 + Index(uniform_below(rng, 200));
    const Index r =
        p + 2 + Index(uniform_below(rng, std::uint64_t(n / 2 - p - 1)));
    const Matrix X = random_design(n, p, rng);
    auto srng = make_stream(48, StreamPurpose::kSampler, std::uint64_t(k));
    const IndexList idx =
        uniform_sample(n, r, DrawMode::kDeterministic, srng).idx;
    const Vector w = random_weights(n, rng);
    for (const auto& row : centering_identities(X, idx, w)) {
      CHECK(row.residual <= row.threshold);
      CHECK(row.pass);
    }
  }
}

TEST_CASE("centering identities: uniform weights zero the shift terms") {
  auto rng = make_stream(49, StreamPurpose::kSuite);
  const Matrix X = random_design(50, 3, rng);
  auto srng = make_stream(49, StreamPurpose::kSampler);
  const IndexList idx =
      uniform_sample(50, 10, DrawMode::kDeterministic, srng).idx;
  const Vector w = Vector::Constant(50, 0.02);
  const auto rows = centering_identities(X, idx, w);
  CHECK(rows[2].name == "weighted_gram_shift");
  CHECK(rows[2].residual <= 1e-12);
  CHECK(rows[3].name == "unweighted_gram_shift");
  CHECK(rows[3].residual <= 1e-12);
}

TEST_CASE("centering identities: matched means equate the two grams") {
  Matrix X(6, 1);
  X << -1, 0, 1, -1, 0, 1;
  const IndexList idx{0, 1, 2};
  const Vector w = Vector::Constant(6, 1.0 / 6.0);
  const auto rows = centering_identities(X, idx, w);
  CHECK(rows[0].residual <= 1e-12);
  CHECK(rows[1].residual <= 1e-12);
}

TEST_CASE("a perturbed gram entry trips the first identity") {
  auto rng = make_stream(50, StreamPurpose::kSuite);
  const Matrix X = random_design(40, 2, rng);
  auto srng = make_stream(50, StreamPurpose::kSampler);
  const IndexList idx =
      uniform_sample(40, 10, DrawMode::kDeterministic, srng).idx;
  const Vector w = random_weights(40, rng);
  const auto rows = centering_identities(X, idx, w, 1e-6);
  CHECK(rows[0].name == "subsample_gram_rank_one");
  CHECK(!rows[0].pass);
}

TEST_CASE("asymptotic wls variance: uniform weights") {
  auto rng = make_stream(51, StreamPurpose::kSuite);
  const Index n = 200;
  const Index p = 4;
  const Index r = 40;
  const double sigma2 = 2.0;
  const Matrix X = random_design(n, p, rng);
  const Dataset d(X, Vector::Zero(n));
  const Vector w = Vector::Constant(n, 1.0 / double(n));
  const auto ws = weighted_means(d, w);

  const auto plain =
      wls_asymptotic_variance(d, ws, r, AvarTarget::kSlopePlain, sigma2);
  const auto weighted =
      wls_asymptotic_variance(d, ws, r, AvarTarget::kSlopeWeighted, sigma2);
  CHECK((plain.m - weighted.m).norm() <= 1e-10);

  // C = n^2 and W = I/n collapse the sandwich to (n sigma2 / r) Gc^-1.
  const Vector x_bar = full_means(d).x_bar;
  const Matrix Xc = X.rowwise() - x_bar.transpose();
  const Matrix direct =
      double(n) * sigma2 / double(r) * (Xc.transpose() * Xc).inverse();
  CHECK((plain.m - direct).norm() <= 1e-10 * direct.norm());
}

TEST_CASE("asymptotic wls variance: joint-model slope block matches") {
  auto rng = make_stream(52, StreamPurpose::kSuite);
  const Index n = 150;
  const Index p = 3;
  const Matrix X = random_design(n, p, rng);
  const Dataset d(X, Vector::Zero(n));
  const Vector w = random_weights(n, rng);
  const auto ws = weighted_means(d, w);
  const auto theta =
      wls_asymptotic_variance(d, ws, 30, AvarTarget::kTheta, 1.5);
  const auto slope =
      wls_asymptotic_variance(d, ws, 30, AvarTarget::kSlopePlain, 1.5);
  CHECK((theta.m.bottomRightCorner(p, p) - slope.m).norm() <=
        1e-10 * slope.m.norm());
}

TEST_CASE("weighted-mean centering improves the asymptotic variance") {
  const SimCase sc{CaseKind::kNormal, 0.5, 3};
  auto rng = make_stream(42, StreamPurpose::kCovariates);
  Matrix X = gen_covariates(sc, 10000, rng);
  const Dataset d(std::move(X), Vector::Zero(10000));
  const Vector h = leverage_scores(d);
  const Vector pi = h / 4.0;
  const Vector w = inverse_probability_weights(pi);
  const auto ws = weighted_means(d, w);

  const auto plain =
      wls_asymptotic_variance(d, ws, 500, AvarTarget::kSlopePlain, 9.0);
  const auto weighted =
      wls_asymptotic_variance(d, ws, 500, AvarTarget::kSlopeWeighted, 9.0);
  const auto cmp = loewner_leq(weighted, plain, 1e-10);
  CHECK(cmp.leq);
}

TEST_SUITE_END();
