#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "subreg/datagen.hpp"
#include "subreg/estimators.hpp"

using namespace subreg;

namespace {

double sample_skewness(const Vector& x) {
  const double m = x.mean();
  const double n = double(x.size());
  const double m2 = (x.array() - m).square().sum() / n;
  const double m3 = (x.array() - m).cube().sum() / n;
  return m3 / std::pow(m2, 1.5);
}

// Delta-method standard error of the sample skewness, from the empirical
// influence function. Reduces to sqrt(6/n) for normal data and widens
// honestly for heavy tails.
double skewness_standard_error(const Vector& x) {
  const double n = double(x.size());
  const double mu = x.mean();
  const double m2 = (x.array() - mu).square().sum() / n;
  const double m3 = (x.array() - mu).cube().sum() / n;
  const auto c = (x.array() - mu);
  const auto infl = (c.pow(3) - m3 - 3.0 * m2 * c) / std::pow(m2, 1.5) -
                    1.5 * m3 / std::pow(m2, 2.5) * (c.square() - m2);
  return std::sqrt(infl.square().sum()) / n;
}

double sample_excess_kurtosis(const Vector& x) {
  const double m = x.mean();
  const double n = double(x.size());
  const double m2 = (x.array() - m).square().sum() / n;
  const double m4 = (x.array() - m).pow(4).sum() / n;
  return m4 / (m2 * m2) - 3.0;
}

double sample_median(Vector x) {
  std::sort(x.data(), x.data() + x.size());
  const Eigen::Index n = x.size();
  return n % 2 == 1 ? x(n / 2) : 0.5 * (x(n / 2 - 1) + x(n / 2));
}

}  // namespace

TEST_SUITE_BEGIN("datagen");

TEST_CASE("ar1_sigma structure") {
  {
    const Matrix s = ar1_sigma(2, 0.5);
    CHECK(s(0, 0) == 1.0);
    CHECK(s(1, 1) == 1.0);
    CHECK(s(0, 1) == 0.5);
    CHECK(s(1, 0) == 0.5);
  }
  {
    const Matrix s = ar1_sigma(4, 0.0);
    CHECK((s - Matrix::Identity(4, 4)).norm() == 0.0);
  }
  {
    // Positive definiteness via a Cholesky factorization.
    const Matrix s = ar1_sigma(19, 0.5);
    Eigen::LLT<Matrix> llt(s);
    CHECK(llt.info() == Eigen::Success);
  }
  CHECK_THROWS_AS(ar1_sigma(3, 1.0), InvalidRho);
  CHECK_THROWS_AS(ar1_sigma(3, -1.2), InvalidRho);
}

TEST_CASE("normal covariates reproduce the target covariance") {
  const SimCase sc{CaseKind::kNormal, 0.5, 2};
  auto rng = make_stream(61, StreamPurpose::kCovariates);
  const Matrix X = gen_covariates(sc, 100000, rng);
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Matrix centered = X.rowwise() - mean;
  const Matrix cov = centered.transpose() * centered / double(X.rows() - 1);
  const Matrix target = ar1_sigma(2, 0.5);
  CHECK((cov - target).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("lognormal marginals have median about one") {
  const SimCase sc{CaseKind::kLogNormal, 0.5, 2};
  auto rng = make_stream(62, StreamPurpose::kCovariates);
  const Matrix X = gen_covariates(sc, 100000, rng);
  CHECK(std::abs(sample_median(X.col(0)) - 1.0) <= 0.05);
  CHECK(X.minCoeff() > 0.0);
}

TEST_CASE("t5 marginals are heavy-tailed") {
  auto rng_t = make_stream(64, StreamPurpose::kCovariates);
  auto rng_n = make_stream(64, StreamPurpose::kCovariates, 1);
  const Matrix Xt =
      gen_covariates(SimCase{CaseKind::kT5, 0.5, 2}, 100000, rng_t);
  const Matrix Xn =
      gen_covariates(SimCase{CaseKind::kNormal, 0.5, 2}, 100000, rng_n);
  const double kt = sample_excess_kurtosis(Xt.col(0));
  const double kn = sample_excess_kurtosis(Xn.col(0));
  CHECK(kt >= 3.0);
  CHECK(kt <= 12.0);
  CHECK(kt > kn + 2.0);
}

TEST_CASE("symmetry and skewness across the three cases") {
  const Eigen::Index n = 100000;
  auto r1 = make_stream(70, StreamPurpose::kCovariates, 0);
  auto r2 = make_stream(70, StreamPurpose::kCovariates, 1);
  auto r3 = make_stream(70, StreamPurpose::kCovariates, 2);
  const Matrix Xn = gen_covariates(SimCase{CaseKind::kNormal, 0.5, 2}, n, r1);
  const Matrix Xt = gen_covariates(SimCase{CaseKind::kT5, 0.5, 2}, n, r2);
  const Matrix Xl =
      gen_covariates(SimCase{CaseKind::kLogNormal, 0.5, 2}, n, r3);
  // Symmetric cases: skewness within 4 estimated standard errors of zero.
  // For normal data the estimated SE is essentially sqrt(6/n).
  CHECK(std::abs(sample_skewness(Xn.col(0))) <=
        4.0 * skewness_standard_error(Xn.col(0)));
  CHECK(skewness_standard_error(Xn.col(0)) ==
        doctest::Approx(std::sqrt(6.0 / double(n))).epsilon(0.15));
  CHECK(std::abs(sample_skewness(Xt.col(0))) <=
        4.0 * skewness_standard_error(Xt.col(0)));
  // The lognormal case is visibly right-skewed.
  CHECK(sample_skewness(Xl.col(0)) > 1.0);
}

TEST_CASE("generation is reproducible from the seed") {
  const SimCase sc{CaseKind::kT5, 0.5, 3};
  auto a = make_stream(65, StreamPurpose::kCovariates);
  auto b = make_stream(65, StreamPurpose::kCovariates);
  const Matrix X1 = gen_covariates(sc, 500, a);
  const Matrix X2 = gen_covariates(sc, 500, b);
  CHECK((X1 - X2).norm() == 0.0);

  const ModelSpec spec(1.0, Vector::Ones(3), 9.0);
  auto c = make_stream(65, StreamPurpose::kNoise);
  auto d = make_stream(65, StreamPurpose::kNoise);
  const Vector y1 = gen_response(X1, spec, c);
  const Vector y2 = gen_response(X2, spec, d);
  CHECK((y1 - y2).norm() == 0.0);
}

TEST_CASE("near-noiseless responses identify the true parameters") {
  const SimCase sc{CaseKind::kNormal, 0.5, 4};
  auto rng = make_stream(66, StreamPurpose::kCovariates);
  const Matrix X = gen_covariates(sc, 2000, rng);
  Vector beta(4);
  beta << 1.0, -2.0, 0.5, 3.0;
  const ModelSpec spec(1.25, beta, 1e-20);
  auto nrng = make_stream(66, StreamPurpose::kNoise);
  const Vector y = gen_response(X, spec, nrng);
  const auto fit = ols_with_intercept(Dataset(X, y), Variant::kFullOls);
  CHECK(std::abs(*fit.alpha - 1.25) <= 1e-8);
  CHECK((fit.beta - beta).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("paper-scale run: residual variance near sigma2") {
  const SimCase sc{CaseKind::kNormal, 0.5, 19};
  auto rng = make_stream(67, StreamPurpose::kCovariates);
  const Matrix X = gen_covariates(sc, 100000, rng);
  const ModelSpec spec(1.0, Vector::Ones(19), 9.0);
  auto nrng = make_stream(67, StreamPurpose::kNoise);
  const Vector y = gen_response(X, spec, nrng);
  const double s2 = estimate_sigma2(Dataset(X, y));
  CHECK(std::abs(s2 - 9.0) <= 0.45);  // within 5%
}

TEST_CASE("gen_response validates dimensions") {
  Matrix X(3, 2);
  X.setZero();
  const ModelSpec spec(0.0, Vector::Ones(3), 1.0);
  auto rng = make_stream(68, StreamPurpose::kNoise);
  CHECK_THROWS_AS(gen_response(X, spec, rng), DimensionMismatch);
}

TEST_SUITE_END();
