#include <gtest/gtest.h>

#include <random>

#include <photonmux/counting.hpp>
#include <photonmux/statistics.hpp>

using namespace photonmux;

namespace {

CountSummary counts(double n, double h, double i, double c) {
  CountSummary s;
  s.repetition_rate = 1e7;
  s.integration_time = n / 1e7;
  s.herald = h;
  s.idler = i;
  s.coincidence = c;
  return s;
}

// Multinomial draw over cell probabilities by sequential binomials.
template <std::size_t N>
std::array<double, N> multinomial(std::mt19937_64& g, long long n, const std::array<double, N>& p) {
  std::array<double, N> out{};
  double rest = 1.0;
  long long left = n;
  for (std::size_t k = 0; k < N; ++k) {
    if (left == 0 || rest <= 0.0) break;
    const double q = std::clamp(p[k] / rest, 0.0, 1.0);
    const long long x = (k + 1 == N) ? left : std::binomial_distribution<long long>(left, q)(g);
    out[k] = static_cast<double>(x);
    left -= x;
    rest -= p[k];
  }
  return out;
}

SourceModel coverage_source() {
  SourceModel m;
  m.mean_pairs = 0.05;
  m.herald_efficiency = 0.28;
  m.signal_transmission = 0.2;
  m.herald_background = 1e-4;
  m.signal_background = 1e-4;
  return m;
}

}  // namespace

TEST(Car, ArithmeticExample) {
  const auto e = car_single(counts(1e7, 5e4, 5e4, 1e4));
  EXPECT_DOUBLE_EQ(e.value, 40.0);
}

TEST(Car, UncorrelatedChannelsGiveOne) {
  const double n = 1e8, ph = 0.01, pi = 0.02;
  EXPECT_NEAR(car_single(counts(n, n * ph, n * pi, n * ph * pi)).value, 1.0, 1e-12);
}

TEST(Car, SymmetricInHeraldAndIdler) {
  const auto a = car_single(counts(1e7, 3e4, 7e4, 900));
  const auto b = car_single(counts(1e7, 7e4, 3e4, 900));
  EXPECT_DOUBLE_EQ(a.value, b.value);
  EXPECT_DOUBLE_EQ(a.error, b.error);
}

TEST(Car, ScaleInvariantInIntegrationTime) {
  const auto a = car_single(counts(1e7, 3e4, 7e4, 900));
  const auto b = car_single(counts(4e7, 12e4, 28e4, 3600));
  EXPECT_NEAR(a.value, b.value, 1e-12 * a.value);
  EXPECT_NEAR(b.error, a.error / 2.0, 1e-12 * a.error);
}

TEST(Car, ZeroSinglesThrow) {
  EXPECT_THROW(car_single(counts(1e7, 0, 10, 0)), EstimatorError);
  EXPECT_THROW(car_single(counts(1e7, 10, 0, 0)), EstimatorError);
  auto c = counts(1e7, 0, 10, 0);
  EXPECT_THROW(car_multiplexed(c), EstimatorError);
}

TEST(Car, CountExceedingPulsesIsRejected) { EXPECT_THROW(car_single(counts(100, 200, 10, 5)), DomainError); }

TEST(CarMultiplexed, ReducesToSingleWhenOneSourceIsSilent) {
  auto c = counts(1e7, 3e4, 7e4, 900);
  c.herald_1 = c.herald;
  c.herald_1_idler = c.coincidence;
  const auto m = car_multiplexed(c);
  const auto s = car_single(c);
  EXPECT_DOUBLE_EQ(m.value, s.value);
  // The silent source's zero counts carry the one-count variance floor.
  EXPECT_GE(m.error, s.error);
  EXPECT_NEAR(m.error, s.error, 0.01 * s.error);
}

TEST(CarMultiplexed, DoubleCountingCorrection) {
  // Independent channels: herald probabilities p1, p2, idler q.
  const double n = 1e9, p1 = 0.01, p2 = 0.02, q = 0.05;
  CountSummary c;
  c.repetition_rate = 1e7;
  c.integration_time = n / 1e7;
  c.herald_1 = n * p1;
  c.herald_2 = n * p2;
  c.idler = n * q;
  c.herald_1_idler = n * p1 * q;
  c.herald_2_idler = n * p2 * q;
  c.herald_12_idler = n * p1 * p2 * q;
  c.herald = n * (p1 + p2 - p1 * p2);
  EXPECT_NEAR(car_multiplexed(c).value, 1.0, 1e-12);
}

TEST(G2, MarginalExamples) {
  CountSummary c;
  c.repetition_rate = 1e7;
  c.integration_time = 1.0;
  c.idler_1 = 1e4;
  c.idler_2 = 1e4;
  c.idler_12 = 10;  // uncorrelated: 1e4·1e4/1e7
  EXPECT_DOUBLE_EQ(g2_marginal(c).value, 1.0);
  c.idler_12 = 20;
  EXPECT_DOUBLE_EQ(g2_marginal(c).value, 2.0);
  c.idler_1 = 0;
  EXPECT_THROW(g2_marginal(c), EstimatorError);
}

TEST(G2, HeraldedExample) {
  CountSummary c;
  c.repetition_rate = 1e7;
  c.integration_time = 1.0;
  c.herald = 1e5;
  c.herald_idler_1 = 2e3;
  c.herald_idler_2 = 2e3;
  c.herald_idler_12 = 4;
  EXPECT_DOUBLE_EQ(g2_heralded(c).value, 0.1);
  EXPECT_GT(g2_heralded(c).error, 0.0);
  c.herald_idler_12 = 0;
  EXPECT_EQ(g2_heralded(c).value, 0.0);
  EXPECT_GT(g2_heralded(c).error, 0.0);  // one-count floor
}

// About 68% of ±1σ intervals should contain the true value.
TEST(Coverage, CarErrorBarsCoverAtNominalRate) {
  const auto m = coverage_source();
  const auto d = exact_click_distribution(m, 40);
  const double truth = d.direct[1][1] / (d.herald_probability() * d.signal_probability());
  std::mt19937_64 g(5);
  const long long n = 2000000;
  const int runs = 400;
  int inside = 0;
  for (int r = 0; r < runs; ++r) {
    const auto x = multinomial<4>(g, n, {d.direct[1][1], d.direct[1][0], d.direct[0][1], d.direct[0][0]});
    const auto c = counts(static_cast<double>(n), x[0] + x[1], x[0] + x[2], x[0]);
    const auto e = car_single(c);
    if (std::abs(e.value - truth) < e.error) ++inside;
  }
  const double f = inside / double(runs);
  EXPECT_GT(f, 0.62);
  EXPECT_LT(f, 0.74);
}

TEST(Coverage, HeraldedG2ErrorBarsCoverAtNominalRate) {
  auto m = coverage_source();
  m.mean_pairs = 0.2;
  const auto d = exact_click_distribution(m, 40);
  const double t = d.split[1][1][1];
  const double truth = d.herald_probability() * t / ((d.split[1][1][0] + t) * (d.split[1][0][1] + t));
  std::mt19937_64 g(6);
  const long long n = 20000000;
  const int runs = 400;
  int inside = 0;
  for (int r = 0; r < runs; ++r) {
    const auto x = multinomial<5>(g, n, {d.split[1][1][1], d.split[1][1][0], d.split[1][0][1], d.split[1][0][0],
                                         1.0 - d.herald_probability()});
    CountSummary c;
    c.repetition_rate = 1e7;
    c.integration_time = static_cast<double>(n) / 1e7;
    c.herald = x[0] + x[1] + x[2] + x[3];
    c.herald_idler_12 = x[0];
    c.herald_idler_1 = x[0] + x[1];
    c.herald_idler_2 = x[0] + x[2];
    const auto e = g2_heralded(c);
    if (std::abs(e.value - truth) < e.error) ++inside;
  }
  const double f = inside / double(runs);
  EXPECT_GT(f, 0.62);
  EXPECT_LT(f, 0.74);
}
