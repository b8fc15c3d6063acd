#include <gtest/gtest.h>

#include <thread>
#include <vector>

#include <photonmux/rng.hpp>

using photonmux::CounterStream;
using photonmux::Philox4x32;

// Known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswerZero) {
  const auto r = Philox4x32::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerAllOnes) {
  const std::uint32_t f = 0xffffffffu;
  const auto r = Philox4x32::generate({f, f, f, f}, {f, f});
  EXPECT_EQ(r, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPiDigits) {
  const auto r = Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterStream, UniformStaysInRange) {
  CounterStream s(7, 0, 0);
  double sum = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = s.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 5 * std::sqrt(1.0 / 12 / 100000));
}

TEST(CounterStream, AddressesAreIndependentOfCallOrder) {
  std::vector<double> serial(64);
  for (int p = 0; p < 64; ++p) serial[static_cast<std::size_t>(p)] = CounterStream(42, static_cast<std::uint64_t>(p), 3).uniform();
  std::vector<double> threaded(64);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (int p = 63 - t; p >= 0; p -= 4)
        threaded[static_cast<std::size_t>(p)] = CounterStream(42, static_cast<std::uint64_t>(p), 3).uniform();
    });
  for (auto& th : pool) th.join();
  EXPECT_EQ(serial, threaded);
}

TEST(CounterStream, StreamsAndSeedsDiffer) {
  EXPECT_NE(CounterStream(1, 0, 0).next_u64(), CounterStream(1, 0, 1).next_u64());
  EXPECT_NE(CounterStream(1, 0, 0).next_u64(), CounterStream(2, 0, 0).next_u64());
  EXPECT_NE(CounterStream(1, 0, 0).next_u64(), CounterStream(1, 1, 0).next_u64());
}

TEST(CounterStream, GeometricMatchesThermalMean) {
  CounterStream s(9, 0, 0);
  const double mu = 0.7, q = mu / (1 + mu);
  const int n = 200000;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += s.geometric(q);
  EXPECT_NEAR(sum / n, mu, 5 * std::sqrt((mu + mu * mu) / n));
}
