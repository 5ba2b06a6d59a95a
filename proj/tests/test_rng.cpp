#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "glekit/rng.hpp"

using namespace glekit;

TEST_CASE("philox block is a deterministic pure function") {
  const auto a = philox::block(0x1234u, {1u, 2u, 3u, 4u});
  const auto b = philox::block(0x1234u, {1u, 2u, 3u, 4u});
  CHECK(a == b);
  // Any counter change must flip the output.
  CHECK(philox::block(0x1234u, {2u, 2u, 3u, 4u}) != a);
  CHECK(philox::block(0x9999u, {1u, 2u, 3u, 4u}) != a);
}

TEST_CASE("stream keys separate nearby seeds and streams") {
  CHECK(philox::stream_key(1, 0) != philox::stream_key(2, 0));
  CHECK(philox::stream_key(1, 0) != philox::stream_key(1, 1));
  CHECK(philox::stream_key(1, 0) == philox::stream_key(1, 0));
}

TEST_CASE("unit-interval mapping stays inside the open interval") {
  CHECK(philox::to_unit_interval(0) > 0.0);
  CHECK(philox::to_unit_interval(~std::uint64_t{0}) < 1.0);
  CHECK(philox::to_unit_interval(std::uint64_t{1} << 63) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("normal_pair is deterministic and tuple-sensitive") {
  const std::uint64_t key = philox::stream_key(42, 7);
  const auto p1 = normal_pair(key, 3, 1, 0);
  const auto p2 = normal_pair(key, 3, 1, 0);
  CHECK(p1.first == p2.first);
  CHECK(p1.second == p2.second);
  const auto q = normal_pair(key, 4, 1, 0);
  CHECK(p1.first != q.first);
  const auto r = normal_pair(key, 3, 2, 0);
  CHECK(p1.first != r.first);
  const auto s = normal_pair(key, 3, 1, 1);
  CHECK(p1.first != s.first);
}

TEST_CASE("normal_pair moments match a standard normal") {
  const std::uint64_t key = philox::stream_key(2024, 0);
  const std::size_t n = 200000;
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = normal_pair(key, static_cast<std::uint32_t>(i), 0, 0);
    for (double v : {p.first, p.second}) {
      sum += v;
      sum2 += v * v;
      sum4 += v * v * v * v;
    }
  }
  const double count = 2.0 * static_cast<double>(n);
  const double mean = sum / count;
  const double var = sum2 / count - mean * mean;
  const double kurt = sum4 / count / (var * var);
  CHECK(std::abs(mean) < 5e-3);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(kurt == doctest::Approx(3.0).epsilon(3e-2));
}

TEST_CASE("counter rng streams replay and diverge") {
  CounterRng a(123, 5);
  CounterRng b(123, 5);
  CounterRng c(123, 6);
  bool all_equal = true;
  bool any_cross_equal = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && (va == b.next_u64());
    any_cross_equal = any_cross_equal || (va == c.next_u64());
  }
  CHECK(all_equal);
  CHECK_FALSE(any_cross_equal);
}

TEST_CASE("counter rng uniforms respect requested bounds") {
  CounterRng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u <= 3.0);
  }
}

TEST_CASE("counter rng normals have sane moments") {
  CounterRng rng(99);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 1e-2);
  CHECK(sum2 / n - mean * mean == doctest::Approx(1.0).epsilon(2e-2));
}
