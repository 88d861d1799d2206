#include <doctest.h>

#include <cmath>
#include <vector>

#include "hdc/error.hpp"
#include "hdc/hypervector.hpp"
#include "hdc/memories.hpp"
#include "hdc/random.hpp"

using hdc::AssociativeMemory;
using hdc::CimParams;
using hdc::ContextMemory;
using hdc::ContinuousItemMemory;
using hdc::ContractViolation;
using hdc::hamming;
using hdc::Hypervector;
using hdc::ItemMemory;
using hdc::RandomSource;

namespace {

Hypervector flip_fraction(const Hypervector& hv, double frac, RandomSource& rng) {
  Hypervector out = hv;
  for (int i = 0; i < out.dim(); ++i) {
    if (rng.next_unit() < frac) out.flip_bit(i);
  }
  return out;
}

}  // namespace

TEST_CASE("item memory entries are quasi-orthogonal and reproducible") {
  const ItemMemory im = ItemMemory::build(64, 10000, 42);
  REQUIRE(im.size() == 64);

  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < 64; ++i) {
    for (int j = i + 1; j < 64; ++j) {
      const double d = hamming(im.entry(i), im.entry(j));
      CHECK(d > 0.47);
      CHECK(d < 0.53);
      sum += d;
      ++pairs;
    }
  }
  CHECK(sum / pairs > 0.495);
  CHECK(sum / pairs < 0.505);

  const ItemMemory again = ItemMemory::build(64, 10000, 42);
  for (int i = 0; i < 64; ++i) CHECK(im.entry(i) == again.entry(i));
  CHECK(ItemMemory::build(64, 10000, 43).entry(0) != im.entry(0));

  CHECK(ItemMemory::build(1, 100, 0).size() == 1);
  CHECK_THROWS_AS(ItemMemory::build(0, 100, 0), ContractViolation);
  CHECK_THROWS_AS(im.entry(64), ContractViolation);
  CHECK_THROWS_AS(im.entry(-1), ContractViolation);
}

TEST_CASE("cim extremes are exactly d_max apart") {
  // round(d_max * dim) positions flip in total, so the end-to-end distance
  // is exact, not approximate.
  const int dim = 10000;
  struct Cfg { int levels; double d_max; };
  for (Cfg cfg : {Cfg{2, 1.0}, Cfg{11, 0.5}, Cfg{59, 1.0}, Cfg{55, 0.5}, Cfg{14, 0.6}}) {
    const auto cim = ContinuousItemMemory::build({cfg.levels, cfg.d_max}, dim, 9);
    const double end = hamming(cim.level(0), cim.level(cfg.levels - 1));
    CHECK(end == std::round(cfg.d_max * dim) / dim);
  }
}

TEST_CASE("cim of two complementary levels") {
  const auto cim = ContinuousItemMemory::build({2, 1.0}, 10000, 5);
  CHECK(hamming(cim.level(0), cim.level(1)) == 1.0);
}

TEST_CASE("cim midpoint distance") {
  const auto cim = ContinuousItemMemory::build({11, 0.5}, 10000, 7);
  const double mid = hamming(cim.level(0), cim.level(5));
  CHECK(mid > 0.245);
  CHECK(mid < 0.255);
}

TEST_CASE("cim distances grow linearly in level separation") {
  const int dim = 10000;
  RandomSource pick(21);
  for (int trial = 0; trial < 12; ++trial) {
    const int levels = 2 + static_cast<int>(pick.next_below(63));
    const double d_max = 0.05 + 0.95 * pick.next_unit();
    const auto cim = ContinuousItemMemory::build({levels, d_max}, dim, pick.next_u64());
    const double tol = static_cast<double>(levels - 1) / dim + 0.001;
    for (int i = 0; i < levels; ++i) {
      for (int j = i; j < levels; ++j) {
        const double want = d_max * (j - i) / (levels - 1);
        const double got = hamming(cim.level(i), cim.level(j));
        REQUIRE(std::abs(got - want) <= tol);
      }
    }
  }
}

TEST_CASE("cim chain is monotone and never re-flips") {
  const auto cim = ContinuousItemMemory::build({14, 0.6}, 10000, 3);
  for (int i = 0; i + 2 < 14; ++i) {
    const double d01 = hamming(cim.level(i), cim.level(i + 1));
    const double d02 = hamming(cim.level(i), cim.level(i + 2));
    CHECK(d02 > d01);
  }
  // distances from level 0 are the running batch sums, so they add exactly
  double acc = 0.0;
  for (int i = 1; i < 14; ++i) {
    acc += hamming(cim.level(i - 1), cim.level(i));
    CHECK(hamming(cim.level(0), cim.level(i)) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("cim validation") {
  CHECK_THROWS_AS(ContinuousItemMemory::build({1, 0.5}, 100, 0), ContractViolation);
  CHECK_THROWS_AS(ContinuousItemMemory::build({4, 1.5}, 100, 0), ContractViolation);
  CHECK_THROWS_AS(ContinuousItemMemory::build({4, -0.1}, 100, 0), ContractViolation);
  const auto cim = ContinuousItemMemory::build({4, 0.5}, 100, 0);
  CHECK_THROWS_AS(cim.level(4), ContractViolation);
  CHECK_THROWS_AS(cim.level(-1), ContractViolation);
  const auto again = ContinuousItemMemory::build({4, 0.5}, 100, 0);
  for (int i = 0; i < 4; ++i) CHECK(cim.level(i) == again.level(i));
}

TEST_CASE("associative memory recovers noisy class prototypes") {
  const int dim = 10000;
  RandomSource rng(50);
  std::vector<Hypervector> clean;
  std::vector<int> ids;
  for (int c = 0; c < 13; ++c) {
    clean.push_back(Hypervector::random(dim, rng));
    ids.push_back(c);
  }

  AssociativeMemory am(ids, dim, 1);
  for (int c = 0; c < 13; ++c) {
    for (int rep = 0; rep < 100; ++rep) {
      am.add(c, flip_fraction(clean[static_cast<std::size_t>(c)], 0.10, rng));
    }
  }
  am.finalize();

  for (int c = 0; c < 13; ++c) {
    const auto& proto = am.prototype(c);
    CHECK(hamming(proto, clean[static_cast<std::size_t>(c)]) < 0.05);
    // a fresh 20%-corrupted sample still lands on its class
    const auto res = am.query(flip_fraction(clean[static_cast<std::size_t>(c)], 0.20, rng));
    CHECK(res.class_id == c);
    REQUIRE(res.distances.size() == 13);
  }

  const auto res = am.query(Hypervector::random(dim, rng));
  for (double d : res.distances) {
    CHECK(d > 0.48);
    CHECK(d < 0.52);
  }
}

TEST_CASE("associative memory basics") {
  RandomSource rng(51);
  const Hypervector a = Hypervector::random(1000, rng);
  const Hypervector b = Hypervector::random(1000, rng);

  AssociativeMemory am({10, 20}, 1000, 2);
  am.add(10, a);
  am.add(20, b);
  am.finalize();
  CHECK(am.prototype(0) == a);
  CHECK(am.prototype(1) == b);

  const auto res = am.query(a);
  CHECK(res.class_id == 10);
  CHECK(res.class_index == 0);
  CHECK(res.distances[0] == 0.0);

  CHECK(am.class_index(20) == 1);
  CHECK(am.class_index(99) == -1);
  CHECK_THROWS_AS(am.add(99, a), ContractViolation);
  CHECK_THROWS_AS(am.prototype(2), ContractViolation);

  // majority of two a's beats one b
  AssociativeMemory maj({0}, 1000, 3);
  maj.add(0, a);
  maj.add(0, a);
  maj.add(0, b);
  maj.finalize();
  CHECK(maj.prototype(0) == a);
}

TEST_CASE("associative memory ties go to the lowest class index") {
  RandomSource rng(52);
  const Hypervector shared = Hypervector::random(1000, rng);
  AssociativeMemory am({5, 9}, 1000, 4);
  am.add(5, shared);
  am.add(9, shared);
  am.finalize();
  const auto res = am.query(shared);
  CHECK(res.class_id == 5);
  CHECK(res.distances[0] == res.distances[1]);
}

TEST_CASE("associative memory contract checks") {
  CHECK_THROWS_AS(AssociativeMemory({}, 1000, 0), ContractViolation);

  RandomSource rng(53);
  AssociativeMemory am({0, 1}, 1000, 5);
  am.add(0, Hypervector::random(1000, rng));
  CHECK_THROWS_AS(am.query(Hypervector::random(1000, rng)), ContractViolation);
  am.finalize();
  CHECK_THROWS_AS(am.query(Hypervector::random(500, rng)), ContractViolation);
}

TEST_CASE("refinalizing after more adds matches a from-scratch rebuild") {
  RandomSource rng(54);
  std::vector<Hypervector> hvs;
  for (int i = 0; i < 8; ++i) hvs.push_back(Hypervector::random(2000, rng));

  AssociativeMemory incremental({0, 1}, 2000, 99);
  incremental.add(0, hvs[0]);
  incremental.add(0, hvs[1]);
  incremental.add(1, hvs[2]);
  incremental.finalize();
  incremental.add(0, hvs[3]);
  incremental.add(1, hvs[4]);
  incremental.add(1, hvs[5]);
  incremental.finalize();

  AssociativeMemory scratch({0, 1}, 2000, 99);
  scratch.add(0, hvs[0]);
  scratch.add(0, hvs[1]);
  scratch.add(1, hvs[2]);
  scratch.add(0, hvs[3]);
  scratch.add(1, hvs[4]);
  scratch.add(1, hvs[5]);
  scratch.finalize();

  CHECK(incremental.prototype(0) == scratch.prototype(0));
  CHECK(incremental.prototype(1) == scratch.prototype(1));
}

TEST_CASE("context memory entries are quasi-orthogonal") {
  const std::vector<int> ids{0, 1, 2, 3, 4, 5, 6, 7};
  const ContextMemory cm = ContextMemory::build(ids, 10000, 6);
  REQUIRE(cm.size() == 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      const double d = hamming(cm.entry(i), cm.entry(j));
      CHECK(d > 0.48);
      CHECK(d < 0.52);
    }
  }
  CHECK(cm.entry_for(3) == cm.entry(3));
  CHECK_THROWS_AS(cm.entry_for(42), ContractViolation);

  const ContextMemory again = ContextMemory::build(ids, 10000, 6);
  for (int i = 0; i < 8; ++i) CHECK(cm.entry(i) == again.entry(i));

  // non-contiguous ids resolve by value
  const ContextMemory sparse = ContextMemory::build({2, 7, 30}, 1000, 8);
  CHECK(sparse.entry_for(30) == sparse.entry(2));
  CHECK_THROWS_AS(ContextMemory::build({}, 1000, 0), ContractViolation);
}
