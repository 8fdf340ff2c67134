#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "testkit.hpp"

using namespace mps::testkit;

namespace {

constexpr std::size_t kInstances = 1000;

void expect_clean(const SuiteReport& r) {
  MESSAGE(r.summary());
  for (const auto& f : r.failures) MESSAGE(f);
  CHECK(r.violations == 0);
}

}  // namespace

// Seeds differ from the acceptance runner so the two cover different instances.

TEST_CASE("inferred types check") { expect_clean(inference_suite(kInstances, 11)); }

TEST_CASE("typed sessions and their types move together") {
  SuiteReport r = cosim_suite(kInstances, 12);
  expect_clean(r);
  CHECK(r.gated >= kInstances / 10);
}

TEST_CASE("readability agrees with the oracles and the lemmas") { expect_clean(readability_suite(kInstances, 13)); }

TEST_CASE("type-indexed equivalence agrees with brute force") { expect_clean(equivalence_suite(kInstances, 14)); }

TEST_CASE("depth and weight agree with path enumeration") { expect_clean(depth_weight_suite(kInstances, 15)); }

TEST_CASE("documents survive printing") { expect_clean(roundtrip_suite(kInstances, 16)); }

TEST_CASE("encodings follow every machine step") { expect_clean(machine_step_suite(kInstances, 17)); }

TEST_CASE("halting and balancing exclude each other") { expect_clean(machine_oracle_suite(100, 5, 18)); }
