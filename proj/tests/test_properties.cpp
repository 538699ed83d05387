#include <doctest.h>

#include "support/properties.hpp"

// The full 1000-case suites run in the acceptance binary; here a smaller
// sample keeps the unit run quick while exercising the same code.
namespace {
constexpr std::size_t kSample = 200;
}

TEST_CASE("token conservation") {
  const auto r = props::token_conservation(kSample);
  INFO(props::describe(r));
  CHECK(r.ok());
}

TEST_CASE("payload norm preservation") {
  const auto r = props::norm_preservation(kSample);
  INFO(props::describe(r));
  CHECK(r.ok());
}

TEST_CASE("unfire undoes fire") {
  const auto r = props::unfire_fire_identity(kSample);
  INFO(props::describe(r));
  CHECK(r.ok());
}

TEST_CASE("seeded runs are byte-identical") {
  const auto r = props::run_determinism(kSample);
  INFO(props::describe(r));
  CHECK(r.ok());
}

TEST_CASE("scenario and trace documents round-trip") {
  const auto r = props::document_round_trip(kSample);
  INFO(props::describe(r));
  CHECK(r.ok());
}

TEST_CASE("capacity matches the count oracle") {
  const auto r = props::capacity(100);
  INFO(props::describe(r));
  CHECK(r.ok());
}

TEST_CASE("the count oracle on hand-checked cases") {
  using oracle::Shape;
  CHECK(oracle::ConsumptionModel(Shape::Siso, 1).totals({{4}, 3, 0}) == std::set<int>{3});
  CHECK(oracle::ConsumptionModel(Shape::Simo, 2).totals({{2}, 5, 0}) == std::set<int>{2});
  CHECK(oracle::ConsumptionModel(Shape::Miso, 1).totals({{1, 0, 2}, 2, 0}) == std::set<int>{2});
  CHECK(oracle::program_consumption(Shape::Miso, {1, 1}, {0, 0}) == 1);
  CHECK(oracle::program_consumption(Shape::Miso, {1, 1}, {1, 0}) == 2);
  CHECK(oracle::program_consumption(Shape::Simo, {2}, {1, 0, 1}) == 2);
}
