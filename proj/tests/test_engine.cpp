#include <doctest.h>

#include <cmath>

#include "qpn/buffers.hpp"
#include "qpn/engine.hpp"
#include "qpn/errors.hpp"

using namespace qpn;

namespace {

std::vector<std::string> ids(const Marking& m, const QPNet& net, const std::string& place) {
  return m.token_ids(net.place_index(place));
}

std::vector<std::size_t> counts(const Marking& m) { return m.token_counts(); }

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// P1 -> T1 -> P1, fires forever.
BufferNet loop_net() {
  QPNet net;
  net.add_place({"P1", PlaceKind::Input});
  Transition t;
  t.id = "T1";
  t.inputs = {{"P1", "x", 1}};
  t.outputs = {{"P1", "o", {{"x", TokenPart::Whole}}, false}};
  net.add_transition(t);
  Marking m(1);
  m.add_token(0, QToken::data("d1", StateVector::basis(1, "0")));
  return {net, m};
}

}  // namespace

TEST_CASE("CNOT example: firing T1 flips d and leaves the rest") {
  const auto b = build_cnot_example();
  CHECK(enabled_transitions(b.net, b.initial) == std::vector<std::string>{"T1"});
  const auto r = fire(b.net, b.initial, "T1");
  const Marking& m = r.marking;
  CHECK(m.time() == 1);
  CHECK(ids(m, b.net, "P3") == std::vector<std::string>{"a", "d"});
  CHECK(ids(m, b.net, "P1") == std::vector<std::string>{"b", "c"});
  CHECK(ids(m, b.net, "P2") == std::vector<std::string>{"e"});
  CHECK(m.token("a").payload == StateVector::basis(1, "1"));
  CHECK(m.token("d").payload.approx_equal(StateVector::basis(1, "1")));
  CHECK(m.token("c").payload == b.initial.token("c").payload);

  CHECK(r.event.consumed.size() == 2);
  CHECK(r.event.consumed[1].tokens[0].payload == StateVector::basis(1, "0"));
  CHECK(r.event.produced[1].tokens[0].payload.approx_equal(StateVector::basis(1, "1")));

  const Marking back = unfire(b.net, m, r.event);
  CHECK(back == b.initial);
  CHECK(back.token("d").payload == StateVector::basis(1, "0"));
  CHECK(ids(back, b.net, "P2") == std::vector<std::string>{"d", "e"});
}

TEST_CASE("SISO bookkeeping") {
  const auto b = build_siso(4, 3);
  CHECK(counts(b.initial) == std::vector<std::size_t>{4, 3, 0, 0});
  const auto r = fire(b.net, b.initial, "T1");
  CHECK(counts(r.marking) == std::vector<std::size_t>{3, 2, 1, 1});
  CHECK(r.marking.token("d1").payload == b.initial.token("d1").payload);
}

TEST_CASE("enabledness") {
  const auto empty_supply = build_siso(2, 0);
  CHECK(enabled_transitions(empty_supply.net, empty_supply.initial).empty());
  CHECK_THROWS_AS(fire(empty_supply.net, empty_supply.initial, "T1"), NotEnabledError);

  QPNet bare;
  bare.add_place({"P", PlaceKind::Input});
  Transition t;
  t.id = "T";
  t.inputs = {{"P", "x", 1}};
  t.outputs = {{"P", "o", {{"x", TokenPart::Whole}}, false}};
  bare.add_transition(t);
  CHECK(enabled_transitions(bare, Marking(1)).empty());
  CHECK_THROWS_AS(enabled_transitions(bare, Marking(2)), ModelError);

  // Priority with one pair staged in P_DA2: T3 is inhibited, T4 is enabled.
  const auto p = build_priority(1, 1, 1, 1);
  Marking m = fire(p.net, p.initial, "T1").marking;
  m = fire(p.net, m, "T2").marking;
  const auto en = enabled_transitions(p.net, m);
  CHECK_FALSE(contains(en, "T3"));
  CHECK(contains(en, "T4"));
  m = fire(p.net, m, "T4").marking;
  CHECK(contains(enabled_transitions(p.net, m), "T3"));
}

TEST_CASE("arcs from one place add up") {
  QPNet net;
  net.add_place({"P", PlaceKind::Input});
  net.add_place({"Q", PlaceKind::Output});
  Transition t;
  t.id = "T";
  t.inputs = {{"P", "x", 1}, {"P", "y", 1}};
  t.outputs = {{"Q", "o", {{"x", TokenPart::Whole}, {"y", TokenPart::Whole}}, false}};
  net.add_transition(t);
  Marking m(2);
  m.add_token(0, QToken::data("a", StateVector::basis(1, "0")));
  CHECK(enabled_transitions(net, m).empty());
  m.add_token(0, QToken::data("b", StateVector::basis(1, "1")));
  const auto r = fire(net, m, "T");
  CHECK(r.marking.token_ids(1) == std::vector<std::string>{"a", "b"});
  CHECK(unfire(net, r.marking, r.event) == m);
}

TEST_CASE("multiplicity counts records") {
  const auto miso = build_miso({2, 0}, 2);
  Marking m = fire(miso.net, miso.initial, "T1").marking;
  m = fire(miso.net, m, "T1").marking;
  const auto da = miso.net.place_index("P_DA");
  CHECK(m.record_count(da) == 2);
  CHECK(m.token_count(da) == 4);
  CHECK(m.queue(da).front() == Record{"d1", "z1"});

  QPNet net;
  net.add_place({"P", PlaceKind::Input});
  net.add_place({"Q", PlaceKind::Output});
  Transition t;
  t.id = "T";
  t.inputs = {{"P", "x", 2}};
  t.outputs = {{"Q", "o", {{"x", TokenPart::Whole}}, true}};
  net.add_transition(t);
  Marking two(2);
  two.add_token(0, QToken::data("a", StateVector::basis(1, "0")));
  CHECK(enabled_transitions(net, two).empty());
  two.add_token(0, QToken::data("b", StateVector::basis(1, "0")));
  const auto r = fire(net, two, "T");
  CHECK(r.marking.queue(1).front() == Record{"a", "b"});
}

TEST_CASE("net construction is validated") {
  QPNet net;
  net.add_place({"P", PlaceKind::Input});
  net.add_place({"A", PlaceKind::Ancillary});
  CHECK_THROWS_AS(net.add_place({"P", PlaceKind::Input}), ModelError);

  Transition unrouted;
  unrouted.id = "T";
  unrouted.inputs = {{"P", "x", 1}};
  CHECK_THROWS_AS(net.add_transition(unrouted), ModelError);

  Transition twice = unrouted;
  twice.outputs = {{"P", "o", {{"x", TokenPart::Whole}, {"x", TokenPart::Data}}, false}};
  CHECK_THROWS_AS(net.add_transition(twice), ModelError);

  Transition half = unrouted;
  half.outputs = {{"P", "o", {{"x", TokenPart::Data}}, false}};
  CHECK_THROWS_AS(net.add_transition(half), ModelError);

  Transition ghost = unrouted;
  ghost.outputs = {{"Nowhere", "o", {{"x", TokenPart::Whole}}, false}};
  CHECK_THROWS_AS(net.add_transition(ghost), ModelError);

  Transition guarded = unrouted;
  guarded.outputs = {{"P", "o", {{"x", TokenPart::Whole}}, false}};
  guarded.guard = AddressGuard{"A", 0};
  CHECK_THROWS_AS(net.add_transition(guarded), ModelError);

  const double h = 1.0 / std::sqrt(2.0);
  CHECK_THROWS_AS(QToken::ancillary("z", StateVector(1, {Amplitude{h, 0}, Amplitude{h, 0}})),
                  ModelError);
  CHECK(QToken::ancillary("z", StateVector::basis(2, "10")).address == 2U);

  Marking m(1);
  m.add_token(0, QToken::data("d", StateVector::basis(1, "0")));
  CHECK_THROWS_AS(m.add_token(0, QToken::data("d", StateVector::basis(1, "0"))), ModelError);
}

TEST_CASE("a gate that would entangle its tokens is a ModelError") {
  QPNet net;
  net.add_place({"P", PlaceKind::Input});
  net.add_place({"Q", PlaceKind::Output});
  Transition t;
  t.id = "T";
  t.inputs = {{"P", "x", 1}, {"P", "y", 1}};
  t.outputs = {{"Q", "o", {{"x", TokenPart::Whole}, {"y", TokenPart::Whole}}, false}};
  t.gate = {GateOp::cx(1, 0)};
  net.add_transition(t);
  const double h = 1.0 / std::sqrt(2.0);
  Marking m(2);
  m.add_token(0, QToken::data("c", StateVector(1, {Amplitude{h, 0}, Amplitude{h, 0}})));
  m.add_token(0, QToken::data("t", StateVector::basis(1, "0")));
  CHECK_THROWS_AS(fire(net, m, "T"), ModelError);
}

TEST_CASE("unfire rejects events that did not produce the marking") {
  const auto b = build_siso(3, 2);
  const auto first = fire(b.net, b.initial, "T1");
  const auto second = fire(b.net, first.marking, "T1");
  CHECK_THROWS_AS(unfire(b.net, second.marking, first.event), ReversalError);
  CHECK_THROWS_AS(unfire(b.net, b.initial, first.event), ReversalError);

  FiringEvent bogus = second.event;
  bogus.transition = "T9";
  CHECK_THROWS_AS(unfire(b.net, second.marking, bogus), ReversalError);

  FiringEvent swapped = second.event;
  std::swap(swapped.produced[0].tokens[0].id, swapped.produced[1].tokens[0].id);
  CHECK_THROWS_AS(unfire(b.net, second.marking, swapped), ReversalError);

  CHECK(unfire(b.net, second.marking, second.event) == first.marking);
}

TEST_CASE("reversing a whole run restores the initial marking exactly") {
  PayloadMap payloads{{"d1", StateVector::basis(2, "10")}};
  const auto b = build_siso(3, 2, payloads);
  const Trace trace = run(b.net, b.initial, AddressDriven{});
  REQUIRE(trace.events.size() == 2);
  Marking m = trace.final;
  for (auto it = trace.events.rbegin(); it != trace.events.rend(); ++it) m = unfire(b.net, m, *it);
  CHECK(m == b.initial);
  CHECK(m.fingerprint() == b.initial.fingerprint());
}

TEST_CASE("scheduled runs") {
  const auto siso = build_siso(2, 2);
  const Trace none = run(siso.net, siso.initial, Scripted{});
  CHECK(none.events.empty());
  CHECK(none.final == none.initial);

  try {
    run(siso.net, siso.initial, Scripted{{"T1", "T1", "T1"}});
    FAIL("expected NotEnabledError");
  } catch (const NotEnabledError& e) {
    CHECK(e.step() == 2U);
  }

  const auto simo = build_simo(4, 3, 2, std::vector<std::uint64_t>{1, 0, 1});
  CHECK(run(simo.net, simo.initial, AddressDriven{}).firing_order() ==
        std::vector<std::string>{"T2", "T1", "T2"});

  const auto miso = build_miso({3, 2}, 3, std::vector<std::uint64_t>{0, 1, 1});
  const Trace eager = run(miso.net, miso.initial, EagerOutputThenScript{});
  CHECK(eager.firing_order() == std::vector<std::string>{"T1", "T3", "T2", "T3", "T2", "T3"});
  CHECK(ids(eager.final, miso.net, "P_O") == std::vector<std::string>{"d1", "d4", "d5"});
  // Without eagerness every selection happens before the first output.
  CHECK(run(miso.net, miso.initial, AddressDriven{}).firing_order() ==
        std::vector<std::string>{"T1", "T2", "T2", "T3", "T3", "T3"});

  const auto loop = loop_net();
  CHECK_THROWS_AS(run(loop.net, loop.initial, AddressDriven{}, 50), ExplosionError);
}

TEST_CASE("a selection whose input is empty is reported, not fired") {
  const auto miso = build_miso({1, 1}, 2, std::vector<std::uint64_t>{0, 0});
  const Trace t = run(miso.net, miso.initial, AddressDriven{});
  CHECK(t.firing_order() == std::vector<std::string>{"T1", "T3"});
  REQUIRE(t.skipped.size() == 1);
  CHECK(t.skipped[0].token == "z2");
  CHECK(t.skipped[0].transition == "T1");
  CHECK(t.skipped[0].address == 0U);
  CHECK(ids(t.final, miso.net, "P_I2") == std::vector<std::string>{"d2"});
}

TEST_CASE("enumeration") {
  QPNet net;
  net.add_place({"P", PlaceKind::Input});
  const auto zero = enumerate_final_markings(net, Marking(1));
  REQUIRE(zero.outcomes.size() == 1);
  CHECK(zero.outcomes[0].signature.values() == std::vector<std::size_t>{0});
  CHECK(zero.outcomes[0].witness.empty());

  const auto simo = build_simo(4, 3, 2);
  EnumerationOptions opts;
  opts.projection = {"P_O1", "P_O2"};
  const auto r = enumerate_final_markings(simo.net, simo.initial, opts);
  std::vector<std::string> sigs;
  for (const auto& o : r.outcomes) sigs.push_back(o.signature.to_string());
  CHECK(sigs == std::vector<std::string>{"(0,3)", "(1,2)", "(2,1)", "(3,0)"});

  for (const auto& o : r.outcomes) {
    const Trace replay = run(simo.net, simo.initial, Scripted{o.witness});
    CHECK(signature_of(simo.net, replay.final, opts.projection) == o.signature);
    CHECK(enabled_transitions(simo.net, replay.final).empty());
  }

  const auto loop = loop_net();
  EnumerationOptions bounded;
  bounded.step_bound = 10;
  // The loop revisits its only marking, so pruning keeps this finite.
  CHECK_NOTHROW(enumerate_final_markings(loop.net, loop.initial, bounded));

  const auto big = build_simo(8, 8, 4);
  CHECK_THROWS_AS(enumerate_final_markings(big.net, big.initial, bounded), ExplosionError);
}

TEST_CASE("enumeration callback sees every explored firing") {
  const auto p = build_priority(1, 2, 2, 2);
  std::size_t seen = 0;
  bool violated = false;
  EnumerationOptions opts;
  opts.on_firing = [&](const Marking& before, const FiringEvent& e) {
    ++seen;
    if (e.transition == "T3" && before.record_count(p.net.place_index("P_DA2")) != 0) {
      violated = true;
    }
  };
  const auto r = enumerate_final_markings(p.net, p.initial, opts);
  CHECK(seen == r.firings);
  CHECK(seen > 0);
  CHECK_FALSE(violated);
}

TEST_CASE("unfire accepts a global phase moved between factored tokens") {
  QPNet net;
  net.add_place({"P", PlaceKind::Input});
  net.add_place({"Q", PlaceKind::Output});
  Transition t;
  t.id = "T";
  t.inputs = {{"P", "x", 1}, {"P", "y", 1}};
  t.outputs = {{"Q", "o", {{"x", TokenPart::Whole}, {"y", TokenPart::Whole}}, false}};
  t.gate = {GateOp::swap(0, 1)};
  net.add_transition(t);
  Marking m(2);
  m.add_token(0, QToken::data("a", StateVector(1, {Amplitude{0, 0.6}, Amplitude{0.8, 0}})));
  m.add_token(0, QToken::data("b", StateVector(1, {Amplitude{0, 1}, Amplitude{0, 0}})));
  const auto r = fire(net, m, "T");
  CHECK(unfire(net, r.marking, r.event) == m);
}
