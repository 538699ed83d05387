#include <doctest.h>

#include "oracles/bit_trace.hpp"
#include "qpn/errors.hpp"
#include "qpn/qsr.hpp"

using namespace qpn;

namespace {

// Expected Q_next per (S, R, Q), written out independently of the library.
int table_q_next(int s, int r, int q) {
  if (s == 1 && r == 1) return -1;
  if (s == 1) return 1;
  if (r == 1) return 0;
  return q;
}

}  // namespace

TEST_CASE("reference model matches the truth table row by row") {
  const auto rows = truth_table_inputs();
  REQUIRE(rows.size() == 8);
  for (const auto& in : rows) {
    const auto out = reference_next_state(in);
    const int want = table_q_next(in.s, in.r, in.q);
    if (want < 0) {
      CHECK_FALSE(out.defined());
      CHECK_FALSE(out.q_prime_next.has_value());
    } else {
      REQUIRE(out.defined());
      CHECK(*out.q_next == (want == 1));
      CHECK(*out.q_prime_next == (want == 0));
    }
  }
  CHECK(*reference_next_state({true, false, false}).q_next);
  CHECK_FALSE(*reference_next_state({false, true, true}).q_next);
  CHECK_FALSE(reference_next_state({true, true, false}).defined());
}

TEST_CASE("verbatim circuit keeps the reference gate list") {
  const auto c = build_qsr_circuit(CircuitVariant::Verbatim);
  CHECK(c.num_qubits == 7);
  REQUIRE(c.ops.size() == 14);
  CHECK(c.ops[3] == GateOp::cx(0, 3));
  CHECK(c.ops[0] == GateOp::x(6));
  CHECK(c.ops[13] == GateOp::cswap(2, 3, 5));
  CHECK(c.measurements == std::vector<Measurement>{{3, 0}, {4, 1}});
}

TEST_CASE("normalized circuit has no CX and four CSWAPs") {
  const auto c = build_qsr_circuit(CircuitVariant::Normalized);
  int cx = 0, cswap = 0;
  for (const auto& op : c.ops) {
    cx += op.kind == GateKind::CX;
    cswap += op.kind == GateKind::CSWAP;
  }
  CHECK(cx == 0);
  CHECK(cswap == 4);
  CHECK(oracle::gate_count(oracle::kNormalizedBody, "cswap") == 4);
  CHECK(c.ops.size() == oracle::parse_body(oracle::kNormalizedBody).size());
}

TEST_CASE("both variants agree with the bit-trace oracle on all eight inputs") {
  for (const auto& in : truth_table_inputs()) {
    const auto v = oracle::run(oracle::kVerbatimBody, in.s, in.r, in.q);
    const auto n = oracle::run(oracle::kNormalizedBody, in.s, in.r, in.q);
    const auto sv = simulate_qsr(CircuitVariant::Verbatim, in);
    const auto sn = simulate_qsr(CircuitVariant::Normalized, in);
    CAPTURE(in.s);
    CAPTURE(in.r);
    CAPTURE(in.q);
    CHECK(*sv.q_next == (v[4] == 1));
    CHECK(*sv.q_prime_next == (v[3] == 1));
    CHECK(*sn.q_next == (n[4] == 1));
    CHECK(*sn.q_prime_next == (n[3] == 1));
    CHECK(sv.readout.at(4) == *sv.q_next);
    CHECK(sv.readout.at(3) == *sv.q_prime_next);

    // Whole final register, not just the read lines.
    const auto final_state = apply_all(qsr_initial_state(in),
                                       build_qsr_circuit(CircuitVariant::Verbatim).ops);
    std::uint64_t index = 0;
    for (int q = 0; q < oracle::kQubits; ++q) index |= std::uint64_t(v[q]) << q;
    CHECK(final_state.as_basis_index() == index);
  }
}

TEST_CASE("simulation examples") {
  auto o = simulate_qsr(CircuitVariant::Normalized, {true, false, false});
  CHECK(*o.q_next);
  CHECK_FALSE(*o.q_prime_next);
  o = simulate_qsr(CircuitVariant::Normalized, {false, false, true});
  CHECK(*o.q_next);
  CHECK_FALSE(*o.q_prime_next);
  o = simulate_qsr(CircuitVariant::Verbatim, {false, true, false});
  CHECK_FALSE(*o.q_next);
  o = simulate_qsr(CircuitVariant::Normalized, {false, true, true});
  CHECK_FALSE(*o.q_next);
  CHECK(*o.q_prime_next);
}

TEST_CASE("conformance report") {
  const auto rows = conformance_report();
  REQUIRE(rows.size() == 6);
  int verbatim_q_misses = 0, verbatim_qp_misses = 0;
  for (const auto& row : rows) {
    CHECK_FALSE((row.inputs.s && row.inputs.r));
    CHECK(row.normalized_q_match);
    CHECK(row.normalized_q_prime_match);
    verbatim_q_misses += !row.verbatim_q_match;
    verbatim_qp_misses += !row.verbatim_q_prime_match;
    if (row.inputs.s && !row.inputs.r && !row.inputs.q) CHECK(*row.verbatim.q_next);
  }
  // Hold rows swap the lines; reset rows lose Q' (Q=0) or Q (Q=1).
  CHECK(verbatim_q_misses == 3);
  CHECK(verbatim_qp_misses == 3);
}

TEST_CASE("initialization gates") {
  CHECK(qsr_initialization({false, true, false}) == std::vector<std::size_t>{1, 3});
  CHECK(qsr_initialization({true, false, true}) == std::vector<std::size_t>{0, 4});
  CHECK(qsr_initial_state({false, true, false}).as_basis_index() == 0b0001010u);
}

TEST_CASE("register") {
  CHECK_THROWS_AS(build_register(0), ConstructionError);

  const auto one = build_register(1);
  CHECK(one == build_qsr_circuit(CircuitVariant::Normalized));

  const auto three = build_register(3);
  CHECK(three.num_qubits == 17);
  CHECK(three.ops.size() == 3 * one.ops.size());

  // u = 2, set: both lanes end with Q = 1.
  const auto two = build_register(2);
  const auto out = apply_all(register_initial_state(true, false, {false, true}), two.ops);
  const auto idx = out.as_basis_index();
  REQUIRE(idx.has_value());
  for (std::size_t lane = 0; lane < 2; ++lane) {
    CHECK(((*idx >> register_lane(lane).q) & 1U) == 1U);
    CHECK(((*idx >> register_lane(lane).q_prime) & 1U) == 0U);
  }
}

TEST_CASE("register lanes match the single flip-flop regardless of neighbours") {
  for (std::size_t u = 1; u <= 3; ++u) {
    const auto reg = build_register(u);
    for (int s = 0; s <= 1; ++s) {
      for (int r = 0; r <= 1; ++r) {
        for (std::uint32_t qs = 0; qs < (1U << u); ++qs) {
          std::vector<bool> q(u);
          for (std::size_t i = 0; i < u; ++i) q[i] = ((qs >> i) & 1U) != 0;
          const auto idx = apply_all(register_initial_state(s, r, q), reg.ops).as_basis_index();
          REQUIRE(idx.has_value());
          for (std::size_t lane = 0; lane < u; ++lane) {
            const auto bits = oracle::run(oracle::kNormalizedBody, s, r, q[lane]);
            CHECK(((*idx >> register_lane(lane).q) & 1U) == std::uint64_t(bits[4]));
            CHECK(((*idx >> register_lane(lane).q_prime) & 1U) == std::uint64_t(bits[3]));
          }
        }
      }
    }
  }
}
