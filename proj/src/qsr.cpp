#include "qpn/qsr.hpp"

#include "qpn/errors.hpp"

namespace qpn {

namespace {

// Gate body for one flip-flop whose qubits sit at the given positions.
std::vector<GateOp> flip_flop_body(CircuitVariant variant, std::size_t s, std::size_t r,
                                   const RegisterLane& l) {
  if (variant == CircuitVariant::Verbatim) {
    return {
        GateOp::x(l.one),
        GateOp::x(r),
        GateOp::x(s),
        GateOp::cx(s, l.q_prime),
        GateOp::cx(r, l.q),
        GateOp::x(r),
        GateOp::ccx(s, r, l.flag),
        GateOp::cswap(l.flag, l.q_prime, l.one),
        GateOp::x(r),
        GateOp::x(s),
        GateOp::cswap(l.flag, l.q, l.zero),
        GateOp::ccx(s, r, l.flag),
        GateOp::cswap(l.flag, l.q, l.one),
        GateOp::cswap(l.flag, l.q_prime, l.zero),
    };
  }

  std::vector<GateOp> ops{GateOp::x(l.one)};
  // flag = !S & R, swap Q' <- |1>, Q <- |0>, uncompute.
  const std::vector<GateOp> reset_flag{GateOp::x(s), GateOp::ccx(s, r, l.flag), GateOp::x(s)};
  ops.insert(ops.end(), reset_flag.begin(), reset_flag.end());
  ops.push_back(GateOp::cswap(l.flag, l.q_prime, l.one));
  ops.push_back(GateOp::cswap(l.flag, l.q, l.zero));
  ops.insert(ops.end(), reset_flag.begin(), reset_flag.end());
  // flag = S & !R, swap Q <- |1>, Q' <- |0>, uncompute.
  const std::vector<GateOp> set_flag{GateOp::x(r), GateOp::ccx(s, r, l.flag), GateOp::x(r)};
  ops.insert(ops.end(), set_flag.begin(), set_flag.end());
  ops.push_back(GateOp::cswap(l.flag, l.q, l.one));
  ops.push_back(GateOp::cswap(l.flag, l.q_prime, l.zero));
  ops.insert(ops.end(), set_flag.begin(), set_flag.end());
  return ops;
}

}  // namespace

std::vector<QsrInputs> truth_table_inputs() {
  return {{false, false, false}, {false, false, true}, {true, false, false},
          {true, false, true},   {false, true, false}, {false, true, true},
          {true, true, false},   {true, true, true}};
}

QsrOutcome reference_next_state(const QsrInputs& in) {
  QsrOutcome out;
  if (in.s && in.r) return out;
  if (in.s) {
    out.q_next = true;
  } else if (in.r) {
    out.q_next = false;
  } else {
    out.q_next = in.q;
  }
  out.q_prime_next = !*out.q_next;
  return out;
}

RegisterLane register_lane(std::size_t lane) {
  const std::size_t base = 2 + 5 * lane;
  return {base, base + 1, base + 2, base + 3, base + 4};
}

Circuit build_qsr_circuit(CircuitVariant variant) {
  Circuit c;
  c.num_qubits = qsr_qubit::kWidth;
  c.ops = flip_flop_body(variant, qsr_qubit::kS, qsr_qubit::kR, register_lane(0));
  c.measurements = {{qsr_qubit::kQPrime, 0}, {qsr_qubit::kQ, 1}};
  return c;
}

std::vector<std::size_t> qsr_initialization(const QsrInputs& in) {
  std::vector<std::size_t> xs;
  if (in.s) xs.push_back(qsr_qubit::kS);
  if (in.r) xs.push_back(qsr_qubit::kR);
  xs.push_back(in.q ? qsr_qubit::kQ : qsr_qubit::kQPrime);
  return xs;
}

StateVector qsr_initial_state(const QsrInputs& in) {
  std::uint64_t index = 0;
  for (auto q : qsr_initialization(in)) index |= std::uint64_t{1} << q;
  return StateVector::basis_index(qsr_qubit::kWidth, index);
}

QsrOutcome simulate_qsr(CircuitVariant variant, const QsrInputs& in) {
  const Circuit circuit = build_qsr_circuit(variant);
  const StateVector final_state = apply_all(qsr_initial_state(in), circuit.ops);
  const auto index = final_state.as_basis_index();
  if (!index) throw ModelError("flip-flop output is not a basis state");

  QsrOutcome out;
  const bool q = ((*index >> qsr_qubit::kQ) & 1U) != 0;
  const bool qp = ((*index >> qsr_qubit::kQPrime) & 1U) != 0;
  out.q_next = q;
  out.q_prime_next = qp;
  out.readout = {{qsr_qubit::kQPrime, qp}, {qsr_qubit::kQ, q}};
  return out;
}

std::vector<ConformanceRow> conformance_report() {
  std::vector<ConformanceRow> rows;
  for (const auto& in : truth_table_inputs()) {
    if (in.s && in.r) continue;
    ConformanceRow row;
    row.inputs = in;
    row.reference = reference_next_state(in);
    row.verbatim = simulate_qsr(CircuitVariant::Verbatim, in);
    row.normalized = simulate_qsr(CircuitVariant::Normalized, in);
    row.verbatim_q_match = row.verbatim.q_next == row.reference.q_next;
    row.verbatim_q_prime_match = row.verbatim.q_prime_next == row.reference.q_prime_next;
    row.normalized_q_match = row.normalized.q_next == row.reference.q_next;
    row.normalized_q_prime_match = row.normalized.q_prime_next == row.reference.q_prime_next;
    rows.push_back(std::move(row));
  }
  return rows;
}

Circuit build_register(std::size_t u, CircuitVariant variant) {
  if (u == 0) throw ConstructionError("a register needs at least one flip-flop");
  Circuit c;
  c.num_qubits = 2 + 5 * u;
  for (std::size_t lane = 0; lane < u; ++lane) {
    const RegisterLane l = register_lane(lane);
    auto body = flip_flop_body(variant, qsr_qubit::kS, qsr_qubit::kR, l);
    c.ops.insert(c.ops.end(), body.begin(), body.end());
    c.measurements.push_back({l.q_prime, 2 * lane});
    c.measurements.push_back({l.q, 2 * lane + 1});
  }
  return c;
}

StateVector register_initial_state(bool s, bool r, const std::vector<bool>& q) {
  if (q.empty()) throw ConstructionError("a register needs at least one flip-flop");
  std::uint64_t index = 0;
  if (s) index |= std::uint64_t{1} << qsr_qubit::kS;
  if (r) index |= std::uint64_t{1} << qsr_qubit::kR;
  for (std::size_t lane = 0; lane < q.size(); ++lane) {
    const RegisterLane l = register_lane(lane);
    index |= std::uint64_t{1} << (q[lane] ? l.q : l.q_prime);
  }
  return StateVector::basis_index(2 + 5 * q.size(), index);
}

}  // namespace qpn
