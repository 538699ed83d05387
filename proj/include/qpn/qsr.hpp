#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "qpn/statevector.hpp"

namespace qpn {

/// Qubit roles of the 7-qubit S-R flip-flop circuit.
namespace qsr_qubit {
inline constexpr std::size_t kS = 0;
inline constexpr std::size_t kR = 1;
inline constexpr std::size_t kFlag = 2;
inline constexpr std::size_t kQPrime = 3;
inline constexpr std::size_t kQ = 4;
inline constexpr std::size_t kZero = 5;
inline constexpr std::size_t kOne = 6;
inline constexpr std::size_t kWidth = 7;
}  // namespace qsr_qubit

struct QsrInputs {
  bool s = false;
  bool r = false;
  bool q = false;  // Q' is implied as !q

  friend bool operator==(const QsrInputs&, const QsrInputs&) = default;
};

/// Next-state of a flip-flop. An empty optional is the "Undefined" marker.
struct QsrOutcome {
  std::optional<bool> q_next;
  std::optional<bool> q_prime_next;
  /// Simulated per-qubit values; empty for the reference model.
  std::map<std::size_t, bool> readout;

  bool defined() const { return q_next.has_value(); }
};

/// Verbatim is the reference gate list as-is. Normalized computes and
/// uncomputes the flag qubit around each pair of controlled swaps and drops
/// the two unconditional CX pre-flips.
enum class CircuitVariant { Verbatim, Normalized };

/// All eight (S, R, Q) combinations in truth-table order.
std::vector<QsrInputs> truth_table_inputs();

QsrOutcome reference_next_state(const QsrInputs& in);

Circuit build_qsr_circuit(CircuitVariant variant);

/// q0..q6 = (S, R, 0, !Q, Q, 0, 0).
StateVector qsr_initial_state(const QsrInputs& in);

/// Qubits that need an X gate to prepare `in` from |0000000>.
std::vector<std::size_t> qsr_initialization(const QsrInputs& in);

/// Runs the circuit on a basis input and reads q3 (Q') and q4 (Q).
/// Throws ModelError if the output is not a single basis state.
QsrOutcome simulate_qsr(CircuitVariant variant, const QsrInputs& in);

struct ConformanceRow {
  QsrInputs inputs;
  QsrOutcome reference;
  QsrOutcome verbatim;
  QsrOutcome normalized;
  bool verbatim_q_match = false;
  bool verbatim_q_prime_match = false;
  bool normalized_q_match = false;
  bool normalized_q_prime_match = false;
};

/// One row per defined (S, R) truth-table entry (six rows).
std::vector<ConformanceRow> conformance_report();

/// Qubit positions of one register lane. Lane i starts at 2 + 5i and repeats
/// the flip-flop's own layout (flag, Q', Q, |0>, |1>), so a 1-lane register
/// is the flip-flop circuit itself. S and R are broadcast on q0 and q1.
struct RegisterLane {
  std::size_t flag;
  std::size_t q_prime;
  std::size_t q;
  std::size_t zero;
  std::size_t one;
};

RegisterLane register_lane(std::size_t lane);

/// `u` flip-flops sharing S and R; 2 + 5u qubits. Lane i measures Q' into
/// c[2i] and Q into c[2i+1]. Throws ConstructionError when u == 0.
/// The verbatim body leaves R inverted, so with that variant every lane
/// after the first sees the complemented R; only Normalized lanes are
/// independent.
Circuit build_register(std::size_t u, CircuitVariant variant = CircuitVariant::Normalized);

/// Register input state: S, R broadcast, lane i holding Q = `q[i]`.
StateVector register_initial_state(bool s, bool r, const std::vector<bool>& q);

}  // namespace qpn
