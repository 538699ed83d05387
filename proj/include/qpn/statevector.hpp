#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qpn {

using Amplitude = std::complex<double>;

struct GateOp;

/// Tolerance used for the normalization invariant and basis-state checks.
inline constexpr double kNormTolerance = 1e-12;

/// Formats `index` as a `width`-character bitstring, most significant first.
std::string to_bitstring(std::uint64_t index, std::size_t width);

/// Dense amplitude vector over `num_qubits` qubits.
///
/// Qubit 0 is the least significant bit of the basis index. Bitstrings are
/// written most significant first, so "10" on two qubits is index 2.
/// A zero-qubit state is the scalar 1 and acts as the unit of `tensor`.
class StateVector {
 public:
  StateVector() : num_qubits_(0), amplitudes_{Amplitude{1.0, 0.0}} {}

  /// Throws ConstructionError unless `amplitudes.size() == 2^num_qubits` and
  /// the squared norm is 1 within kNormTolerance.
  StateVector(std::size_t num_qubits, std::vector<Amplitude> amplitudes);

  static StateVector basis(std::size_t num_qubits, std::string_view label);
  static StateVector basis_index(std::size_t num_qubits, std::uint64_t index);
  /// Infers the width from the amplitude count.
  static StateVector from_amplitudes(std::vector<Amplitude> amplitudes);

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  const Amplitude& operator[](std::size_t i) const { return amplitudes_[i]; }

  double norm_squared() const;

  /// Index of the single amplitude with modulus 1, if this is a basis state.
  std::optional<std::uint64_t> as_basis_index(double tol = kNormTolerance) const;

  bool approx_equal(const StateVector& other, double tol = kNormTolerance) const;

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  struct Unchecked {};
  StateVector(Unchecked, std::size_t num_qubits, std::vector<Amplitude> amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {}

  friend StateVector apply(const StateVector&, const GateOp&);
  friend StateVector tensor(const StateVector&, const StateVector&);

  std::size_t num_qubits_;
  std::vector<Amplitude> amplitudes_;
};

enum class GateKind { X, CX, CCX, SWAP, CSWAP, I };

std::string_view gate_name(GateKind kind);
std::size_t gate_arity(GateKind kind);

/// One gate application. Qubit indices list controls first, then targets.
struct GateOp {
  GateKind kind;
  std::vector<std::size_t> qubits;

  static GateOp x(std::size_t q) { return {GateKind::X, {q}}; }
  static GateOp id(std::size_t q) { return {GateKind::I, {q}}; }
  static GateOp cx(std::size_t c, std::size_t t) { return {GateKind::CX, {c, t}}; }
  static GateOp ccx(std::size_t c0, std::size_t c1, std::size_t t) {
    return {GateKind::CCX, {c0, c1, t}};
  }
  static GateOp swap(std::size_t a, std::size_t b) { return {GateKind::SWAP, {a, b}}; }
  static GateOp cswap(std::size_t c, std::size_t a, std::size_t b) {
    return {GateKind::CSWAP, {c, a, b}};
  }

  /// Throws GateError on arity mismatch, repeated or out-of-range indices.
  void validate(std::size_t num_qubits) const;

  friend bool operator==(const GateOp&, const GateOp&) = default;
};

std::string to_string(const GateOp& op);

struct Measurement {
  std::size_t qubit;
  std::size_t clbit;
  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct Circuit {
  std::size_t num_qubits = 0;
  std::vector<GateOp> ops;
  std::vector<Measurement> measurements;

  /// Classical register width: one past the highest measured bit.
  std::size_t num_clbits() const;

  /// Throws CircuitError if an op is invalid or a classical bit repeats.
  void validate() const;

  friend bool operator==(const Circuit&, const Circuit&) = default;
};

StateVector apply(const StateVector& state, const GateOp& op);
StateVector apply_all(StateVector state, std::span<const GateOp> ops);

/// Every supported gate is self-inverse, so the inverse is the reversed list.
std::vector<GateOp> inverse(std::span<const GateOp> ops);

/// Kronecker product; `high` occupies the high-order qubits.
StateVector tensor(const StateVector& high, const StateVector& low);

/// Splits a product state into factors of the given widths (first width is
/// the highest-order block). Returns nullopt when the state is entangled
/// across a block boundary.
std::optional<std::vector<StateVector>> factorize(const StateVector& state,
                                                  std::span<const std::size_t> widths,
                                                  double tol = 1e-10);

/// Basis outcomes with probability above 1e-12, in ascending index order.
std::vector<std::pair<std::string, double>> probabilities(const StateVector& state);

struct RunResult {
  StateVector final_state;
  std::map<std::string, std::size_t> histogram;
};

/// Applies the circuit and samples `shots` measurements.
///
/// Sampling uses std::mt19937_64 seeded with `seed`; a uniform double is taken
/// from the top 53 bits of each draw so results do not depend on the standard
/// library's distribution implementation. Histogram keys are classical
/// registers written c[n-1]..c[0]. A circuit without measurements samples the
/// full register.
RunResult run_circuit(const Circuit& circuit, const StateVector& initial, std::size_t shots,
                      std::uint64_t seed);

}  // namespace qpn
