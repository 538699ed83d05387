#include "qpn/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "qpn/errors.hpp"

namespace qpn {

namespace {

constexpr std::size_t kMaxQubits = 30;

std::size_t dimension_for(std::size_t num_qubits) {
  if (num_qubits > kMaxQubits) {
    throw ConstructionError("state of " + std::to_string(num_qubits) +
                            " qubits exceeds the supported maximum of " +
                            std::to_string(kMaxQubits));
  }
  return std::size_t{1} << num_qubits;
}

bool bit(std::uint64_t index, std::size_t q) { return ((index >> q) & 1U) != 0; }

std::uint64_t flip(std::uint64_t index, std::size_t q) { return index ^ (std::uint64_t{1} << q); }

std::uint64_t swap_bits(std::uint64_t index, std::size_t a, std::size_t b) {
  return bit(index, a) == bit(index, b) ? index : flip(flip(index, a), b);
}

// Image of a basis index under a permutation gate.
std::uint64_t permute(const GateOp& op, std::uint64_t i) {
  const auto& q = op.qubits;
  switch (op.kind) {
    case GateKind::I:
      return i;
    case GateKind::X:
      return flip(i, q[0]);
    case GateKind::CX:
      return bit(i, q[0]) ? flip(i, q[1]) : i;
    case GateKind::CCX:
      return bit(i, q[0]) && bit(i, q[1]) ? flip(i, q[2]) : i;
    case GateKind::SWAP:
      return swap_bits(i, q[0], q[1]);
    case GateKind::CSWAP:
      return bit(i, q[0]) ? swap_bits(i, q[1], q[2]) : i;
  }
  return i;
}

}  // namespace

std::string to_bitstring(std::uint64_t index, std::size_t width) {
  std::string out(width, '0');
  for (std::size_t q = 0; q < width; ++q) {
    if (bit(index, q)) out[width - 1 - q] = '1';
  }
  return out;
}

StateVector::StateVector(std::size_t num_qubits, std::vector<Amplitude> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != dimension_for(num_qubits)) {
    throw ConstructionError("expected " + std::to_string(dimension_for(num_qubits)) +
                            " amplitudes for " + std::to_string(num_qubits) + " qubits, got " +
                            std::to_string(amplitudes_.size()));
  }
  const double n = norm_squared();
  if (std::abs(n - 1.0) > kNormTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "state is not normalized (squared norm " << n << ")";
    throw ConstructionError(msg.str());
  }
}

StateVector StateVector::basis(std::size_t num_qubits, std::string_view label) {
  if (label.size() != num_qubits) {
    throw ConstructionError("basis label '" + std::string(label) + "' has length " +
                            std::to_string(label.size()) + ", expected " +
                            std::to_string(num_qubits));
  }
  std::uint64_t index = 0;
  for (char c : label) {
    if (c != '0' && c != '1') {
      throw ConstructionError("basis label '" + std::string(label) + "' must contain only 0/1");
    }
    index = (index << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return basis_index(num_qubits, index);
}

StateVector StateVector::basis_index(std::size_t num_qubits, std::uint64_t index) {
  std::vector<Amplitude> amps(dimension_for(num_qubits));
  if (index >= amps.size()) {
    throw ConstructionError("basis index " + std::to_string(index) + " out of range for " +
                            std::to_string(num_qubits) + " qubits");
  }
  amps[index] = 1.0;
  return StateVector(Unchecked{}, num_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const std::size_t size = amplitudes.size();
  if (size == 0 || (size & (size - 1)) != 0) {
    throw ConstructionError("amplitude count " + std::to_string(size) + " is not a power of two");
  }
  std::size_t n = 0;
  while ((std::size_t{1} << n) < size) ++n;
  return StateVector(n, std::move(amplitudes));
}

double StateVector::norm_squared() const {
  double sum = 0.0;
  for (const auto& a : amplitudes_) sum += std::norm(a);
  return sum;
}

std::optional<std::uint64_t> StateVector::as_basis_index(double tol) const {
  std::optional<std::uint64_t> found;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    const double mag = std::abs(amplitudes_[i]);
    if (std::abs(mag - 1.0) <= tol) {
      if (found) return std::nullopt;
      found = i;
    } else if (mag > tol) {
      return std::nullopt;
    }
  }
  return found;
}

bool StateVector::approx_equal(const StateVector& other, double tol) const {
  if (num_qubits_ != other.num_qubits_) return false;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (std::abs(amplitudes_[i] - other.amplitudes_[i]) > tol) return false;
  }
  return true;
}

std::string_view gate_name(GateKind kind) {
  switch (kind) {
    case GateKind::X:
      return "x";
    case GateKind::CX:
      return "cx";
    case GateKind::CCX:
      return "ccx";
    case GateKind::SWAP:
      return "swap";
    case GateKind::CSWAP:
      return "cswap";
    case GateKind::I:
      return "id";
  }
  return "?";
}

std::size_t gate_arity(GateKind kind) {
  switch (kind) {
    case GateKind::X:
    case GateKind::I:
      return 1;
    case GateKind::CX:
    case GateKind::SWAP:
      return 2;
    case GateKind::CCX:
    case GateKind::CSWAP:
      return 3;
  }
  return 0;
}

void GateOp::validate(std::size_t num_qubits) const {
  if (qubits.size() != gate_arity(kind)) {
    throw GateError(std::string(gate_name(kind)) + " takes " + std::to_string(gate_arity(kind)) +
                    " qubits, got " + std::to_string(qubits.size()));
  }
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    if (qubits[i] >= num_qubits) {
      throw GateError(to_string(*this) + ": qubit " + std::to_string(qubits[i]) +
                      " out of range for " + std::to_string(num_qubits) + " qubits");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (qubits[i] == qubits[j]) throw GateError(to_string(*this) + ": repeated qubit index");
    }
  }
}

std::string to_string(const GateOp& op) {
  std::string out(gate_name(op.kind));
  for (std::size_t i = 0; i < op.qubits.size(); ++i) {
    out += i == 0 ? " " : ", ";
    out += "q[" + std::to_string(op.qubits[i]) + "]";
  }
  return out;
}

std::size_t Circuit::num_clbits() const {
  std::size_t n = 0;
  for (const auto& m : measurements) n = std::max(n, m.clbit + 1);
  return n;
}

void Circuit::validate() const {
  for (const auto& op : ops) {
    try {
      op.validate(num_qubits);
    } catch (const GateError& e) {
      throw CircuitError(e.what());
    }
  }
  std::vector<bool> seen(num_clbits(), false);
  for (const auto& m : measurements) {
    if (m.qubit >= num_qubits) {
      throw CircuitError("measured qubit " + std::to_string(m.qubit) + " out of range");
    }
    if (seen[m.clbit]) {
      throw CircuitError("classical bit " + std::to_string(m.clbit) + " measured twice");
    }
    seen[m.clbit] = true;
  }
}

StateVector apply(const StateVector& state, const GateOp& op) {
  op.validate(state.num_qubits());
  if (op.kind == GateKind::I) return state;
  std::vector<Amplitude> out(state.dimension());
  for (std::uint64_t i = 0; i < state.dimension(); ++i) out[permute(op, i)] = state[i];
  return StateVector(StateVector::Unchecked{}, state.num_qubits(), std::move(out));
}

StateVector apply_all(StateVector state, std::span<const GateOp> ops) {
  for (const auto& op : ops) state = apply(state, op);
  return state;
}

std::vector<GateOp> inverse(std::span<const GateOp> ops) {
  return std::vector<GateOp>(ops.rbegin(), ops.rend());
}

StateVector tensor(const StateVector& high, const StateVector& low) {
  const std::size_t n = high.num_qubits() + low.num_qubits();
  std::vector<Amplitude> out(dimension_for(n));
  for (std::size_t h = 0; h < high.dimension(); ++h) {
    for (std::size_t l = 0; l < low.dimension(); ++l) {
      out[h * low.dimension() + l] = high[h] * low[l];
    }
  }
  return StateVector(StateVector::Unchecked{}, n, std::move(out));
}

namespace {

StateVector normalized(std::size_t num_qubits, std::vector<Amplitude> amps) {
  double n = 0.0;
  for (const auto& a : amps) n += std::norm(a);
  const double scale = 1.0 / std::sqrt(n);
  for (auto& a : amps) a *= scale;
  return StateVector(num_qubits, std::move(amps));
}

}  // namespace

std::optional<std::vector<StateVector>> factorize(const StateVector& state,
                                                  std::span<const std::size_t> widths,
                                                  double tol) {
  std::size_t total = 0;
  for (auto w : widths) total += w;
  if (total != state.num_qubits()) {
    throw ConstructionError("factor widths sum to " + std::to_string(total) + ", state has " +
                            std::to_string(state.num_qubits()) + " qubits");
  }

  std::vector<StateVector> factors;
  std::vector<Amplitude> rest(state.amplitudes().begin(), state.amplitudes().end());
  std::size_t rest_qubits = state.num_qubits();

  for (std::size_t f = 0; f + 1 < widths.size(); ++f) {
    const std::size_t low_qubits = rest_qubits - widths[f];
    const std::size_t rows = std::size_t{1} << widths[f];
    const std::size_t cols = std::size_t{1} << low_qubits;

    // Rank-one test: pick the largest entry as pivot, then M == col * row / pivot.
    std::size_t pr = 0, pc = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double mag = std::abs(rest[r * cols + c]);
        if (mag > best) best = mag, pr = r, pc = c;
      }
    }
    const Amplitude pivot = rest[pr * cols + pc];
    std::vector<Amplitude> high(rows), low(cols);
    for (std::size_t r = 0; r < rows; ++r) high[r] = rest[r * cols + pc];
    for (std::size_t c = 0; c < cols; ++c) low[c] = rest[pr * cols + c] / pivot;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (std::abs(rest[r * cols + c] - high[r] * low[c]) > tol) return std::nullopt;
      }
    }
    // Keep the global phase on the high factor and give `low` unit norm.
    double low_norm = 0.0;
    for (const auto& a : low) low_norm += std::norm(a);
    low_norm = std::sqrt(low_norm);
    for (auto& a : low) a /= low_norm;
    for (auto& a : high) a *= low_norm;

    factors.push_back(normalized(widths[f], std::move(high)));
    rest = std::move(low);
    rest_qubits = low_qubits;
  }
  if (!widths.empty()) factors.push_back(normalized(rest_qubits, std::move(rest)));
  return factors;
}

std::vector<std::pair<std::string, double>> probabilities(const StateVector& state) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    const double p = std::norm(state[i]);
    if (p > 1e-12) out.emplace_back(to_bitstring(i, state.num_qubits()), p);
  }
  return out;
}

RunResult run_circuit(const Circuit& circuit, const StateVector& initial, std::size_t shots,
                      std::uint64_t seed) {
  if (initial.num_qubits() != circuit.num_qubits) {
    throw CircuitError("circuit has " + std::to_string(circuit.num_qubits) +
                       " qubits but the initial state has " +
                       std::to_string(initial.num_qubits()));
  }
  circuit.validate();
  StateVector state = apply_all(initial, circuit.ops);

  std::vector<double> cumulative(state.dimension());
  double acc = 0.0;
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    acc += std::norm(state[i]);
    cumulative[i] = acc;
  }

  const auto readout = [&](std::uint64_t index) {
    if (circuit.measurements.empty()) return to_bitstring(index, circuit.num_qubits);
    std::uint64_t reg = 0;
    for (const auto& m : circuit.measurements) {
      if (bit(index, m.qubit)) reg |= std::uint64_t{1} << m.clbit;
    }
    return to_bitstring(reg, circuit.num_clbits());
  };

  std::mt19937_64 gen(seed);
  std::map<std::string, std::size_t> histogram;
  for (std::size_t s = 0; s < shots; ++s) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53 * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    // upper_bound never lands on a zero-probability entry.
    auto index = static_cast<std::uint64_t>(it - cumulative.begin());
    ++histogram[readout(index)];
  }
  return {std::move(state), std::move(histogram)};
}

}  // namespace qpn
