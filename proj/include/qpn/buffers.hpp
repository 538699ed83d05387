#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpn/engine.hpp"
#include "qpn/statevector.hpp"

namespace qpn {

enum class BufferKind { Siso, Simo, Miso, Mimo, Priority };

std::string_view buffer_kind_name(BufferKind kind);
std::optional<BufferKind> parse_buffer_kind(std::string_view name);

/// Data payloads by token id; tokens not listed start as |0>.
using PayloadMap = std::map<std::string, StateVector>;

/// Parameters of one buffer instance. Which fields matter depends on `kind`:
///
///   SISO      n, m
///   SIMO      n, m, k (outputs), addresses
///   MISO      r, m, addresses
///   MIMO      r, outputs, m, addresses (input selectors), output_addresses
///   Priority  r_low, r_high, m_low, m_high
///
/// Without an address program the selectable transitions are unguarded, so
/// every choice stays open (this is what enumeration wants).
struct BufferSpec {
  BufferKind kind = BufferKind::Siso;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 2;
  std::vector<std::size_t> r;
  std::size_t outputs = 2;
  std::size_t r_low = 0;
  std::size_t r_high = 0;
  std::size_t m_low = 0;
  std::size_t m_high = 0;
  PayloadMap payloads;
  std::optional<std::vector<std::uint64_t>> addresses;
  std::optional<std::vector<std::uint64_t>> output_addresses;

  friend bool operator==(const BufferSpec&, const BufferSpec&) = default;
};

struct BufferNet {
  QPNet net;
  Marking initial;
};

/// P_I, P_A, P_A1, P_O; T1 moves one data token to P_O and one ancillary to
/// P_A1 per firing. Throws SpecError when m > n.
BufferNet build_siso(std::size_t n, std::size_t m, const PayloadMap& payloads = {});

/// P_I, P_A, P_A1, P_O1..P_Ok; Tj sends data to P_Oj and is selected by
/// address j-1.
BufferNet build_simo(std::size_t n, std::size_t m, std::size_t k,
                     const std::optional<std::vector<std::uint64_t>>& addresses = std::nullopt,
                     const PayloadMap& payloads = {});

/// P_I1..P_Ik, P_DA, P_A, P_A1, P_O; Tj pairs a token of P_Ij with an
/// address token into P_DA, T(k+1) splits the pair to P_O and P_A1.
BufferNet build_miso(const std::vector<std::size_t>& r, std::size_t m,
                     const std::optional<std::vector<std::uint64_t>>& addresses = std::nullopt,
                     const PayloadMap& payloads = {});

/// P_I1..P_Ik, P_DA, P_A1 (w, input selectors), P_A2 (z, output selectors),
/// P_A3, P_O1..; input transitions T1..Tk, output transitions T(k+1)...
BufferNet build_mimo(const std::vector<std::size_t>& r, std::size_t outputs, std::size_t m,
                     const std::optional<std::vector<std::uint64_t>>& input_addresses = std::nullopt,
                     const std::optional<std::vector<std::uint64_t>>& output_addresses = std::nullopt,
                     const PayloadMap& payloads = {});

/// P_I1, P_I2, P_DA1, P_A, P_DA2, P_A1, P_A2, P_O. T1/T2 stage low/high
/// priority pairs; T3 and T4 drain them into P_O, with the ancillaries
/// collected in P_A2. T3 is inhibited while P_DA2 holds anything.
BufferNet build_priority(std::size_t r_low, std::size_t r_high, std::size_t m_low,
                         std::size_t m_high, const PayloadMap& payloads = {});

BufferNet build_buffer(const BufferSpec& spec);

/// Three places and one CNOT transition: P1 = {a, b, c}, P2 = {d, e}; T1
/// takes one token from each, applies CX with the P1 token as control and
/// puts both into P3.
BufferNet build_cnot_example();

/// Number of selectable transitions for the spec's (input-side) address
/// program; 0 if the kind has none.
std::size_t address_range(const BufferSpec& spec);

/// Builds, seeds and runs a scenario. When a kind that needs an address
/// program has none, one is drawn from std::mt19937_64(seed). Engine errors
/// are rethrown with the scenario kind prepended.
Trace run_scenario(const BufferSpec& spec, const Scheduler& scheduler, std::uint64_t seed = 0,
                   std::size_t step_bound = kDefaultStepBound);

/// The spec with any missing address program filled in from `seed`.
BufferSpec with_addresses(BufferSpec spec, std::uint64_t seed);

}  // namespace qpn
