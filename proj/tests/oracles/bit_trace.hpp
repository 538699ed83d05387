#pragma once

// Classical gate-by-gate evaluator for permutation circuits on basis inputs.
// It shares no code with the library: gates come from plain text and act on
// an array of bits, so it can check the statevector simulator independently.

#include <array>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

constexpr int kQubits = 7;
using Bits = std::array<int, kQubits>;

// The reference flip-flop body, one gate per line.
inline const char* kVerbatimBody = R"(x 6
x 1
x 0
cx 0 3
cx 1 4
x 1
ccx 0 1 2
cswap 2 3 6
x 1
x 0
cswap 2 4 5
ccx 0 1 2
cswap 2 4 6
cswap 2 3 5
)";

// Corrected body: each flag is computed, used by two swaps, then cleared.
inline const char* kNormalizedBody = R"(x 6
x 0
ccx 0 1 2
x 0
cswap 2 3 6
cswap 2 4 5
x 0
ccx 0 1 2
x 0
x 1
ccx 0 1 2
x 1
cswap 2 4 6
cswap 2 3 5
x 1
ccx 0 1 2
x 1
)";

struct Gate {
  std::string name;
  std::vector<int> q;
};

inline std::vector<Gate> parse_body(const char* text) {
  std::vector<Gate> gates;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Gate g;
    ls >> g.name;
    int q = 0;
    while (ls >> q) g.q.push_back(q);
    gates.push_back(g);
  }
  return gates;
}

inline void step(Bits& b, const Gate& g) {
  if (g.name == "x") {
    b[g.q[0]] ^= 1;
  } else if (g.name == "cx") {
    if (b[g.q[0]]) b[g.q[1]] ^= 1;
  } else if (g.name == "ccx") {
    if (b[g.q[0]] && b[g.q[1]]) b[g.q[2]] ^= 1;
  } else if (g.name == "cswap") {
    if (b[g.q[0]]) std::swap(b[g.q[1]], b[g.q[2]]);
  } else {
    throw std::logic_error("oracle: unknown gate " + g.name);
  }
}

// Input layout (S, R, flag, Q', Q, |0>, |1>) = (s, r, 0, !q, q, 0, 0).
inline Bits run(const char* body, int s, int r, int q) {
  Bits b{s, r, 0, 1 - q, q, 0, 0};
  for (const auto& g : parse_body(body)) step(b, g);
  return b;
}

inline int gate_count(const char* body, const std::string& name) {
  int n = 0;
  for (const auto& g : parse_body(body)) n += g.name == name;
  return n;
}

}  // namespace oracle
