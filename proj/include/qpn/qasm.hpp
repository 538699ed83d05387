#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "qpn/statevector.hpp"

namespace qpn {

/// Writes an OpenQASM 2.0 program: header, one `q` register, one `c`
/// register (omitted when nothing is measured), the initialization X gates,
/// the gate body and the measure statements.
std::string export_qasm(const Circuit& circuit, std::span<const std::size_t> initial_x_gates = {});

/// Reads the subset written by export_qasm: OPENQASM, include, a single
/// qreg/creg, x, id, cx, ccx, swap, cswap and measure. Comments are ignored.
/// Initialization gates come back as ordinary leading ops.
/// Throws QasmError with the 1-based line of the offending statement.
Circuit parse_qasm(std::string_view text);

}  // namespace qpn
