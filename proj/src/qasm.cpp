#include "qpn/qasm.hpp"

#include <cctype>
#include <optional>
#include <regex>
#include <sstream>
#include <vector>

#include "qpn/errors.hpp"

namespace qpn {

std::string export_qasm(const Circuit& circuit, std::span<const std::size_t> initial_x_gates) {
  circuit.validate();
  std::ostringstream out;
  out << "OPENQASM 2.0;\n";
  out << "include \"qelib1.inc\";\n\n";
  out << "qreg q[" << circuit.num_qubits << "];\n";
  if (!circuit.measurements.empty()) out << "creg c[" << circuit.num_clbits() << "];\n";

  if (!initial_x_gates.empty()) {
    out << "\n// Initialization\n";
    for (auto q : initial_x_gates) out << to_string(GateOp::x(q)) << ";\n";
  }
  if (!circuit.ops.empty()) {
    out << "\n// Logic Circuit\n";
    for (const auto& op : circuit.ops) out << to_string(op) << ";\n";
  }
  if (!circuit.measurements.empty()) {
    out << "\n";
    for (const auto& m : circuit.measurements) {
      out << "measure q[" << m.qubit << "] -> c[" << m.clbit << "];\n";
    }
  }
  return out.str();
}

namespace {

struct Statement {
  std::string text;
  std::size_t line;
};

std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  std::string current;
  std::size_t start_line = 0;
  std::size_t line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '\n') {
      ++line;
      current += ' ';
    } else if (c == ';') {
      out.push_back({current, start_line});
      current.clear();
      start_line = 0;
    } else {
      if (start_line == 0 && !std::isspace(static_cast<unsigned char>(c))) start_line = line;
      current += c;
    }
    ++i;
  }
  if (start_line != 0) throw QasmError("statement is missing a terminating ';'", start_line);
  return out;
}

std::size_t to_index(const std::string& digits, std::size_t line) {
  try {
    return static_cast<std::size_t>(std::stoull(digits));
  } catch (const std::exception&) {
    throw QasmError("index '" + digits + "' out of range", line);
  }
}

std::optional<GateKind> gate_kind(const std::string& name) {
  for (auto k : {GateKind::X, GateKind::CX, GateKind::CCX, GateKind::SWAP, GateKind::CSWAP,
                 GateKind::I}) {
    if (gate_name(k) == name) return k;
  }
  return std::nullopt;
}

}  // namespace

Circuit parse_qasm(std::string_view text) {
  static const std::regex header(R"(^\s*OPENQASM\s+2\.0\s*$)");
  static const std::regex include(R"(^\s*include\s+"[^"]+"\s*$)");
  static const std::regex reg(R"(^\s*(qreg|creg)\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]\s*$)");
  static const std::regex measure(
      R"(^\s*measure\s+([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]\s*->\s*([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]\s*$)");
  static const std::regex gate(R"(^\s*([a-z]+)\s+(.+?)\s*$)");
  static const std::regex operand(R"(^\s*([A-Za-z_]\w*)\s*\[\s*(\d+)\s*\]\s*$)");
  static const std::regex blank(R"(^\s*$)");

  const auto statements = split_statements(text);
  Circuit circuit;
  std::optional<std::string> qreg_name;
  std::optional<std::string> creg_name;
  std::size_t creg_size = 0;
  bool seen_header = false;

  for (const auto& st : statements) {
    std::smatch m;
    if (std::regex_match(st.text, blank)) {
      throw QasmError("empty statement", st.line);
    }
    if (!seen_header) {
      if (!std::regex_match(st.text, header)) {
        throw QasmError("program must start with 'OPENQASM 2.0;'", st.line);
      }
      seen_header = true;
      continue;
    }
    if (std::regex_match(st.text, include)) continue;

    if (std::regex_match(st.text, m, reg)) {
      auto& name = m[1] == "qreg" ? qreg_name : creg_name;
      if (name) throw QasmError("only one " + m[1].str() + " is supported", st.line);
      name = m[2].str();
      const std::size_t size = to_index(m[3].str(), st.line);
      if (m[1] == "qreg") {
        circuit.num_qubits = size;
      } else {
        creg_size = size;
      }
      continue;
    }

    if (std::regex_match(st.text, m, measure)) {
      if (!qreg_name || m[1] != *qreg_name) throw QasmError("unknown quantum register", st.line);
      if (!creg_name || m[3] != *creg_name) throw QasmError("unknown classical register", st.line);
      const Measurement meas{to_index(m[2].str(), st.line), to_index(m[4].str(), st.line)};
      if (meas.qubit >= circuit.num_qubits || meas.clbit >= creg_size) {
        throw QasmError("measure operand out of range", st.line);
      }
      circuit.measurements.push_back(meas);
      continue;
    }

    if (std::regex_match(st.text, m, gate)) {
      const auto kind = gate_kind(m[1].str());
      if (!kind) throw QasmError("unsupported gate '" + m[1].str() + "'", st.line);
      if (!qreg_name) throw QasmError("gate before qreg declaration", st.line);
      GateOp op{*kind, {}};
      std::stringstream args(m[2].str());
      std::string arg;
      while (std::getline(args, arg, ',')) {
        std::smatch am;
        if (!std::regex_match(arg, am, operand) || am[1] != *qreg_name) {
          throw QasmError("bad operand '" + arg + "'", st.line);
        }
        op.qubits.push_back(to_index(am[2].str(), st.line));
      }
      try {
        op.validate(circuit.num_qubits);
      } catch (const GateError& e) {
        throw QasmError(e.what(), st.line);
      }
      circuit.ops.push_back(std::move(op));
      continue;
    }
    throw QasmError("cannot parse statement '" + st.text + "'", st.line);
  }
  if (!seen_header) throw QasmError("missing 'OPENQASM 2.0;' header", 1);
  if (!qreg_name) throw QasmError("missing qreg declaration", 1);
  // A declared but unused creg wider than the measured bits is not representable.
  if (creg_name && creg_size != circuit.num_clbits()) {
    throw QasmError("creg size " + std::to_string(creg_size) + " does not match measured bits",
                    1);
  }
  return circuit;
}

}  // namespace qpn
