// qpn: flip-flop checks, buffer runs, enumeration and QASM export.
//
// Exit codes: 0 success, 1 domain error (unfirable script, bad spec, step
// bound exceeded), 2 usage or parse error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qpn/buffers.hpp"
#include "qpn/engine.hpp"
#include "qpn/errors.hpp"
#include "qpn/qasm.hpp"
#include "qpn/qsr.hpp"
#include "qpn/scenario_io.hpp"

namespace {

using namespace qpn;

// Thrown for usage problems found after CLI11 parsing (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write '" + path + "'");
}

std::size_t step_bound_from_env() {
  const char* raw = std::getenv("QPN_STEP_BOUND");
  if (raw == nullptr || *raw == '\0') return kDefaultStepBound;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(raw, &used);
    if (used != std::string(raw).size() || v == 0) throw std::invalid_argument(raw);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw UsageError("QPN_STEP_BOUND must be a positive integer, got '" + std::string(raw) + "'");
  }
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

std::string bit(const std::optional<bool>& b) {
  if (!b) return "Undefined";
  return *b ? "1" : "0";
}

std::string payload_text(const StateVector& s) {
  if (auto i = s.as_basis_index()) return "|" + to_bitstring(*i, s.num_qubits()) + ">";
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < s.dimension(); ++i) {
    if (i != 0) out << ", ";
    out << s[i].real();
    if (s[i].imag() != 0.0) out << (s[i].imag() < 0 ? "" : "+") << s[i].imag() << "i";
  }
  return out.str() + "]";
}

std::string marking_text(const std::vector<std::string>& places, const Marking& m) {
  std::size_t width = 0;
  for (const auto& p : places) width = std::max(width, p.size());
  std::ostringstream out;
  for (std::size_t p = 0; p < places.size(); ++p) {
    out << "  " << places[p] << std::string(width - places[p].size(), ' ') << "  [";
    bool first = true;
    for (const auto& rec : m.queue(p)) {
      out << (first ? "" : ", ");
      first = false;
      if (rec.size() > 1) out << "(";
      for (std::size_t i = 0; i < rec.size(); ++i) {
        out << (i == 0 ? "" : " ") << rec[i] << "=" << payload_text(m.token(rec[i]).payload);
      }
      if (rec.size() > 1) out << ")";
    }
    out << "]\n";
  }
  return out.str();
}

std::string trace_text(const Trace& trace) {
  std::ostringstream out;
  out << emit_marking_table(trace) << "\n";
  out << "firing order:";
  for (const auto& t : trace.firing_order()) out << " " << t;
  out << (trace.events.empty() ? " (none)\n" : "\n");
  out << "final marking (t=" << trace.final.time() << "):\n" << marking_text(trace.places, trace.final);
  for (const auto& s : trace.skipped) {
    out << "skipped: " << s.token << " in " << s.place << " selects " << s.transition
        << " (address " << s.address << "), which cannot fire\n";
  }
  return out.str();
}

std::string enumeration_text(const EnumerationResult& r) {
  std::ostringstream out;
  out << "places: (";
  if (!r.outcomes.empty()) {
    const auto& counts = r.outcomes.front().signature.counts;
    for (std::size_t i = 0; i < counts.size(); ++i) out << (i ? "," : "") << counts[i].first;
  }
  out << ")\n";
  out << r.outcomes.size() << " signature" << (r.outcomes.size() == 1 ? "" : "s")
      << " (" << r.states_explored << " states, " << r.firings << " firings explored)\n";
  for (const auto& o : r.outcomes) {
    out << "  " << o.signature.to_string() << "  witness:";
    for (const auto& t : o.witness) out << " " << t;
    if (o.witness.empty()) out << " (no firings)";
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// qsr
// ---------------------------------------------------------------------------

CircuitVariant variant_from(const std::string& name) {
  return name == "verbatim" ? CircuitVariant::Verbatim : CircuitVariant::Normalized;
}

std::string qsr_table() {
  std::ostringstream out;
  out << "S  R  Q  Q'  Q_next     Q'_next\n";
  for (const auto& in : truth_table_inputs()) {
    const auto o = reference_next_state(in);
    out << in.s << "  " << in.r << "  " << in.q << "  " << !in.q << "   " << std::left
        << std::setw(9) << bit(o.q_next) << "  " << bit(o.q_prime_next) << "\n";
  }
  return out.str();
}

std::string qsr_simulate(CircuitVariant variant, const QsrInputs& in) {
  const auto sim = simulate_qsr(variant, in);
  const auto ref = reference_next_state(in);
  std::ostringstream out;
  out << "variant " << (variant == CircuitVariant::Verbatim ? "verbatim" : "normalized") << ", S="
      << in.s << " R=" << in.r << " Q=" << in.q << "\n";
  out << "q4=" << bit(sim.q_next) << " (Q)\n";
  out << "q3=" << bit(sim.q_prime_next) << " (Q')\n";
  out << "reference: Q_next=" << bit(ref.q_next) << " Q'_next=" << bit(ref.q_prime_next) << "\n";
  return out.str();
}

std::string qsr_conformance() {
  const auto mark = [](bool ok) { return ok ? "ok" : "MISMATCH"; };
  std::ostringstream out;
  out << "S R Q | ref Q Q' | verbatim q4 q3 | normalized q4 q3 | verbatim Q/Q'      | normalized "
         "Q/Q'\n";
  for (const auto& row : conformance_report()) {
    out << row.inputs.s << " " << row.inputs.r << " " << row.inputs.q << " |     "
        << bit(row.reference.q_next) << " " << bit(row.reference.q_prime_next) << "  |           "
        << bit(row.verbatim.q_next) << "  " << bit(row.verbatim.q_prime_next)
        << " |             " << bit(row.normalized.q_next) << "  "
        << bit(row.normalized.q_prime_next) << " | " << std::left << std::setw(8)
        << mark(row.verbatim_q_match) << " " << std::setw(8) << mark(row.verbatim_q_prime_match)
        << " | " << mark(row.normalized_q_match) << " " << mark(row.normalized_q_prime_match)
        << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// buffer
// ---------------------------------------------------------------------------

PayloadMap labels(std::initializer_list<std::pair<const char*, const char*>> entries) {
  PayloadMap out;
  for (const auto& [id, label] : entries) {
    out.emplace(id, StateVector::basis(std::string_view(label).size(), label));
  }
  return out;
}

const std::map<std::string, ScenarioDoc>& demos() {
  static const std::map<std::string, ScenarioDoc> table = [] {
    std::map<std::string, ScenarioDoc> d;

    ScenarioDoc siso;
    siso.spec.kind = BufferKind::Siso;
    siso.spec.n = 3;
    siso.spec.m = 2;
    siso.spec.payloads = labels({{"d1", "10"}, {"d2", "1"}, {"d3", "1"}});
    d.emplace("siso", siso);

    ScenarioDoc simo;
    simo.spec.kind = BufferKind::Simo;
    simo.spec.n = 4;
    simo.spec.m = 3;
    simo.spec.k = 2;
    simo.spec.addresses = std::vector<std::uint64_t>{1, 0, 1};
    simo.spec.payloads = labels({{"d1", "1"}, {"d2", "0"}, {"d3", "1"}, {"d4", "1"}});
    d.emplace("simo", simo);

    ScenarioDoc priority;
    priority.spec.kind = BufferKind::Priority;
    priority.spec.r_low = 1;
    priority.spec.r_high = 2;
    priority.spec.m_low = 2;
    priority.spec.m_high = 2;
    priority.spec.payloads = labels({{"d1", "0"}, {"d2", "1"}, {"d3", "1"}});
    priority.scheduler = Scripted{{"T2", "T4", "T2", "T4", "T1", "T3"}};
    d.emplace("priority", priority);

    ScenarioDoc simo_enum;
    simo_enum.spec.kind = BufferKind::Simo;
    simo_enum.spec.n = 4;
    simo_enum.spec.m = 3;
    simo_enum.spec.k = 2;
    simo_enum.enumerate = true;
    simo_enum.projection = {"P_O1", "P_O2"};
    d.emplace("simo-enum", simo_enum);

    ScenarioDoc mimo_enum;
    mimo_enum.spec.kind = BufferKind::Mimo;
    mimo_enum.spec.r = {2, 1};
    mimo_enum.spec.outputs = 2;
    mimo_enum.spec.m = 2;
    mimo_enum.enumerate = true;
    mimo_enum.projection = {"P_I1", "P_I2", "P_O1", "P_O2"};
    d.emplace("mimo-enum", mimo_enum);
    return d;
  }();
  return table;
}

const char* kCnot = "cnot";

std::string run_doc(const ScenarioDoc& doc, bool force_enumerate, const std::string& format) {
  const bool json = format == "json";
  if (doc.enumerate || force_enumerate) {
    // Enumeration explores every choice, so the address program is dropped.
    BufferSpec spec = doc.spec;
    spec.addresses.reset();
    spec.output_addresses.reset();
    const BufferNet b = build_buffer(spec);
    EnumerationOptions opts;
    opts.projection = doc.projection;
    opts.step_bound = step_bound_from_env();
    const auto result = enumerate_final_markings(b.net, b.initial, opts);
    return json ? emit_enumeration(result) : enumeration_text(result);
  }
  const Trace trace = run_scenario(doc.spec, doc.scheduler, doc.seed, step_bound_from_env());
  return json ? emit_trace(trace) : trace_text(trace);
}

std::string run_cnot(const std::string& format) {
  const BufferNet b = build_cnot_example();
  const Trace trace = run(b.net, b.initial, Scripted{{"T1"}});
  if (format == "json") return emit_trace(trace);
  std::ostringstream out;
  out << "initial marking (t=0):\n" << marking_text(trace.places, trace.initial);
  out << "fire T1 (CNOT, control from P1, target from P2)\n";
  out << "marking (t=1):\n" << marking_text(trace.places, trace.final);
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Petri net buffers and the S-R flip-flop circuit"};
  app.require_subcommand(1);

  // qsr
  auto* qsr = app.add_subcommand("qsr", "Flip-flop truth table, simulation and QASM export");
  qsr->require_subcommand(1);
  std::string variant = "normalized";
  int s_in = 0, r_in = 1, q_in = 0;
  std::string out_path;
  const auto add_variant = [&](CLI::App* cmd) {
    cmd->add_option("--variant", variant, "Circuit variant")
        ->check(CLI::IsMember({"verbatim", "normalized"}))
        ->capture_default_str();
  };
  const auto add_inputs = [&](CLI::App* cmd) {
    cmd->add_option("-S", s_in, "Set input")->check(CLI::Range(0, 1))->capture_default_str();
    cmd->add_option("-R", r_in, "Reset input")->check(CLI::Range(0, 1))->capture_default_str();
    cmd->add_option("-Q", q_in, "Present state")->check(CLI::Range(0, 1))->capture_default_str();
  };
  auto* qsr_table_cmd = qsr->add_subcommand("table", "Print the 8-row reference table");
  auto* qsr_sim = qsr->add_subcommand("simulate", "Simulate one input combination");
  add_variant(qsr_sim);
  add_inputs(qsr_sim);
  auto* qsr_conf = qsr->add_subcommand("conformance", "Compare both variants with the reference");
  auto* qsr_export = qsr->add_subcommand("export-qasm", "Write the circuit as OpenQASM 2.0");
  add_variant(qsr_export);
  add_inputs(qsr_export);
  qsr_export->add_option("--out", out_path, "Output file (default stdout)");

  // buffer
  auto* buffer = app.add_subcommand("buffer", "Run, enumerate or demo buffer nets");
  buffer->require_subcommand(1);
  std::string scenario_path;
  std::string format = "table";
  std::optional<std::uint64_t> seed;
  std::string demo_name;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_path, "Output file (default stdout)");
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();
  };
  auto* buf_run = buffer->add_subcommand("run", "Run a scenario file");
  buf_run->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(
      CLI::ExistingFile);
  buf_run->add_option("--seed", seed, "Override the scenario seed");
  add_common(buf_run);
  auto* buf_enum = buffer->add_subcommand("enumerate", "Enumerate final markings of a scenario");
  buf_enum->add_option("--scenario", scenario_path, "Scenario JSON")->required()->check(
      CLI::ExistingFile);
  add_common(buf_enum);
  auto* buf_demo = buffer->add_subcommand("demo", "Run a built-in example");
  std::vector<std::string> demo_names{kCnot};
  for (const auto& [name, doc] : demos()) demo_names.push_back(name);
  buf_demo->add_option("name", demo_name, "Demo name")
      ->required()
      ->check(CLI::IsMember(demo_names));
  buf_demo->add_option("--seed", seed, "Override the demo seed");
  add_common(buf_demo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const QsrInputs inputs{s_in != 0, r_in != 0, q_in != 0};
    if (qsr_table_cmd->parsed()) {
      std::cout << qsr_table();
    } else if (qsr_sim->parsed()) {
      std::cout << qsr_simulate(variant_from(variant), inputs);
    } else if (qsr_conf->parsed()) {
      std::cout << qsr_conformance();
    } else if (qsr_export->parsed()) {
      const auto init = qsr_initialization(inputs);
      write_output(export_qasm(build_qsr_circuit(variant_from(variant)), init), out_path);
    } else if (buf_run->parsed() || buf_enum->parsed()) {
      ScenarioDoc doc = parse_scenario(read_file(scenario_path));
      if (seed) doc.seed = *seed;
      write_output(run_doc(doc, buf_enum->parsed(), format), out_path);
    } else if (buf_demo->parsed()) {
      if (demo_name == kCnot) {
        write_output(run_cnot(format), out_path);
      } else {
        ScenarioDoc doc = demos().at(demo_name);
        if (seed) doc.seed = *seed;
        write_output(run_doc(doc, false, format), out_path);
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const QasmError& e) {
    std::cerr << "error: line " << e.line() << ": " << e.what() << "\n";
    return 2;
  } catch (const NotEnabledError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
