#include "qpn/buffers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "qpn/errors.hpp"

namespace qpn {

namespace {

constexpr std::string_view kKindNames[] = {"siso", "simo", "miso", "mimo", "priority"};

std::string place_name(std::string_view stem, std::size_t index) {
  return std::string(stem) + std::to_string(index);
}

// Qubits needed to hold addresses 0..range-1.
std::size_t address_width(std::size_t range) {
  std::size_t w = 1;
  while ((std::uint64_t{1} << w) < range) ++w;
  return w;
}

void check_program(const std::vector<std::uint64_t>& program, std::size_t supply, std::size_t range,
                   const std::string& field) {
  if (program.size() != supply) {
    throw SpecError(field + ": expected " + std::to_string(supply) + " addresses, got " +
                    std::to_string(program.size()));
  }
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (program[i] >= range) {
      throw SpecError(field + "[" + std::to_string(i) + "]: address " + std::to_string(program[i]) +
                      " is not below " + std::to_string(range));
    }
  }
}

// Builds nets and markings together so token naming stays in one place.
class Builder {
 public:
  explicit Builder(const PayloadMap& payloads) : payloads_(payloads) {}

  void place(const std::string& id, PlaceKind kind) { net_.add_place({id, kind}); }

  void transition(Transition t) { net_.add_transition(std::move(t)); }

  // Appends `count` data tokens d<next>.. to `place`.
  void data(const std::string& place, std::size_t count) {
    pending_.push_back({place, count, true, "", {}, 0});
  }

  // Appends `count` ancillary tokens <stem>1.. to `place`. With a program
  // each token holds its address; otherwise |0>.
  void ancillary(const std::string& place, const std::string& stem, std::size_t count,
                 const std::optional<std::vector<std::uint64_t>>& program, std::size_t range) {
    pending_.push_back({place, count, false, stem, program.value_or(std::vector<std::uint64_t>{}),
                        address_width(range)});
  }

  BufferNet finish() {
    Marking m(net_.places().size());
    std::size_t next_data = 1;
    std::set<std::string> data_ids;
    for (const auto& p : pending_) {
      const std::size_t index = net_.place_index(p.place);
      for (std::size_t i = 0; i < p.count; ++i) {
        if (p.is_data) {
          std::string id = "d" + std::to_string(next_data++);
          auto it = payloads_.find(id);
          StateVector payload = it != payloads_.end() ? it->second : StateVector::basis(1, "0");
          data_ids.insert(id);
          m.add_token(index, QToken::data(std::move(id), std::move(payload)));
        } else {
          const std::uint64_t address = p.program.empty() ? 0 : p.program[i];
          m.add_token(index, QToken::ancillary(p.stem + std::to_string(i + 1),
                                               StateVector::basis_index(p.width, address)));
        }
      }
    }
    for (const auto& [id, payload] : payloads_) {
      if (data_ids.count(id) == 0) {
        throw SpecError("payloads." + id + ": not a data token of this buffer");
      }
    }
    return {std::move(net_), std::move(m)};
  }

 private:
  struct Pending {
    std::string place;
    std::size_t count;
    bool is_data;
    std::string stem;
    std::vector<std::uint64_t> program;
    std::size_t width;
  };

  const PayloadMap& payloads_;
  QPNet net_;
  std::vector<Pending> pending_;
};

std::optional<AddressGuard> guard_if(bool guarded, const std::string& place, std::uint64_t address) {
  if (!guarded) return std::nullopt;
  return AddressGuard{place, address};
}

// (input, selector) -> fused record in `staging`.
Transition stage(const std::string& id, const std::string& input, const std::string& selector,
                 const std::string& staging) {
  Transition t;
  t.id = id;
  t.inputs = {{input, "x", 1}, {selector, "a", 1}};
  t.outputs = {{staging, "f", {{"x", TokenPart::Whole}, {"a", TokenPart::Whole}}, true}};
  return t;
}

// Adds the routing of a staged pair under label `label`: data to `out`,
// ancillary to `collector`.
void split_pair(Transition& t, const std::string& label, const std::string& out,
                const std::string& collector) {
  t.outputs.push_back({out, "o", {{label, TokenPart::Data}}, false});
  t.outputs.push_back({collector, "c", {{label, TokenPart::Ancillary}}, false});
}

}  // namespace

std::string_view buffer_kind_name(BufferKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<BufferKind> parse_buffer_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<BufferKind>(i);
  }
  return std::nullopt;
}

BufferNet build_siso(std::size_t n, std::size_t m, const PayloadMap& payloads) {
  if (m > n) {
    throw SpecError("m: capacity " + std::to_string(m) + " exceeds the " + std::to_string(n) +
                    " input tokens");
  }
  Builder b(payloads);
  b.place("P_I", PlaceKind::Input);
  b.place("P_A", PlaceKind::Ancillary);
  b.place("P_A1", PlaceKind::Ancillary);
  b.place("P_O", PlaceKind::Output);

  Transition t;
  t.id = "T1";
  t.inputs = {{"P_I", "x", 1}, {"P_A", "a", 1}};
  t.outputs = {{"P_O", "o", {{"x", TokenPart::Whole}}, false},
               {"P_A1", "c", {{"a", TokenPart::Whole}}, false}};
  b.transition(std::move(t));

  b.data("P_I", n);
  b.ancillary("P_A", "z", m, std::nullopt, 1);
  return b.finish();
}

BufferNet build_simo(std::size_t n, std::size_t m, std::size_t k,
                     const std::optional<std::vector<std::uint64_t>>& addresses,
                     const PayloadMap& payloads) {
  if (m > n) {
    throw SpecError("m: capacity " + std::to_string(m) + " exceeds the " + std::to_string(n) +
                    " input tokens");
  }
  if (k < 2) throw SpecError("k: a SIMO buffer needs at least 2 outputs");
  if (addresses) check_program(*addresses, m, k, "addresses");

  Builder b(payloads);
  b.place("P_I", PlaceKind::Input);
  b.place("P_A", PlaceKind::Ancillary);
  b.place("P_A1", PlaceKind::Ancillary);
  for (std::size_t j = 1; j <= k; ++j) b.place(place_name("P_O", j), PlaceKind::Output);

  for (std::size_t j = 1; j <= k; ++j) {
    Transition t;
    t.id = place_name("T", j);
    t.inputs = {{"P_I", "x", 1}, {"P_A", "a", 1}};
    t.outputs = {{place_name("P_O", j), "o", {{"x", TokenPart::Whole}}, false},
                 {"P_A1", "c", {{"a", TokenPart::Whole}}, false}};
    t.guard = guard_if(addresses.has_value(), "P_A", j - 1);
    b.transition(std::move(t));
  }

  b.data("P_I", n);
  b.ancillary("P_A", "z", m, addresses, k);
  return b.finish();
}

BufferNet build_miso(const std::vector<std::size_t>& r, std::size_t m,
                     const std::optional<std::vector<std::uint64_t>>& addresses,
                     const PayloadMap& payloads) {
  const std::size_t k = r.size();
  if (k < 2) throw SpecError("r: a MISO buffer needs at least 2 inputs");
  if (m == 0) throw SpecError("m: capacity must be at least 1");
  if (addresses) check_program(*addresses, m, k, "addresses");

  Builder b(payloads);
  for (std::size_t j = 1; j <= k; ++j) b.place(place_name("P_I", j), PlaceKind::Input);
  b.place("P_DA", PlaceKind::DataAncillary);
  b.place("P_A", PlaceKind::Ancillary);
  b.place("P_A1", PlaceKind::Ancillary);
  b.place("P_O", PlaceKind::Output);

  for (std::size_t j = 1; j <= k; ++j) {
    Transition t = stage(place_name("T", j), place_name("P_I", j), "P_A", "P_DA");
    t.guard = guard_if(addresses.has_value(), "P_A", j - 1);
    b.transition(std::move(t));
  }
  Transition out;
  out.id = place_name("T", k + 1);
  out.inputs = {{"P_DA", "p", 1}};
  out.role = TransitionRole::Output;
  split_pair(out, "p", "P_O", "P_A1");
  b.transition(std::move(out));

  for (std::size_t j = 1; j <= k; ++j) b.data(place_name("P_I", j), r[j - 1]);
  b.ancillary("P_A", "z", m, addresses, k);
  return b.finish();
}

BufferNet build_mimo(const std::vector<std::size_t>& r, std::size_t outputs, std::size_t m,
                     const std::optional<std::vector<std::uint64_t>>& input_addresses,
                     const std::optional<std::vector<std::uint64_t>>& output_addresses,
                     const PayloadMap& payloads) {
  const std::size_t k = r.size();
  if (k < 2) throw SpecError("r: a MIMO buffer needs at least 2 inputs");
  if (outputs < 2) throw SpecError("outputs: a MIMO buffer needs at least 2 outputs");
  if (m == 0) throw SpecError("m: capacity must be at least 1");
  if (input_addresses) check_program(*input_addresses, m, k, "addresses");
  if (output_addresses) check_program(*output_addresses, m, outputs, "output_addresses");

  Builder b(payloads);
  for (std::size_t j = 1; j <= k; ++j) b.place(place_name("P_I", j), PlaceKind::Input);
  b.place("P_DA", PlaceKind::DataAncillary);
  b.place("P_A1", PlaceKind::Ancillary);
  b.place("P_A2", PlaceKind::Ancillary);
  b.place("P_A3", PlaceKind::Ancillary);
  for (std::size_t j = 1; j <= outputs; ++j) b.place(place_name("P_O", j), PlaceKind::Output);

  for (std::size_t j = 1; j <= k; ++j) {
    Transition t = stage(place_name("T", j), place_name("P_I", j), "P_A1", "P_DA");
    t.guard = guard_if(input_addresses.has_value(), "P_A1", j - 1);
    b.transition(std::move(t));
  }
  for (std::size_t j = 1; j <= outputs; ++j) {
    Transition t;
    t.id = place_name("T", k + j);
    t.inputs = {{"P_DA", "p", 1}, {"P_A2", "s", 1}};
    t.role = TransitionRole::Output;
    t.outputs = {{place_name("P_O", j), "o", {{"p", TokenPart::Data}}, false},
                 {"P_A3", "c", {{"p", TokenPart::Ancillary}, {"s", TokenPart::Whole}}, false}};
    t.guard = guard_if(output_addresses.has_value(), "P_A2", j - 1);
    b.transition(std::move(t));
  }

  for (std::size_t j = 1; j <= k; ++j) b.data(place_name("P_I", j), r[j - 1]);
  b.ancillary("P_A1", "w", m, input_addresses, k);
  b.ancillary("P_A2", "z", m, output_addresses, outputs);
  return b.finish();
}

BufferNet build_priority(std::size_t r_low, std::size_t r_high, std::size_t m_low,
                         std::size_t m_high, const PayloadMap& payloads) {
  Builder b(payloads);
  b.place("P_I1", PlaceKind::Input);
  b.place("P_I2", PlaceKind::Input);
  b.place("P_DA1", PlaceKind::DataAncillary);
  b.place("P_A", PlaceKind::Ancillary);
  b.place("P_DA2", PlaceKind::DataAncillary);
  b.place("P_A1", PlaceKind::Ancillary);
  b.place("P_A2", PlaceKind::Ancillary);
  b.place("P_O", PlaceKind::Output);

  b.transition(stage("T1", "P_I1", "P_A", "P_DA1"));
  b.transition(stage("T2", "P_I2", "P_A1", "P_DA2"));

  Transition low;
  low.id = "T3";
  low.inputs = {{"P_DA1", "p", 1}};
  low.inhibitors = {"P_DA2"};
  low.role = TransitionRole::Output;
  split_pair(low, "p", "P_O", "P_A2");
  b.transition(std::move(low));

  Transition high;
  high.id = "T4";
  high.inputs = {{"P_DA2", "p", 1}};
  high.role = TransitionRole::Output;
  split_pair(high, "p", "P_O", "P_A2");
  b.transition(std::move(high));

  b.data("P_I1", r_low);
  b.data("P_I2", r_high);
  b.ancillary("P_A", "w", m_low, std::nullopt, 1);
  b.ancillary("P_A1", "z", m_high, std::nullopt, 1);
  return b.finish();
}

BufferNet build_buffer(const BufferSpec& spec) {
  const auto no_program = [&](const char* field, bool present) {
    if (present) {
      throw SpecError(std::string(field) + ": a " + std::string(buffer_kind_name(spec.kind)) +
                      " buffer takes no address program");
    }
  };
  switch (spec.kind) {
    case BufferKind::Siso:
      no_program("addresses", spec.addresses.has_value());
      no_program("output_addresses", spec.output_addresses.has_value());
      return build_siso(spec.n, spec.m, spec.payloads);
    case BufferKind::Simo:
      no_program("output_addresses", spec.output_addresses.has_value());
      return build_simo(spec.n, spec.m, spec.k, spec.addresses, spec.payloads);
    case BufferKind::Miso:
      no_program("output_addresses", spec.output_addresses.has_value());
      return build_miso(spec.r, spec.m, spec.addresses, spec.payloads);
    case BufferKind::Mimo:
      return build_mimo(spec.r, spec.outputs, spec.m, spec.addresses, spec.output_addresses,
                        spec.payloads);
    case BufferKind::Priority:
      no_program("addresses", spec.addresses.has_value());
      no_program("output_addresses", spec.output_addresses.has_value());
      return build_priority(spec.r_low, spec.r_high, spec.m_low, spec.m_high, spec.payloads);
  }
  throw SpecError("unknown buffer kind");
}

BufferNet build_cnot_example() {
  QPNet net;
  net.add_place({"P1", PlaceKind::Input});
  net.add_place({"P2", PlaceKind::Input});
  net.add_place({"P3", PlaceKind::Output});

  Transition t;
  t.id = "T1";
  t.inputs = {{"P1", "x1", 1}, {"P2", "x2", 1}};
  t.outputs = {{"P3", "f", {{"x1", TokenPart::Whole}, {"x2", TokenPart::Whole}}, false}};
  // x1 is consumed first and so sits on qubit 1 of the joint payload.
  t.gate = {GateOp::cx(1, 0)};
  net.add_transition(std::move(t));

  const double h = 1.0 / std::sqrt(2.0);
  Marking m(3);
  m.add_token(0, QToken::data("a", StateVector::basis(1, "1")));
  m.add_token(0, QToken::data("b", StateVector::basis(1, "1")));
  m.add_token(0, QToken::data("c", StateVector(1, {Amplitude{h, 0}, Amplitude{h, 0}})));
  m.add_token(1, QToken::data("d", StateVector::basis(1, "0")));
  m.add_token(1, QToken::data("e", StateVector::basis(1, "1")));
  return {std::move(net), std::move(m)};
}

std::size_t address_range(const BufferSpec& spec) {
  switch (spec.kind) {
    case BufferKind::Simo:
      return spec.k;
    case BufferKind::Miso:
    case BufferKind::Mimo:
      return spec.r.size();
    default:
      return 0;
  }
}

BufferSpec with_addresses(BufferSpec spec, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto draw = [&](std::size_t count, std::size_t range) {
    std::vector<std::uint64_t> program(count);
    for (auto& a : program) a = gen() % range;
    return program;
  };
  const std::size_t range = address_range(spec);
  if (range != 0 && !spec.addresses) spec.addresses = draw(spec.m, range);
  if (spec.kind == BufferKind::Mimo && !spec.output_addresses && spec.outputs != 0) {
    spec.output_addresses = draw(spec.m, spec.outputs);
  }
  return spec;
}

namespace {

template <class E>
[[noreturn]] void rethrow_with(const std::string& context, const E& e) {
  throw E(context + e.what());
}

}  // namespace

Trace run_scenario(const BufferSpec& spec, const Scheduler& scheduler, std::uint64_t seed,
                   std::size_t step_bound) {
  const std::string context = std::string(buffer_kind_name(spec.kind)) + " scenario: ";
  try {
    const BufferNet b = build_buffer(with_addresses(spec, seed));
    return run(b.net, b.initial, scheduler, step_bound);
  } catch (const NotEnabledError& e) {
    throw NotEnabledError(context + e.what(), e.step());
  } catch (const SpecError& e) {
    rethrow_with(context, e);
  } catch (const ModelError& e) {
    rethrow_with(context, e);
  } catch (const ExplosionError& e) {
    rethrow_with(context, e);
  } catch (const ConstructionError& e) {
    rethrow_with(context, e);
  }
}

}  // namespace qpn
