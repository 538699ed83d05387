#include "qpn/scenario_io.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qpn/errors.hpp"

namespace qpn {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw ScenarioError(field + ": " + why, std::nullopt, field);
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t line = line_of(text, e.byte);
    throw ScenarioError("syntax error at line " + std::to_string(line) + ": " + e.what(), line, "");
  }
}

// ---------------------------------------------------------------------------
// Payloads
// ---------------------------------------------------------------------------

json payload_pairs(const StateVector& s) {
  json out = json::array();
  for (const auto& a : s.amplitudes()) out.push_back({a.real(), a.imag()});
  return out;
}

// A basis label when the payload is exactly a basis state, amplitude pairs
// otherwise.
json payload_to_json(const StateVector& s) {
  const auto amps = s.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (amps[i] == Amplitude{1.0, 0.0}) {
      const bool rest_zero = std::all_of(amps.begin(), amps.end(), [&](const Amplitude& a) {
        return &a == &amps[i] || a == Amplitude{0.0, 0.0};
      });
      if (rest_zero && s.num_qubits() > 0) return to_bitstring(i, s.num_qubits());
    }
  }
  return payload_pairs(s);
}

StateVector payload_from_json(const json& j, const std::string& field) {
  try {
    if (j.is_string()) {
      const auto label = j.get<std::string>();
      if (label.empty()) fail(field, "basis label must not be empty");
      return StateVector::basis(label.size(), label);
    }
    if (!j.is_array()) fail(field, "expected a basis label or a list of [re, im] pairs");
    std::vector<Amplitude> amps;
    for (const auto& pair : j) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        fail(field, "each amplitude must be a [re, im] pair of numbers");
      }
      amps.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
    return StateVector::from_amplitudes(std::move(amps));
  } catch (const ConstructionError& e) {
    fail(field, e.what());
  }
}

// ---------------------------------------------------------------------------
// Scenario fields
// ---------------------------------------------------------------------------

std::size_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_unsigned()) fail(field, "expected a non-negative integer");
  return j.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected a list of non-negative integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_count(j[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Addresses are integers or binary basis labels ("10" is address 2).
std::vector<std::uint64_t> get_addresses(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected a list of addresses");
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string entry = field + "[" + std::to_string(i) + "]";
    if (j[i].is_number_unsigned()) {
      out.push_back(j[i].get<std::uint64_t>());
    } else if (j[i].is_string()) {
      const auto label = j[i].get<std::string>();
      if (label.empty() || label.size() > 63 ||
          label.find_first_not_of("01") != std::string::npos) {
        fail(entry, "'" + label + "' is not a basis label");
      }
      out.push_back(std::stoull(label, nullptr, 2));
    } else {
      fail(entry, "expected a non-negative integer or basis label");
    }
  }
  return out;
}

const std::set<std::string>& kind_fields(BufferKind kind) {
  static const std::map<BufferKind, std::set<std::string>> fields = {
      {BufferKind::Siso, {"n", "m"}},
      {BufferKind::Simo, {"n", "m", "k", "addresses"}},
      {BufferKind::Miso, {"r", "m", "addresses"}},
      {BufferKind::Mimo, {"r", "outputs", "m", "addresses", "output_addresses"}},
      {BufferKind::Priority, {"r_low", "r_high", "m_low", "m_high"}},
  };
  return fields.at(kind);
}

const std::set<std::string>& required_fields(BufferKind kind) {
  static const std::map<BufferKind, std::set<std::string>> fields = {
      {BufferKind::Siso, {"n", "m"}},
      {BufferKind::Simo, {"n", "m"}},
      {BufferKind::Miso, {"r", "m"}},
      {BufferKind::Mimo, {"r", "m"}},
      {BufferKind::Priority, {"r_low", "r_high", "m_low", "m_high"}},
  };
  return fields.at(kind);
}

const std::set<std::string> kCommonFields = {"version",   "kind",     "payloads",  "scheduler",
                                             "seed",      "enumerate", "projection"};

Scheduler scheduler_from_json(const json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "address-driven") return AddressDriven{};
    if (name == "eager-output") return EagerOutputThenScript{};
    fail("scheduler", "unknown scheduler '" + name + "'");
  }
  if (!j.is_object() || j.size() != 1 || !j.contains("script")) {
    fail("scheduler", "expected \"address-driven\", \"eager-output\" or {\"script\": [...]}");
  }
  const json& script = j.at("script");
  if (!script.is_array()) fail("scheduler.script", "expected a list of transition ids");
  Scripted s;
  for (std::size_t i = 0; i < script.size(); ++i) {
    if (!script[i].is_string()) {
      fail("scheduler.script[" + std::to_string(i) + "]", "expected a transition id");
    }
    s.sequence.push_back(script[i].get<std::string>());
  }
  return s;
}

json scheduler_to_json(const Scheduler& s) {
  if (std::holds_alternative<AddressDriven>(s)) return "address-driven";
  if (std::holds_alternative<EagerOutputThenScript>(s)) return "eager-output";
  return json{{"script", std::get<Scripted>(s).sequence}};
}

// "addresses[2]: ..." -> "addresses[2]"
std::string field_of(const std::string& message) {
  const auto colon = message.find(": ");
  if (colon == std::string::npos || message.find(' ') < colon) return "";
  return message.substr(0, colon);
}

void validate(const ScenarioDoc& doc) {
  BufferNet b;
  try {
    b = build_buffer(doc.spec);
  } catch (const SpecError& e) {
    throw ScenarioError(e.what(), std::nullopt, field_of(e.what()));
  } catch (const Error& e) {
    throw ScenarioError(e.what(), std::nullopt, "");
  }
  if (const auto* script = std::get_if<Scripted>(&doc.scheduler)) {
    for (std::size_t i = 0; i < script->sequence.size(); ++i) {
      if (!b.net.find_transition(script->sequence[i])) {
        fail("scheduler.script[" + std::to_string(i) + "]",
             "unknown transition '" + script->sequence[i] + "'");
      }
    }
  }
  for (std::size_t i = 0; i < doc.projection.size(); ++i) {
    if (!b.net.find_place(doc.projection[i])) {
      fail("projection[" + std::to_string(i) + "]", "unknown place '" + doc.projection[i] + "'");
    }
  }
}

}  // namespace

ScenarioDoc parse_scenario(std::string_view text) {
  const json j = parse_json(text);
  if (!j.is_object()) fail("", "a scenario must be a JSON object");

  ScenarioDoc doc;
  if (j.contains("version")) {
    if (!j["version"].is_number_integer() || j["version"].get<long long>() != kScenarioVersion) {
      fail("version", "unsupported version (expected " + std::to_string(kScenarioVersion) + ")");
    }
  }
  if (!j.contains("kind")) fail("kind", "missing");
  if (!j["kind"].is_string()) fail("kind", "expected a string");
  const auto kind = parse_buffer_kind(j["kind"].get<std::string>());
  if (!kind) fail("kind", "unknown buffer kind '" + j["kind"].get<std::string>() + "'");
  doc.spec.kind = *kind;

  const auto& allowed = kind_fields(*kind);
  for (const auto& [key, value] : j.items()) {
    if (kCommonFields.count(key) == 0 && allowed.count(key) == 0) {
      fail(key, "field is not recognized for a " + j["kind"].get<std::string>() + " scenario");
    }
  }
  for (const auto& key : required_fields(*kind)) {
    if (!j.contains(key)) fail(key, "missing");
  }

  BufferSpec& spec = doc.spec;
  if (j.contains("n")) spec.n = get_count(j["n"], "n");
  if (j.contains("m")) spec.m = get_count(j["m"], "m");
  if (j.contains("k")) spec.k = get_count(j["k"], "k");
  if (j.contains("r")) spec.r = get_counts(j["r"], "r");
  if (j.contains("outputs")) spec.outputs = get_count(j["outputs"], "outputs");
  if (j.contains("r_low")) spec.r_low = get_count(j["r_low"], "r_low");
  if (j.contains("r_high")) spec.r_high = get_count(j["r_high"], "r_high");
  if (j.contains("m_low")) spec.m_low = get_count(j["m_low"], "m_low");
  if (j.contains("m_high")) spec.m_high = get_count(j["m_high"], "m_high");
  if (j.contains("addresses")) spec.addresses = get_addresses(j["addresses"], "addresses");
  if (j.contains("output_addresses")) {
    spec.output_addresses = get_addresses(j["output_addresses"], "output_addresses");
  }
  if (j.contains("payloads")) {
    if (!j["payloads"].is_object()) fail("payloads", "expected an object keyed by token id");
    for (const auto& [id, value] : j["payloads"].items()) {
      spec.payloads.emplace(id, payload_from_json(value, "payloads." + id));
    }
  }
  if (j.contains("scheduler")) doc.scheduler = scheduler_from_json(j["scheduler"]);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    doc.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("enumerate")) {
    if (!j["enumerate"].is_boolean()) fail("enumerate", "expected true or false");
    doc.enumerate = j["enumerate"].get<bool>();
  }
  if (j.contains("projection")) {
    const json& p = j["projection"];
    if (!p.is_array()) fail("projection", "expected a list of place ids");
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].is_string()) fail("projection[" + std::to_string(i) + "]", "expected a place id");
      doc.projection.push_back(p[i].get<std::string>());
    }
  }

  validate(doc);
  return doc;
}

std::string emit_scenario(const ScenarioDoc& doc) {
  const BufferSpec& s = doc.spec;
  json j;
  j["version"] = doc.version;
  j["kind"] = std::string(buffer_kind_name(s.kind));
  const auto& fields = kind_fields(s.kind);
  const auto put = [&](const char* key, const json& value) {
    if (fields.count(key) != 0) j[key] = value;
  };
  put("n", s.n);
  put("m", s.m);
  put("k", s.k);
  put("r", s.r);
  put("outputs", s.outputs);
  put("r_low", s.r_low);
  put("r_high", s.r_high);
  put("m_low", s.m_low);
  put("m_high", s.m_high);
  if (s.addresses) put("addresses", *s.addresses);
  if (s.output_addresses) put("output_addresses", *s.output_addresses);
  if (!s.payloads.empty()) {
    json p = json::object();
    for (const auto& [id, state] : s.payloads) p[id] = payload_to_json(state);
    j["payloads"] = std::move(p);
  }
  j["scheduler"] = scheduler_to_json(doc.scheduler);
  j["seed"] = doc.seed;
  j["enumerate"] = doc.enumerate;
  if (!doc.projection.empty()) j["projection"] = doc.projection;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

namespace {

std::string_view kind_name(TokenKind k) { return k == TokenKind::Data ? "data" : "ancillary"; }

TokenKind kind_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "data") return TokenKind::Data;
  if (s == "ancillary") return TokenKind::Ancillary;
  fail("kind", "unknown token kind '" + s + "'");
}

json marking_to_json(const Marking& m, const std::vector<std::string>& places) {
  json queues = json::object();
  for (std::size_t p = 0; p < places.size(); ++p) {
    json q = json::array();
    for (const auto& rec : m.queue(p)) q.push_back(rec);
    queues[places[p]] = std::move(q);
  }
  json tokens = json::object();
  for (const auto& [id, t] : m.tokens()) {
    tokens[id] = {{"kind", kind_name(t.kind)}, {"payload", payload_pairs(t.payload)}};
  }
  return {{"time", m.time()}, {"queues", std::move(queues)}, {"tokens", std::move(tokens)}};
}

Marking marking_from_json(const json& j, const std::vector<std::string>& places) {
  Marking m(places.size());
  const json& tokens = j.at("tokens");
  std::set<std::string> used;
  for (std::size_t p = 0; p < places.size(); ++p) {
    for (const auto& rec : j.at("queues").at(places[p])) {
      std::vector<QToken> record;
      for (const auto& idj : rec) {
        const auto id = idj.get<std::string>();
        const json& t = tokens.at(id);
        StateVector payload = payload_from_json(t.at("payload"), "tokens." + id);
        record.push_back(kind_from(t.at("kind")) == TokenKind::Data
                             ? QToken::data(id, std::move(payload))
                             : QToken::ancillary(id, std::move(payload)));
        used.insert(id);
      }
      m.add_record(p, std::move(record));
    }
  }
  if (used.size() != tokens.size() || j.at("queues").size() != places.size()) {
    fail("queues", "queues and token table disagree");
  }
  m.set_time(j.at("time").get<std::size_t>());
  return m;
}

json records_to_json(const std::vector<RecordSnapshot>& records) {
  json out = json::array();
  for (const auto& r : records) {
    json toks = json::array();
    for (const auto& t : r.tokens) {
      toks.push_back(
          {{"id", t.id}, {"kind", kind_name(t.kind)}, {"payload", payload_pairs(t.payload)}});
    }
    out.push_back({{"place", r.place}, {"tokens", std::move(toks)}});
  }
  return out;
}

std::vector<RecordSnapshot> records_from_json(const json& j) {
  std::vector<RecordSnapshot> out;
  for (const auto& r : j) {
    RecordSnapshot snap{r.at("place").get<std::string>(), {}};
    for (const auto& t : r.at("tokens")) {
      const auto id = t.at("id").get<std::string>();
      snap.tokens.push_back(
          {id, kind_from(t.at("kind")), payload_from_json(t.at("payload"), "tokens." + id)});
    }
    out.push_back(std::move(snap));
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::size_t>> marking_table(const Trace& trace) {
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < trace.places.size(); ++i) column.emplace(trace.places[i], i);

  std::vector<std::vector<std::size_t>> rows;
  std::vector<std::size_t> row = trace.initial.token_counts();
  row.resize(trace.places.size(), 0);
  rows.push_back(row);
  for (const auto& e : trace.events) {
    for (const auto& r : e.consumed) row.at(column.at(r.place)) -= r.tokens.size();
    for (const auto& r : e.produced) row.at(column.at(r.place)) += r.tokens.size();
    rows.push_back(row);
  }
  return rows;
}

std::string emit_trace(const Trace& trace) {
  json j;
  j["version"] = kTraceVersion;
  j["places"] = trace.places;
  j["initial"] = marking_to_json(trace.initial, trace.places);
  j["final"] = marking_to_json(trace.final, trace.places);
  json events = json::array();
  for (const auto& e : trace.events) {
    events.push_back({{"time", e.time},
                      {"transition", e.transition},
                      {"consumed", records_to_json(e.consumed)},
                      {"produced", records_to_json(e.produced)}});
  }
  j["events"] = std::move(events);
  json skipped = json::array();
  for (const auto& s : trace.skipped) {
    skipped.push_back({{"time", s.time},
                       {"token", s.token},
                       {"place", s.place},
                       {"address", s.address},
                       {"transition", s.transition}});
  }
  j["skipped"] = std::move(skipped);
  j["table"] = marking_table(trace);
  return j.dump(2) + "\n";
}

Trace parse_trace(std::string_view text) {
  const json j = parse_json(text);
  try {
    if (!j.is_object()) fail("", "a trace must be a JSON object");
    if (j.at("version").get<int>() != kTraceVersion) fail("version", "unsupported trace version");
    Trace t;
    t.places = j.at("places").get<std::vector<std::string>>();
    t.initial = marking_from_json(j.at("initial"), t.places);
    t.final = marking_from_json(j.at("final"), t.places);
    for (const auto& e : j.at("events")) {
      t.events.push_back({e.at("time").get<std::size_t>(), e.at("transition").get<std::string>(),
                          records_from_json(e.at("consumed")),
                          records_from_json(e.at("produced"))});
    }
    for (const auto& s : j.at("skipped")) {
      t.skipped.push_back({s.at("time").get<std::size_t>(), s.at("token").get<std::string>(),
                           s.at("place").get<std::string>(), s.at("address").get<std::uint64_t>(),
                           s.at("transition").get<std::string>()});
    }
    return t;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed trace: ") + e.what(), std::nullopt, "");
  } catch (const ModelError& e) {
    throw ScenarioError(std::string("inconsistent trace: ") + e.what(), std::nullopt, "");
  }
}

std::string emit_marking_table(const Trace& trace) {
  const auto rows = marking_table(trace);
  std::vector<std::string> header{"t"};
  header.insert(header.end(), trace.places.begin(), trace.places.end());

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  width[0] = std::max(width[0], std::to_string(rows.size() - 1).size());
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c + 1] = std::max(width[c + 1], std::to_string(row[c]).size());
    }
  }

  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c == 0 ? "" : "  ") << std::setw(static_cast<int>(width[c])) << header[c];
  }
  out << "  fired\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << std::setw(static_cast<int>(width[0])) << r;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out << "  " << std::setw(static_cast<int>(width[c + 1])) << rows[r][c];
    }
    if (r > 0) out << "  " << trace.events[r - 1].transition;
    out << "\n";
  }
  return out.str();
}

std::string emit_enumeration(const EnumerationResult& result) {
  json j;
  json places = json::array();
  if (!result.outcomes.empty()) {
    for (const auto& [place, n] : result.outcomes.front().signature.counts) places.push_back(place);
  }
  j["places"] = std::move(places);
  json outcomes = json::array();
  for (const auto& o : result.outcomes) {
    outcomes.push_back({{"signature", o.signature.to_string()},
                        {"counts", o.signature.values()},
                        {"witness", o.witness}});
  }
  j["outcomes"] = std::move(outcomes);
  j["states_explored"] = result.states_explored;
  j["firings"] = result.firings;
  return j.dump(2) + "\n";
}

}  // namespace qpn
