#include "qpn/engine.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <cstring>
#include <set>
#include <sstream>
#include <unordered_set>

#include "qpn/errors.hpp"

namespace qpn {

// Mutable access to Marking internals for fire/unfire.
struct MarkingAccess {
  static std::deque<Record>& queue(Marking& m, std::size_t p) { return m.queues_.at(p); }
  static QToken& token(Marking& m, const std::string& id) { return m.tokens_.at(id); }
  static void move(Marking& m, const std::string& id, std::size_t p) { m.token_place_.at(id) = p; }
};

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

QToken QToken::data(std::string id, StateVector payload) {
  return {std::move(id), TokenKind::Data, std::move(payload), std::nullopt};
}

QToken QToken::ancillary(std::string id, StateVector payload) {
  const auto address = payload.as_basis_index();
  if (!address) {
    throw ModelError("ancillary token '" + id + "' must hold a basis state, not a superposition");
  }
  return {std::move(id), TokenKind::Ancillary, std::move(payload), address};
}

// ---------------------------------------------------------------------------
// Net
// ---------------------------------------------------------------------------

std::size_t QPNet::add_place(Place place) {
  if (place.id.empty()) throw ModelError("place id must not be empty");
  if (place_lookup_.count(place.id) != 0) throw ModelError("duplicate place '" + place.id + "'");
  const std::size_t index = places_.size();
  place_lookup_.emplace(place.id, index);
  places_.push_back(std::move(place));
  return index;
}

std::size_t QPNet::add_transition(Transition t) {
  const auto fail = [&](const std::string& why) {
    throw ModelError("transition '" + t.id + "': " + why);
  };
  if (t.id.empty()) throw ModelError("transition id must not be empty");
  if (transition_lookup_.count(t.id) != 0) fail("duplicate id");

  std::map<std::string, std::array<int, 3>> routed;  // label -> {whole, data, ancillary}
  std::set<std::string> input_places;
  for (const auto& arc : t.inputs) {
    if (!find_place(arc.place)) fail("unknown input place '" + arc.place + "'");
    if (arc.multiplicity == 0) fail("input arc multiplicity must be at least 1");
    if (!routed.emplace(arc.label, std::array<int, 3>{0, 0, 0}).second) {
      fail("duplicate input label '" + arc.label + "'");
    }
    input_places.insert(arc.place);
  }
  for (const auto& arc : t.outputs) {
    if (!find_place(arc.place)) fail("unknown output place '" + arc.place + "'");
    for (const auto& sel : arc.sources) {
      auto it = routed.find(sel.label);
      if (it == routed.end()) fail("output arc routes unknown label '" + sel.label + "'");
      ++it->second[static_cast<std::size_t>(sel.part)];
    }
  }
  for (const auto& [label, c] : routed) {
    const bool whole = c[0] == 1 && c[1] == 0 && c[2] == 0;
    const bool split = c[0] == 0 && c[1] == 1 && c[2] == 1;
    if (!whole && !split) fail("tokens consumed under '" + label + "' are not routed exactly once");
  }
  for (const auto& p : t.inhibitors) {
    if (!find_place(p)) fail("unknown inhibitor place '" + p + "'");
  }
  if (t.guard && input_places.count(t.guard->place) == 0) {
    fail("address guard place '" + t.guard->place + "' is not an input place");
  }

  const std::size_t index = transitions_.size();
  transition_lookup_.emplace(t.id, index);
  transitions_.push_back(std::move(t));
  return index;
}

std::optional<std::size_t> QPNet::find_place(std::string_view id) const {
  auto it = place_lookup_.find(std::string(id));
  if (it == place_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> QPNet::find_transition(std::string_view id) const {
  auto it = transition_lookup_.find(std::string(id));
  if (it == transition_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t QPNet::place_index(std::string_view id) const {
  if (auto i = find_place(id)) return *i;
  throw ModelError("unknown place '" + std::string(id) + "'");
}

std::size_t QPNet::transition_index(std::string_view id) const {
  if (auto i = find_transition(id)) return *i;
  throw ModelError("unknown transition '" + std::string(id) + "'");
}

std::vector<std::string> QPNet::place_ids() const {
  std::vector<std::string> ids;
  ids.reserve(places_.size());
  for (const auto& p : places_) ids.push_back(p.id);
  return ids;
}

// ---------------------------------------------------------------------------
// Marking
// ---------------------------------------------------------------------------

void Marking::add_token(std::size_t place, QToken token) {
  std::vector<QToken> one;
  one.push_back(std::move(token));
  add_record(place, std::move(one));
}

void Marking::add_record(std::size_t place, std::vector<QToken> tokens) {
  if (place >= queues_.size()) throw ModelError("place index out of range");
  if (tokens.empty()) throw ModelError("a record needs at least one token");
  Record record;
  for (const auto& t : tokens) {
    if (tokens_.count(t.id) != 0 || std::count(record.begin(), record.end(), t.id) != 0) {
      throw ModelError("duplicate token id '" + t.id + "'");
    }
    record.push_back(t.id);
  }
  for (auto& t : tokens) {
    token_place_.emplace(t.id, place);
    std::string id = t.id;
    tokens_.emplace(std::move(id), std::move(t));
  }
  queues_[place].push_back(std::move(record));
}

std::size_t Marking::token_count(std::size_t place) const {
  std::size_t n = 0;
  for (const auto& r : queues_.at(place)) n += r.size();
  return n;
}

std::vector<std::size_t> Marking::token_counts() const {
  std::vector<std::size_t> out;
  out.reserve(queues_.size());
  for (std::size_t p = 0; p < queues_.size(); ++p) out.push_back(token_count(p));
  return out;
}

bool Marking::has_token(std::string_view id) const { return tokens_.find(id) != tokens_.end(); }

const QToken& Marking::token(std::string_view id) const {
  auto it = tokens_.find(id);
  if (it == tokens_.end()) throw ModelError("unknown token '" + std::string(id) + "'");
  return it->second;
}

std::size_t Marking::place_of(std::string_view id) const {
  auto it = token_place_.find(id);
  if (it == token_place_.end()) throw ModelError("unknown token '" + std::string(id) + "'");
  return it->second;
}

std::vector<std::string> Marking::token_ids(std::size_t place) const {
  std::vector<std::string> ids;
  for (const auto& r : queues_.at(place)) ids.insert(ids.end(), r.begin(), r.end());
  return ids;
}

void Marking::validate() const {
  std::size_t seen = 0;
  for (std::size_t p = 0; p < queues_.size(); ++p) {
    for (const auto& record : queues_[p]) {
      if (record.empty()) throw ModelError("empty record in place " + std::to_string(p));
      for (const auto& id : record) {
        auto it = token_place_.find(id);
        if (it == token_place_.end() || tokens_.count(id) == 0) {
          throw ModelError("queued token '" + id + "' is missing from the token table");
        }
        if (it->second != p) throw ModelError("token '" + id + "' is queued in the wrong place");
        ++seen;
      }
    }
  }
  if (seen != tokens_.size() || seen != token_place_.size()) {
    throw ModelError("token table and place queues disagree");
  }
}

std::string Marking::fingerprint() const {
  std::string key;
  for (const auto& q : queues_) {
    key += '|';
    for (const auto& r : q) {
      key += '[';
      for (const auto& id : r) {
        key += id;
        key += ',';
      }
      key += ']';
    }
  }
  key += '#';
  for (const auto& [id, tok] : tokens_) {
    key += id;
    key += ':';
    const auto amps = tok.payload.amplitudes();
    key.append(reinterpret_cast<const char*>(amps.data()), amps.size_bytes());
  }
  return key;
}

// ---------------------------------------------------------------------------
// Enabledness and firing
// ---------------------------------------------------------------------------

namespace {

const QToken* head_ancillary(const QPNet& net, const Marking& m, const AddressGuard& guard) {
  const auto& q = m.queue(net.place_index(guard.place));
  if (q.empty()) return nullptr;
  for (const auto& id : q.front()) {
    const QToken& t = m.token(id);
    if (t.kind == TokenKind::Ancillary) return &t;
  }
  return nullptr;
}

bool guard_selects(const QPNet& net, const Marking& m, const AddressGuard& guard) {
  const QToken* head = head_ancillary(net, m, guard);
  return head != nullptr && head->address == guard.address;
}

void check_shape(const QPNet& net, const Marking& m) {
  if (m.num_places() != net.places().size()) {
    throw ModelError("marking has " + std::to_string(m.num_places()) + " places, net has " +
                     std::to_string(net.places().size()));
  }
}

// Data tokens of the given records, in order.
std::vector<std::string> data_tokens(const Marking& m, const std::vector<RecordSnapshot>& recs) {
  std::vector<std::string> ids;
  for (const auto& r : recs) {
    for (const auto& t : r.tokens) {
      if (m.token(t.id).kind == TokenKind::Data) ids.push_back(t.id);
    }
  }
  return ids;
}

// Applies `ops` jointly to the payloads of `ids` and writes the factors back.
void apply_gate(Marking& m, const std::vector<std::string>& ids, std::span<const GateOp> ops,
                const std::string& transition) {
  if (ops.empty()) return;
  if (ids.empty()) {
    throw ModelError("transition '" + transition + "' has a gate but consumed no data tokens");
  }
  StateVector joint;
  std::vector<std::size_t> widths;
  for (const auto& id : ids) {
    const auto& payload = m.token(id).payload;
    joint = tensor(joint, payload);
    widths.push_back(payload.num_qubits());
  }
  try {
    joint = apply_all(std::move(joint), ops);
  } catch (const GateError& e) {
    throw ModelError("transition '" + transition + "': " + e.what());
  }
  auto factors = factorize(joint, widths);
  if (!factors) {
    throw ModelError("transition '" + transition +
                     "' entangles its consumed tokens; per-token payloads are undefined");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    MarkingAccess::token(m, ids[i]).payload = std::move((*factors)[i]);
  }
}

TokenSnapshot snapshot(const Marking& m, const std::string& id) {
  const QToken& t = m.token(id);
  return {t.id, t.kind, t.payload};
}

}  // namespace

bool is_enabled(const QPNet& net, const Marking& marking, std::size_t transition) {
  check_shape(net, marking);
  const Transition& t = net.transitions().at(transition);
  // Arcs from the same place add up.
  std::map<std::size_t, std::size_t> demand;
  for (const auto& arc : t.inputs) demand[net.place_index(arc.place)] += arc.multiplicity;
  for (const auto& [place, need] : demand) {
    if (marking.record_count(place) < need) return false;
  }
  for (const auto& p : t.inhibitors) {
    if (marking.record_count(net.place_index(p)) != 0) return false;
  }
  if (t.guard && !guard_selects(net, marking, *t.guard)) return false;
  return true;
}

std::vector<std::string> enabled_transitions(const QPNet& net, const Marking& marking) {
  check_shape(net, marking);
  marking.validate();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < net.transitions().size(); ++i) {
    if (is_enabled(net, marking, i)) out.push_back(net.transitions()[i].id);
  }
  return out;
}

FireResult fire(const QPNet& net, const Marking& marking, std::string_view transition) {
  const std::size_t ti = net.transition_index(transition);
  const Transition& t = net.transitions()[ti];
  if (!is_enabled(net, marking, ti)) {
    throw NotEnabledError("cannot fire " + t.id + ": not enabled at t=" +
                          std::to_string(marking.time()));
  }

  Marking next = marking;
  FiringEvent event;
  event.time = marking.time();
  event.transition = t.id;

  std::map<std::string, std::vector<Record>> taken;
  for (const auto& arc : t.inputs) {
    auto& q = MarkingAccess::queue(next, net.place_index(arc.place));
    for (std::size_t k = 0; k < arc.multiplicity; ++k) {
      Record rec = std::move(q.front());
      q.pop_front();
      RecordSnapshot snap{arc.place, {}};
      for (const auto& id : rec) snap.tokens.push_back(snapshot(next, id));
      event.consumed.push_back(std::move(snap));
      taken[arc.label].push_back(std::move(rec));
    }
  }

  apply_gate(next, data_tokens(next, event.consumed), t.gate, t.id);

  for (const auto& arc : t.outputs) {
    const std::size_t dest = net.place_index(arc.place);
    std::vector<std::string> moved;
    for (const auto& sel : arc.sources) {
      for (const auto& rec : taken[sel.label]) {
        for (const auto& id : rec) {
          const TokenKind kind = next.token(id).kind;
          const bool wanted = sel.part == TokenPart::Whole ||
                              (sel.part == TokenPart::Data && kind == TokenKind::Data) ||
                              (sel.part == TokenPart::Ancillary && kind == TokenKind::Ancillary);
          if (wanted) moved.push_back(id);
        }
      }
    }
    std::vector<Record> records;
    if (arc.fuse) {
      if (!moved.empty()) records.push_back(moved);
    } else {
      for (auto& id : moved) records.push_back({id});
    }
    auto& q = MarkingAccess::queue(next, dest);
    for (auto& rec : records) {
      RecordSnapshot snap{arc.place, {}};
      for (const auto& id : rec) {
        MarkingAccess::move(next, id, dest);
        snap.tokens.push_back(snapshot(next, id));
      }
      event.produced.push_back(std::move(snap));
      q.push_back(std::move(rec));
    }
  }

  next.set_time(marking.time() + 1);
  return {std::move(next), std::move(event)};
}

Marking unfire(const QPNet& net, const Marking& marking, const FiringEvent& event) {
  const auto ti = net.find_transition(event.transition);
  if (!ti) throw ReversalError("event names unknown transition '" + event.transition + "'");
  if (marking.time() != event.time + 1) {
    throw ReversalError("event at t=" + std::to_string(event.time) +
                        " did not produce the marking at t=" + std::to_string(marking.time()));
  }
  const Transition& t = net.transitions()[*ti];

  Marking prev = marking;
  for (auto it = event.produced.rbegin(); it != event.produced.rend(); ++it) {
    const auto p = net.find_place(it->place);
    if (!p) throw ReversalError("event names unknown place '" + it->place + "'");
    auto& q = MarkingAccess::queue(prev, *p);
    if (q.empty()) throw ReversalError("place '" + it->place + "' has no record to take back");
    const Record& tail = q.back();
    if (tail.size() != it->tokens.size()) {
      throw ReversalError("tail of '" + it->place + "' does not match the event");
    }
    for (std::size_t i = 0; i < tail.size(); ++i) {
      if (tail[i] != it->tokens[i].id || prev.token(tail[i]).payload != it->tokens[i].payload) {
        throw ReversalError("tail of '" + it->place + "' does not match the event");
      }
    }
    q.pop_back();
  }

  std::vector<std::string> data_ids;
  for (const auto& r : event.consumed) {
    for (const auto& tok : r.tokens) {
      if (!prev.has_token(tok.id)) throw ReversalError("unknown token '" + tok.id + "'");
      if (tok.kind == TokenKind::Data) data_ids.push_back(tok.id);
    }
  }
  if (!t.gate.empty()) {
    const auto undo = inverse(t.gate);
    apply_gate(prev, data_ids, undo, t.id);
  }
  // Factorizing can shift a global phase between tokens, so the undone
  // payloads are compared as one product state.
  StateVector undone, recorded;
  for (const auto& r : event.consumed) {
    for (const auto& tok : r.tokens) {
      undone = tensor(undone, prev.token(tok.id).payload);
      recorded = tensor(recorded, tok.payload);
    }
  }
  if (!undone.approx_equal(recorded)) {
    throw ReversalError("inverse gate does not restore the consumed payloads of " + t.id);
  }
  for (const auto& r : event.consumed) {
    for (const auto& tok : r.tokens) MarkingAccess::token(prev, tok.id).payload = tok.payload;
  }

  for (auto it = event.consumed.rbegin(); it != event.consumed.rend(); ++it) {
    const auto p = net.find_place(it->place);
    if (!p) throw ReversalError("event names unknown place '" + it->place + "'");
    Record rec;
    for (const auto& tok : it->tokens) {
      rec.push_back(tok.id);
      MarkingAccess::move(prev, tok.id, *p);
    }
    MarkingAccess::queue(prev, *p).push_front(std::move(rec));
  }
  prev.set_time(event.time);
  try {
    prev.validate();
  } catch (const ModelError& e) {
    throw ReversalError(std::string("event does not match marking: ") + e.what());
  }
  return prev;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

std::vector<std::string> Trace::firing_order() const {
  std::vector<std::string> ids;
  ids.reserve(events.size());
  for (const auto& e : events) ids.push_back(e.transition);
  return ids;
}

namespace {

std::optional<std::size_t> choose(const QPNet& net, const Marking& m, bool eager_output) {
  std::optional<std::size_t> guarded, output, any;
  for (std::size_t i = 0; i < net.transitions().size(); ++i) {
    if (!is_enabled(net, m, i)) continue;
    const Transition& t = net.transitions()[i];
    if (!any) any = i;
    if (t.guard && !guarded) guarded = i;
    if (t.role == TransitionRole::Output && !output) output = i;
  }
  if (eager_output && output) return output;
  if (guarded) return guarded;
  return any;
}

std::vector<SkippedSelection> blocked_selections(const QPNet& net, const Marking& m) {
  std::vector<SkippedSelection> out;
  for (std::size_t i = 0; i < net.transitions().size(); ++i) {
    const Transition& t = net.transitions()[i];
    if (!t.guard || is_enabled(net, m, i)) continue;
    const QToken* head = head_ancillary(net, m, *t.guard);
    if (head == nullptr || head->address != t.guard->address) continue;
    out.push_back({m.time(), head->id, t.guard->place, *head->address, t.id});
  }
  return out;
}

}  // namespace

Trace run(const QPNet& net, const Marking& marking, const Scheduler& scheduler,
          std::size_t step_bound) {
  check_shape(net, marking);
  marking.validate();
  Trace trace;
  trace.places = net.place_ids();
  trace.initial = marking;
  Marking current = marking;

  const auto step = [&](std::size_t ti) {
    auto result = fire(net, current, net.transitions()[ti].id);
    current = std::move(result.marking);
    trace.events.push_back(std::move(result.event));
  };

  if (const auto* script = std::get_if<Scripted>(&scheduler)) {
    for (std::size_t i = 0; i < script->sequence.size(); ++i) {
      const std::size_t ti = net.transition_index(script->sequence[i]);
      if (!is_enabled(net, current, ti)) {
        throw NotEnabledError("step " + std::to_string(i) + ": cannot fire " +
                                  script->sequence[i] + ", it is not enabled",
                              i);
      }
      step(ti);
    }
  } else {
    const bool eager = std::holds_alternative<EagerOutputThenScript>(scheduler);
    while (auto ti = choose(net, current, eager)) {
      if (trace.events.size() >= step_bound) {
        throw ExplosionError("run exceeded the step bound of " + std::to_string(step_bound));
      }
      step(*ti);
    }
    trace.skipped = blocked_selections(net, current);
  }
  trace.final = std::move(current);
  return trace;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

std::vector<std::size_t> DistributionSignature::values() const {
  std::vector<std::size_t> v;
  v.reserve(counts.size());
  for (const auto& [place, n] : counts) v.push_back(n);
  return v;
}

std::string DistributionSignature::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i != 0) s += ",";
    s += std::to_string(counts[i].second);
  }
  return s + ")";
}

DistributionSignature signature_of(const QPNet& net, const Marking& marking,
                                   const std::vector<std::string>& projection) {
  DistributionSignature sig;
  if (projection.empty()) {
    for (std::size_t p = 0; p < net.places().size(); ++p) {
      sig.counts.emplace_back(net.places()[p].id, marking.token_count(p));
    }
  } else {
    for (const auto& id : projection) {
      sig.counts.emplace_back(id, marking.token_count(net.place_index(id)));
    }
  }
  return sig;
}

namespace {

class Explorer {
 public:
  Explorer(const QPNet& net, const EnumerationOptions& options) : net_(net), options_(options) {}

  EnumerationResult explore(const Marking& start) {
    visited_.insert(start.fingerprint());
    visit(start);
    EnumerationResult result;
    for (auto& [sig, witness] : found_) result.outcomes.push_back({sig, std::move(witness)});
    result.states_explored = visited_.size();
    result.firings = firings_;
    return result;
  }

 private:
  void visit(const Marking& m) {
    bool quiescent = true;
    for (std::size_t i = 0; i < net_.transitions().size(); ++i) {
      if (!is_enabled(net_, m, i)) continue;
      quiescent = false;
      if (++firings_ > options_.step_bound) {
        throw ExplosionError("enumeration exceeded the step bound of " +
                             std::to_string(options_.step_bound) + " firings");
      }
      const std::string& id = net_.transitions()[i].id;
      auto result = fire(net_, m, id);
      if (options_.on_firing) options_.on_firing(m, result.event);
      if (!visited_.insert(result.marking.fingerprint()).second) continue;
      path_.push_back(id);
      visit(result.marking);
      path_.pop_back();
    }
    if (quiescent) found_.emplace(signature_of(net_, m, options_.projection), path_);
  }

  const QPNet& net_;
  const EnumerationOptions& options_;
  std::unordered_set<std::string> visited_;
  std::map<DistributionSignature, std::vector<std::string>> found_;
  std::vector<std::string> path_;
  std::size_t firings_ = 0;
};

}  // namespace

EnumerationResult enumerate_final_markings(const QPNet& net, const Marking& marking,
                                           const EnumerationOptions& options) {
  check_shape(net, marking);
  marking.validate();
  return Explorer(net, options).explore(marking);
}

}  // namespace qpn
