#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qpn/statevector.hpp"

namespace qpn {

// ---------------------------------------------------------------------------
// Tokens and places
// ---------------------------------------------------------------------------

enum class TokenKind { Data, Ancillary };

/// A q-token. Ancillary tokens must carry a basis-state payload; its index is
/// the token's address and is what address guards compare against.
struct QToken {
  std::string id;
  TokenKind kind = TokenKind::Data;
  StateVector payload;
  std::optional<std::uint64_t> address;

  static QToken data(std::string id, StateVector payload);
  /// Throws ModelError if `payload` is not a basis state.
  static QToken ancillary(std::string id, StateVector payload);

  friend bool operator==(const QToken&, const QToken&) = default;
};

enum class PlaceKind { Input, Output, Ancillary, DataAncillary };

struct Place {
  std::string id;
  PlaceKind kind = PlaceKind::Input;
};

// ---------------------------------------------------------------------------
// Transitions
// ---------------------------------------------------------------------------

/// Place -> transition arc. `multiplicity` counts queue records; a fused
/// data/ancillary pair is a single record.
struct InputArc {
  std::string place;
  std::string label;
  std::size_t multiplicity = 1;
};

/// Which tokens of the records consumed under an input label an output arc
/// carries.
enum class TokenPart { Whole, Data, Ancillary };

struct TokenSelector {
  std::string label;
  TokenPart part = TokenPart::Whole;
};

/// Transition -> place arc. The selected tokens are appended to the place
/// either as one fused record (`fuse`) or one record per token.
struct OutputArc {
  std::string place;
  std::string label;
  std::vector<TokenSelector> sources;
  bool fuse = false;
};

/// The head record of `place` must start with an ancillary token whose
/// address equals `address`.
struct AddressGuard {
  std::string place;
  std::uint64_t address = 0;
};

/// Input-side transitions consume from a selector supply; output-side ones
/// drain staging places. Only the EagerOutputThenScript scheduler looks at it.
enum class TransitionRole { Input, Output };

struct Transition {
  std::string id;
  std::vector<InputArc> inputs;
  std::vector<OutputArc> outputs;
  /// Places that must be empty for the transition to be enabled.
  std::vector<std::string> inhibitors;
  /// Applied to the consumed data payloads, concatenated in consumption
  /// order with the first token on the high-order qubits. Empty = identity.
  std::vector<GateOp> gate;
  std::optional<AddressGuard> guard;
  TransitionRole role = TransitionRole::Input;
};

/// Places plus transitions. Transitions are kept in declaration order, which
/// is the order enabled_transitions reports them in.
class QPNet {
 public:
  std::size_t add_place(Place place);

  /// Validates arcs, labels, guard and routing; throws ModelError.
  /// Every consumed record must be routed exactly once, either whole or as
  /// a data part plus an ancillary part.
  std::size_t add_transition(Transition transition);

  const std::vector<Place>& places() const { return places_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  std::optional<std::size_t> find_place(std::string_view id) const;
  std::optional<std::size_t> find_transition(std::string_view id) const;
  std::size_t place_index(std::string_view id) const;  // throws ModelError
  std::size_t transition_index(std::string_view id) const;

  std::vector<std::string> place_ids() const;

 private:
  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::unordered_map<std::string, std::size_t> place_lookup_;
  std::unordered_map<std::string, std::size_t> transition_lookup_;
};

// ---------------------------------------------------------------------------
// Markings
// ---------------------------------------------------------------------------

struct MarkingAccess;

/// Token ids forming one queue entry. Size 1 normally, 2 for a fused pair.
using Record = std::vector<std::string>;

/// Token-to-place assignment at a time step, plus each token's payload.
/// Places are FIFO queues of records.
class Marking {
 public:
  Marking() = default;
  explicit Marking(std::size_t num_places) : queues_(num_places) {}

  std::size_t num_places() const { return queues_.size(); }
  std::size_t time() const { return time_; }
  void set_time(std::size_t t) { time_ = t; }

  /// Appends a new token as its own record. Throws ModelError on duplicate id.
  void add_token(std::size_t place, QToken token);
  /// Appends several new tokens as one fused record.
  void add_record(std::size_t place, std::vector<QToken> tokens);

  const std::deque<Record>& queue(std::size_t place) const { return queues_.at(place); }
  std::size_t record_count(std::size_t place) const { return queues_.at(place).size(); }
  std::size_t token_count(std::size_t place) const;
  std::vector<std::size_t> token_counts() const;
  std::size_t total_tokens() const { return tokens_.size(); }

  bool has_token(std::string_view id) const;
  const QToken& token(std::string_view id) const;
  std::size_t place_of(std::string_view id) const;
  const std::map<std::string, QToken, std::less<>>& tokens() const { return tokens_; }

  /// Token ids of a place in queue order, records flattened.
  std::vector<std::string> token_ids(std::size_t place) const;

  /// Checks that queues and the token table agree.
  void validate() const;

  /// Exact structural key over queues and payloads, used to detect revisits.
  std::string fingerprint() const;

  friend bool operator==(const Marking&, const Marking&) = default;

 private:
  friend struct MarkingAccess;
  std::vector<std::deque<Record>> queues_;
  std::map<std::string, QToken, std::less<>> tokens_;
  std::map<std::string, std::size_t, std::less<>> token_place_;
  std::size_t time_ = 0;
};

// ---------------------------------------------------------------------------
// Firing
// ---------------------------------------------------------------------------

struct TokenSnapshot {
  std::string id;
  TokenKind kind = TokenKind::Data;
  StateVector payload;
  friend bool operator==(const TokenSnapshot&, const TokenSnapshot&) = default;
};

struct RecordSnapshot {
  std::string place;
  std::vector<TokenSnapshot> tokens;
  friend bool operator==(const RecordSnapshot&, const RecordSnapshot&) = default;
};

/// One firing: consumed records with pre-payloads in consumption order and
/// produced records with post-payloads in deposit order.
struct FiringEvent {
  std::size_t time = 0;
  std::string transition;
  std::vector<RecordSnapshot> consumed;
  std::vector<RecordSnapshot> produced;
  friend bool operator==(const FiringEvent&, const FiringEvent&) = default;
};

/// A head ancillary that selected a transition which could not fire when the
/// run went quiescent (its data input was empty).
struct SkippedSelection {
  std::size_t time = 0;
  std::string token;
  std::string place;
  std::uint64_t address = 0;
  std::string transition;
  friend bool operator==(const SkippedSelection&, const SkippedSelection&) = default;
};

struct Trace {
  std::vector<std::string> places;
  Marking initial;
  std::vector<FiringEvent> events;
  std::vector<SkippedSelection> skipped;
  Marking final;

  std::vector<std::string> firing_order() const;
  friend bool operator==(const Trace&, const Trace&) = default;
};

bool is_enabled(const QPNet& net, const Marking& marking, std::size_t transition);

/// Enabled transition ids in declaration order. Throws ModelError when the
/// marking does not fit the net.
std::vector<std::string> enabled_transitions(const QPNet& net, const Marking& marking);

struct FireResult {
  Marking marking;
  FiringEvent event;
};

/// Throws NotEnabledError if the transition is not enabled, ModelError if
/// its gate would entangle the consumed payloads.
FireResult fire(const QPNet& net, const Marking& marking, std::string_view transition);

/// Undoes `event`, which must be the firing that produced `marking`.
/// Throws ReversalError otherwise.
Marking unfire(const QPNet& net, const Marking& marking, const FiringEvent& event);

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

/// Fires the listed transitions in order; each must be enabled.
struct Scripted {
  std::vector<std::string> sequence;
  friend bool operator==(const Scripted&, const Scripted&) = default;
};

/// Fires guarded transitions (selected by head ancillary addresses) first,
/// then anything else, lowest declaration index first, until quiescent.
struct AddressDriven {
  friend bool operator==(const AddressDriven&, const AddressDriven&) = default;
};

/// Like AddressDriven but an enabled output-side transition always goes
/// before the next address selection.
struct EagerOutputThenScript {
  friend bool operator==(const EagerOutputThenScript&, const EagerOutputThenScript&) = default;
};

using Scheduler = std::variant<Scripted, AddressDriven, EagerOutputThenScript>;

inline constexpr std::size_t kDefaultStepBound = 1'000'000;

Trace run(const QPNet& net, const Marking& marking, const Scheduler& scheduler,
          std::size_t step_bound = kDefaultStepBound);

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Token counts of selected places at quiescence.
struct DistributionSignature {
  std::vector<std::pair<std::string, std::size_t>> counts;

  std::vector<std::size_t> values() const;
  std::string to_string() const;  // "(3,0)"
  friend auto operator<=>(const DistributionSignature&, const DistributionSignature&) = default;
};

DistributionSignature signature_of(const QPNet& net, const Marking& marking,
                                   const std::vector<std::string>& projection = {});

struct EnumerationOptions {
  /// Places to count; empty means every place in declaration order.
  std::vector<std::string> projection;
  std::size_t step_bound = kDefaultStepBound;
  /// Called for every explored firing with the marking it fired from.
  std::function<void(const Marking& before, const FiringEvent& event)> on_firing;
};

struct Outcome {
  DistributionSignature signature;
  std::vector<std::string> witness;
};

struct EnumerationResult {
  std::vector<Outcome> outcomes;  // sorted by signature
  std::size_t states_explored = 0;
  std::size_t firings = 0;
};

/// Depth-first search over every maximal firing sequence. Revisited markings
/// are pruned, so each distinct quiescent marking is reached once; outcomes
/// are deduplicated by signature and keep the first witness found. Throws
/// ExplosionError once more than `step_bound` firings have been explored.
EnumerationResult enumerate_final_markings(const QPNet& net, const Marking& marking,
                                           const EnumerationOptions& options = {});

}  // namespace qpn
