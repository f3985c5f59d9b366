#pragma once

#include "consensus/budget.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace consensus {

// One JSON object per line. Every message carries "kind", "session",
// "sender" and "seq"; payload fields sit beside them. Integers are plain
// decimal JSON integers. The disagreement ratio travels as a string with
// exactly six fractional digits so every client sees identical text.
// docs/wire_protocol.md is the published schema.

enum class MessageKind {
  Hello,
  Snapshot,
  Adjust,
  SelectProposal,
  DisagreementUpdate,
  CompareBallot,
  TrialAdvance,
  Error,
};

const char* to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view text);

struct HelloPayload {
  friend bool operator==(const HelloPayload&, const HelloPayload&) = default;
};

struct AdjustPayload {
  CategoryId category;
  Dollars amount = 0;
  std::string budget;  // optional; when set it must be the sender's budget

  friend bool operator==(const AdjustPayload&, const AdjustPayload&) = default;
};

struct SelectProposalPayload {
  CategoryId category;
  std::string proposal;
  std::string budget;  // optional, as for Adjust

  friend bool operator==(const SelectProposalPayload&, const SelectProposalPayload&) = default;
};

struct DisagreementPayload {
  std::string raw;      // six fractional digits, round-half-even
  std::string display;  // raw, or ">10%" above the clamp
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  std::map<CategoryId, Dollars> deltas;
  std::vector<std::string> budgets;  // the two budget ids compared, a then b

  friend bool operator==(const DisagreementPayload&, const DisagreementPayload&) = default;
};

struct CompareBallotPayload {
  std::string budget_a;
  std::string budget_b;
  std::string choice;

  friend bool operator==(const CompareBallotPayload&, const CompareBallotPayload&) = default;
};

struct TrialAdvancePayload {
  std::string phase;

  friend bool operator==(const TrialAdvancePayload&, const TrialAdvancePayload&) = default;
};

struct ErrorPayload {
  std::string code;
  std::string message;
  std::string prior;  // echo of an earlier conflicting ballot choice

  friend bool operator==(const ErrorPayload&, const ErrorPayload&) = default;
};

struct SnapshotBudget {
  std::string id;
  std::string owner;
  AmountMap amounts;
  std::map<CategoryId, std::string> selections;  // category -> proposal id

  friend bool operator==(const SnapshotBudget&, const SnapshotBudget&) = default;
};

struct SnapshotPayload {
  Baseline baseline;
  std::vector<Proposal> proposals;
  std::map<std::string, std::uint64_t> usage;  // proposal id -> budgets selecting it
  std::vector<std::string> participants;
  std::vector<SnapshotBudget> budgets;
  std::optional<Dollars> goal;

  friend bool operator==(const SnapshotPayload&, const SnapshotPayload&) = default;
};

using Payload = std::variant<HelloPayload, SnapshotPayload, AdjustPayload, SelectProposalPayload, DisagreementPayload,
                             CompareBallotPayload, TrialAdvancePayload, ErrorPayload>;

struct WireMessage {
  std::string session;
  std::string sender;
  std::uint64_t seq = 0;
  Payload payload;

  MessageKind kind() const;

  friend bool operator==(const WireMessage&, const WireMessage&) = default;
};

/// Rejected wire input: bad JSON, unknown kind, missing or mistyped field.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single line, no trailing newline. Output is canonical: equal messages
/// encode to equal bytes.
std::string encode(const WireMessage& message);
WireMessage decode(std::string_view line);

WireMessage make_hello(std::string session, std::string sender);
WireMessage make_adjust(std::string session, std::string sender, CategoryId category, Dollars amount);
WireMessage make_select(std::string session, std::string sender, CategoryId category, std::string proposal);
WireMessage make_ballot(std::string session, std::string sender, std::string budget_a, std::string budget_b,
                        std::string choice);
WireMessage make_advance(std::string session, std::string sender, std::string phase);
WireMessage make_error(std::string session, std::uint64_t seq, std::string code, std::string message,
                       std::string prior = {});

DisagreementPayload to_payload(const DisagreementReport& report, std::string budget_a, std::string budget_b);

}  // namespace consensus
