#include "../support/generators.hpp"

#include <consensus/ingest.hpp>
#include <consensus/wire.hpp>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

using namespace consensus;

namespace {

WireMessage random_message(Rng& rng) {
  const std::string session = "s" + std::to_string(rng.below(100));
  const std::string sender = gen::text(rng, 1, 6);
  const auto seq = rng.below(1'000'000);
  const auto amount = static_cast<Dollars>(rng.below(2'000'000)) - 1'000'000;
  Payload p;
  switch (rng.below(8)) {
    case 0: p = HelloPayload{}; break;
    case 1: {
      SnapshotPayload s;
      s.baseline = gen::baseline(rng, 4);
      for (const auto& c : s.baseline.categories) {
        s.proposals.push_back({"p" + c.id, c.id, s.baseline.amounts.at(c.id), gen::text(rng, 0, 6), "a"});
        s.usage["p" + c.id] = rng.below(3);
      }
      s.participants = {"ana", "ben"};
      s.budgets.push_back({"s/ana", "ana", s.baseline.amounts, {}});
      if (rng.coin()) s.goal = amount;
      p = s;
      break;
    }
    case 2: p = AdjustPayload{gen::text(rng, 1, 5), amount, rng.coin() ? "s/ana" : ""}; break;
    case 3: p = SelectProposalPayload{"Defense", "p" + std::to_string(rng.below(9)), ""}; break;
    case 4: {
      const auto [a, b] = gen::budget_pair(rng);
      p = to_payload(disagreement(a, b), "s/ana", "s/ben");
      break;
    }
    case 5: p = CompareBallotPayload{"x", "y", rng.coin() ? "x" : "y"}; break;
    case 6: p = TrialAdvancePayload{"Done"}; break;
    default: p = ErrorPayload{"duplicate_ballot", gen::text(rng, 0, 10), rng.coin() ? "x" : ""}; break;
  }
  return {session, sender, seq, p};
}

}  // namespace

TEST(Wire, RoundTripProperty) {
  Rng rng(5);
  for (int i = 0; i < 3000; ++i) {
    const auto m = random_message(rng);
    const auto line = encode(m);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const auto back = decode(line);
    ASSERT_EQ(back, m) << line;
    EXPECT_EQ(encode(back), line);
  }
}

TEST(Wire, AdjustShape) {
  const auto line = encode(make_adjust("s1", "ana", "Defense", -600));
  EXPECT_EQ(line, R"({"amount":-600,"category":"Defense","kind":"Adjust","sender":"ana","seq":0,"session":"s1"})");
}

TEST(Wire, DisagreementCarriesTextRatio) {
  const auto r = disagreement({{"D", -700}, {"H", -800}, {"T", 1200}}, {{"D", -600}, {"H", -800}, {"T", 1400}});
  const WireMessage m{"s", "server", 3, to_payload(r, "s/a", "s/b")};
  const auto j = nlohmann::json::parse(encode(m));
  EXPECT_EQ(j["raw"], "0.109091");
  EXPECT_EQ(j["display"], ">10%");
  EXPECT_EQ(j["numerator"], 600);
  EXPECT_EQ(j["denominator"], 5500);
  EXPECT_EQ(j["deltas"]["T"], -200);
}

TEST(Wire, StrictDecoding) {
  const std::vector<std::string> bad = {
      "",
      "not json",
      "[]",
      R"({"kind":"Hello","session":"s","sender":"a"})",                          // missing seq
      R"({"kind":"Hello","session":"s","sender":"a","seq":-1})",                 // negative seq
      R"({"kind":"Hello","session":"s","sender":"a","seq":0,"extra":1})",        // unknown field
      R"({"kind":"Wave","session":"s","sender":"a","seq":0})",                   // unknown kind
      R"({"kind":"Adjust","session":"s","sender":"a","seq":0,"category":"D"})",  // missing amount
      R"({"kind":"Adjust","session":"s","sender":"a","seq":0,"category":"D","amount":1.5})",
      R"({"kind":"Adjust","session":"s","sender":"a","seq":0,"category":"D","amount":"5"})",
      R"({"kind":"Adjust","session":"s","sender":"a","seq":0,"category":"D","amount":9223372036854775808})",
      R"({"kind":"Adjust","session":1,"sender":"a","seq":0,"category":"D","amount":1})",
      R"({"kind":"DisagreementUpdate","session":"s","sender":"server","seq":1,"raw":"0.1","display":"0.1","numerator":1,"denominator":10,"deltas":{},"budgets":["a","b"]})",
      R"({"kind":"DisagreementUpdate","session":"s","sender":"server","seq":1,"raw":"0.100000","display":"10%","numerator":1,"denominator":10,"deltas":{},"budgets":["a","b"]})",
      R"({"kind":"DisagreementUpdate","session":"s","sender":"server","seq":1,"raw":"0.100000","display":"0.100000","numerator":1,"denominator":10,"deltas":{},"budgets":["a"]})",
  };
  for (const auto& line : bad) EXPECT_THROW(decode(line), ProtocolError) << line;
}

TEST(Wire, KindNames) {
  for (int k = 0; k < 8; ++k) {
    const auto kind = static_cast<MessageKind>(k);
    EXPECT_EQ(parse_message_kind(to_string(kind)), kind);
  }
  EXPECT_EQ(parse_message_kind("hello"), std::nullopt);
}

TEST(Wire, DocumentedExamplesAreCanonical) {
  const auto doc = read_file(CONSENSUS_DOCS_DIR "/wire_protocol.md");
  std::size_t pos = 0;
  int examples = 0;
  while ((pos = doc.find("```json\n", pos)) != std::string::npos) {
    pos += 8;
    const auto end = doc.find("\n```", pos);
    ASSERT_NE(end, std::string::npos);
    const auto line = doc.substr(pos, end - pos);
    EXPECT_EQ(encode(decode(line)), line);
    ++examples;
    pos = end;
  }
  EXPECT_GE(examples, 8);
}
