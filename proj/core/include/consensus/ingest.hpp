#pragma once

#include "consensus/budget.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace consensus {

// Text formats. All are comma-separated with a version line first; amounts
// are unsigned decimal integers in millions, and the sign comes from the
// category kind. Empty lines are ignored.
//
//   budget-baseline,1
//   <baseline name>,<fiscal label>
//   <category>,<revenue|expense>,<amount>[,<description>]
//
//   budget-proposals,1
//   <category>,<target amount>,<rationale>[,<author>]
//
//   budget,1
//   <owner>,<baseline name>
//   <category>,<target amount>

inline constexpr std::string_view kBaselineMagic = "budget-baseline";
inline constexpr std::string_view kProposalsMagic = "budget-proposals";
inline constexpr std::string_view kBudgetMagic = "budget";
inline constexpr std::string_view kFormatVersion = "1";

/// Throws ParseError (with line and column) on any malformed input; never
/// repairs. Category ids are the category names.
Baseline parse_baseline(std::string_view text, std::string_view source = "<baseline>");
std::string render_baseline(const Baseline& baseline);

/// Proposal ids are "p<row number>" in file order. A fully empty text is an
/// empty list.
std::vector<Proposal> parse_proposals(std::string_view text, const Baseline& baseline,
                                      std::string_view source = "<proposals>");
std::string render_proposals(const std::vector<Proposal>& proposals, const Baseline& baseline);

/// Each row becomes a selected proposal with id "<owner>/<category>".
Budget parse_budget(std::string_view text, const Baseline& baseline, std::string_view source = "<budget>");
std::string render_budget(const Budget& budget, const Baseline& baseline);

/// Reads a whole file; throws std::runtime_error naming the path.
std::string read_file(const std::string& path);

}  // namespace consensus
