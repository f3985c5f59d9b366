#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace consensus {

/// Signed whole millions of dollars. Revenue is positive, expense negative.
using Dollars = std::int64_t;

using CategoryId = std::string;

/// Effective amount per category.
using AmountMap = std::map<CategoryId, Dollars>;

enum class CategoryKind { Revenue, Expense };

const char* to_string(CategoryKind kind);

struct Category {
  CategoryId id;
  std::string name;
  CategoryKind kind = CategoryKind::Expense;
  std::string description;

  friend bool operator==(const Category&, const Category&) = default;
};

/// True if `amount` has the sign its category kind requires. Zero is
/// allowed for both kinds.
bool sign_ok(CategoryKind kind, Dollars amount);

struct Baseline {
  std::string id;
  std::string name;
  std::string fiscal_label;
  std::vector<Category> categories;
  AmountMap amounts;

  const Category* find(const CategoryId& id) const;
  const Category& at(const CategoryId& id) const;

  /// Throws StructuralError when categories and amounts disagree or ids
  /// repeat, ValidationError when a sign convention is broken.
  void validate() const;

  friend bool operator==(const Baseline&, const Baseline&) = default;
};

struct Proposal {
  std::string id;
  CategoryId category_id;
  Dollars target = 0;
  std::string rationale;
  std::string author;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

/// Throws if the proposal names an unknown category or breaks the sign rule.
void validate_proposal(const Proposal& proposal, const Baseline& baseline);

/// A user's budget: at most one selected proposal per category; categories
/// without a selection take the baseline amount.
struct Budget {
  std::string id;
  std::string baseline_id;
  std::map<CategoryId, Proposal> selections;
  std::string owner;

  friend bool operator==(const Budget&, const Budget&) = default;
};

/// Effective amounts of `budget` over `baseline`.
AmountMap resolve_amounts(const Budget& budget, const Baseline& baseline);

/// -(sum of amounts): positive when expenses exceed revenues. Throws
/// OverflowError instead of wrapping.
Dollars deficit(const AmountMap& amounts);

/// Overview delta shown above the charts: how much the adjusted budget
/// reduces the deficit relative to the original.
Dollars deficit_change(const AmountMap& original, const AmountMap& adjusted);

/// Values strictly above this fraction render as the clamped token.
inline constexpr std::int64_t kDisplayClampPercent = 10;
inline constexpr const char* kClampedToken = ">10%";

struct DisagreementReport {
  /// Exact value numerator / denominator, where numerator = 2 * sum|delta|
  /// and denominator = sum(|A_c| + |B_c|). Both zero for all-zero budgets.
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  double raw = 0.0;
  std::map<CategoryId, Dollars> deltas;  // a - b
  std::string display;

  bool clamped() const;
  /// raw with exactly six fractional digits, round-half-even.
  std::string raw_text() const;
};

/// Distance between two resolved budgets:
///   sum_c |A_c - B_c| / sum_c (|A_c| + |B_c|) / 2
/// Throws StructuralError when the key sets differ.
DisagreementReport disagreement(const AmountMap& a, const AmountMap& b);

}  // namespace consensus
