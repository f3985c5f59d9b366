#include "consensus/budget.hpp"
#include "wide_int.hpp"

#include "consensus/decimal.hpp"
#include "consensus/errors.hpp"

#include <fmt/format.h>

#include <set>

namespace consensus {

namespace {

Dollars checked_add(Dollars a, Dollars b) {
  Dollars out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("dollar amount overflow");
  return out;
}

Dollars checked_abs(Dollars v) {
  if (v == INT64_MIN) throw OverflowError("dollar amount overflow");
  return v < 0 ? -v : v;
}

Dollars checked_sub(Dollars a, Dollars b) {
  Dollars out = 0;
  if (__builtin_sub_overflow(a, b, &out)) throw OverflowError("dollar amount overflow");
  return out;
}

}  // namespace

const char* to_string(CategoryKind kind) {
  return kind == CategoryKind::Revenue ? "revenue" : "expense";
}

bool sign_ok(CategoryKind kind, Dollars amount) {
  return kind == CategoryKind::Revenue ? amount >= 0 : amount <= 0;
}

const Category* Baseline::find(const CategoryId& cid) const {
  for (const auto& c : categories) {
    if (c.id == cid) return &c;
  }
  return nullptr;
}

const Category& Baseline::at(const CategoryId& cid) const {
  if (const auto* c = find(cid)) return *c;
  throw StructuralError(fmt::format("unknown category '{}' in baseline '{}'", cid, id));
}

void Baseline::validate() const {
  std::set<CategoryId> seen;
  for (const auto& c : categories) {
    if (!seen.insert(c.id).second) {
      throw StructuralError(fmt::format("duplicate category id '{}' in baseline '{}'", c.id, id));
    }
    auto it = amounts.find(c.id);
    if (it == amounts.end()) {
      throw StructuralError(fmt::format("category '{}' has no amount in baseline '{}'", c.id, id));
    }
    if (!sign_ok(c.kind, it->second)) {
      throw ValidationError(fmt::format("{} category '{}' has amount {} with the wrong sign", to_string(c.kind),
                                        c.id, it->second));
    }
  }
  for (const auto& [cid, amount] : amounts) {
    if (!seen.contains(cid)) {
      throw StructuralError(fmt::format("amount for unknown category '{}' in baseline '{}'", cid, id));
    }
  }
}

void validate_proposal(const Proposal& proposal, const Baseline& baseline) {
  const Category* c = baseline.find(proposal.category_id);
  if (c == nullptr) {
    throw StructuralError(
        fmt::format("proposal '{}' references unknown category '{}'", proposal.id, proposal.category_id));
  }
  if (!sign_ok(c->kind, proposal.target)) {
    throw ValidationError(fmt::format("proposal '{}' target {} violates the {} sign convention", proposal.id,
                                      proposal.target, to_string(c->kind)));
  }
}

AmountMap resolve_amounts(const Budget& budget, const Baseline& baseline) {
  if (budget.baseline_id != baseline.id) {
    throw StructuralError(fmt::format("budget '{}' is built on baseline '{}', not '{}'", budget.id,
                                      budget.baseline_id, baseline.id));
  }
  AmountMap out = baseline.amounts;
  for (const auto& [cid, proposal] : budget.selections) {
    auto it = out.find(cid);
    if (it == out.end()) {
      throw StructuralError(fmt::format("budget '{}' selects a proposal for unknown category '{}'", budget.id, cid));
    }
    if (proposal.category_id != cid) {
      throw StructuralError(fmt::format("budget '{}' files proposal '{}' for '{}' under '{}'", budget.id,
                                        proposal.id, proposal.category_id, cid));
    }
    validate_proposal(proposal, baseline);
    it->second = proposal.target;
  }
  return out;
}

Dollars deficit(const AmountMap& amounts) {
  Dollars sum = 0;
  for (const auto& [_, v] : amounts) sum = checked_add(sum, v);
  return checked_sub(0, sum);
}

Dollars deficit_change(const AmountMap& original, const AmountMap& adjusted) {
  return checked_sub(deficit(original), deficit(adjusted));
}

bool DisagreementReport::clamped() const {
  if (denominator == 0) return false;
  // raw > 10/100  <=>  100 * numerator > 10 * denominator
  return static_cast<Int128>(numerator) * 100 > static_cast<Int128>(denominator) * kDisplayClampPercent;
}

std::string DisagreementReport::raw_text() const {
  if (denominator == 0) return format_ratio(0, 1);
  return format_ratio(numerator, denominator);
}

DisagreementReport disagreement(const AmountMap& a, const AmountMap& b) {
  if (a.size() != b.size()) {
    throw StructuralError(fmt::format("budgets cover {} and {} categories", a.size(), b.size()));
  }
  DisagreementReport report;
  Dollars delta_sum = 0;
  Dollars magnitude_sum = 0;
  auto ib = b.begin();
  for (auto ia = a.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) {
      throw StructuralError(fmt::format("category sets differ at '{}' / '{}'", ia->first, ib->first));
    }
    const Dollars delta = checked_sub(ia->second, ib->second);
    report.deltas.emplace(ia->first, delta);
    delta_sum = checked_add(delta_sum, checked_abs(delta));
    magnitude_sum = checked_add(magnitude_sum, checked_add(checked_abs(ia->second), checked_abs(ib->second)));
  }
  report.numerator = checked_add(delta_sum, delta_sum);
  report.denominator = magnitude_sum;
  if (report.denominator > 0) {
    report.raw = static_cast<double>(report.numerator) / static_cast<double>(report.denominator);
  }
  report.display = report.clamped() ? std::string(kClampedToken) : report.raw_text();
  return report;
}

}  // namespace consensus
