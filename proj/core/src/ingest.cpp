#include "consensus/ingest.hpp"

#include "consensus/csv.hpp"
#include "consensus/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace consensus {

namespace {

struct Row {
  std::size_t line = 0;
  std::vector<csv::Field> fields;
};

class Reader {
 public:
  Reader(std::string_view text, std::string_view source) : source_(source) {
    const auto ls = csv::lines(text);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (ls[i].empty()) continue;
      try {
        rows_.push_back({i + 1, csv::split_line(ls[i])});
      } catch (const csv::FieldError& e) {
        throw ParseError(source_, i + 1, e.column(), e.what());
      }
    }
  }

  bool empty() const { return rows_.empty(); }
  const std::vector<Row>& rows() const { return rows_; }

  [[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& what) const {
    throw ParseError(source_, line, column, what);
  }

  void expect_fields(const Row& row, std::size_t min, std::size_t max) const {
    if (row.fields.size() < min || row.fields.size() > max) {
      fail(row.line, 0,
           min == max ? fmt::format("expected {} fields, found {}", min, row.fields.size())
                      : fmt::format("expected {} to {} fields, found {}", min, max, row.fields.size()));
    }
  }

  void expect_header(std::string_view magic) const {
    if (rows_.empty()) fail(1, 0, fmt::format("missing '{},{}' header", magic, kFormatVersion));
    const Row& r = rows_.front();
    if (r.fields.size() != 2 || r.fields[0].value != magic) {
      fail(r.line, 1, fmt::format("expected header '{},{}'", magic, kFormatVersion));
    }
    if (r.fields[1].value != kFormatVersion) {
      fail(r.line, r.fields[1].column, fmt::format("unsupported format version '{}'", r.fields[1].value));
    }
  }

  Dollars amount(const Row& row, const csv::Field& f) const {
    const std::string& s = f.value;
    if (!s.empty() && s.front() == '-') fail(row.line, f.column, fmt::format("negative amount '{}'", s));
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      fail(row.line, f.column, fmt::format("amount '{}' is not an unsigned integer", s));
    }
    Dollars v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(row.line, f.column, fmt::format("amount '{}' out of range", s));
    }
    return v;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::vector<Row> rows_;
};

Dollars apply_sign(CategoryKind kind, Dollars magnitude) {
  return kind == CategoryKind::Expense ? -magnitude : magnitude;
}

Dollars magnitude_of(Dollars v) { return v < 0 ? -v : v; }

std::string category_list(const Baseline& baseline) {
  std::string out;
  for (const auto& c : baseline.categories) {
    if (!out.empty()) out += ", ";
    out += c.id;
  }
  return out.empty() ? "(none)" : out;
}

const Category& lookup(const Reader& in, const Baseline& baseline, const Row& row, const csv::Field& f) {
  const Category* c = baseline.find(f.value);
  if (c == nullptr) {
    in.fail(row.line, f.column,
            fmt::format("unknown category '{}'; valid categories: {}", f.value, category_list(baseline)));
  }
  return *c;
}

}  // namespace

Baseline parse_baseline(std::string_view text, std::string_view source) {
  Reader in(text, source);
  in.expect_header(kBaselineMagic);
  const auto& rows = in.rows();
  if (rows.size() < 2) in.fail(rows.front().line + 1, 0, "missing '<name>,<fiscal label>' line");
  in.expect_fields(rows[1], 2, 2);

  Baseline b;
  b.name = rows[1].fields[0].value;
  b.id = b.name;
  b.fiscal_label = rows[1].fields[1].value;
  if (b.name.empty()) in.fail(rows[1].line, 1, "baseline name is empty");

  std::map<std::string, std::size_t> first_seen;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const Row& r = rows[i];
    in.expect_fields(r, 3, 4);
    const auto& name = r.fields[0];
    if (name.value.empty()) in.fail(r.line, name.column, "category name is empty");
    if (auto [it, fresh] = first_seen.emplace(name.value, r.line); !fresh) {
      in.fail(r.line, name.column,
              fmt::format("duplicate category '{}' (lines {} and {})", name.value, it->second, r.line));
    }
    Category c;
    c.id = name.value;
    c.name = name.value;
    const auto& kind = r.fields[1];
    if (kind.value == "revenue") c.kind = CategoryKind::Revenue;
    else if (kind.value == "expense") c.kind = CategoryKind::Expense;
    else in.fail(r.line, kind.column, fmt::format("unknown kind '{}' (expected revenue or expense)", kind.value));
    const Dollars amount = apply_sign(c.kind, in.amount(r, r.fields[2]));
    if (r.fields.size() == 4) c.description = r.fields[3].value;
    b.amounts.emplace(c.id, amount);
    b.categories.push_back(std::move(c));
  }
  return b;
}

std::string render_baseline(const Baseline& b) {
  b.validate();
  std::ostringstream out;
  out << kBaselineMagic << ',' << kFormatVersion << '\n';
  out << csv::join({b.name, b.fiscal_label}) << '\n';
  for (const auto& c : b.categories) {
    std::vector<std::string> row{c.name, to_string(c.kind), std::to_string(magnitude_of(b.amounts.at(c.id)))};
    if (!c.description.empty()) row.push_back(c.description);
    out << csv::join(row) << '\n';
  }
  return out.str();
}

std::vector<Proposal> parse_proposals(std::string_view text, const Baseline& baseline, std::string_view source) {
  Reader in(text, source);
  std::vector<Proposal> out;
  if (in.empty()) return out;
  in.expect_header(kProposalsMagic);
  const auto& rows = in.rows();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const Row& r = rows[i];
    in.expect_fields(r, 3, 4);
    const Category& c = lookup(in, baseline, r, r.fields[0]);
    Proposal p;
    p.id = fmt::format("p{}", i);
    p.category_id = c.id;
    p.target = apply_sign(c.kind, in.amount(r, r.fields[1]));
    p.rationale = r.fields[2].value;
    if (r.fields.size() == 4) p.author = r.fields[3].value;
    out.push_back(std::move(p));
  }
  return out;
}

std::string render_proposals(const std::vector<Proposal>& proposals, const Baseline& baseline) {
  std::ostringstream out;
  out << kProposalsMagic << ',' << kFormatVersion << '\n';
  for (const auto& p : proposals) {
    validate_proposal(p, baseline);
    std::vector<std::string> row{p.category_id, std::to_string(magnitude_of(p.target)), p.rationale};
    if (!p.author.empty()) row.push_back(p.author);
    out << csv::join(row) << '\n';
  }
  return out.str();
}

Budget parse_budget(std::string_view text, const Baseline& baseline, std::string_view source) {
  Reader in(text, source);
  in.expect_header(kBudgetMagic);
  const auto& rows = in.rows();
  if (rows.size() < 2) in.fail(rows.front().line + 1, 0, "missing '<owner>,<baseline name>' line");
  in.expect_fields(rows[1], 2, 2);

  Budget b;
  b.owner = rows[1].fields[0].value;
  b.id = b.owner;
  b.baseline_id = rows[1].fields[1].value;
  if (b.baseline_id != baseline.id) {
    in.fail(rows[1].line, rows[1].fields[1].column,
            fmt::format("budget is built on baseline '{}', not '{}'", b.baseline_id, baseline.id));
  }
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const Row& r = rows[i];
    in.expect_fields(r, 2, 2);
    const Category& c = lookup(in, baseline, r, r.fields[0]);
    Proposal p;
    p.id = fmt::format("{}/{}", b.owner, c.id);
    p.category_id = c.id;
    p.target = apply_sign(c.kind, in.amount(r, r.fields[1]));
    p.author = b.owner;
    if (!b.selections.emplace(c.id, std::move(p)).second) {
      in.fail(r.line, r.fields[0].column, fmt::format("category '{}' selected twice", c.id));
    }
  }
  return b;
}

std::string render_budget(const Budget& budget, const Baseline& baseline) {
  std::ostringstream out;
  out << kBudgetMagic << ',' << kFormatVersion << '\n';
  out << csv::join({budget.owner, budget.baseline_id}) << '\n';
  for (const auto& c : baseline.categories) {
    auto it = budget.selections.find(c.id);
    if (it == budget.selections.end()) continue;
    validate_proposal(it->second, baseline);
    out << csv::join({c.id, std::to_string(magnitude_of(it->second.target))}) << '\n';
  }
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace consensus
