#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace consensus {

struct Comment {
  std::string proposal_id;
  std::string text;
  double agreement = 0.0;   // -1 disagree .. +1 agree
  double importance = 0.0;  // -1 unimportant .. +1 important
  std::string author;
};

inline constexpr int kDefaultCommentGrid = 5;

/// Comment counts binned on the agreement x importance plane.
class CommentMatrix {
 public:
  explicit CommentMatrix(int grid_size);

  int grid_size() const { return grid_; }
  std::size_t at(int agreement_bin, int importance_bin) const;
  std::size_t total() const { return total_; }
  const std::vector<std::size_t>& cells() const { return cells_; }

  /// Bin of a value in [-1, 1]. Bins are [lo, hi) except the last, which
  /// is closed so that +1 lands in bin grid_size - 1.
  int bin_of(double value) const;

  void add(const Comment& comment);

 private:
  int grid_;
  std::vector<std::size_t> cells_;
  std::size_t total_ = 0;
};

/// Throws ValidationError for out-of-range or NaN ratings and for
/// grid_size < 1.
CommentMatrix aggregate_comments(std::span<const Comment> comments, int grid_size = kDefaultCommentGrid);

}  // namespace consensus
