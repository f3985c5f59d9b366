#include "consensus/comments.hpp"

#include "consensus/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace consensus {

CommentMatrix::CommentMatrix(int grid_size) : grid_(grid_size) {
  if (grid_size < 1) throw ValidationError(fmt::format("comment grid size must be >= 1, got {}", grid_size));
  cells_.assign(static_cast<std::size_t>(grid_) * static_cast<std::size_t>(grid_), 0);
}

std::size_t CommentMatrix::at(int agreement_bin, int importance_bin) const {
  if (agreement_bin < 0 || agreement_bin >= grid_ || importance_bin < 0 || importance_bin >= grid_) {
    throw std::out_of_range("comment matrix cell out of range");
  }
  return cells_[static_cast<std::size_t>(agreement_bin) * static_cast<std::size_t>(grid_) +
                static_cast<std::size_t>(importance_bin)];
}

int CommentMatrix::bin_of(double value) const {
  if (!(value >= -1.0 && value <= 1.0)) {
    throw ValidationError(fmt::format("comment rating {} outside [-1, 1]", value));
  }
  const auto bin = static_cast<int>(std::floor((value + 1.0) / 2.0 * grid_));
  return bin >= grid_ ? grid_ - 1 : bin;
}

void CommentMatrix::add(const Comment& comment) {
  const int a = bin_of(comment.agreement);
  const int i = bin_of(comment.importance);
  ++cells_[static_cast<std::size_t>(a) * static_cast<std::size_t>(grid_) + static_cast<std::size_t>(i)];
  ++total_;
}

CommentMatrix aggregate_comments(std::span<const Comment> comments, int grid_size) {
  CommentMatrix matrix(grid_size);
  for (const auto& c : comments) matrix.add(c);
  return matrix;
}

}  // namespace consensus
