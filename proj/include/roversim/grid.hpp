#pragma once

#include <cstddef>
#include <vector>

namespace roversim {

// Dense row-major 2-D array; row indexes y, column indexes x.
template <typename T>
class Grid2D {
public:
  Grid2D() = default;
  Grid2D(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  decltype(auto) operator()(std::size_t row, std::size_t col) { return data_[row * cols_ + col]; }
  decltype(auto) operator()(std::size_t row, std::size_t col) const { return data_[row * cols_ + col]; }

  bool contains(long row, long col) const {
    return row >= 0 && col >= 0 && static_cast<std::size_t>(row) < rows_ &&
           static_cast<std::size_t>(col) < cols_;
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Grid2D&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace roversim
