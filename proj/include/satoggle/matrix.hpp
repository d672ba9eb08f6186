#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "satoggle/bf16.hpp"

namespace satoggle {

// Dense row-major matrix of bf16 words.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Bf16 fill = Bf16{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  Bf16& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Bf16 operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<Bf16> values() { return data_; }
  std::span<const Bf16> values() const { return data_; }

  // Copy of rows [r0, r0+nr) x cols [c0, c0+nc).
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Bf16> data_;
};

}  // namespace satoggle
