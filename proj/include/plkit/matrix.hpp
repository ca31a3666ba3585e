#pragma once

#include <cstddef>
#include <vector>

namespace plkit {

// Dense row-major matrix of doubles. Just enough linear algebra plumbing
// for proposal logits and the attention FC layer.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  const double* row(std::size_t i) const { return data.data() + i * cols; }

  bool operator==(const Matrix&) const = default;
};

}  // namespace plkit
