#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lddr {

// Stage/product indices are 1-based everywhere in this library (t in [1..T],
// j in [1..J]); flat storage is row-major.
class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

    double& operator()(int r, int c) {
        assert(r >= 1 && r <= rows_ && c >= 1 && c <= cols_);
        return data_[static_cast<size_t>(r - 1) * cols_ + (c - 1)];
    }
    double operator()(int r, int c) const {
        assert(r >= 1 && r <= rows_ && c >= 1 && c <= cols_);
        return data_[static_cast<size_t>(r - 1) * cols_ + (c - 1)];
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const Matrix&) const = default;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnvironmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kIntegralityTol = 1e-5;
inline constexpr double kInfinity = 1e30;

}  // namespace lddr
