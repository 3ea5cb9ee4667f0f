#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ttp {

// Flattened block-time cell index: block * T + t.
using Cell = std::uint32_t;

// Nonnegative block-time multipliers, block-major.
class PriceMatrix {
public:
    PriceMatrix() = default;
    PriceMatrix(int blocks, int intervals, double fill = 0.0)
        : blocks_(blocks), intervals_(intervals),
          values_(static_cast<std::size_t>(blocks) * intervals, fill) {}

    int blocks() const { return blocks_; }
    int intervals() const { return intervals_; }
    std::size_t size() const { return values_.size(); }

    Cell cell(int block, int t) const { return static_cast<Cell>(block * intervals_ + t); }
    int block_of(Cell c) const { return static_cast<int>(c) / intervals_; }
    int time_of(Cell c) const { return static_cast<int>(c) % intervals_; }

    double operator()(int block, int t) const { return values_[cell(block, t)]; }
    double& operator()(int block, int t) { return values_[cell(block, t)]; }
    double operator[](Cell c) const { return values_[c]; }
    double& operator[](Cell c) { return values_[c]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    bool same_shape(const PriceMatrix& other) const {
        return blocks_ == other.blocks_ && intervals_ == other.intervals_;
    }
    bool nonnegative() const;
    std::size_t nonzeros() const;

    friend bool operator==(const PriceMatrix&, const PriceMatrix&) = default;

private:
    int blocks_ = 0;
    int intervals_ = 0;
    std::vector<double> values_;
};

// Sparse vector over cells with strictly increasing indices.
struct SparseVector {
    std::vector<Cell> index;
    std::vector<double> value;

    std::size_t nnz() const { return index.size(); }
    bool empty() const { return index.empty(); }
    double dot(std::span<const double> dense) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < index.size(); ++k) acc += value[k] * dense[index[k]];
        return acc;
    }
    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

}  // namespace ttp
