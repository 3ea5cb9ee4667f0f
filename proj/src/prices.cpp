#include "ttp/prices.hpp"

#include <algorithm>

namespace ttp {

bool PriceMatrix::nonnegative() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

std::size_t PriceMatrix::nonzeros() const {
    return static_cast<std::size_t>(
        std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

}  // namespace ttp
