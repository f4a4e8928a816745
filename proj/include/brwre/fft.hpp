#pragma once

#include <cstddef>
#include <vector>

namespace brwre {

// out[j] = sum_i a[i] * kernel[(i - j) - lag_lo] for j in [0, out_size),
// where kernel covers lags [lag_lo, lag_lo + kernel.size()). Uses an FFT once
// the direct cost is large; small problems are summed directly.
std::vector<double> correlate(const std::vector<double>& a,
                              const std::vector<double>& kernel, long lag_lo,
                              std::size_t out_size);

// Linear convolution, full length a.size() + b.size() - 1.
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace brwre
