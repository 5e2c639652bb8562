#pragma once

#include "seqfeat/features.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace seqfeat {

/// Built-in single-series feature calculators.
///
///   count       number of samples (i64; params {"dtype": "f64"} for a float output)
///   sum, mean   plain accumulation in input order
///   std, var    population (divide by n), two-pass
///   min, max    f64 output
///   median      middle order statistic, mean of the two middle ones for even n
///   quantile    params {"q": [0, 1]}; linear interpolation between order statistics
///   rms         sqrt(sum(x^2) / n)
///   abs_energy  sum(x^2)
///   skewness    Fisher-Pearson g1 = m3 / m2^1.5 (NaN for constant windows)
///   kurtosis    excess g2 = m4 / m2^2 - 3 (NaN for constant windows)
///   slope       least-squares slope of values against the index; time indices
///               are measured in seconds relative to the window's first sample
///   first, last output keeps the input tag (categorical included);
///               params {"dtype": "f64"} forces a float output
///   zero_cross  count of consecutive pairs with x[i-1] * x[i] < 0 (i64)
///
/// count, sum, abs_energy and zero_cross return 0 on an empty window; all
/// others throw, which the engine reports as FunctionFailure unless the
/// wrapper is made robust.
FuncWrapper builtin(std::string_view name, const Params& params = {});

const std::vector<std::string>& builtin_names();

/// Rebuilds a wrapper (robust wrapping included) from its serialized spec.
FuncWrapper from_spec(const FunctionSpec& spec);

} // namespace seqfeat
