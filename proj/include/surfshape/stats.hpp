/*
 * surfshape - functional shape analysis for corresponded triangulated surfaces.
 *
 * Copyright 2026 The surfshape Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <span>
#include <vector>

namespace surfshape {

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// Quantile of the χ² distribution with `dof` degrees of freedom.
double chi2_quantile(double prob, double dof);

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `values` need not be sorted.
double quantile(std::span<const double> values, double prob);

/// Inverse of quantile(): the percentile in [0, 100] at which `value` sits in
/// the empirical distribution of `reference`, interpolating linearly between
/// order statistics and clamping outside the observed range.
double percentile_rank(std::span<const double> reference, double value);

double sample_variance(std::span<const double> values);

} // namespace surfshape
