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
#include "surfshape/stats.hpp"

#include "surfshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace surfshape {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Series expansion, converges quickly for x < a + 1.
double gamma_p_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), for x >= a + 1.
double gamma_q_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps)
            break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double regularized_gamma_p(double a, double x)
{
    if (!(a > 0.0))
        throw ValidationError("regularized_gamma_p: shape must be positive");
    if (x <= 0.0)
        return 0.0;
    if (x < a + 1.0)
        return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double chi2_quantile(double prob, double dof)
{
    if (!(prob > 0.0 && prob < 1.0))
        throw ValidationError("chi2_quantile: probability must lie in (0, 1)");
    if (!(dof > 0.0))
        throw ValidationError("chi2_quantile: degrees of freedom must be positive");
    const double a = 0.5 * dof;

    // Bracket the root of P(a, x) = prob, then Newton steps kept inside the
    // bracket with bisection as the fallback.
    double lo = 0.0;
    double hi = std::max(1.0, a);
    while (regularized_gamma_p(a, hi) < prob)
        hi *= 2.0;
    double x = 0.5 * (lo + hi);
    const double log_norm = std::lgamma(a);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = regularized_gamma_p(a, x) - prob;
        if (f == 0.0)
            break;
        if (f < 0.0)
            lo = x;
        else
            hi = x;
        const double density = std::exp((a - 1.0) * std::log(x) - x - log_norm);
        double next = density > 0.0 ? x - f / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * kEps * x) {
            x = next;
            break;
        }
        x = next;
    }
    return 2.0 * x;
}

double quantile(std::span<const double> values, double prob)
{
    if (values.empty())
        throw ValidationError("quantile of an empty set");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double percentile_rank(std::span<const double> reference, double value)
{
    if (reference.empty())
        throw ValidationError("percentile of an empty reference set");
    std::vector<double> sorted(reference.begin(), reference.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    if (m == 1)
        return value < sorted[0] ? 0.0 : 100.0;
    if (value <= sorted.front())
        return 0.0;
    if (value >= sorted.back())
        return 100.0;
    const auto upper = std::upper_bound(sorted.begin(), sorted.end(), value);
    const auto i = static_cast<std::size_t>(upper - sorted.begin()) - 1;
    const double gap = sorted[i + 1] - sorted[i];
    const double frac = gap > 0.0 ? (value - sorted[i]) / gap : 0.0;
    return 100.0 * (static_cast<double>(i) + frac) / static_cast<double>(m - 1);
}

double sample_variance(std::span<const double> values)
{
    const auto n = static_cast<double>(values.size());
    if (values.size() < 2)
        return 0.0;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    return ss / (n - 1.0);
}

} // namespace surfshape
