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
#include "surfshape/errors.hpp"
#include "surfshape/parallel.hpp"
#include "surfshape/random.hpp"
#include "surfshape/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <vector>

using namespace surfshape;

TEST_CASE("chi-square 95% quantiles match an independent implementation")
{
    for (int p = 1; p <= 30; ++p) {
        const double expected = boost::math::quantile(boost::math::chi_squared(p), 0.95);
        CHECK(std::abs(chi2_quantile(0.95, p) - expected) < 1e-8);
    }
    for (double prob : {0.01, 0.5, 0.9, 0.999})
        for (double dof : {0.5, 2.0, 7.5, 60.0}) {
            const double expected = boost::math::quantile(boost::math::chi_squared(dof), prob);
            CHECK(chi2_quantile(prob, dof) == doctest::Approx(expected).epsilon(1e-9));
        }
    CHECK_THROWS_AS(chi2_quantile(1.0, 3), ValidationError);
    CHECK_THROWS_AS(chi2_quantile(0.5, 0), ValidationError);
}

TEST_CASE("regularized lower incomplete gamma")
{
    for (double a : {0.5, 1.0, 3.0, 12.5, 40.0})
        for (double x : {0.01, 0.7, 3.0, 15.0, 80.0})
            CHECK(regularized_gamma_p(a, x) == doctest::Approx(boost::math::gamma_p(a, x)).epsilon(1e-12));
    CHECK(regularized_gamma_p(2.0, 0.0) == 0.0);
}

TEST_CASE("quantile uses linear interpolation between order statistics")
{
    const std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 5.0);
    CHECK(quantile(v, 0.5) == 3.0);
    CHECK(quantile(v, 0.95) == doctest::Approx(4.8));
    CHECK(quantile(v, 0.1) == doctest::Approx(1.4));
    CHECK_THROWS_AS(quantile(std::vector<double>{}, 0.5), ValidationError);

    // property: for random samples, at most a fraction 1 − prob lies above
    Rng rng(70);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> s(10 + rng.index(90));
        for (auto& x : s)
            x = rng.normal();
        const double q = quantile(s, 0.95);
        std::size_t above = 0;
        for (double x : s)
            above += x > q;
        CHECK(static_cast<double>(above) <= 0.05 * static_cast<double>(s.size()) + 1.0);
    }
}

TEST_CASE("percentile rank")
{
    const std::vector<double> ref{1, 2, 3, 4, 5};
    CHECK(percentile_rank(ref, 0.0) == 0.0);
    CHECK(percentile_rank(ref, 9.0) == 100.0);
    CHECK(percentile_rank(ref, 3.0) == doctest::Approx(50.0));
    CHECK(percentile_rank(ref, 2.5) == doctest::Approx(37.5));
    // inverse of quantile inside the range
    for (double p : {0.1, 0.33, 0.8})
        CHECK(percentile_rank(ref, quantile(ref, p)) == doctest::Approx(100.0 * p));
}

TEST_CASE("sample variance")
{
    CHECK(sample_variance(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(32.0 / 7.0));
    CHECK(sample_variance(std::vector<double>{3}) == 0.0);
}

TEST_CASE("random streams are reproducible and well formed")
{
    Rng a(123);
    Rng b(123);
    std::mt19937_64 raw(123);
    CHECK(a.next_u64() == raw());
    b.next_u64();
    for (int i = 0; i < 100; ++i)
        CHECK(a.normal() == b.normal());

    Rng r(5);
    double sum = 0.0;
    double sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);

    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        const auto k = r.index(7);
        REQUIRE(k < 7);
        ++counts[k];
    }
    for (int c : counts)
        CHECK(std::abs(c - 1000) < 150);

    std::vector<int> perm{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    r.shuffle(perm);
    std::vector<int> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("parallel_for visits every index once")
{
    for (std::size_t n : {0u, 1u, 7u, 1000u}) {
        std::vector<std::atomic<int>> hits(n);
        parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
        for (std::size_t i = 0; i < n; ++i)
            CHECK(hits[i].load() == 1);
    }
    CHECK(thread_count() >= 1);
}
