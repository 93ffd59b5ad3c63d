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
#include "oracles.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/fpca.hpp"
#include "surfshape/groupcompare.hpp"

#include <doctest.h>

#include <cmath>

using namespace surfshape;

namespace {

Eigen::MatrixXd random_scores(Rng& rng, int n, int p, double shift = 0.0)
{
    Eigen::MatrixXd s(n, p);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < p; ++l)
            s(i, l) = rng.normal() * (p - l) + (l == 0 ? shift : 0.0);
    return s;
}

std::vector<int> halves(int na, int nb)
{
    std::vector<int> g(static_cast<std::size_t>(na), 0);
    g.resize(static_cast<std::size_t>(na + nb), 1);
    return g;
}

} // namespace

TEST_CASE("hotelling T2 basics")
{
    Rng rng(31);
    Eigen::MatrixXd a = random_scores(rng, 10, 3);
    Eigen::MatrixXd b = random_scores(rng, 12, 3);
    b.rowwise() += a.colwise().mean() - b.colwise().mean();
    CHECK(hotelling_t2(a, b) < 1e-20);

    const Eigen::MatrixXd c = random_scores(rng, 9, 3, 2.0);
    const double t2 = hotelling_t2(a, c);
    CHECK(hotelling_t2(10.0 * a, 10.0 * c) == doctest::Approx(t2).epsilon(1e-12));

    const Eigen::MatrixXd a1 = a.col(0), c1 = c.col(0);
    const std::vector<double> va(a1.data(), a1.data() + a1.size()), vc(c1.data(), c1.data() + c1.size());
    const double t = oracle::pooled_t(va, vc);
    CHECK(hotelling_t2(a1, c1) == doctest::Approx(t * t).epsilon(1e-12));
}

TEST_CASE("component t matches the textbook pooled t and flips sign with the groups")
{
    Rng rng(32);
    const Eigen::MatrixXd a = random_scores(rng, 8, 4), b = random_scores(rng, 11, 4, 1.0);
    for (int l = 0; l < 4; ++l) {
        const Eigen::VectorXd ca = a.col(l), cb = b.col(l);
        const double ref = oracle::pooled_t({ca.data(), ca.data() + ca.size()}, {cb.data(), cb.data() + cb.size()});
        CHECK(component_t(a, b, l) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(component_t(b, a, l) == doctest::Approx(-ref).epsilon(1e-12));
    }
    Eigen::MatrixXd flat_a = a, flat_b = b;
    flat_a.col(2).setConstant(1.0);
    flat_b.col(2).setConstant(1.0);
    CHECK_THROWS_AS(component_t(flat_a, flat_b, 2), NumericalError);
}

TEST_CASE("singular pooled covariance is reported")
{
    Rng rng(33);
    Eigen::MatrixXd a = random_scores(rng, 6, 3), b = random_scores(rng, 6, 3);
    a.col(2) = 2.0 * a.col(1);
    b.col(2) = 2.0 * b.col(1);
    CHECK_THROWS_WITH_AS(hotelling_t2(a, b), "pooled covariance singular; reduce p", NumericalError);
}

TEST_CASE("tangent permutation test: p-values, Bonferroni set and determinism")
{
    Rng rng(34);
    Eigen::MatrixXd s(30, 4);
    s.topRows(15) = random_scores(rng, 15, 4, 12.0);
    s.bottomRows(15) = random_scores(rng, 15, 4);
    const std::vector<int> g = halves(15, 15);
    PermutationOptions o;
    o.p = 4;
    o.n_perm = 300;
    o.seed = 17;
    const GroupTestReport r = permutation_test_scores(s, g, o);

    const double t2 = hotelling_t2(select_rows(s, g, 0), select_rows(s, g, 1));
    CHECK(r.global_stat == doctest::Approx(std::sqrt(t2 / 4.0)).epsilon(1e-12));
    CHECK(r.bonferroni_alpha == doctest::Approx(0.05 / 4.0));
    int count = 0;
    for (Eigen::Index i = 0; i < r.permuted_global.size(); ++i)
        count += r.permuted_global[i] >= r.global_stat * (1.0 - 1e-12);
    CHECK(r.global_p == doctest::Approx((1.0 + count) / 301.0));
    for (int l = 0; l < 4; ++l) {
        CHECK(r.component_p[l] > 0.0);
        CHECK(r.component_p[l] <= 1.0);
        CHECK(r.component_stats[l] == doctest::Approx(std::abs(r.signed_component_t[l])));
        const bool flagged = std::find(r.significant.begin(), r.significant.end(), l + 1) != r.significant.end();
        CHECK(flagged == (r.component_p[l] < r.bonferroni_alpha));
    }
    CHECK(r.global_p == doctest::Approx(1.0 / 301.0));
    REQUIRE_FALSE(r.significant.empty());
    CHECK(r.significant.front() == 1);

    const GroupTestReport again = permutation_test_scores(s, g, o);
    CHECK(again.permuted_global == r.permuted_global);
    CHECK(again.permuted_components == r.permuted_components);

    Eigen::MatrixXd flipped = s;
    flipped.col(2) *= -1.0;
    const GroupTestReport f = permutation_test_scores(flipped, g, o);
    CHECK(f.global_stat == doctest::Approx(r.global_stat).epsilon(1e-12));

    o.n_perm = 0;
    CHECK_THROWS_AS(permutation_test_scores(s, g, o), ValidationError);
}

TEST_CASE("group-space statistic equals the explicit pooled-covariance computation")
{
    Rng rng(35);
    const int n = 16, j = 12;
    Eigen::MatrixXd tangent(n, 3 * j);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < 3 * j; ++c)
            tangent(i, c) = rng.normal() * (1.0 + (c % 5)) + (i < 7 && c % 3 == 0 ? 0.8 : 0.0);
    const Eigen::VectorXd w = oracle::random_weights(rng, j);
    const std::vector<int> g = halves(7, 9);
    for (int p : {1, 3, 6}) {
        const GroupSpaceStatistic s = group_space_statistic(tangent, w, g, p);
        const oracle::GroupSpaceOracle ref = oracle::explicit_group_space(tangent, w, g, p);
        CHECK(s.t2 == doctest::Approx(ref.t2).epsilon(1e-8));
        CHECK(s.t2 == doctest::Approx(s.t.squaredNorm()).epsilon(1e-12));
        for (int k = 0; k < p; ++k) {
            CHECK(std::abs(std::abs(s.t[k]) - std::abs(ref.t[k])) < 1e-8 * std::max(1.0, std::abs(ref.t[k])));
            CHECK(s.eigenvalues[k] == doctest::Approx(ref.eigenvalues[k]).epsilon(1e-9));
        }
        const Eigen::MatrixXd gram = s.directions.transpose() * slot_weights(w).asDiagonal() * s.directions;
        CHECK((gram - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-9);
    }
    PermutationOptions o;
    o.p = 3;
    o.n_perm = 50;
    const GroupTestReport r = permutation_test_group_space(tangent, w, g, o);
    const GroupSpaceStatistic s = group_space_statistic(tangent, w, g, 3);
    CHECK(r.global_stat == doctest::Approx(std::sqrt(s.t2 / 3.0)).epsilon(1e-10));
    CHECK(r.mode == PermutationMode::group_shape_space);
    CHECK(r.eigenvalues.size() == 3);
}

TEST_CASE("sign alignment puts the reference group mean on top and is idempotent")
{
    Rng rng(36);
    const int j = 6;
    Eigen::MatrixXd tangent(12, 3 * j);
    for (int i = 0; i < 12; ++i)
        for (int c = 0; c < 3 * j; ++c)
            tangent(i, c) = rng.normal() + (i < 6 ? 0.5 * std::cos(c) : 0.0);
    tangent.rowwise() -= tangent.colwise().mean();
    AreaWeights w{Eigen::VectorXd::Ones(j), double(j)};
    FpcaModel m = fit_fpca(oracle::random_shape(rng, j), tangent, w, ComponentRule::fixed(5));
    Eigen::MatrixXd s = scores_from_tangent(m, tangent);
    const std::vector<int> g = halves(6, 6);
    align_component_signs(m, s, g, 1);
    const Eigen::RowVectorXd ma = select_rows(s, g, 0).colwise().mean(), mb = select_rows(s, g, 1).colwise().mean();
    for (int k = 0; k < 5; ++k)
        CHECK(mb[k] >= ma[k]);
    CHECK((scores_from_tangent(m, tangent) - s).cwiseAbs().maxCoeff() < 1e-12);
    const FpcaModel before = m;
    const Eigen::MatrixXd sb = s;
    align_component_signs(m, s, g, 1);
    CHECK(m.eigenfunctions == before.eigenfunctions);
    CHECK(s == sb);
}

TEST_CASE("combined effect shapes")
{
    Rng rng(37);
    const int j = 8;
    Eigen::MatrixXd tangent(10, 3 * j);
    for (int i = 0; i < 10; ++i)
        for (int c = 0; c < 3 * j; ++c)
            tangent(i, c) = rng.normal() * (1 + c % 4);
    AreaWeights w{oracle::random_weights(rng, j), 0.0};
    w.total_area = w.weights.sum();
    const FpcaModel m = fit_fpca(oracle::random_shape(rng, j), tangent, w, ComponentRule::fixed(5));

    const SubspaceEffect one = combined_effect_shape(m, {2}, 2.0);
    CHECK((one.plus_shape - component_shape(m, 2, 2.0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((one.minus_shape - component_shape(m, 2, -2.0)).cwiseAbs().maxCoeff() < 1e-12);

    const std::vector<int> sig{1, 3, 5};
    const SubspaceEffect e = combined_effect_shape(m, sig, 2.0);
    const double expected = 2.0 * std::sqrt((m.eigenvalues[0] + m.eigenvalues[2] + m.eigenvalues[4]) / 3.0);
    CHECK(a_norm(vec(e.plus_shape - m.mean), w.weights) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(((e.plus_shape + e.minus_shape) / 2.0 - m.mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(combined_effect_shape(m, {}, 2.0), ValidationError);
    CHECK_THROWS_AS(combined_effect_shape(m, {6}, 2.0), ValidationError);
}

TEST_CASE("affine split: orthogonality, decomposition identity and pure cases")
{
    Rng rng(38);
    const Shape mean = oracle::random_shape(rng, 40);
    std::vector<Shape> shapes;
    for (int i = 0; i < 5; ++i) {
        Shape x = mean;
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            for (int d = 0; d < 3; ++d)
                x(r, d) += rng.normal();
        shapes.push_back(x);
    }
    Eigen::Matrix3d m;
    m << 1.1, 0.2, -0.1, 0.05, 0.9, 0.3, 0.0, -0.2, 1.2;
    shapes.push_back(mean * m);
    const Eigen::MatrixXd proj = mean * (mean.transpose() * mean).inverse() * mean.transpose();
    const Shape noise = oracle::random_shape(rng, 40);
    const Shape e = noise - proj * noise;
    shapes.push_back(mean + e);

    const AffineSplit s = affine_nonaffine_split(shapes, mean);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        CHECK((mean.transpose() * (shapes[i] - s.affine[i])).cwiseAbs().maxCoeff() < 1e-10 * shapes[i].squaredNorm());
        CHECK((s.affine[i] + s.non_affine[i] - mean - shapes[i]).cwiseAbs().maxCoeff() < 1e-12 * 100);
    }
    CHECK((s.coefficients[5] - m).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.non_affine[5] - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.coefficients[6] - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.affine[6] - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s.non_affine[6] - shapes[6]).cwiseAbs().maxCoeff() < 1e-10);

    Shape planar = mean;
    planar.col(2).setZero();
    CHECK_THROWS_AS(affine_nonaffine_split(shapes, planar), NumericalError);
}

TEST_CASE("group split follows sorted label order unless a reference is named")
{
    const std::vector<std::string> labels{"m", "f", "m", "f", "f"};
    const GroupSplit s = split_groups(labels);
    CHECK(s.name_a == "f");
    CHECK(s.group == std::vector<int>{1, 0, 1, 0, 0});
    const GroupSplit r = split_groups(labels, "m");
    CHECK(r.name_a == "m");
    CHECK(r.name_b == "f");
    CHECK_THROWS_AS(split_groups({"a", "b", "c"}), ValidationError);
    CHECK_THROWS_AS(split_groups(labels, "x"), ValidationError);
}
