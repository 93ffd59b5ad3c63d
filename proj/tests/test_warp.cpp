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
#include "surfshape/random.hpp"
#include "surfshape/warp.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace surfshape;

namespace {

Shape affine_image(const Shape& x, const Eigen::Matrix3d& m, const Eigen::RowVector3d& t)
{
    return (x * m).rowwise() + t;
}

} // namespace

TEST_CASE("kernel is the 3D thin-plate radial basis")
{
    CHECK(tps_kernel(1.0) == -1.0 / (8.0 * std::numbers::pi));
    CHECK(tps_kernel(0.0) == 0.0);
    CHECK(tps_kernel(2.0) == 2.0 * tps_kernel(1.0));
}

TEST_CASE("warp interpolates the control points")
{
    Rng rng(50);
    for (int trial = 0; trial < 5; ++trial) {
        const int j = 10 + 7 * trial;
        const Shape x = oracle::random_shape(rng, j);
        const Shape y = oracle::random_shape(rng, j);
        const WarpField f = fit_tps(x, y);
        CHECK((apply_warp(f, x) - y).cwiseAbs().maxCoeff() < 1e-9);
        CHECK(f.bending_energy > 0.0);
        CHECK(f.bending_energy == doctest::Approx(f.bending_by_coordinate.sum()));
        // side conditions: β₁ sums to zero and is orthogonal to the sources
        CHECK(f.nonaffine.colwise().sum().cwiseAbs().maxCoeff() < 1e-9);
        CHECK((x.transpose() * f.nonaffine).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("affine targets need no bending")
{
    Rng rng(51);
    const Shape x = oracle::random_shape(rng, 25);
    Eigen::Matrix3d m = Eigen::Matrix3d::Random() + 2.0 * Eigen::Matrix3d::Identity();
    const Eigen::RowVector3d t(1.0, -2.0, 0.5);
    const WarpField f = fit_tps(x, affine_image(x, m, t));
    CHECK(f.nonaffine.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(f.bending_energy) < 1e-8);
    CHECK((f.affine.row(0) - t).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((f.affine.bottomRows(3) - m).cwiseAbs().maxCoeff() < 1e-9);
    const Shape probe = oracle::random_shape(rng, 8);
    CHECK((apply_warp(f, probe) - affine_image(probe, m, t)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("bending energy and affine part agree with the closed forms")
{
    Rng rng(52);
    for (int trial = 0; trial < 4; ++trial) {
        const Shape x = oracle::random_shape(rng, 15 + 5 * trial);
        const Shape y = x + 0.2 * oracle::random_shape(rng, 15 + 5 * trial);
        const WarpField f = fit_tps(x, y);
        const Eigen::MatrixXd b = oracle::closed_form_bending_matrix(x);
        double expected = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double e = y.col(d).dot(b * y.col(d));
            CHECK(f.bending_by_coordinate[d] == doctest::Approx(e).epsilon(1e-8));
            expected += e;
        }
        CHECK(f.bending_energy == doctest::Approx(expected).epsilon(1e-8));
        const Eigen::MatrixXd affine = oracle::closed_form_affine(x, y);
        CHECK((f.affine - affine).cwiseAbs().maxCoeff() < 1e-8 * (1.0 + affine.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("template warp keeps the triangulation")
{
    Rng rng(53);
    const SurfaceMesh templ = oracle::octahedron();
    const Shape src = oracle::random_shape(rng, 12);
    const Shape tgt = src * 1.5;
    const SurfaceMesh w = warp_template(templ, src, tgt);
    CHECK(w.triangles == templ.triangles);
    CHECK((w.vertices - 1.5 * templ.vertices).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("degenerate control sets are rejected")
{
    Rng rng(54);
    Shape x = oracle::random_shape(rng, 10);
    const Shape y = oracle::random_shape(rng, 10);
    Shape dup = x;
    dup.row(4) = dup.row(7);
    CHECK_THROWS_AS(fit_tps(dup, y), NumericalError);

    Shape planar = x;
    planar.col(2).setConstant(3.0);
    CHECK_THROWS_AS(fit_tps(planar, y), NumericalError);

    CHECK_THROWS_AS(fit_tps(x.topRows(4), y.topRows(4)), ValidationError);
    CHECK_THROWS_AS(fit_tps(x, y.topRows(9)), ValidationError);

    TpsOptions ridge;
    ridge.ridge = 1e-3;
    const WarpField f = fit_tps(x, y, ridge);
    CHECK(f.nonaffine.allFinite());
}
