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
#include "surfshape/warp.hpp"

#include "surfshape/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace surfshape {

double tps_kernel(double z)
{
    return -z / (8.0 * std::numbers::pi);
}

WarpField fit_tps(const Shape& source, const Shape& target, const TpsOptions& options)
{
    const Eigen::Index j = source.rows();
    if (target.rows() != j)
        throw ValidationError("fit_tps: source has " + std::to_string(j) + " points, target " +
                              std::to_string(target.rows()));
    if (j < 5)
        throw ValidationError("fit_tps needs at least 5 control points, got " + std::to_string(j));
    if (!source.allFinite() || !target.allFinite())
        throw ValidationError("fit_tps: non-finite coordinates");

    Eigen::MatrixXd s(j, j);
    for (Eigen::Index a = 0; a < j; ++a) {
        s(a, a) = tps_kernel(0.0) + options.ridge;
        for (Eigen::Index b = a + 1; b < j; ++b) {
            const double dist = (source.row(a) - source.row(b)).norm();
            if (dist < options.duplicate_tolerance)
                throw NumericalError("fit_tps: source points " + std::to_string(a) + " and " + std::to_string(b) +
                                     " coincide; system is singular");
            s(a, b) = s(b, a) = tps_kernel(dist);
        }
    }

    const Shape centred = source.rowwise() - source.colwise().mean();
    Eigen::JacobiSVD<Eigen::MatrixXd> q_svd(centred);
    const Eigen::Vector3d sv = q_svd.singularValues();
    if (!(sv[0] > 0.0) || sv[2] <= 1e-10 * sv[0])
        throw NumericalError("fit_tps: source points are coplanar; Q = (1 X) is rank deficient");

    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(j + 4, j + 4);
    system.topLeftCorner(j, j) = s;
    system.block(0, j, j, 1).setOnes();
    system.block(0, j + 1, j, 3) = source;
    system.block(j, 0, 4, j) = system.block(0, j, j, 4).transpose();

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(j + 4, 3);
    rhs.topRows(j) = target;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    const Eigen::MatrixXd solution = lu.solve(rhs);
    if (!solution.allFinite())
        throw NumericalError("fit_tps: singular extended system");

    WarpField field;
    field.control_points = source;
    field.nonaffine = solution.topRows(j);
    field.affine = solution.bottomRows(4);
    for (int d = 0; d < 3; ++d)
        field.bending_by_coordinate[d] = target.col(d).dot(field.nonaffine.col(d));
    field.bending_energy = field.bending_by_coordinate.sum();
    return field;
}

Shape apply_warp(const WarpField& field, const Shape& points)
{
    const Eigen::Index j = field.control_points.rows();
    Shape out(points.rows(), 3);
    for (Eigen::Index m = 0; m < points.rows(); ++m) {
        Eigen::RowVector3d y = field.affine.row(0) + points.row(m) * field.affine.bottomRows(3);
        for (Eigen::Index k = 0; k < j; ++k)
            y += tps_kernel((points.row(m) - field.control_points.row(k)).norm()) * field.nonaffine.row(k);
        out.row(m) = y;
    }
    return out;
}

SurfaceMesh warp_template(const SurfaceMesh& templ, const Shape& model_source, const Shape& model_target,
                          const TpsOptions& options)
{
    const WarpField field = fit_tps(model_source, model_target, options);
    SurfaceMesh out = templ;
    out.vertices = apply_warp(field, templ.vertices);
    return out;
}

} // namespace surfshape
