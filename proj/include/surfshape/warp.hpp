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

#include "surfshape/mesh.hpp"
#include "surfshape/shape.hpp"

#include <Eigen/Core>

namespace surfshape {

/// Radial basis of the 3D thin-plate spline: φ(z) = −z / (8π).
double tps_kernel(double z);

/// Exact interpolating warp y(x) = Σ_j φ(‖x − x_j‖) β₁_j + (1, xᵀ) β₂.
struct WarpField
{
    Shape control_points;                // J × 3 source X
    Eigen::MatrixXd nonaffine;           // β₁, J × 3
    Eigen::Matrix<double, 4, 3> affine;  // β₂: row 0 translation, rows 1..3 linear part
    double bending_energy = 0.0;         // tr{Yᵀ β₁}
    Eigen::Vector3d bending_by_coordinate = Eigen::Vector3d::Zero();
};

struct TpsOptions
{
    double ridge = 0.0; // added to S's diagonal for ill-conditioned inputs
    double duplicate_tolerance = 1e-9;
};

/// Solves the (J+4)×(J+4) system [S Q; Qᵀ 0][β₁; β₂] = [Y; 0], Q = (1 X),
/// by dense LU. Requires J ≥ 5, no two sources closer than
/// duplicate_tolerance and sources not all coplanar.
WarpField fit_tps(const Shape& source, const Shape& target, const TpsOptions& options = {});

Shape apply_warp(const WarpField& field, const Shape& points);

/// Warps every template vertex by the TPS taking model_source to
/// model_target; the triangulation is unchanged.
SurfaceMesh warp_template(const SurfaceMesh& templ, const Shape& model_source, const Shape& model_target,
                          const TpsOptions& options = {});

} // namespace surfshape
