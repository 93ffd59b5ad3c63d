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

#include <vector>

namespace surfshape {

/// x ↦ β·x·Γ + γᵀ acting on row-vector coordinates.
struct SimilarityTransform
{
    double scale = 1.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::RowVector3d translation = Eigen::RowVector3d::Zero();

    static SimilarityTransform identity() { return {}; }
    SimilarityTransform inverse() const;
};

Shape apply_similarity(const Shape& shape, const SimilarityTransform& t);

struct OpaOptions
{
    bool allow_scaling = true;
    bool allow_reflection = false;
};

struct OpaResult
{
    SimilarityTransform transform;
    Shape fitted;            // β·source·Γ + 1γᵀ, in the target frame
    double residual = 0.0;   // Σ_j a_j ‖y_j − fitted_j‖²
};

/// Weighted ordinary Procrustes fit of `source` onto `target`, minimising
/// Σ_j a_j ‖y_j − β Γᵀ x_j − γ‖² with a_j taken from `weights` (normally the
/// area weights of the target surface).
///
/// Both shapes are centred on their a-weighted centroids, Γ = UVᵀ from the
/// SVD Xᵀ A Y = U S Vᵀ (last singular pair flipped when a proper rotation is
/// required), and β = tr{Γᵀ Xᵀ A Y} / tr{Xᵀ A X}. The reported γ folds both
/// centring translations in, so apply_similarity(source, transform) ==
/// fitted.
///
/// Throws NumericalError("degenerate configuration") when Xᵀ A Y has rank
/// below 2 (collinear or coincident points).
OpaResult weighted_opa(const Shape& source, const Shape& target, const Eigen::VectorXd& weights,
                       const OpaOptions& options = {});

/// sqrt(residual / Σ a) of the full (scaled) weighted fit of `a` onto `b`.
double procrustes_distance(const Shape& a, const Shape& b, const Eigen::VectorXd& weights,
                           bool allow_scaling = true);

enum class SizeConstraint
{
    unit_area,         // mean rescaled to surface area 1 every iteration
    initial_mean_area  // mean keeps the surface area of the initial mean
};

struct GpaOptions
{
    int max_iter = 100;
    double tol = 1e-10;
    SizeConstraint size_constraint = SizeConstraint::unit_area;
    bool allow_scaling = true;
};

struct GpaResult
{
    Shape mean;
    std::vector<Shape> aligned;
    std::vector<SimilarityTransform> transforms;
    AreaWeights mean_weights;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
    double target_area = 0.0;
};

/// Generalized weighted Procrustes alignment.
///
/// Starting from the first shape (centred, rescaled to the size constraint),
/// each iteration recomputes the area weights from the current mean, fits
/// every shape onto the mean with weighted_opa, records the summed residual
/// and re-estimates the mean as the average of the fitted shapes, centred
/// and rescaled to the size constraint. Iteration stops when the relative
/// objective change drops below tol, the objective vanishes, or an update
/// would increase the objective (the previous state is kept); reaching
/// max_iter leaves converged = false.
///
/// On exit the aligned shapes share one common rescaling so that `mean` is
/// exactly their average and has the constrained surface area.
GpaResult weighted_gpa(const ShapeSample& sample, const GpaOptions& options = {});

/// Rows are vec(X_i − mean), one per shape (n × 3J).
Eigen::MatrixXd tangent_coordinates(const std::vector<Shape>& aligned, const Shape& mean);

} // namespace surfshape
