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
#include "surfshape/registration.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/parallel.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace surfshape {

SimilarityTransform SimilarityTransform::inverse() const
{
    // y = β x Γ + γ  ⇒  x = (1/β) y Γᵀ − (1/β) γ Γᵀ
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.transpose();
    inv.translation = -(translation * rotation.transpose()) / scale;
    return inv;
}

Shape apply_similarity(const Shape& shape, const SimilarityTransform& t)
{
    Shape out = t.scale * (shape * t.rotation);
    out.rowwise() += t.translation;
    return out;
}

OpaResult weighted_opa(const Shape& source, const Shape& target, const Eigen::VectorXd& weights,
                       const OpaOptions& options)
{
    const Eigen::Index j = target.rows();
    if (source.rows() != j)
        throw ValidationError("weighted_opa: vertex count " + std::to_string(source.rows()) + " ≠ " +
                              std::to_string(j));
    if (weights.size() != j)
        throw ValidationError("weighted_opa: weight vector length does not match vertex count");
    if (!(weights.sum() > 0.0))
        throw NumericalError("weighted_opa: weights sum to zero");

    OpaResult out;
    if (source == target) {
        out.fitted = target;
        return out;
    }

    const Eigen::RowVector3d cx = weighted_centroid(source, weights);
    const Eigen::RowVector3d cy = weighted_centroid(target, weights);
    const Shape xc = source.rowwise() - cx;
    const Shape yc = target.rowwise() - cy;
    const Eigen::Matrix3d cross = xc.transpose() * weights.asDiagonal() * yc;

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d s = svd.singularValues();
    if (!(s[0] > 0.0) || s[1] <= 1e-12 * s[0])
        throw NumericalError("degenerate configuration");

    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    if (!options.allow_reflection && (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0)
        flip(2, 2) = -1.0;
    const Eigen::Matrix3d rotation = svd.matrixU() * flip * svd.matrixV().transpose();

    double scale = 1.0;
    if (options.allow_scaling) {
        const double ss_source = (xc.transpose() * weights.asDiagonal() * xc).trace();
        scale = (rotation.transpose() * cross).trace() / ss_source;
    }

    out.transform.scale = scale;
    out.transform.rotation = rotation;
    out.transform.translation = cy - scale * (cx * rotation);
    out.fitted = apply_similarity(source, out.transform);
    out.residual = weights.dot((target - out.fitted).rowwise().squaredNorm());
    return out;
}

double procrustes_distance(const Shape& a, const Shape& b, const Eigen::VectorXd& weights, bool allow_scaling)
{
    OpaOptions opts;
    opts.allow_scaling = allow_scaling;
    const auto fit = weighted_opa(a, b, weights, opts);
    return std::sqrt(std::max(0.0, fit.residual) / weights.sum());
}

namespace {

double fixed_override_area(const WeightOverrides& overrides)
{
    double fixed = 0.0;
    for (const auto& [v, w] : overrides)
        if (w)
            fixed += *w;
    return fixed;
}

// Centres `shape` on its own area-weighted centroid and rescales it so the
// trace of its area matrix equals `target_area`. Numeric overrides are fixed
// absolute areas and do not scale with the shape.
Shape normalize_size(const Shape& shape, const Triangles& triangles, const WeightOverrides& overrides,
                     double target_area)
{
    const AreaWeights a = vertex_areas(shape, triangles, overrides);
    const double fixed = fixed_override_area(overrides);
    const double scalable = a.total_area - fixed;
    if (!(scalable > 0.0) || !(target_area > fixed))
        throw NumericalError("size constraint cannot be met: fixed override area exceeds target area");
    const double factor = std::sqrt((target_area - fixed) / scalable);
    Shape out = shape.rowwise() - weighted_centroid(shape, a.weights);
    return factor * out;
}

Shape average(const std::vector<Shape>& shapes)
{
    Shape acc = Shape::Zero(shapes.front().rows(), 3);
    for (const auto& s : shapes)
        acc += s;
    return acc / static_cast<double>(shapes.size());
}

} // namespace

GpaResult weighted_gpa(const ShapeSample& sample, const GpaOptions& options)
{
    const std::size_t n = sample.size();
    if (n < 2)
        throw ValidationError("weighted_gpa needs at least 2 shapes, got " + std::to_string(n));
    if (options.max_iter < 1)
        throw ValidationError("weighted_gpa: max_iter must be at least 1");
    const Triangles& tri = sample.triangles;
    const WeightOverrides& ov = sample.weight_overrides;

    GpaResult result;
    result.target_area = options.size_constraint == SizeConstraint::unit_area
                             ? 1.0
                             : vertex_areas(sample.shapes.front(), tri, ov).total_area;
    const double objective_floor = 1e-26 * result.target_area * result.target_area;

    OpaOptions opa;
    opa.allow_scaling = options.allow_scaling;

    Shape mean = normalize_size(sample.shapes.front(), tri, ov, result.target_area);
    std::vector<OpaResult> fits(n);
    double previous = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        const Eigen::VectorXd a = vertex_areas(mean, tri, ov).weights;
        parallel_for(n, [&](std::size_t i) { fits[i] = weighted_opa(sample.shapes[i], mean, a, opa); });
        double objective = 0.0;
        for (const auto& f : fits)
            objective += f.residual;

        if (objective > previous) {
            // Rounding-level noise once the fit has settled; keep the last
            // accepted state so the trace stays monotone.
            result.converged = objective - previous <= 1e-8 * previous + objective_floor;
            break;
        }

        result.iterations = iter;
        result.objective_trace.push_back(objective);
        result.aligned.resize(n);
        result.transforms.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            result.aligned[i] = fits[i].fitted;
            result.transforms[i] = fits[i].transform;
        }

        if (objective <= objective_floor ||
            (std::isfinite(previous) && previous - objective <= options.tol * previous)) {
            result.converged = true;
            break;
        }
        previous = objective;
        mean = normalize_size(average(result.aligned), tri, ov, result.target_area);
    }

    // Common rescaling so the mean is exactly the average of the aligned
    // shapes and satisfies the size constraint.
    const Shape raw_mean = average(result.aligned);
    const double fixed = fixed_override_area(ov);
    const double scalable = vertex_areas(raw_mean, tri, ov).total_area - fixed;
    const double factor = std::sqrt((result.target_area - fixed) / scalable);
    for (std::size_t i = 0; i < n; ++i) {
        result.aligned[i] *= factor;
        result.transforms[i].scale *= factor;
        result.transforms[i].translation *= factor;
    }
    result.mean = average(result.aligned);
    result.mean_weights = vertex_areas(result.mean, tri, ov);
    return result;
}

Eigen::MatrixXd tangent_coordinates(const std::vector<Shape>& aligned, const Shape& mean)
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(aligned.size()), mean.size());
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        if (aligned[i].rows() != mean.rows())
            throw ValidationError("tangent_coordinates: shape " + std::to_string(i) +
                                  " is not in correspondence with the mean");
        out.row(static_cast<Eigen::Index>(i)) = vec(aligned[i] - mean).transpose();
    }
    return out;
}

} // namespace surfshape
