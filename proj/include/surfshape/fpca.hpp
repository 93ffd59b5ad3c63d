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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace surfshape {

/// How many components to keep: an explicit count, or the smallest K whose
/// cumulative explained-variance fraction reaches `variance_fraction`.
struct ComponentRule
{
    std::optional<int> count;
    double variance_fraction = 0.80;

    static ComponentRule fixed(int k) { return {k, 0.0}; }
    static ComponentRule fraction(double f) { return {std::nullopt, f}; }
};

/// Principal components under the area-weighted inner product
/// ⟨u, v⟩_A = Σ_j a_j (u_j · v_j).
struct FpcaModel
{
    Shape mean;
    AreaWeights weights;
    Eigen::MatrixXd eigenfunctions; // 3J × K, A-orthonormal columns
    Eigen::VectorXd eigenvalues;    // K, non-increasing
    Eigen::VectorXd explained;      // K, cumulative fraction of total variance
    double total_variance = 0.0;
    int n_samples = 0;
    int rank = 0;
    Triangles triangles; // optional; lets reconstructions be written as meshes
    std::vector<std::string> warnings;

    int components() const { return static_cast<int>(eigenvalues.size()); }
    Eigen::Index vertex_count() const { return mean.rows(); }
};

/// Fits the model to tangent rows vec(X_i − mean).
///
/// Each coordinate slot of vertex j is scaled by √a_j, a thin SVD of the
/// centred scaled data gives the principal directions, and the directions are
/// unscaled by 1/√a_j so they are A-orthonormal. Eigenvalues use the n − 1
/// divisor. If the rows are not centred, their average is folded into the
/// model mean. Each eigenfunction is signed so its largest-magnitude entry
/// is positive. A request above the numerical rank is truncated and noted in
/// `warnings`.
FpcaModel fit_fpca(const Shape& mean, const Eigen::MatrixXd& tangent, const AreaWeights& weights,
                   const ComponentRule& rule = {});

/// Smallest K with cumulative[K-1] >= threshold (1-based count).
int components_for_fraction(const Eigen::VectorXd& cumulative, double threshold);

/// score_k = ⟨vec(shape − mean), e_k⟩_A.
Eigen::VectorXd scores(const FpcaModel& model, const Shape& shape);

/// Scores of every row of a tangent matrix (n × K).
Eigen::MatrixXd scores_from_tangent(const FpcaModel& model, const Eigen::MatrixXd& tangent);

/// mean + vec⁻¹(Σ_k s_k e_k); s may be shorter than K.
Shape reconstruct(const FpcaModel& model, const Eigen::VectorXd& s);

/// mean + c √λ_k vec⁻¹(e_k), k 1-based.
Shape component_shape(const FpcaModel& model, int k, double c);

struct GrandTour
{
    std::vector<Eigen::VectorXd> stops_z;  // standard-normal draws, length p
    std::vector<Shape> frames;
    std::vector<Eigen::VectorXd> frame_scores;
    std::vector<int> stop_frames;          // frame index of each stop
};

/// Tour through the first p components visiting the given z-vectors:
/// stop shapes are mean + vec⁻¹(Σ_k z_k √λ_k e_k), with frames_per_leg
/// linearly interpolated frames between consecutive stops.
GrandTour grand_tour_through(const FpcaModel& model, const std::vector<Eigen::VectorXd>& stops_z,
                             int frames_per_leg);

/// As grand_tour_through, with n_stops z-vectors drawn from Rng(seed).
GrandTour grand_tour(const FpcaModel& model, int p, int n_stops, std::uint64_t seed, int frames_per_leg);

/// Value stored where the per-vertex covariance is singular.
inline constexpr double kSingularLogDet = -1.0e300;

/// log|det Σ̂_j| of the per-vertex 3×3 covariance (n − 1 divisor) across the
/// aligned shapes. Singular covariances map to kSingularLogDet.
Eigen::VectorXd variability_map(const std::vector<Shape>& aligned);

} // namespace surfshape
