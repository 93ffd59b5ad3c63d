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

#include "surfshape/fpca.hpp"
#include "surfshape/mesh.hpp"
#include "surfshape/registration.hpp"

#include <Eigen/Core>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace surfshape {

/// Reflects through the pairing's plane (through the origin) and relabels
/// vertex j with the reflected position of its mirror partner.
Shape reflect_relabel(const Shape& shape, const BilateralPairing& pairing);

struct AsymmetryOptions
{
    bool allow_scaling = true;
    /// Re-run the Procrustes match with weights restricted to each region
    /// instead of reusing the global match.
    bool per_region_registration = false;
};

struct AsymmetryReport
{
    double global_score = 0.0;                 // mm
    std::map<std::string, double> region_scores;
    Shape matched_reflection;                  // X̃
    Eigen::VectorXd per_vertex_distance;       // ‖X_j − X̃_j‖
    std::map<std::string, double> control_percentiles; // "global" plus regions, when a reference exists
};

/// Root area-weighted mean squared distance between a shape and its matched
/// reflection: X̃ is the weighted Procrustes fit of reflect_relabel(X) onto
/// X, the weights a_j come from the surface (X + X̃)/2, and the sum runs over
/// `region` (all vertices when empty).
double asymmetry_score(const Shape& shape, const Shape& matched, const Triangles& triangles,
                       std::span<const int> region = {});

AsymmetryReport assess_asymmetry(const Shape& shape, const Triangles& triangles,
                                 const BilateralPairing& pairing, const RegionMap& regions = {},
                                 const AsymmetryOptions& options = {});

/// Control-population reference for individual assessment.
struct ControlModel
{
    FpcaModel fpca;
    int p = 0;
    double variance_threshold = 0.80;
    double chi2_threshold = 0.0;  // χ²_p(0.95)
    Eigen::VectorXd nu;           // per-vertex sd of control residual lengths
    double q95 = 0.0;             // 95th percentile of control residual scores
    Eigen::VectorXd control_d;
    Eigen::VectorXd control_r;
    bool allow_scaling = true;
    std::map<std::string, std::vector<double>> asymmetry_reference; // "global" + regions
    std::vector<std::string> warnings;
};

struct ControlModelOptions
{
    double variance_threshold = 0.80;
    GpaOptions gpa{};
    double coverage = 0.95;
};

/// GPA-aligns the controls, fits the functional PCA, keeps the smallest p
/// reaching the variance threshold and records the control Mahalanobis
/// distances, residual scores, ν and q95. When the sample carries a pairing,
/// the controls' asymmetry scores (global and per region) are kept as the
/// reference distribution for percentiles.
ControlModel fit_control_model(const ShapeSample& controls, const ControlModelOptions& options = {},
                               const RegionMap& regions = {});

struct ClosestControlResult
{
    Shape registered;          // case after weighted OPA onto the control mean
    SimilarityTransform transform;
    Eigen::VectorXd scores;    // v, length p
    double d = 0.0;            // vᵀ Σ̂⁻¹ v
    double alpha1 = 1.0;
    double r = 0.0;
    double alpha2 = 1.0;
    Shape cc_p;
    Shape residual;            // R = (Z − X̄) − vec⁻¹(E_p v)
    Shape cc;
    Eigen::VectorXd residual_lengths;
    bool within_component_range = true;
    bool within_residual_range = true;
};

/// Closest-control construction for a shape already registered to the
/// control mean.
ClosestControlResult closest_control(const ControlModel& model, const Shape& registered);

/// Registers the case onto the control mean, then closest_control().
ClosestControlResult assess_individual(const ControlModel& model, const Shape& case_shape);

/// Residual score r = (1/J) Σ_j L_j / ν_j for a registered shape, with the
/// residual lengths written to `lengths` when non-null.
double residual_score(const ControlModel& model, const Shape& registered, Eigen::VectorXd* lengths = nullptr);

struct TimePointAssessment
{
    AsymmetryReport asymmetry;
    ClosestControlResult closest;
    Eigen::VectorXd normal_to_closest; // normal distance case → closest control
};

struct IntegratedAssessment
{
    TimePointAssessment pre;
    TimePointAssessment post;
    std::vector<std::string> regions;
};

IntegratedAssessment integrated_assessment(const ControlModel& model, const SurfaceMesh& pre,
                                           const SurfaceMesh& post, const BilateralPairing& pairing,
                                           const RegionMap& regions, const AsymmetryOptions& options = {});

} // namespace surfshape
