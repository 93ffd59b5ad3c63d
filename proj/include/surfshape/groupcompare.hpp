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
#include "surfshape/shape.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace surfshape {

/// Two-sample Hotelling T² on score rows, pooled covariance:
/// T² = d̄ᵀ Σ̂⁻¹ d̄ / (1/n_a + 1/n_b). Throws NumericalError when Σ̂ is singular.
double hotelling_t2(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b);

/// Pooled two-sample t on column `l` (0-based):
/// (m_a − m_b) / (σ̂ √(1/n_a + 1/n_b)).
double component_t(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b, Eigen::Index l);

/// Rows of `m` whose group flag matches `in_group_b`.
Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& group, int which);

/// Two-group membership from string labels: the reference group (first
/// label in sorted order unless named) becomes 0, the other 1.
struct GroupSplit
{
    std::vector<int> group;
    std::string name_a;
    std::string name_b;
};
GroupSplit split_groups(const std::vector<std::string>& labels, const std::string& reference = {});

enum class PermutationMode
{
    tangent_pca,     // fixed label-blind components, permuted labels
    group_shape_space // pooled within-group eigenbasis re-estimated per permutation
};

struct GroupTestReport
{
    PermutationMode mode = PermutationMode::tangent_pca;
    int p = 0;
    int n_perm = 0;
    std::uint64_t seed = 0;
    int n_a = 0;
    int n_b = 0;
    double global_stat = 0.0;                 // √(T²/p)
    Eigen::VectorXd component_stats;          // |t_l|
    Eigen::VectorXd signed_component_t;       // t_l with sign (a − b)
    double global_p = 1.0;
    Eigen::VectorXd component_p;
    double bonferroni_alpha = 0.0;
    std::vector<int> significant;             // 1-based component indices
    Eigen::VectorXd permuted_global;          // n_perm
    Eigen::MatrixXd permuted_components;      // n_perm × p
    std::array<double, 5> global_quartiles{}; // min, q1, median, q3, max of permuted
    Eigen::MatrixXd component_quartiles;      // p × 5
    Eigen::VectorXd eigenvalues;              // group_shape_space: observed λ_k
    std::string caveat;
};

struct PermutationOptions
{
    int p = 0;
    int n_perm = 500;
    std::uint64_t seed = 1;
    double alpha = 0.05; // Bonferroni threshold = alpha / p
};

/// Permutation test on fixed component scores (n × ≥p): per permutation the
/// labels are shuffled and √(T²/p) and |t_l| recomputed. Empirical
/// p = (1 + #{permuted ≥ observed}) / (1 + n_perm).
GroupTestReport permutation_test_scores(const Eigen::MatrixXd& scores, const std::vector<int>& group,
                                        const PermutationOptions& options);

/// Group-shape-space permutation test on tangent rows (n × 3J): per labelling
/// the pooled within-group covariance (A-weighted) is eigen-decomposed, its
/// leading p eigenvectors give scores, and the statistic is
/// T² = Σ_k [(v̄_k,a − v̄_k,b) / √(λ_k (1/n_a + 1/n_b))]².
GroupTestReport permutation_test_group_space(const Eigen::MatrixXd& tangent, const Eigen::VectorXd& weights,
                                             const std::vector<int>& group, const PermutationOptions& options);

/// Observed group-shape-space decomposition without permutations.
struct GroupSpaceStatistic
{
    double t2 = 0.0;
    Eigen::VectorXd t;           // signed per-component t
    Eigen::VectorXd eigenvalues; // pooled within-group λ_k, k = 1..p
    Eigen::MatrixXd directions;  // 3J × p, A-orthonormal
};
GroupSpaceStatistic group_space_statistic(const Eigen::MatrixXd& tangent, const Eigen::VectorXd& weights,
                                          const std::vector<int>& group, int p);

/// Flips e_k and score column k wherever the reference group (0) has the
/// lower mean score, so group 0 scores higher on every component.
void align_component_signs(FpcaModel& model, Eigen::MatrixXd& scores, const std::vector<int>& group,
                           int reference_group = 0);

struct SubspaceEffect
{
    std::vector<int> components; // 1-based
    Shape plus_shape;
    Shape minus_shape;
    Eigen::VectorXd coefficients; // c √λ_k / √q per listed component
};

/// Moves ±c √λ_k / √q along every listed component simultaneously.
SubspaceEffect combined_effect_shape(const FpcaModel& model, const std::vector<int>& components, double c = 2.0);

struct AffineSplit
{
    std::vector<Shape> affine;     // X̄ α̂_i
    std::vector<Shape> non_affine; // X̄ + (X_i − X̄ α̂_i)
    std::vector<Eigen::Matrix3d> coefficients;
};

/// Least-squares regression X_i = X̄ α_i + ε_i. With `weights`, uses the
/// area-weighted normal equations (X̄ᵀAX̄)⁻¹X̄ᵀAX_i instead.
AffineSplit affine_nonaffine_split(const std::vector<Shape>& aligned, const Shape& mean,
                                   const Eigen::VectorXd* weights = nullptr);

std::string to_string(PermutationMode mode);

} // namespace surfshape
