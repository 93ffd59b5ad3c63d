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
#include "surfshape/groupcompare.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/parallel.hpp"
#include "surfshape/random.hpp"
#include "surfshape/stats.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <set>

namespace surfshape {

namespace {

struct TwoGroupMoments
{
    Eigen::RowVectorXd mean_a;
    Eigen::RowVectorXd mean_b;
    Eigen::MatrixXd pooled;
    double n_a = 0.0;
    double n_b = 0.0;
};

TwoGroupMoments moments(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.cols() != b.cols())
        throw ValidationError("score matrices differ in width");
    if (a.rows() < 1 || b.rows() < 1)
        throw ValidationError("both groups need at least one member");
    if (a.rows() + b.rows() < a.cols() + 2)
        throw ValidationError("n_a + n_b must be at least p + 2");
    TwoGroupMoments m;
    m.n_a = static_cast<double>(a.rows());
    m.n_b = static_cast<double>(b.rows());
    m.mean_a = a.colwise().mean();
    m.mean_b = b.colwise().mean();
    const Eigen::MatrixXd ca = a.rowwise() - m.mean_a;
    const Eigen::MatrixXd cb = b.rowwise() - m.mean_b;
    m.pooled = (ca.transpose() * ca + cb.transpose() * cb) / (m.n_a + m.n_b - 2.0);
    return m;
}

double hotelling_from_moments(const TwoGroupMoments& m)
{
    const Eigen::VectorXd diff = (m.mean_a - m.mean_b).transpose();
    Eigen::LLT<Eigen::MatrixXd> llt(m.pooled);
    const double max_diag = m.pooled.diagonal().cwiseAbs().maxCoeff();
    if (llt.info() != Eigen::Success || !(max_diag > 0.0))
        throw NumericalError("pooled covariance singular; reduce p");
    const Eigen::MatrixXd l = llt.matrixL();
    const double min_pivot = l.diagonal().minCoeff();
    if (!(min_pivot * min_pivot > 1e-13 * max_diag))
        throw NumericalError("pooled covariance singular; reduce p");
    const double q = diff.dot(llt.solve(diff));
    return q / (1.0 / m.n_a + 1.0 / m.n_b);
}

std::array<double, 5> five_numbers(std::span<const double> v)
{
    return {quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), quantile(v, 1.0)};
}

int count_members(const std::vector<int>& group, int which)
{
    return static_cast<int>(std::count(group.begin(), group.end(), which));
}

void check_groups(const std::vector<int>& group, Eigen::Index n)
{
    if (static_cast<Eigen::Index>(group.size()) != n)
        throw ValidationError("group vector length does not match the number of samples");
    for (int g : group)
        if (g != 0 && g != 1)
            throw ValidationError("group flags must be 0 or 1");
    if (count_members(group, 0) < 1 || count_members(group, 1) < 1)
        throw ValidationError("both groups must be non-empty");
}

std::vector<std::vector<int>> draw_permutations(const std::vector<int>& group, int n_perm, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<std::vector<int>> out(static_cast<std::size_t>(n_perm));
    for (auto& g : out) {
        g = group;
        rng.shuffle(g);
    }
    return out;
}

// Shared tail: empirical p-values, Bonferroni set and display quantiles.
void finish_report(GroupTestReport& r)
{
    const double denom = 1.0 + r.n_perm;
    auto exceed = [](double permuted, double observed) { return permuted >= observed * (1.0 - 1e-12); };
    int count = 0;
    for (Eigen::Index i = 0; i < r.permuted_global.size(); ++i)
        count += exceed(r.permuted_global[i], r.global_stat);
    r.global_p = (1.0 + count) / denom;

    r.component_p.resize(r.p);
    r.component_quartiles.resize(r.p, 5);
    for (int l = 0; l < r.p; ++l) {
        int c = 0;
        for (Eigen::Index i = 0; i < r.permuted_components.rows(); ++i)
            c += exceed(r.permuted_components(i, l), r.component_stats[l]);
        r.component_p[l] = (1.0 + c) / denom;
        const Eigen::VectorXd col = r.permuted_components.col(l);
        const auto q = five_numbers(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        for (int k = 0; k < 5; ++k)
            r.component_quartiles(l, k) = q[static_cast<std::size_t>(k)];
    }
    r.global_quartiles = five_numbers(
        std::span<const double>(r.permuted_global.data(), static_cast<std::size_t>(r.permuted_global.size())));
    r.significant.clear();
    for (int l = 0; l < r.p; ++l)
        if (r.component_p[l] < r.bonferroni_alpha)
            r.significant.push_back(l + 1);
    r.caveat = "per-component p-values are interpreted under the null hypothesis that the mean scores agree "
               "on all components simultaneously";
}

struct ScoreStats
{
    double global = 0.0;
    Eigen::VectorXd t;
};

ScoreStats score_stats(const Eigen::MatrixXd& scores, const std::vector<int>& group)
{
    const auto m = moments(select_rows(scores, group, 0), select_rows(scores, group, 1));
    ScoreStats s;
    const auto p = static_cast<double>(scores.cols());
    s.global = std::sqrt(std::max(0.0, hotelling_from_moments(m)) / p);
    const double f = std::sqrt(1.0 / m.n_a + 1.0 / m.n_b);
    s.t.resize(scores.cols());
    for (Eigen::Index l = 0; l < scores.cols(); ++l) {
        const double sd = std::sqrt(m.pooled(l, l));
        if (!(sd > 0.0))
            throw NumericalError("component " + std::to_string(l + 1) + " has zero pooled standard deviation");
        s.t[l] = (m.mean_a[l] - m.mean_b[l]) / (sd * f);
    }
    return s;
}

// Group-shape-space statistic computed in the n-dimensional sample space.
// `gram` is Z Zᵀ for the √a-scaled tangent rows Z.
struct GramStats
{
    Eigen::VectorXd t;
    Eigen::VectorXd lambda;
    Eigen::MatrixXd u; // n × p eigenvectors of C G C
    Eigen::VectorXd sigma;
};

GramStats gram_group_stats(const Eigen::MatrixXd& gram, const std::vector<int>& group, int p)
{
    const Eigen::Index n = gram.rows();
    const int n_a = count_members(group, 0);
    const int n_b = count_members(group, 1);
    // C = I − within-group averaging, so C Z removes each group's mean.
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k)
            if (group[static_cast<std::size_t>(i)] == group[static_cast<std::size_t>(k)])
                c(i, k) -= 1.0 / (group[static_cast<std::size_t>(i)] == 0 ? n_a : n_b);
    const Eigen::MatrixXd gc = gram * c;
    const Eigen::MatrixXd cgc = c * gc;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cgc + cgc.transpose()));
    if (eig.info() != Eigen::Success)
        throw NumericalError("within-group eigen-decomposition failed");

    Eigen::VectorXd diff(n);
    for (Eigen::Index i = 0; i < n; ++i)
        diff[i] = group[static_cast<std::size_t>(i)] == 0 ? 1.0 / n_a : -1.0 / n_b;
    const Eigen::RowVectorXd diff_gc = diff.transpose() * gc;

    GramStats s;
    s.t.resize(p);
    s.lambda.resize(p);
    s.u.resize(n, p);
    s.sigma.resize(p);
    const double dof = static_cast<double>(n - 2);
    const double f = 1.0 / n_a + 1.0 / n_b;
    const double top = std::max(eig.eigenvalues()[n - 1], 0.0);
    for (int k = 0; k < p; ++k) {
        const double ev = eig.eigenvalues()[n - 1 - k];
        if (!(ev > 1e-12 * top) || !(top > 0.0))
            throw NumericalError("within-group covariance has rank below p = " + std::to_string(p));
        const Eigen::VectorXd u = eig.eigenvectors().col(n - 1 - k);
        const double sigma = std::sqrt(ev);
        const double projected = diff_gc.dot(u) / sigma;
        s.lambda[k] = ev / dof;
        s.t[k] = projected / std::sqrt(s.lambda[k] * f);
        s.u.col(k) = u;
        s.sigma[k] = sigma;
    }
    return s;
}

} // namespace

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& group, int which)
{
    const int count = count_members(group, which);
    Eigen::MatrixXd out(count, m.cols());
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < group.size(); ++i)
        if (group[i] == which)
            out.row(r++) = m.row(static_cast<Eigen::Index>(i));
    return out;
}

GroupSplit split_groups(const std::vector<std::string>& labels, const std::string& reference)
{
    const std::set<std::string> names(labels.begin(), labels.end());
    if (names.size() != 2)
        throw ValidationError("expected exactly two groups, found " + std::to_string(names.size()));
    GroupSplit split;
    split.name_a = reference.empty() ? *names.begin() : reference;
    if (!names.count(split.name_a))
        throw ValidationError("reference group '" + split.name_a + "' does not occur in the labels");
    split.name_b = *names.begin() == split.name_a ? *names.rbegin() : *names.begin();
    for (const auto& l : labels)
        split.group.push_back(l == split.name_a ? 0 : 1);
    return split;
}

double hotelling_t2(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b)
{
    return hotelling_from_moments(moments(scores_a, scores_b));
}

double component_t(const Eigen::MatrixXd& scores_a, const Eigen::MatrixXd& scores_b, Eigen::Index l)
{
    if (l < 0 || l >= scores_a.cols())
        throw ValidationError("component index out of range");
    const Eigen::MatrixXd a = scores_a.col(l);
    const Eigen::MatrixXd b = scores_b.col(l);
    if (a.rows() + b.rows() < 3)
        throw ValidationError("component_t needs n_a + n_b >= 3");
    const auto m = moments(a, b);
    const double sd = std::sqrt(m.pooled(0, 0));
    if (!(sd > 0.0))
        throw NumericalError("pooled standard deviation is zero");
    return (m.mean_a[0] - m.mean_b[0]) / (sd * std::sqrt(1.0 / m.n_a + 1.0 / m.n_b));
}

GroupTestReport permutation_test_scores(const Eigen::MatrixXd& scores, const std::vector<int>& group,
                                        const PermutationOptions& options)
{
    if (options.n_perm < 1)
        throw ValidationError("n_perm must be at least 1");
    if (options.p < 1 || options.p > scores.cols())
        throw ValidationError("p = " + std::to_string(options.p) + " outside 1.." + std::to_string(scores.cols()));
    check_groups(group, scores.rows());
    const Eigen::MatrixXd v = scores.leftCols(options.p);

    GroupTestReport r;
    r.mode = PermutationMode::tangent_pca;
    r.p = options.p;
    r.n_perm = options.n_perm;
    r.seed = options.seed;
    r.n_a = count_members(group, 0);
    r.n_b = count_members(group, 1);
    r.bonferroni_alpha = options.alpha / options.p;

    const auto observed = score_stats(v, group);
    r.global_stat = observed.global;
    r.signed_component_t = observed.t;
    r.component_stats = observed.t.cwiseAbs();

    const auto perms = draw_permutations(group, options.n_perm, options.seed);
    r.permuted_global.resize(options.n_perm);
    r.permuted_components.resize(options.n_perm, options.p);
    parallel_for(perms.size(), [&](std::size_t i) {
        const auto s = score_stats(v, perms[i]);
        r.permuted_global[static_cast<Eigen::Index>(i)] = s.global;
        r.permuted_components.row(static_cast<Eigen::Index>(i)) = s.t.cwiseAbs().transpose();
    });
    finish_report(r);
    return r;
}

GroupSpaceStatistic group_space_statistic(const Eigen::MatrixXd& tangent, const Eigen::VectorXd& weights,
                                          const std::vector<int>& group, int p)
{
    check_groups(group, tangent.rows());
    if (tangent.cols() != 3 * weights.size())
        throw ValidationError("tangent width does not match the weight vector");
    if (p < 1 || p > tangent.rows() - 2)
        throw ValidationError("p = " + std::to_string(p) + " outside 1..n-2");
    const Eigen::VectorXd root_w = slot_weights(weights).cwiseSqrt();
    const Eigen::MatrixXd z = tangent * root_w.asDiagonal();
    const Eigen::MatrixXd gram = z * z.transpose();
    const auto s = gram_group_stats(gram, group, p);

    // Directions v_k = (C Z)ᵀ u_k / σ_k; C u_k = u_k for eigenvectors with
    // non-zero eigenvalue, so Zᵀ u_k / σ_k suffices.
    GroupSpaceStatistic out;
    out.t = s.t;
    out.eigenvalues = s.lambda;
    out.t2 = s.t.squaredNorm();
    out.directions.resize(tangent.cols(), p);
    for (int k = 0; k < p; ++k) {
        Eigen::VectorXd e = z.transpose() * s.u.col(k) / s.sigma[k];
        for (Eigen::Index i = 0; i < e.size(); ++i)
            e[i] = root_w[i] > 0.0 ? e[i] / root_w[i] : 0.0;
        Eigen::Index arg = 0;
        e.cwiseAbs().maxCoeff(&arg);
        if (e[arg] < 0.0) {
            e = -e;
            out.t[k] = -out.t[k];
        }
        out.directions.col(k) = e;
    }
    return out;
}

GroupTestReport permutation_test_group_space(const Eigen::MatrixXd& tangent, const Eigen::VectorXd& weights,
                                             const std::vector<int>& group, const PermutationOptions& options)
{
    if (options.n_perm < 1)
        throw ValidationError("n_perm must be at least 1");
    const auto observed = group_space_statistic(tangent, weights, group, options.p);

    GroupTestReport r;
    r.mode = PermutationMode::group_shape_space;
    r.p = options.p;
    r.n_perm = options.n_perm;
    r.seed = options.seed;
    r.n_a = count_members(group, 0);
    r.n_b = count_members(group, 1);
    r.bonferroni_alpha = options.alpha / options.p;
    r.global_stat = std::sqrt(observed.t2 / options.p);
    r.signed_component_t = observed.t;
    r.component_stats = observed.t.cwiseAbs();
    r.eigenvalues = observed.eigenvalues;

    const Eigen::VectorXd root_w = slot_weights(weights).cwiseSqrt();
    const Eigen::MatrixXd z = tangent * root_w.asDiagonal();
    const Eigen::MatrixXd gram = z * z.transpose();

    const auto perms = draw_permutations(group, options.n_perm, options.seed);
    r.permuted_global.resize(options.n_perm);
    r.permuted_components.resize(options.n_perm, options.p);
    parallel_for(perms.size(), [&](std::size_t i) {
        const auto s = gram_group_stats(gram, perms[i], options.p);
        r.permuted_global[static_cast<Eigen::Index>(i)] = std::sqrt(s.t.squaredNorm() / options.p);
        r.permuted_components.row(static_cast<Eigen::Index>(i)) = s.t.cwiseAbs().transpose();
    });
    finish_report(r);
    return r;
}

void align_component_signs(FpcaModel& model, Eigen::MatrixXd& scores, const std::vector<int>& group,
                           int reference_group)
{
    check_groups(group, scores.rows());
    const int other = reference_group == 0 ? 1 : 0;
    const Eigen::Index k_max = std::min<Eigen::Index>(scores.cols(), model.components());
    for (Eigen::Index k = 0; k < k_max; ++k) {
        double ref_sum = 0.0, other_sum = 0.0;
        int ref_n = 0, other_n = 0;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const double v = scores(static_cast<Eigen::Index>(i), k);
            if (group[i] == reference_group) {
                ref_sum += v;
                ++ref_n;
            } else if (group[i] == other) {
                other_sum += v;
                ++other_n;
            }
        }
        if (ref_sum / ref_n < other_sum / other_n) {
            model.eigenfunctions.col(k) *= -1.0;
            scores.col(k) *= -1.0;
        }
    }
}

SubspaceEffect combined_effect_shape(const FpcaModel& model, const std::vector<int>& components, double c)
{
    if (components.empty())
        throw ValidationError("combined_effect_shape needs at least one component");
    const double q = static_cast<double>(components.size());
    SubspaceEffect effect;
    effect.components = components;
    effect.coefficients.resize(static_cast<Eigen::Index>(components.size()));
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(model.mean.size());
    for (std::size_t i = 0; i < components.size(); ++i) {
        const int k = components[i];
        if (k < 1 || k > model.components())
            throw ValidationError("component " + std::to_string(k) + " outside 1.." +
                                  std::to_string(model.components()));
        const double coef = c * std::sqrt(model.eigenvalues[k - 1]) / std::sqrt(q);
        effect.coefficients[static_cast<Eigen::Index>(i)] = coef;
        delta += coef * model.eigenfunctions.col(k - 1);
    }
    const Shape d = unvec(delta);
    effect.plus_shape = model.mean + d;
    effect.minus_shape = model.mean - d;
    return effect;
}

AffineSplit affine_nonaffine_split(const std::vector<Shape>& aligned, const Shape& mean,
                                   const Eigen::VectorXd* weights)
{
    Eigen::Matrix3d normal;
    if (weights) {
        if (weights->size() != mean.rows())
            throw ValidationError("affine split: weight vector length does not match the mean");
        normal = mean.transpose() * weights->asDiagonal() * mean;
    } else {
        normal = mean.transpose() * mean;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    lu.setThreshold(1e-12);
    if (lu.rank() < 3)
        throw NumericalError("affine split: mean shape is planar-degenerate (X̄ᵀX̄ singular)");

    AffineSplit out;
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        const Shape& x = aligned[i];
        if (x.rows() != mean.rows())
            throw ValidationError("affine split: shape " + std::to_string(i) + " is not in correspondence");
        const Eigen::Matrix3d rhs =
            weights ? Eigen::Matrix3d(mean.transpose() * weights->asDiagonal() * x) : Eigen::Matrix3d(mean.transpose() * x);
        const Eigen::Matrix3d alpha = lu.solve(rhs);
        const Shape fitted = mean * alpha;
        out.coefficients.push_back(alpha);
        out.affine.push_back(fitted);
        out.non_affine.push_back(mean + (x - fitted));
    }
    return out;
}

std::string to_string(PermutationMode mode)
{
    return mode == PermutationMode::tangent_pca ? "tangent_pca" : "group_shape_space";
}

} // namespace surfshape
