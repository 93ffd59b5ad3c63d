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
#include "surfshape/fpca.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/random.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace surfshape {

int components_for_fraction(const Eigen::VectorXd& cumulative, double threshold)
{
    for (Eigen::Index k = 0; k < cumulative.size(); ++k)
        if (cumulative[k] >= threshold * (1.0 - 1e-12))
            return static_cast<int>(k + 1);
    return static_cast<int>(cumulative.size());
}

FpcaModel fit_fpca(const Shape& mean, const Eigen::MatrixXd& tangent, const AreaWeights& weights,
                   const ComponentRule& rule)
{
    const Eigen::Index n = tangent.rows();
    const Eigen::Index dim = tangent.cols();
    if (n < 2)
        throw ValidationError("fit_fpca needs at least 2 samples, got " + std::to_string(n));
    if (dim != mean.size() || weights.weights.size() * 3 != dim)
        throw ValidationError("fit_fpca: tangent width, mean and weights disagree on vertex count");
    if ((weights.weights.array() < 0.0).any())
        throw ValidationError("fit_fpca: negative area weight");
    if (rule.count && *rule.count < 1)
        throw ValidationError("fit_fpca: component count must be positive");
    if (!rule.count && !(rule.variance_fraction > 0.0 && rule.variance_fraction <= 1.0))
        throw ValidationError("fit_fpca: variance fraction must lie in (0, 1]");

    FpcaModel model;
    model.weights = weights;
    model.n_samples = static_cast<int>(n);

    const Eigen::RowVectorXd centre = tangent.colwise().mean();
    model.mean = mean + unvec(centre.transpose());

    const Eigen::VectorXd root_w = slot_weights(weights.weights).cwiseSqrt();
    const Eigen::MatrixXd scaled = (tangent.rowwise() - centre) * root_w.asDiagonal();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double denom = static_cast<double>(n - 1);
    model.total_variance = scaled.squaredNorm() / denom;

    const double rank_tol = static_cast<double>(std::max(n, dim)) * 10.0 *
                            std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv[k] > rank_tol)
            ++rank;
    model.rank = rank;

    const Eigen::VectorXd lambda_all = sv.head(rank).array().square() / denom;
    Eigen::VectorXd cumulative(rank);
    double running = 0.0;
    for (int k = 0; k < rank; ++k) {
        running += lambda_all[k];
        cumulative[k] = model.total_variance > 0.0 ? running / model.total_variance : 1.0;
    }

    int k_keep = rule.count ? *rule.count : components_for_fraction(cumulative, rule.variance_fraction);
    if (k_keep > rank) {
        model.warnings.push_back("requested " + std::to_string(k_keep) + " components but the data have rank " +
                                 std::to_string(rank) + "; truncated");
        k_keep = rank;
    }
    if (rank == 0)
        model.warnings.push_back("all samples coincide; no components");

    model.eigenvalues = lambda_all.head(k_keep);
    model.explained = cumulative.head(k_keep);
    model.eigenfunctions.resize(dim, k_keep);
    for (int k = 0; k < k_keep; ++k) {
        Eigen::VectorXd e = svd.matrixV().col(k);
        for (Eigen::Index i = 0; i < dim; ++i)
            e[i] = root_w[i] > 0.0 ? e[i] / root_w[i] : 0.0;
        Eigen::Index arg = 0;
        e.cwiseAbs().maxCoeff(&arg);
        if (e[arg] < 0.0)
            e = -e;
        model.eigenfunctions.col(k) = e;
    }
    return model;
}

Eigen::MatrixXd scores_from_tangent(const FpcaModel& model, const Eigen::MatrixXd& tangent)
{
    if (tangent.cols() != model.mean.size())
        throw ValidationError("scores: tangent width does not match the model");
    const Eigen::VectorXd w = slot_weights(model.weights.weights);
    return tangent * w.asDiagonal() * model.eigenfunctions;
}

Eigen::VectorXd scores(const FpcaModel& model, const Shape& shape)
{
    if (shape.rows() != model.mean.rows())
        throw ValidationError("scores: vertex count " + std::to_string(shape.rows()) + " ≠ " +
                              std::to_string(model.mean.rows()));
    const Eigen::VectorXd w = slot_weights(model.weights.weights);
    return model.eigenfunctions.transpose() * w.cwiseProduct(vec(shape - model.mean));
}

Shape reconstruct(const FpcaModel& model, const Eigen::VectorXd& s)
{
    if (s.size() > model.components())
        throw ValidationError("reconstruct: " + std::to_string(s.size()) + " scores for a " +
                              std::to_string(model.components()) + "-component model");
    const Eigen::VectorXd delta = model.eigenfunctions.leftCols(s.size()) * s;
    return model.mean + unvec(delta);
}

Shape component_shape(const FpcaModel& model, int k, double c)
{
    if (k < 1 || k > model.components())
        throw ValidationError("component_shape: component " + std::to_string(k) + " outside 1.." +
                              std::to_string(model.components()));
    const Eigen::VectorXd delta = c * std::sqrt(model.eigenvalues[k - 1]) * model.eigenfunctions.col(k - 1);
    return model.mean + unvec(delta);
}

GrandTour grand_tour_through(const FpcaModel& model, const std::vector<Eigen::VectorXd>& stops_z,
                             int frames_per_leg)
{
    if (stops_z.empty())
        throw ValidationError("grand_tour: need at least one stop");
    if (frames_per_leg < 0)
        throw ValidationError("grand_tour: frames_per_leg must be non-negative");
    const Eigen::Index p = stops_z.front().size();
    if (p < 1 || p > model.components())
        throw ValidationError("grand_tour: p = " + std::to_string(p) + " outside 1.." +
                              std::to_string(model.components()));

    GrandTour tour;
    tour.stops_z = stops_z;
    const Eigen::VectorXd sd = model.eigenvalues.head(p).cwiseSqrt();
    auto emit = [&](const Eigen::VectorXd& s) {
        tour.frame_scores.push_back(s);
        tour.frames.push_back(reconstruct(model, s));
    };
    Eigen::VectorXd previous;
    for (std::size_t i = 0; i < stops_z.size(); ++i) {
        if (stops_z[i].size() != p)
            throw ValidationError("grand_tour: stop vectors differ in length");
        const Eigen::VectorXd s = stops_z[i].cwiseProduct(sd);
        if (i > 0) {
            for (int f = 1; f <= frames_per_leg; ++f) {
                const double t = static_cast<double>(f) / static_cast<double>(frames_per_leg + 1);
                emit((1.0 - t) * previous + t * s);
            }
        }
        tour.stop_frames.push_back(static_cast<int>(tour.frames.size()));
        emit(s);
        previous = s;
    }
    return tour;
}

GrandTour grand_tour(const FpcaModel& model, int p, int n_stops, std::uint64_t seed, int frames_per_leg)
{
    if (n_stops < 1)
        throw ValidationError("grand_tour: n_stops must be positive");
    if (p < 1 || p > model.components())
        throw ValidationError("grand_tour: p = " + std::to_string(p) + " outside 1.." +
                              std::to_string(model.components()));
    Rng rng(seed);
    std::vector<Eigen::VectorXd> z(static_cast<std::size_t>(n_stops), Eigen::VectorXd(p));
    for (auto& v : z)
        for (Eigen::Index k = 0; k < p; ++k)
            v[k] = rng.normal();
    return grand_tour_through(model, z, frames_per_leg);
}

Eigen::VectorXd variability_map(const std::vector<Shape>& aligned)
{
    const std::size_t n = aligned.size();
    if (n < 4)
        throw ValidationError("variability_map needs at least 4 shapes, got " + std::to_string(n));
    const Eigen::Index j = aligned.front().rows();
    Eigen::VectorXd out(j);
    for (Eigen::Index v = 0; v < j; ++v) {
        Eigen::RowVector3d m = Eigen::RowVector3d::Zero();
        for (const auto& s : aligned)
            m += s.row(v);
        m /= static_cast<double>(n);
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& s : aligned) {
            const Eigen::RowVector3d d = s.row(v) - m;
            cov += d.transpose() * d;
        }
        cov /= static_cast<double>(n - 1);
        const double det = cov.determinant();
        const double scale = cov.trace() / 3.0;
        if (!(scale > 0.0) || !(det > 1e-12 * scale * scale * scale))
            out[v] = kSingularLogDet;
        else
            out[v] = std::log(det);
    }
    return out;
}

} // namespace surfshape
