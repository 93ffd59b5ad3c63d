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
#include "surfshape/individual.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/stats.hpp"

#include <algorithm>
#include <cmath>

namespace surfshape {

Shape reflect_relabel(const Shape& shape, const BilateralPairing& pairing)
{
    validate_pairing(pairing, shape.rows());
    const Eigen::RowVector3d n = pairing.plane_normal.normalized().transpose();
    Shape reflected = shape;
    if (pairing.plane_normal == Eigen::Vector3d::UnitX()) {
        // Exact negation keeps mirror-symmetric inputs bitwise fixed.
        reflected.col(0) = -shape.col(0);
    } else {
        const Eigen::VectorXd along = shape * n.transpose();
        reflected -= 2.0 * along * n;
    }
    Shape out(shape.rows(), 3);
    for (Eigen::Index j = 0; j < shape.rows(); ++j)
        out.row(j) = reflected.row(pairing.mirror[static_cast<std::size_t>(j)]);
    return out;
}

double asymmetry_score(const Shape& shape, const Shape& matched, const Triangles& triangles,
                       std::span<const int> region)
{
    const Shape average = 0.5 * (shape + matched);
    const Eigen::VectorXd a = vertex_areas(average, triangles).weights;
    const Eigen::VectorXd sq = (shape - matched).rowwise().squaredNorm();
    double num = 0.0, den = 0.0;
    if (region.empty()) {
        num = a.dot(sq);
        den = a.sum();
    } else {
        for (int j : region) {
            if (j < 0 || j >= shape.rows())
                throw ValidationError("region vertex " + std::to_string(j) + " out of range");
            num += a[j] * sq[j];
            den += a[j];
        }
    }
    if (!(den > 0.0))
        throw NumericalError("asymmetry region has zero area");
    return std::sqrt(num / den);
}

namespace {

Shape match_reflection(const Shape& shape, const Shape& reflected, const Eigen::VectorXd& weights,
                       const AsymmetryOptions& options)
{
    OpaOptions opa;
    opa.allow_scaling = options.allow_scaling;
    opa.allow_reflection = true;
    return weighted_opa(reflected, shape, weights, opa).fitted;
}

} // namespace

AsymmetryReport assess_asymmetry(const Shape& shape, const Triangles& triangles, const BilateralPairing& pairing,
                                 const RegionMap& regions, const AsymmetryOptions& options)
{
    const Shape reflected = reflect_relabel(shape, pairing);
    const Eigen::VectorXd a = vertex_areas(shape, triangles).weights;

    AsymmetryReport report;
    report.matched_reflection = match_reflection(shape, reflected, a, options);
    report.per_vertex_distance = (shape - report.matched_reflection).rowwise().norm();
    report.global_score = asymmetry_score(shape, report.matched_reflection, triangles);

    for (const auto& [name, idx] : regions) {
        if (!options.per_region_registration) {
            report.region_scores[name] = asymmetry_score(shape, report.matched_reflection, triangles, idx);
            continue;
        }
        Eigen::VectorXd restricted = Eigen::VectorXd::Zero(a.size());
        for (int j : idx)
            restricted[j] = a[j];
        const Shape matched = match_reflection(shape, reflected, restricted, options);
        report.region_scores[name] = asymmetry_score(shape, matched, triangles, idx);
    }
    return report;
}

double residual_score(const ControlModel& model, const Shape& registered, Eigen::VectorXd* lengths)
{
    const FpcaModel& f = model.fpca;
    const Eigen::VectorXd v = scores(f, registered);
    const Shape residual = (registered - f.mean) - unvec(f.eigenfunctions * v);
    const Eigen::VectorXd len = residual.rowwise().norm();
    if (lengths)
        *lengths = len;
    return len.cwiseQuotient(model.nu).mean();
}

ControlModel fit_control_model(const ShapeSample& controls, const ControlModelOptions& options,
                               const RegionMap& regions)
{
    const auto n = static_cast<Eigen::Index>(controls.size());
    if (n < 5)
        throw ValidationError("fit_control_model needs at least 5 controls, got " + std::to_string(n));

    ControlModel model;
    model.variance_threshold = options.variance_threshold;
    model.allow_scaling = options.gpa.allow_scaling;

    const GpaResult gpa = weighted_gpa(controls, options.gpa);
    const Eigen::MatrixXd tangent = tangent_coordinates(gpa.aligned, gpa.mean);
    model.fpca = fit_fpca(gpa.mean, tangent, gpa.mean_weights, ComponentRule::fraction(options.variance_threshold));
    model.fpca.triangles = controls.triangles;
    model.warnings = model.fpca.warnings;
    model.p = model.fpca.components();
    if (model.p < 1)
        throw NumericalError("control model has no principal components");
    model.chi2_threshold = chi2_quantile(options.coverage, model.p);

    const Eigen::MatrixXd v = scores_from_tangent(model.fpca, tangent);
    const Eigen::VectorXd inv_lambda = model.fpca.eigenvalues.cwiseInverse();
    model.control_d = v.array().square().matrix() * inv_lambda;

    const Eigen::Index j = gpa.mean.rows();
    Eigen::MatrixXd lengths(n, j);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Shape residual = (gpa.aligned[static_cast<std::size_t>(i)] - model.fpca.mean) -
                               unvec(model.fpca.eigenfunctions * v.row(i).transpose());
        lengths.row(i) = residual.rowwise().norm().transpose();
    }
    const Eigen::RowVectorXd mean_len = lengths.colwise().mean();
    model.nu = ((lengths.rowwise() - mean_len).array().square().colwise().sum() / static_cast<double>(n - 1))
                   .sqrt()
                   .transpose();
    double min_positive = 0.0;
    for (Eigen::Index k = 0; k < j; ++k)
        if (model.nu[k] > 0.0 && (min_positive == 0.0 || model.nu[k] < min_positive))
            min_positive = model.nu[k];
    int replaced = 0;
    for (Eigen::Index k = 0; k < j; ++k) {
        if (!(model.nu[k] > 0.0)) {
            model.nu[k] = min_positive > 0.0 ? min_positive : 1.0;
            ++replaced;
        }
    }
    if (replaced > 0)
        model.warnings.push_back(std::to_string(replaced) +
                                 " vertices have zero residual-length spread across controls; nu replaced by " +
                                 (min_positive > 0.0 ? "the smallest positive value" : "1"));

    model.control_r.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        model.control_r[i] = (lengths.row(i).transpose().cwiseQuotient(model.nu)).mean();
    model.q95 = quantile(std::span<const double>(model.control_r.data(), static_cast<std::size_t>(n)), 0.95);

    if (controls.pairing) {
        for (std::size_t i = 0; i < controls.size(); ++i) {
            const auto rep = assess_asymmetry(controls.shapes[i], controls.triangles, *controls.pairing, regions);
            model.asymmetry_reference["global"].push_back(rep.global_score);
            for (const auto& [name, score] : rep.region_scores)
                model.asymmetry_reference[name].push_back(score);
        }
    }
    return model;
}

ClosestControlResult closest_control(const ControlModel& model, const Shape& registered)
{
    const FpcaModel& f = model.fpca;
    ClosestControlResult out;
    out.registered = registered;
    out.scores = scores(f, registered);
    out.d = out.scores.array().square().matrix().dot(f.eigenvalues.cwiseInverse());
    out.within_component_range = out.d <= model.chi2_threshold;
    out.alpha1 = out.within_component_range ? 1.0 : std::sqrt(model.chi2_threshold / out.d);

    const Eigen::VectorXd projection = f.eigenfunctions * out.scores;
    out.cc_p = f.mean + unvec(out.alpha1 * projection);
    out.residual = (registered - f.mean) - unvec(projection);
    out.residual_lengths = out.residual.rowwise().norm();
    out.r = out.residual_lengths.cwiseQuotient(model.nu).mean();
    out.within_residual_range = out.r <= model.q95;
    out.alpha2 = out.within_residual_range ? 1.0 : model.q95 / out.r;
    out.cc = out.cc_p + out.alpha2 * out.residual;
    return out;
}

ClosestControlResult assess_individual(const ControlModel& model, const Shape& case_shape)
{
    if (case_shape.rows() != model.fpca.mean.rows())
        throw ValidationError("case vertex count " + std::to_string(case_shape.rows()) + " ≠ " +
                              std::to_string(model.fpca.mean.rows()));
    OpaOptions opa;
    opa.allow_scaling = model.allow_scaling;
    const auto fit = weighted_opa(case_shape, model.fpca.mean, model.fpca.weights.weights, opa);
    auto out = closest_control(model, fit.fitted);
    out.transform = fit.transform;
    return out;
}

namespace {

TimePointAssessment assess_time_point(const ControlModel& model, const SurfaceMesh& mesh,
                                      const BilateralPairing& pairing, const RegionMap& regions,
                                      const AsymmetryOptions& options)
{
    TimePointAssessment tp;
    tp.asymmetry = assess_asymmetry(mesh.vertices, mesh.triangles, pairing, regions, options);
    auto percentile = [&](const std::string& key, double value) {
        const auto it = model.asymmetry_reference.find(key);
        if (it != model.asymmetry_reference.end() && !it->second.empty())
            tp.asymmetry.control_percentiles[key] = percentile_rank(it->second, value);
    };
    percentile("global", tp.asymmetry.global_score);
    for (const auto& [name, score] : tp.asymmetry.region_scores)
        percentile(name, score);

    tp.closest = assess_individual(model, mesh.vertices);
    // Compare in the case's own frame so distances stay in input units.
    const Shape cc_case_frame = apply_similarity(tp.closest.cc, tp.closest.transform.inverse());
    tp.normal_to_closest = shape_difference_field(mesh.vertices, cc_case_frame, mesh.triangles, DifferenceMode::normal);
    return tp;
}

} // namespace

IntegratedAssessment integrated_assessment(const ControlModel& model, const SurfaceMesh& pre,
                                           const SurfaceMesh& post, const BilateralPairing& pairing,
                                           const RegionMap& regions, const AsymmetryOptions& options)
{
    IntegratedAssessment doc;
    doc.pre = assess_time_point(model, pre, pairing, regions, options);
    doc.post = assess_time_point(model, post, pairing, regions, options);
    for (const auto& [name, idx] : regions)
        doc.regions.push_back(name);
    return doc;
}

} // namespace surfshape
