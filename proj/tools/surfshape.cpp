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
// Command-line front end. Every subcommand writes its artifacts plus a
// manifest.json into --out.

#include "surfshape/errors.hpp"
#include "surfshape/fpca.hpp"
#include "surfshape/groupcompare.hpp"
#include "surfshape/individual.hpp"
#include "surfshape/io.hpp"
#include "surfshape/mesh.hpp"
#include "surfshape/registration.hpp"
#include "surfshape/stats.hpp"
#include "surfshape/synth.hpp"
#include "surfshape/warp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <set>

#ifndef SURFSHAPE_VERSION
#define SURFSHAPE_VERSION "0.0.0"
#endif

namespace {

using namespace surfshape;
using nlohmann::json;

// ------------------------------------------------------------ run state

class Run
{
public:
    explicit Run(fs::path out) : out_(std::move(out)) {}

    const fs::path& out() const { return out_; }

    fs::path path(const std::string& rel)
    {
        written_.insert(rel);
        return out_ / rel;
    }

    void mesh(const std::string& rel, const Shape& x, const Triangles& tris)
    {
        write_mesh(SurfaceMesh{x, tris, {}, {}}, path(rel));
    }

    void json_file(const std::string& rel, const json& j) { write_json(j, path(rel)); }

    void csv(const std::string& rel, const CsvRow& header, const std::vector<CsvRow>& rows)
    {
        write_csv(header, rows, path(rel));
    }

    PaintReport painted(const std::string& rel, const Shape& x, const Triangles& tris, const Eigen::VectorXd& field,
                        const ColorMap& cmap)
    {
        return write_painted_mesh(SurfaceMesh{x, tris, {}, {}}, field, cmap, path(rel));
    }

    const std::set<std::string>& written() const { return written_; }

private:
    fs::path out_;
    std::set<std::string> written_;
};

std::string stem_of(const std::string& name)
{
    return fs::path(name).stem().string();
}

std::string safe_name(const std::string& s)
{
    std::string out;
    for (unsigned char c : s)
        out += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? static_cast<char>(c) : '_';
    return out.empty() ? "_" : out;
}

std::string two_digits(int k)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", k);
    return buf;
}

json vector_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

json matrix_json(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        rows.push_back(vector_json(m.row(i).transpose()));
    return rows;
}

json transform_json(const SimilarityTransform& t)
{
    return {{"scale", t.scale},
            {"rotation", matrix_json(t.rotation)},
            {"translation", {t.translation[0], t.translation[1], t.translation[2]}}};
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ------------------------------------------------------- shared options

struct CohortArgs
{
    std::string input;
    std::string labels;
    std::string weights;
    std::string pairing;
};

struct GpaArgs
{
    int max_iter = 100;
    double tol = 1e-10;
    std::string size = "unit_area";
    bool rigid = false;

    GpaOptions options() const
    {
        GpaOptions o;
        o.max_iter = max_iter;
        o.tol = tol;
        o.size_constraint = size == "initial_mean_area" ? SizeConstraint::initial_mean_area : SizeConstraint::unit_area;
        o.allow_scaling = !rigid;
        return o;
    }
};

struct Common
{
    std::string out;
    std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("-o,--out", c.out, "Output directory")->required();
    sub->add_option("--seed", c.seed, "Random seed (recorded in the manifest)")->capture_default_str();
}

void add_cohort(CLI::App* sub, CohortArgs& c, bool labels_required = false)
{
    sub->add_option("-i,--input", c.input, "Directory of corresponded .obj meshes")
        ->required()
        ->check(CLI::ExistingDirectory);
    auto* l = sub->add_option("--labels", c.labels, "CSV filename,label")->check(CLI::ExistingFile);
    if (labels_required)
        l->required();
    sub->add_option("--weights", c.weights, "CSV vertex_index,weight overrides")->check(CLI::ExistingFile);
}

void add_gpa(CLI::App* sub, GpaArgs& g)
{
    sub->add_option("--max-iter", g.max_iter, "GPA iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--tol", g.tol, "GPA relative objective tolerance")->capture_default_str();
    sub->add_option("--size", g.size, "GPA size constraint")
        ->capture_default_str()
        ->check(CLI::IsMember({"unit_area", "initial_mean_area"}));
    sub->add_flag("--rigid", g.rigid, "Disable per-shape scaling");
}

ShapeSample load_cohort(const CohortArgs& c)
{
    auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
    return read_cohort(c.input, opt(c.labels), opt(c.weights), opt(c.pairing));
}

ComponentRule component_rule(int components, double variance)
{
    if (components > 0)
        return ComponentRule::fixed(components);
    return ComponentRule::fraction(variance);
}

json gpa_json(const GpaResult& g)
{
    return {{"iterations", g.iterations},
            {"converged", g.converged},
            {"objective_trace", g.objective_trace},
            {"target_area", g.target_area}};
}

// ---------------------------------------------------------- subcommands

void run_register(Run& run, const CohortArgs& cohort, const GpaArgs& gpa_args)
{
    const ShapeSample sample = load_cohort(cohort);
    const GpaResult gpa = weighted_gpa(sample, gpa_args.options());
    run.mesh("mean.obj", gpa.mean, sample.triangles);
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        run.mesh("aligned/" + stem_of(sample.names[i]) + ".obj", gpa.aligned[i], sample.triangles);
        const auto& t = gpa.transforms[i];
        CsvRow r{sample.names[i], format_double(t.scale)};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                r.push_back(format_double(t.rotation(a, b)));
        for (int d = 0; d < 3; ++d)
            r.push_back(format_double(t.translation[d]));
        rows.push_back(std::move(r));
    }
    run.csv("transforms.csv",
            {"name", "scale", "r00", "r01", "r02", "r10", "r11", "r12", "r20", "r21", "r22", "tx", "ty", "tz"}, rows);
    run.json_file("gpa.json", gpa_json(gpa));
    if (!gpa.converged)
        std::cerr << "surfshape: warning: GPA did not converge within " << gpa.iterations << " iterations\n";
}

struct PcaArgs
{
    int components = 0;
    double variance = 0.8;
    double effect_c = 2.0;
    int export_components = 5;
};

void run_pca(Run& run, const CohortArgs& cohort, const GpaArgs& gpa_args, const PcaArgs& a)
{
    const ShapeSample sample = load_cohort(cohort);
    const GpaResult gpa = weighted_gpa(sample, gpa_args.options());
    const Eigen::MatrixXd tangent = tangent_coordinates(gpa.aligned, gpa.mean);
    FpcaModel model = fit_fpca(gpa.mean, tangent, gpa.mean_weights, component_rule(a.components, a.variance));
    model.triangles = sample.triangles;
    save_model(model, run.path("model.json"));

    const Eigen::MatrixXd s = scores_from_tangent(model, tangent);
    const int k = model.components();
    CsvRow header{"name"};
    for (int c = 1; c <= k; ++c)
        header.push_back("pc" + std::to_string(c));
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        CsvRow r{sample.names[i]};
        for (int c = 0; c < k; ++c)
            r.push_back(format_double(s(static_cast<Eigen::Index>(i), c)));
        rows.push_back(std::move(r));
    }
    run.csv("scores.csv", header, rows);

    rows.clear();
    for (int c = 0; c < k; ++c)
        rows.push_back({std::to_string(c + 1), format_double(model.eigenvalues[c]), format_double(model.explained[c])});
    run.csv("eigenvalues.csv", {"component", "eigenvalue", "cumulative_explained"}, rows);

    for (int c = 1; c <= std::min(k, a.export_components); ++c) {
        run.mesh("components/pc" + two_digits(c) + "_plus.obj", component_shape(model, c, a.effect_c),
                 sample.triangles);
        run.mesh("components/pc" + two_digits(c) + "_minus.obj", component_shape(model, c, -a.effect_c),
                 sample.triangles);
    }

    if (sample.size() >= 4) {
        const Eigen::VectorXd logdet = variability_map(gpa.aligned);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        rows.clear();
        for (Eigen::Index j = 0; j < logdet.size(); ++j) {
            const bool singular = logdet[j] == kSingularLogDet;
            rows.push_back({std::to_string(j), singular ? "singular" : format_double(logdet[j])});
            if (!singular) {
                lo = std::min(lo, logdet[j]);
                hi = std::max(hi, logdet[j]);
            }
        }
        run.csv("variability.csv", {"vertex", "log_det_covariance"}, rows);
        if (std::isfinite(lo)) {
            if (!(hi > lo))
                hi = lo + 1.0;
            run.painted("variability.ply", gpa.mean, sample.triangles, logdet, ColorMap::sequential(lo, hi));
        }
    }
    json summary = {{"components", k},
                    {"rank", model.rank},
                    {"total_variance", model.total_variance},
                    {"gpa", gpa_json(gpa)},
                    {"warnings", model.warnings}};
    run.json_file("pca.json", summary);
}

struct TourArgs
{
    std::string model;
    int components = 0;
    int stops = 5;
    int frames = 10;
};

void run_tour(Run& run, const TourArgs& a, std::uint64_t seed)
{
    const FpcaModel model = load_fpca_model(a.model);
    const int p = a.components > 0 ? a.components : model.components();
    const GrandTour tour = grand_tour(model, p, a.stops, seed, a.frames);
    CsvRow header{"frame", "stop"};
    for (int c = 1; c <= p; ++c)
        header.push_back("s" + std::to_string(c));
    std::vector<CsvRow> rows;
    std::set<int> stop_frames(tour.stop_frames.begin(), tour.stop_frames.end());
    for (std::size_t f = 0; f < tour.frames.size(); ++f) {
        char name[32];
        std::snprintf(name, sizeof name, "frames/frame_%05zu.obj", f);
        run.mesh(name, tour.frames[f], model.triangles);
        CsvRow r{std::to_string(f), stop_frames.count(static_cast<int>(f)) ? "1" : "0"};
        for (int c = 0; c < p; ++c)
            r.push_back(format_double(tour.frame_scores[f][c]));
        rows.push_back(std::move(r));
    }
    run.csv("tour.csv", header, rows);
}

struct CompareArgs
{
    int components = 0;
    double variance = 0.8;
    int perm = 500;
    double alpha = 0.05;
    std::string mode = "both";
    std::string reference;
    double effect_c = 2.0;
};

json report_json(const GroupTestReport& r, const GroupSplit& split)
{
    json comps = json::array();
    for (int l = 0; l < r.p; ++l)
        comps.push_back({{"component", l + 1},
                         {"t", r.signed_component_t[l]},
                         {"abs_t", r.component_stats[l]},
                         {"p_value", r.component_p[l]},
                         {"permuted_quartiles", vector_json(r.component_quartiles.row(l).transpose())}});
    json j = {{"mode", to_string(r.mode)},
              {"group_a", split.name_a},
              {"group_b", split.name_b},
              {"n_a", r.n_a},
              {"n_b", r.n_b},
              {"p", r.p},
              {"n_perm", r.n_perm},
              {"seed", r.seed},
              {"global_stat", r.global_stat},
              {"global_p", r.global_p},
              {"global_permuted_quartiles", r.global_quartiles},
              {"bonferroni_alpha", r.bonferroni_alpha},
              {"significant_components", r.significant},
              {"components", comps},
              {"caveat", r.caveat}};
    if (r.eigenvalues.size() > 0)
        j["eigenvalues"] = vector_json(r.eigenvalues);
    return j;
}

void run_compare(Run& run, const CohortArgs& cohort, const GpaArgs& gpa_args, const CompareArgs& a,
                 std::uint64_t seed)
{
    const ShapeSample sample = load_cohort(cohort);
    const GroupSplit split = split_groups(sample.labels, a.reference);
    const GpaResult gpa = weighted_gpa(sample, gpa_args.options());
    const Eigen::MatrixXd tangent = tangent_coordinates(gpa.aligned, gpa.mean);
    FpcaModel model = fit_fpca(gpa.mean, tangent, gpa.mean_weights, component_rule(a.components, a.variance));
    model.triangles = sample.triangles;
    Eigen::MatrixXd s = scores_from_tangent(model, tangent);
    align_component_signs(model, s, split.group);
    save_model(model, run.path("model.json"));

    PermutationOptions opts;
    opts.p = model.components();
    opts.n_perm = a.perm;
    opts.seed = seed;
    opts.alpha = a.alpha;

    json out = {{"group_a", split.name_a}, {"group_b", split.name_b}, {"tests", json::array()}};
    std::vector<CsvRow> rows;
    auto record = [&](const GroupTestReport& r) {
        out["tests"].push_back(report_json(r, split));
        const std::set<int> sig(r.significant.begin(), r.significant.end());
        for (int l = 0; l < r.p; ++l)
            rows.push_back({to_string(r.mode), std::to_string(l + 1), format_double(r.signed_component_t[l]),
                            format_double(r.component_p[l]), sig.count(l + 1) ? "1" : "0"});
    };
    std::vector<int> tangent_significant;
    if (a.mode == "tangent" || a.mode == "both") {
        const GroupTestReport r = permutation_test_scores(s, split.group, opts);
        tangent_significant = r.significant;
        record(r);
    }
    if (a.mode == "group-space" || a.mode == "both")
        record(permutation_test_group_space(tangent, model.weights.weights, split.group, opts));
    run.json_file("compare.json", out);
    run.csv("compare_components.csv", {"mode", "component", "t", "p_value", "significant"}, rows);

    for (int g = 0; g < 2; ++g) {
        Shape mean = Shape::Zero(gpa.mean.rows(), 3);
        int count = 0;
        for (std::size_t i = 0; i < gpa.aligned.size(); ++i)
            if (split.group[i] == g) {
                mean += gpa.aligned[i];
                ++count;
            }
        mean /= static_cast<double>(count);
        run.mesh("mean_" + safe_name(g == 0 ? split.name_a : split.name_b) + ".obj", mean, sample.triangles);
    }
    if (!tangent_significant.empty()) {
        const SubspaceEffect e = combined_effect_shape(model, tangent_significant, a.effect_c);
        run.mesh("effect_plus.obj", e.plus_shape, sample.triangles);
        run.mesh("effect_minus.obj", e.minus_shape, sample.triangles);
    }
}

void run_split_affine(Run& run, const CohortArgs& cohort, const GpaArgs& gpa_args, bool weighted)
{
    const ShapeSample sample = load_cohort(cohort);
    const GpaResult gpa = weighted_gpa(sample, gpa_args.options());
    const AffineSplit split =
        affine_nonaffine_split(gpa.aligned, gpa.mean, weighted ? &gpa.mean_weights.weights : nullptr);
    const Eigen::VectorXd& w = gpa.mean_weights.weights;
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const std::string stem = stem_of(sample.names[i]);
        run.mesh("affine/" + stem + ".obj", split.affine[i], sample.triangles);
        run.mesh("nonaffine/" + stem + ".obj", split.non_affine[i], sample.triangles);
        CsvRow r{sample.names[i], format_double(a_norm(vec(split.affine[i] - gpa.mean), w)),
                 format_double(a_norm(vec(split.non_affine[i] - gpa.mean), w))};
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
                r.push_back(format_double(split.coefficients[i](x, y)));
        rows.push_back(std::move(r));
    }
    run.csv("split.csv",
            {"name", "affine_norm", "nonaffine_norm", "c00", "c01", "c02", "c10", "c11", "c12", "c20", "c21", "c22"},
            rows);
    run.mesh("mean.obj", gpa.mean, sample.triangles);
}

struct AsymArgs
{
    std::string input;
    std::string mesh;
    std::string pairing;
    std::string regions;
    std::string reference_model;
    bool per_region = false;
    bool rigid = false;
};

void run_asymmetry(Run& run, const AsymArgs& a)
{
    std::vector<SurfaceMesh> meshes;
    std::vector<std::string> names;
    if (!a.input.empty()) {
        MeshDirectory md = read_mesh_directory(a.input);
        meshes = std::move(md.meshes);
        names = std::move(md.names);
    } else {
        meshes.push_back(read_mesh(a.mesh));
        names.push_back(fs::path(a.mesh).filename().string());
    }
    const ShapeSample sample = make_sample(meshes, names);
    const BilateralPairing pairing = read_pairing(a.pairing, sample.vertex_count());
    const RegionMap regions = a.regions.empty() ? RegionMap{} : read_regions(a.regions, sample.vertex_count());
    std::optional<ControlModel> ref;
    if (!a.reference_model.empty())
        ref = load_control_model(a.reference_model);

    AsymmetryOptions opts;
    opts.allow_scaling = !a.rigid;
    opts.per_region_registration = a.per_region;
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const AsymmetryReport rep = assess_asymmetry(sample.shapes[i], sample.triangles, pairing, regions, opts);
        auto percentile = [&](const std::string& region, double score) -> std::string {
            if (!ref)
                return "";
            const auto it = ref->asymmetry_reference.find(region);
            if (it == ref->asymmetry_reference.end() || it->second.empty())
                return "";
            return format_double(percentile_rank(it->second, score));
        };
        rows.push_back({sample.names[i], "global", format_double(rep.global_score),
                        percentile("global", rep.global_score)});
        for (const auto& [region, score] : rep.region_scores)
            rows.push_back({sample.names[i], region, format_double(score), percentile(region, score)});
        double hi = rep.per_vertex_distance.maxCoeff();
        if (!(hi > 0.0))
            hi = 1.0;
        run.painted("asymmetry/" + stem_of(sample.names[i]) + ".ply", sample.shapes[i], sample.triangles,
                    rep.per_vertex_distance, ColorMap::sequential(0.0, hi));
    }
    run.csv("asymmetry.csv", {"name", "region", "score", "control_percentile"}, rows);
}

struct AssessArgs
{
    std::string controls;
    std::string controls_weights;
    std::string model;
    std::string case_mesh;
    std::string post_mesh;
    std::string pairing;
    std::string regions;
    double variance = 0.8;
    bool per_region = false;
};

json closest_json(const ClosestControlResult& c, const ControlModel& m)
{
    return {{"scores", vector_json(c.scores)},
            {"mahalanobis_d", c.d},
            {"chi2_threshold", m.chi2_threshold},
            {"alpha1", c.alpha1},
            {"residual_score", c.r},
            {"q95", m.q95},
            {"alpha2", c.alpha2},
            {"within_component_range", c.within_component_range},
            {"within_residual_range", c.within_residual_range},
            {"d_percentile", percentile_rank(std::span<const double>(m.control_d.data(),
                                                                     static_cast<std::size_t>(m.control_d.size())),
                                             c.d)},
            {"r_percentile", percentile_rank(std::span<const double>(m.control_r.data(),
                                                                     static_cast<std::size_t>(m.control_r.size())),
                                             c.r)},
            {"registration", transform_json(c.transform)}};
}

json asymmetry_json(const AsymmetryReport& rep, const ControlModel& m)
{
    json j = {{"global", rep.global_score}, {"regions", rep.region_scores}};
    json pct = json::object();
    auto add = [&](const std::string& name, double score) {
        const auto it = m.asymmetry_reference.find(name);
        if (it != m.asymmetry_reference.end() && !it->second.empty())
            pct[name] = percentile_rank(it->second, score);
    };
    add("global", rep.global_score);
    for (const auto& [name, score] : rep.region_scores)
        add(name, score);
    j["control_percentiles"] = pct;
    return j;
}

void run_assess(Run& run, const AssessArgs& a, const GpaArgs& gpa_args)
{
    const SurfaceMesh case_mesh = read_mesh(a.case_mesh);
    const Eigen::Index j = case_mesh.vertices.rows();
    const std::optional<BilateralPairing> pairing =
        a.pairing.empty() ? std::nullopt : std::optional<BilateralPairing>(read_pairing(a.pairing, j));
    const RegionMap regions = a.regions.empty() ? RegionMap{} : read_regions(a.regions, j);

    ControlModel model;
    if (!a.model.empty()) {
        model = load_control_model(a.model);
    } else {
        CohortArgs c{a.controls, "", a.controls_weights, a.pairing};
        const ShapeSample controls = load_cohort(c);
        ControlModelOptions opts;
        opts.variance_threshold = a.variance;
        opts.gpa = gpa_args.options();
        model = fit_control_model(controls, opts, regions);
        save_model(model, run.path("control_model.json"));
    }
    if (model.fpca.vertex_count() != j)
        throw ValidationError("case has " + std::to_string(j) + " vertices, control model has " +
                              std::to_string(model.fpca.vertex_count()));
    const Triangles& tris = model.fpca.triangles.empty() ? case_mesh.triangles : model.fpca.triangles;

    json out = {{"p", model.p}, {"variance_threshold", model.variance_threshold}, {"warnings", model.warnings}};
    if (!a.post_mesh.empty()) {
        if (!pairing)
            throw ValidationError("--post needs --pairing for the integrated assessment");
        const SurfaceMesh post = read_mesh(a.post_mesh);
        AsymmetryOptions aopts;
        aopts.per_region_registration = a.per_region;
        const IntegratedAssessment ia = integrated_assessment(model, case_mesh, post, *pairing, regions, aopts);
        for (const auto& [label, tp, mesh] :
             {std::tuple{"pre", &ia.pre, &case_mesh}, std::tuple{"post", &ia.post, &post}}) {
            out[label] = {{"closest_control", closest_json(tp->closest, model)},
                          {"asymmetry", asymmetry_json(tp->asymmetry, model)}};
            const std::string l = label;
            run.mesh(l + "_closest_control.obj", tp->closest.cc, tris);
            run.painted(l + "_normal_to_closest.ply", mesh->vertices, tris, tp->normal_to_closest,
                        ColorMap::symmetric_for(tp->normal_to_closest));
            run.painted(l + "_asymmetry.ply", mesh->vertices, tris, tp->asymmetry.per_vertex_distance,
                        ColorMap::sequential(0.0, std::max(tp->asymmetry.per_vertex_distance.maxCoeff(), 1e-12)));
        }
    } else {
        const ClosestControlResult cc = assess_individual(model, case_mesh.vertices);
        out["closest_control"] = closest_json(cc, model);
        if (pairing)
            out["asymmetry"] = asymmetry_json(assess_asymmetry(case_mesh.vertices, tris, *pairing, regions), model);
        run.mesh("registered.obj", cc.registered, tris);
        run.mesh("closest_control.obj", cc.cc, tris);
        const Eigen::VectorXd field = shape_difference_field(cc.cc, cc.registered, tris, DifferenceMode::normal);
        run.painted("normal_to_closest.ply", cc.registered, tris, field, ColorMap::symmetric_for(field));
    }
    run.json_file("assessment.json", out);
}

struct WarpArgs
{
    std::string source;
    std::string target;
    std::string templ;
    std::string landmarks;
    double ridge = 0.0;
};

void run_warp(Run& run, const WarpArgs& a)
{
    const SurfaceMesh source = read_mesh(a.source);
    const SurfaceMesh target = read_mesh(a.target);
    const SurfaceMesh templ = read_mesh(a.templ);
    if (source.vertices.rows() != target.vertices.rows())
        throw ValidationError("source and target vertex counts differ");
    Shape x = source.vertices, y = target.vertices;
    if (!a.landmarks.empty()) {
        std::vector<int> idx;
        const auto rows = parse_csv(read_text(a.landmarks));
        for (const auto& r : rows) {
            if (r.empty() || r[0] == "vertex_index")
                continue;
            const int v = std::stoi(r[0]);
            if (v < 0 || v >= source.vertices.rows())
                throw ValidationError(a.landmarks + ": landmark index " + r[0] + " out of range");
            idx.push_back(v);
        }
        x = source.vertices(idx, Eigen::all);
        y = target.vertices(idx, Eigen::all);
    }
    TpsOptions opts;
    opts.ridge = a.ridge;
    const WarpField field = fit_tps(x, y, opts);
    const Shape warped = apply_warp(field, templ.vertices);
    run.mesh("warped.obj", warped, templ.triangles);
    const Eigen::VectorXd moved = (warped - templ.vertices).rowwise().norm();
    run.painted("displacement.ply", warped, templ.triangles, moved,
                ColorMap::sequential(0.0, std::max(moved.maxCoeff(), 1e-12)));
    run.json_file("warp.json", {{"control_points", x.rows()},
                                {"bending_energy", field.bending_energy},
                                {"bending_by_coordinate", vector_json(field.bending_by_coordinate)},
                                {"affine", matrix_json(field.affine)},
                                {"ridge", a.ridge}});
}

struct SimArgs
{
    std::string base = "sphere";
    std::vector<double> spectrum{5.0, 3.0, 1.0, 0.5, 0.1};
    std::vector<double> radii{50.0, 50.0, 50.0};
};

void run_simulate(Run& run, SynthConfig config, const SimArgs& a)
{
    const auto base = parse_base_surface(a.base);
    if (!base)
        throw ValidationError("unknown base surface '" + a.base + "'");
    config.base = *base;
    config.eigen_spectrum = a.spectrum;
    if (a.radii.size() != 3)
        throw ValidationError("--radii needs three values");
    config.radii = Eigen::Vector3d(a.radii[0], a.radii[1], a.radii[2]);
    const SynthCohort cohort = synth_cohort(config);
    const ShapeSample& s = cohort.sample;

    std::vector<CsvRow> labels;
    json nuisance = json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        run.mesh("meshes/" + s.names[i] + ".obj", s.shapes[i], s.triangles);
        labels.push_back({s.names[i] + ".obj", cohort.truth.labels[i]});
        nuisance.push_back(transform_json(cohort.truth.nuisance[i]));
    }
    run.csv("labels.csv", {"filename", "label"}, labels);
    write_pairing(cohort.base.pairing, run.path("pairing.csv"));
    run.mesh("base.obj", cohort.base.mesh.vertices, cohort.base.mesh.triangles);
    json modes = json::array();
    for (Eigen::Index k = 0; k < cohort.truth.modes.cols(); ++k)
        modes.push_back(vector_json(cohort.truth.modes.col(k)));
    run.json_file("truth.json", {{"base", to_string(config.base)},
                                 {"subdivisions", config.subdivisions},
                                 {"vertex_count", s.vertex_count()},
                                 {"spectrum", config.eigen_spectrum},
                                 {"z", matrix_json(cohort.truth.z)},
                                 {"modes", modes},
                                 {"labels", cohort.truth.labels},
                                 {"nuisance", nuisance},
                                 {"shift_mode", config.shift_mode},
                                 {"shift_sigmas", config.shift_sigmas},
                                 {"asymmetry_amplitude", config.asymmetry_amplitude},
                                 {"noise_sd", config.noise_sd},
                                 {"seed", config.seed}});
}

struct DiffArgs
{
    std::string base;
    std::string other;
    std::string mode = "normal";
    std::vector<double> range;
    double reference = 0.0;
};

void run_diff(Run& run, const DiffArgs& a)
{
    const SurfaceMesh base = read_mesh(a.base);
    const SurfaceMesh other = read_mesh(a.other);
    const std::array<SurfaceMesh, 2> pair{base, other};
    const CorrespondenceReport rep = validate_correspondence(pair);
    if (!rep.ok())
        throw ValidationError("meshes are not in correspondence: " + rep.issues.front());
    const auto mode = parse_difference_mode(a.mode);
    if (!mode)
        throw ValidationError("unknown difference mode '" + a.mode + "'");
    const Eigen::VectorXd field = shape_difference_field(base.vertices, other.vertices, base.triangles, *mode);
    ColorMap cmap = ColorMap::symmetric_for(field);
    if (!a.range.empty()) {
        if (a.range.size() != 2)
            throw ValidationError("--range needs lo,hi");
        cmap = ColorMap::diverging(a.range[0], a.range[1], a.reference);
    }
    const PaintReport paint = run.painted("diff.ply", base.vertices, base.triangles, field, cmap);
    std::vector<CsvRow> rows;
    for (Eigen::Index j = 0; j < field.size(); ++j)
        rows.push_back({std::to_string(j), format_double(field[j])});
    run.csv("diff.csv", {"vertex", "value"}, rows);
    if (paint.clamped > 0)
        std::cerr << "surfshape: note: " << paint.clamped << " values clamped to the colour range\n";
}

// ------------------------------------------------------------- manifest

void write_manifest(const Run& run, const CLI::App* sub, std::uint64_t seed)
{
    json options = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name().empty())
            continue;
        const auto& results = opt->results();
        std::string name = opt->get_name();
        while (!name.empty() && name.front() == '-')
            name.erase(name.begin());
        if (!results.empty())
            options[name] = results.size() == 1 ? json(results.front()) : json(results);
        else if (!opt->get_default_str().empty())
            options[name] = opt->get_default_str();
    }
    json files = json::array();
    for (const auto& f : run.written())
        files.push_back(f);
    const json manifest = {{"tool", "surfshape"},
                           {"version", SURFSHAPE_VERSION},
                           {"subcommand", sub->get_name()},
                           {"options", options},
                           {"seed", seed},
                           {"artifacts", files},
                           {"timestamp", utc_timestamp()}};
    write_json(manifest, run.out() / "manifest.json");
}

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r')
            c = ' ';
    return s;
}

int fail(const char* kind, const std::string& message, int code)
{
    std::cerr << "surfshape: error: " << kind << ": " << one_line(message) << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"surfshape: functional shape analysis of corresponded triangulated surfaces"};
    app.set_version_flag("--version", SURFSHAPE_VERSION);
    app.set_config("--config", "", "INI/TOML run configuration ([subcommand] sections); command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    CohortArgs cohort;
    GpaArgs gpa;

    auto* reg = app.add_subcommand("register", "Weighted generalized Procrustes registration");
    add_common(reg, common);
    add_cohort(reg, cohort);
    add_gpa(reg, gpa);

    PcaArgs pca_args;
    auto* pca = app.add_subcommand("pca", "Functional principal components of a registered cohort");
    add_common(pca, common);
    add_cohort(pca, cohort);
    add_gpa(pca, gpa);
    pca->add_option("--components", pca_args.components, "Fixed number of components (0 = use --variance)");
    pca->add_option("--variance", pca_args.variance, "Cumulative variance fraction")->capture_default_str();
    pca->add_option("--effect-c", pca_args.effect_c, "Component meshes at mean ± c·sd")->capture_default_str();
    pca->add_option("--export-components", pca_args.export_components, "Component meshes to write")
        ->capture_default_str();

    TourArgs tour_args;
    auto* tour = app.add_subcommand("tour", "Grand tour through component space");
    add_common(tour, common);
    tour->add_option("--model", tour_args.model, "FPCA model.json")->required()->check(CLI::ExistingFile);
    tour->add_option("--components", tour_args.components, "Components used (0 = all)");
    tour->add_option("--stops", tour_args.stops, "Random stops")->capture_default_str();
    tour->add_option("--frames", tour_args.frames, "Frames between stops")->capture_default_str();

    CompareArgs cmp_args;
    auto* cmp = app.add_subcommand("compare", "Two-group permutation comparison");
    add_common(cmp, common);
    add_cohort(cmp, cohort, true);
    add_gpa(cmp, gpa);
    cmp->add_option("--components", cmp_args.components, "Components compared (0 = use --variance)");
    cmp->add_option("--variance", cmp_args.variance, "Cumulative variance fraction")->capture_default_str();
    cmp->add_option("--perm", cmp_args.perm, "Permutations")->capture_default_str()->check(CLI::PositiveNumber);
    cmp->add_option("--alpha", cmp_args.alpha, "Family-wise level")->capture_default_str();
    cmp->add_option("--mode", cmp_args.mode, "Test space")
        ->capture_default_str()
        ->check(CLI::IsMember({"tangent", "group-space", "both"}));
    cmp->add_option("--reference", cmp_args.reference, "Label of group A (default: first in sorted order)");
    cmp->add_option("--effect-c", cmp_args.effect_c, "Effect meshes at mean ± c·sd")->capture_default_str();

    auto* split = app.add_subcommand("split-affine", "Affine / non-affine decomposition of a registered cohort");
    add_common(split, common);
    add_cohort(split, cohort);
    add_gpa(split, gpa);
    bool split_weighted = false;
    split->add_flag("--weighted", split_weighted, "Area-weighted regression on the mean");

    AsymArgs asym_args;
    auto* asym = app.add_subcommand("asymmetry", "Bilateral asymmetry scores");
    add_common(asym, common);
    auto* asym_in = asym->add_option("-i,--input", asym_args.input, "Directory of meshes")
                        ->check(CLI::ExistingDirectory);
    auto* asym_mesh = asym->add_option("--mesh", asym_args.mesh, "Single mesh")->check(CLI::ExistingFile);
    asym_in->excludes(asym_mesh);
    asym->add_option("--pairing", asym_args.pairing, "CSV index,mirror_index")->required()->check(CLI::ExistingFile);
    asym->add_option("--regions", asym_args.regions, "CSV vertex_index,region_name")->check(CLI::ExistingFile);
    asym->add_option("--reference-model", asym_args.reference_model, "Control model for percentiles")
        ->check(CLI::ExistingFile);
    asym->add_flag("--per-region-registration", asym_args.per_region, "Re-register within each region");
    asym->add_flag("--rigid", asym_args.rigid, "Disable scaling in the mirror registration");

    AssessArgs assess_args;
    auto* assess = app.add_subcommand("assess", "Closest-control assessment of an individual");
    add_common(assess, common);
    add_gpa(assess, gpa);
    auto* a_ctrl = assess->add_option("--controls", assess_args.controls, "Directory of control meshes")
                       ->check(CLI::ExistingDirectory);
    auto* a_model = assess->add_option("--model", assess_args.model, "Saved control_model.json")
                        ->check(CLI::ExistingFile);
    a_ctrl->excludes(a_model);
    assess->add_option("--controls-weights", assess_args.controls_weights, "CSV vertex weight overrides")
        ->check(CLI::ExistingFile);
    assess->add_option("--case", assess_args.case_mesh, "Case mesh (pre-operative)")
        ->required()
        ->check(CLI::ExistingFile);
    assess->add_option("--post", assess_args.post_mesh, "Post-operative mesh")->check(CLI::ExistingFile);
    assess->add_option("--pairing", assess_args.pairing, "CSV index,mirror_index")->check(CLI::ExistingFile);
    assess->add_option("--regions", assess_args.regions, "CSV vertex_index,region_name")->check(CLI::ExistingFile);
    assess->add_option("--variance", assess_args.variance, "Control variance threshold")->capture_default_str();
    assess->add_flag("--per-region-registration", assess_args.per_region, "Re-register within each region");

    WarpArgs warp_args;
    auto* warp = app.add_subcommand("warp", "Thin-plate-spline warp of a template");
    add_common(warp, common);
    warp->add_option("--source", warp_args.source, "Source shape")->required()->check(CLI::ExistingFile);
    warp->add_option("--target", warp_args.target, "Target shape")->required()->check(CLI::ExistingFile);
    warp->add_option("--template", warp_args.templ, "Template mesh to warp")->required()->check(CLI::ExistingFile);
    warp->add_option("--landmarks", warp_args.landmarks, "CSV of control vertex indices")
        ->check(CLI::ExistingFile);
    warp->add_option("--ridge", warp_args.ridge, "Ridge added to the kernel diagonal")->capture_default_str();

    SynthConfig sim;
    SimArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Synthetic cohort with planted ground truth");
    add_common(simulate, common);
    simulate->add_option("--base", sim_args.base, "sphere | ellipsoid | superellipsoid")->capture_default_str();
    simulate->add_option("--subdivisions", sim.subdivisions, "Icosphere subdivisions")->capture_default_str();
    simulate->add_option("--radii", sim_args.radii, "Three semi-axes (mm)")->delimiter(',')->capture_default_str();
    simulate->add_option("--exponent", sim.superellipsoid_exponent, "Superellipsoid exponent")
        ->capture_default_str();
    simulate->add_option("--spectrum", sim_args.spectrum, "Planted eigenvalues, decreasing")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--n-a", sim.n_a, "Group A size")->capture_default_str();
    simulate->add_option("--n-b", sim.n_b, "Group B size")->capture_default_str();
    simulate->add_option("--shift-mode", sim.shift_mode, "1-based mode shifted in group B")->capture_default_str();
    simulate->add_option("--shift-sigmas", sim.shift_sigmas, "Shift in planted sd units")->capture_default_str();
    simulate->add_option("--asymmetry", sim.asymmetry_amplitude, "Asymmetry bump amplitude (mm)")
        ->capture_default_str();
    simulate->add_option("--noise-sd", sim.noise_sd, "Per-coordinate noise (mm)")->capture_default_str();
    simulate->add_option("--rotation-deg", sim.rotation_deg, "Nuisance rotation bound")->capture_default_str();
    simulate->add_option("--translation-sd", sim.translation_sd, "Nuisance translation sd (mm)")
        ->capture_default_str();
    simulate->add_option("--log-scale-sd", sim.log_scale_sd, "Nuisance log-scale sd")->capture_default_str();
    simulate->add_flag("--exact-moments", sim.exact_moments, "Whiten draws to the planned moments");

    DiffArgs diff_args;
    auto* diff = app.add_subcommand("diff", "Painted per-vertex difference between two shapes");
    add_common(diff, common);
    diff->add_option("base", diff_args.base, "Base shape")->required()->check(CLI::ExistingFile);
    diff->add_option("other", diff_args.other, "Compared shape")->required()->check(CLI::ExistingFile);
    diff->add_option("--mode", diff_args.mode, "x | y | z | normal | signed_euclidean")->capture_default_str();
    diff->add_option("--range", diff_args.range, "Colour range lo,hi")->delimiter(',');
    diff->add_option("--reference", diff_args.reference, "Neutral value")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), 2);
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub == asym && asym_args.input.empty() && asym_args.mesh.empty())
            throw ValidationError("asymmetry needs --input or --mesh");
        if (sub == assess && assess_args.controls.empty() && assess_args.model.empty())
            throw ValidationError("assess needs --controls or --model");

        Run run(common.out);
        fs::create_directories(run.out());
        if (sub == reg)
            run_register(run, cohort, gpa);
        else if (sub == pca)
            run_pca(run, cohort, gpa, pca_args);
        else if (sub == tour)
            run_tour(run, tour_args, common.seed);
        else if (sub == cmp)
            run_compare(run, cohort, gpa, cmp_args, common.seed);
        else if (sub == split)
            run_split_affine(run, cohort, gpa, split_weighted);
        else if (sub == asym)
            run_asymmetry(run, asym_args);
        else if (sub == assess)
            run_assess(run, assess_args, gpa);
        else if (sub == warp)
            run_warp(run, warp_args);
        else if (sub == simulate) {
            sim.seed = common.seed;
            run_simulate(run, sim, sim_args);
        } else if (sub == diff)
            run_diff(run, diff_args);
        write_manifest(run, sub, common.seed);
    } catch (const ValidationError& e) {
        return fail("validation", e.what(), 2);
    } catch (const NumericalError& e) {
        return fail("numerical", e.what(), 3);
    } catch (const fs::filesystem_error& e) {
        return fail("validation", e.what(), 2);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), 1);
    }
    return 0;
}
