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
#include "surfshape/errors.hpp"
#include "surfshape/mesh.hpp"
#include "surfshape/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace surfshape;

TEST_CASE("icosphere vertex counts")
{
    for (int s = 2; s <= 4; ++s) {
        SynthConfig c;
        c.subdivisions = s;
        const SynthBase b = synth_base_mesh(c);
        CHECK(b.mesh.vertices.rows() == icosphere_vertex_count(s));
        CHECK(b.mesh.triangles.size() == static_cast<std::size_t>(20 * (1 << (2 * s))));
        validate_mesh(b.mesh);
    }
    CHECK(icosphere_vertex_count(2) == 162);
    CHECK(icosphere_vertex_count(3) == 642);
}

TEST_CASE("base surfaces are closed, outward and exactly mirror symmetric")
{
    for (auto kind : {BaseSurface::sphere, BaseSurface::ellipsoid, BaseSurface::superellipsoid}) {
        SynthConfig c;
        c.base = kind;
        c.radii = {60.0, 45.0, 35.0};
        const SynthBase b = synth_base_mesh(c);
        validate_pairing(b.pairing, b.mesh.vertex_count());
        const Shape& v = b.mesh.vertices;
        for (Eigen::Index j = 0; j < v.rows(); ++j) {
            const int m = b.pairing.mirror[static_cast<std::size_t>(j)];
            CHECK(b.pairing.mirror[static_cast<std::size_t>(m)] == j);
            CHECK(v(m, 0) == -v(j, 0));
            CHECK(v(m, 1) == v(j, 1));
            CHECK(v(m, 2) == v(j, 2));
            if (m == j)
                CHECK(v(j, 0) == 0.0);
        }
        CHECK_FALSE(b.pairing.midline().empty());
        // outward normals: the normal at the +x extreme points along +x
        Eigen::Index far;
        v.col(0).maxCoeff(&far);
        CHECK(vertex_normals(b.mesh)(far, 0) > 0.9);
        CHECK(v.col(0).maxCoeff() == doctest::Approx(60.0));
        if (kind != BaseSurface::sphere)
            CHECK(v.col(2).maxCoeff() == doctest::Approx(35.0));
    }
}

TEST_CASE("planted modes are A-orthonormal and free of similarity motion")
{
    SynthConfig c;
    c.base = BaseSurface::ellipsoid;
    c.radii = {50.0, 40.0, 30.0};
    const SynthBase b = synth_base_mesh(c);
    const Eigen::MatrixXd modes = planted_modes(b.mesh, 8);
    const Eigen::VectorXd a = vertex_areas(b.mesh).weights;
    const Eigen::VectorXd sw = slot_weights(a);
    const Eigen::MatrixXd gram = modes.transpose() * sw.asDiagonal() * modes;
    CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);

    const Shape& x = b.mesh.vertices;
    const Eigen::Index j = x.rows();
    const Eigen::RowVector3d centre = weighted_centroid(x, a);
    std::vector<Eigen::VectorXd> motions;
    for (int d = 0; d < 3; ++d) {
        Shape t = Shape::Zero(j, 3);
        t.col(d).setOnes();
        motions.push_back(vec(t));
    }
    const Shape xc = x.rowwise() - centre;
    for (int d = 0; d < 3; ++d) {
        Shape r = Shape::Zero(j, 3);
        const int p = (d + 1) % 3;
        const int q = (d + 2) % 3;
        r.col(p) = -xc.col(q);
        r.col(q) = xc.col(p);
        motions.push_back(vec(r));
    }
    motions.push_back(vec(xc));
    for (const auto& m : motions)
        for (int k = 0; k < 8; ++k)
            CHECK(std::abs(a_inner(modes.col(k), m, a)) < 1e-9 * a_norm(m, a));
}

TEST_CASE("cohorts are deterministic in the seed")
{
    SynthConfig c;
    c.n_a = 4;
    c.n_b = 3;
    c.shift_mode = 2;
    c.shift_sigmas = 1.0;
    c.noise_sd = 0.1;
    c.rotation_deg = 15;
    c.translation_sd = 2;
    c.log_scale_sd = 0.05;
    c.seed = 11;
    const SynthCohort a = synth_cohort(c);
    const SynthCohort b = synth_cohort(c);
    REQUIRE(a.sample.size() == 7);
    for (std::size_t i = 0; i < 7; ++i)
        CHECK(a.sample.shapes[i] == b.sample.shapes[i]);
    CHECK(a.sample.labels == std::vector<std::string>{"A", "A", "A", "A", "B", "B", "B"});
    CHECK(a.sample.names[0] == "shape_0000");
    CHECK(a.sample.pairing.has_value());
    c.seed = 12;
    CHECK(synth_cohort(c).sample.shapes[0] != a.sample.shapes[0]);
}

TEST_CASE("noise-free cohorts follow the generative formula")
{
    SynthConfig c;
    c.n_a = 3;
    c.n_b = 2;
    c.shift_mode = 1;
    c.shift_sigmas = 2.0;
    c.asymmetry_amplitude = 0.5;
    c.rotation_deg = 30;
    c.translation_sd = 5;
    const SynthCohort co = synth_cohort(c);
    const Eigen::MatrixXd& modes = co.truth.modes;
    const Shape asym = 0.5 * asymmetry_field(co.base.mesh);
    for (std::size_t i = 0; i < co.sample.size(); ++i) {
        Eigen::VectorXd coef(c.n_modes());
        for (int k = 0; k < c.n_modes(); ++k)
            coef[k] = co.truth.z(static_cast<Eigen::Index>(i), k) * std::sqrt(c.eigen_spectrum[static_cast<std::size_t>(k)]);
        Shape expected = co.truth.base + unvec(modes * coef) + asym;
        if (co.sample.labels[i] == "B")
            expected += co.truth.group_shift;
        expected = apply_similarity(expected, co.truth.nuisance[i]);
        CHECK((co.sample.shapes[i] - expected).cwiseAbs().maxCoeff() < 1e-9);
    }
    const Eigen::VectorXd a = vertex_areas(co.base.mesh).weights;
    CHECK(a_norm(vec(co.truth.group_shift), a) == doctest::Approx(2.0 * std::sqrt(5.0)));
}

TEST_CASE("exact moments whiten the mode draws")
{
    SynthConfig c;
    c.n_a = 12;
    c.exact_moments = true;
    const SynthCohort co = synth_cohort(c);
    const Eigen::MatrixXd& z = co.truth.z;
    const Eigen::RowVectorXd mean = z.colwise().mean();
    CHECK(mean.cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXd cov = (z.rowwise() - mean).transpose() * (z.rowwise() - mean) / 11.0;
    CHECK((cov - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("asymmetry field peaks at one millimetre on the +x side")
{
    SynthConfig c;
    const SynthBase b = synth_base_mesh(c);
    const Shape f = asymmetry_field(b.mesh);
    const Eigen::VectorXd len = f.rowwise().norm();
    Eigen::Index peak;
    CHECK(len.maxCoeff(&peak) <= 1.0 + 1e-12);
    CHECK(len.maxCoeff() > 0.8);
    CHECK(b.mesh.vertices(peak, 0) > 0.0);
}

TEST_CASE("invalid configurations are rejected")
{
    auto bad = [](auto edit) {
        SynthConfig c;
        edit(c);
        CHECK_THROWS_AS(validate_config(c), ValidationError);
    };
    bad([](SynthConfig& c) { c.subdivisions = 1; });
    bad([](SynthConfig& c) { c.subdivisions = 8; });
    bad([](SynthConfig& c) { c.radii[1] = 0.0; });
    bad([](SynthConfig& c) { c.superellipsoid_exponent = 0.0; });
    bad([](SynthConfig& c) { c.eigen_spectrum = {}; });
    bad([](SynthConfig& c) { c.eigen_spectrum = {1.0, 2.0}; });
    bad([](SynthConfig& c) { c.eigen_spectrum = {1.0, 1.0}; });
    bad([](SynthConfig& c) { c.eigen_spectrum = std::vector<double>(22, 1.0); });
    bad([](SynthConfig& c) { c.n_a = 0; });
    bad([](SynthConfig& c) { c.n_b = -1; });
    bad([](SynthConfig& c) { c.shift_mode = 6; });
    bad([](SynthConfig& c) { c.noise_sd = -1.0; });
    bad([](SynthConfig& c) {
        c.exact_moments = true;
        c.n_a = 5;
    });
    CHECK(parse_base_surface("superellipsoid") == BaseSurface::superellipsoid);
    CHECK_FALSE(parse_base_surface("torus").has_value());
    CHECK(to_string(BaseSurface::ellipsoid) == "ellipsoid");
}
