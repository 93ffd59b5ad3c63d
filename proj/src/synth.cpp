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
#include "surfshape/synth.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/random.hpp"

#include <Eigen/Geometry>
#include <Eigen/QR>

#include <array>
#include <cstdio>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

namespace surfshape {

std::optional<BaseSurface> parse_base_surface(const std::string& name)
{
    if (name == "sphere")
        return BaseSurface::sphere;
    if (name == "ellipsoid")
        return BaseSurface::ellipsoid;
    if (name == "superellipsoid")
        return BaseSurface::superellipsoid;
    return std::nullopt;
}

std::string to_string(BaseSurface base)
{
    switch (base) {
    case BaseSurface::sphere:
        return "sphere";
    case BaseSurface::ellipsoid:
        return "ellipsoid";
    case BaseSurface::superellipsoid:
        return "superellipsoid";
    }
    return "?";
}

void validate_config(const SynthConfig& c)
{
    if (c.subdivisions < 2 || c.subdivisions > 7)
        throw ValidationError("subdivisions must lie in 2..7");
    if (!(c.radii.minCoeff() > 0.0))
        throw ValidationError("radii must be positive");
    if (!(c.superellipsoid_exponent > 0.0))
        throw ValidationError("superellipsoid exponent must be positive");
    if (c.eigen_spectrum.empty())
        throw ValidationError("eigen spectrum must be non-empty");
    if (c.eigen_spectrum.size() > 21)
        throw ValidationError("at most 21 planted modes are available");
    for (std::size_t k = 0; k < c.eigen_spectrum.size(); ++k) {
        if (!(c.eigen_spectrum[k] > 0.0))
            throw ValidationError("eigen spectrum entries must be positive");
        if (k > 0 && !(c.eigen_spectrum[k] < c.eigen_spectrum[k - 1]))
            throw ValidationError("eigen spectrum must be strictly decreasing");
    }
    if (c.n_a < 1 || c.n_b < 0)
        throw ValidationError("group sizes must satisfy n_a >= 1, n_b >= 0");
    if (c.shift_mode < 0 || c.shift_mode > c.n_modes())
        throw ValidationError("shift_mode must be 0 or a planted mode index");
    if (c.noise_sd < 0.0 || c.translation_sd < 0.0 || c.log_scale_sd < 0.0 || c.rotation_deg < 0.0)
        throw ValidationError("noise and nuisance magnitudes must be non-negative");
    if (c.exact_moments && c.n_samples() <= c.n_modes())
        throw ValidationError("exact_moments needs more samples than planted modes");
}

int icosphere_vertex_count(int subdivisions)
{
    int count = 10;
    for (int s = 0; s < subdivisions; ++s)
        count *= 4;
    return count + 2;
}

namespace {

using Key = std::tuple<double, double, double>;

Key key_of(const Eigen::RowVector3d& v)
{
    return {v[0], v[1], v[2]};
}

void icosphere(int subdivisions, Shape& vertices, Triangles& triangles)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::RowVector3d> v = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                                         {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                                         {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : v)
        p /= p.norm();
    Triangles tri = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
                     {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
                     {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};

    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end())
                return it->second;
            Eigen::RowVector3d m = (v[static_cast<std::size_t>(a)] + v[static_cast<std::size_t>(b)]) * 0.5;
            m /= m.norm();
            v.push_back(m);
            const int idx = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        Triangles next;
        next.reserve(tri.size() * 4);
        for (const auto& f : tri) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        tri = std::move(next);
    }

    vertices.resize(static_cast<Eigen::Index>(v.size()), 3);
    for (std::size_t i = 0; i < v.size(); ++i)
        vertices.row(static_cast<Eigen::Index>(i)) = v[i];
    // Outward orientation.
    for (auto& f : tri) {
        const Eigen::Vector3d e1 = (vertices.row(f[1]) - vertices.row(f[0])).transpose();
        const Eigen::Vector3d e2 = (vertices.row(f[2]) - vertices.row(f[0])).transpose();
        const Eigen::Vector3d c = (vertices.row(f[0]) + vertices.row(f[1]) + vertices.row(f[2])).transpose();
        if (e1.cross(e2).dot(c) < 0.0)
            std::swap(f[1], f[2]);
    }
    triangles = std::move(tri);
}

double signed_pow(double x, double e)
{
    return std::copysign(std::pow(std::abs(x), e), x);
}

// Scalar harmonics of degree 2..4 on the unit sphere.
double harmonic(int k, double x, double y, double z)
{
    switch (k) {
    case 0: return x * y;
    case 1: return y * z;
    case 2: return x * z;
    case 3: return x * x - y * y;
    case 4: return 3 * z * z - 1;
    case 5: return x * (x * x - 3 * y * y);
    case 6: return y * (3 * x * x - y * y);
    case 7: return z * (x * x - y * y);
    case 8: return x * y * z;
    case 9: return x * (5 * z * z - 1);
    case 10: return y * (5 * z * z - 1);
    case 11: return z * (5 * z * z - 3);
    case 12: return x * y * (x * x - y * y);
    case 13: return x * x * x * x - 6 * x * x * y * y + y * y * y * y;
    case 14: return y * z * (3 * x * x - y * y);
    case 15: return x * z * (x * x - 3 * y * y);
    case 16: return x * y * (7 * z * z - 1);
    case 17: return (x * x - y * y) * (7 * z * z - 1);
    case 18: return y * z * (7 * z * z - 3);
    case 19: return x * z * (7 * z * z - 3);
    default: return 35 * z * z * z * z - 30 * z * z + 3;
    }
}

// Modified Gram-Schmidt (two passes) of `candidate` against `basis` under the
// A-inner product, then A-normalisation.
bool orthonormalize_against(Eigen::VectorXd& candidate, const std::vector<Eigen::VectorXd>& basis,
                            const Eigen::VectorXd& a)
{
    const double before = a_norm(candidate, a);
    for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis)
            candidate -= a_inner(candidate, b, a) * b;
    const double after = a_norm(candidate, a);
    if (!(after > 1e-8 * before))
        return false;
    candidate /= after;
    return true;
}

} // namespace

SynthBase synth_base_mesh(const SynthConfig& config)
{
    validate_config(config);
    Shape unit;
    Triangles tri;
    icosphere(config.subdivisions, unit, tri);

    const Eigen::Index j = unit.rows();
    std::map<Key, int> lookup;
    for (Eigen::Index i = 0; i < j; ++i)
        lookup.emplace(key_of(unit.row(i)), static_cast<int>(i));

    SynthBase out;
    out.pairing.plane_normal = Eigen::Vector3d::UnitX();
    out.pairing.mirror.resize(static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < j; ++i) {
        Eigen::RowVector3d r = unit.row(i);
        r[0] = -r[0];
        const auto it = lookup.find(key_of(r));
        if (it == lookup.end())
            throw NumericalError("icosphere construction lost mirror symmetry at vertex " + std::to_string(i));
        out.pairing.mirror[static_cast<std::size_t>(i)] = it->second;
    }

    Shape v(j, 3);
    for (Eigen::Index i = 0; i < j; ++i) {
        const Eigen::RowVector3d u = unit.row(i);
        switch (config.base) {
        case BaseSurface::sphere:
            v.row(i) = config.radii[0] * u;
            break;
        case BaseSurface::ellipsoid:
            v.row(i) = u.cwiseProduct(config.radii.transpose());
            break;
        case BaseSurface::superellipsoid: {
            const double e = config.superellipsoid_exponent;
            v.row(i) << config.radii[0] * signed_pow(u[0], e), config.radii[1] * signed_pow(u[1], e),
                config.radii[2] * signed_pow(u[2], e);
            break;
        }
        }
    }
    // Force exact mirror symmetry: partner rows carry the negated x.
    for (Eigen::Index i = 0; i < j; ++i) {
        const int m = out.pairing.mirror[static_cast<std::size_t>(i)];
        if (m == i)
            v(i, 0) = 0.0;
        else if (m > i) {
            v(m, 0) = -v(i, 0);
            v(m, 1) = v(i, 1);
            v(m, 2) = v(i, 2);
        }
    }
    out.mesh.vertices = std::move(v);
    out.mesh.triangles = std::move(tri);
    return out;
}

Eigen::MatrixXd planted_modes(const SurfaceMesh& base, int n_modes)
{
    if (n_modes < 0 || n_modes > 21)
        throw ValidationError("planted_modes: n_modes must lie in 0..21");
    const Shape& x = base.vertices;
    const Eigen::Index j = x.rows();
    const Eigen::VectorXd a = vertex_areas(base).weights;
    const Shape normals = vertex_normals(base);

    std::vector<Eigen::VectorXd> basis;
    auto add_nuisance = [&](const Shape& field) {
        Eigen::VectorXd v = vec(field);
        if (orthonormalize_against(v, basis, a))
            basis.push_back(v);
    };
    for (int d = 0; d < 3; ++d) {
        Shape t = Shape::Zero(j, 3);
        t.col(d).setOnes();
        add_nuisance(t);
    }
    const Shape centred = x.rowwise() - weighted_centroid(x, a);
    for (int d = 0; d < 3; ++d) {
        Eigen::Vector3d axis = Eigen::Vector3d::Zero();
        axis[d] = 1.0;
        Shape r(j, 3);
        for (Eigen::Index i = 0; i < j; ++i)
            r.row(i) = axis.cross(centred.row(i).transpose()).transpose();
        add_nuisance(r);
    }
    add_nuisance(centred);

    Eigen::MatrixXd modes(3 * j, n_modes);
    int found = 0;
    for (int h = 0; h < 21 && found < n_modes; ++h) {
        Shape field(j, 3);
        for (Eigen::Index i = 0; i < j; ++i) {
            const Eigen::RowVector3d u = x.row(i).normalized();
            field.row(i) = harmonic(h, u[0], u[1], u[2]) * normals.row(i);
        }
        Eigen::VectorXd v = vec(field);
        if (!orthonormalize_against(v, basis, a))
            continue;
        basis.push_back(v);
        modes.col(found++) = v;
    }
    if (found < n_modes)
        throw NumericalError("could not build " + std::to_string(n_modes) + " independent planted modes");
    return modes;
}

Shape asymmetry_field(const SurfaceMesh& base)
{
    const Shape normals = vertex_normals(base);
    const Eigen::RowVector3d centre = Eigen::RowVector3d(0.6, 0.0, 0.8);
    Shape field(base.vertices.rows(), 3);
    for (Eigen::Index i = 0; i < field.rows(); ++i) {
        const Eigen::RowVector3d u = base.vertices.row(i).normalized();
        const double w = std::exp(-(u - centre).squaredNorm() / (2.0 * 0.3 * 0.3));
        field.row(i) = w * normals.row(i);
    }
    return field;
}

SynthCohort synth_cohort(const SynthConfig& config)
{
    validate_config(config);
    SynthCohort out;
    out.base = synth_base_mesh(config);
    const SurfaceMesh& base = out.base.mesh;
    const Eigen::Index j = base.vertices.rows();
    const int k = config.n_modes();
    const int n = config.n_samples();

    SynthGroundTruth& truth = out.truth;
    truth.modes = planted_modes(base, k);
    truth.spectrum = config.eigen_spectrum;
    truth.base = base.vertices;
    truth.group_shift = Shape::Zero(j, 3);
    if (config.shift_mode > 0) {
        const int m = config.shift_mode - 1;
        truth.group_shift = unvec(config.shift_sigmas * std::sqrt(config.eigen_spectrum[static_cast<std::size_t>(m)]) *
                                  truth.modes.col(m));
    }
    const Shape asym = config.asymmetry_amplitude * asymmetry_field(base);

    // Draw order per shape: k mode scores, 3J noise values (x column, then
    // y, then z), rotation axis (3 normals), angle (uniform), translation
    // (3 normals), log-scale (1 normal).
    Rng rng(config.seed);
    truth.z.resize(n, k);
    std::vector<Shape> noise(static_cast<std::size_t>(n));
    truth.nuisance.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (int m = 0; m < k; ++m)
            truth.z(i, m) = rng.normal();
        Shape e(j, 3);
        for (int d = 0; d < 3; ++d)
            for (Eigen::Index v = 0; v < j; ++v)
                e(v, d) = config.noise_sd * rng.normal();
        noise[static_cast<std::size_t>(i)] = std::move(e);

        Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
        const double angle = config.rotation_deg * std::numbers::pi / 180.0 * (2.0 * rng.uniform01() - 1.0);
        Eigen::RowVector3d shift(rng.normal(), rng.normal(), rng.normal());
        const double log_scale = rng.normal();
        auto& t = truth.nuisance[static_cast<std::size_t>(i)];
        t.rotation = axis.norm() > 0.0 ? Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix()
                                       : Eigen::Matrix3d::Identity();
        t.translation = config.translation_sd * shift;
        t.scale = std::exp(config.log_scale_sd * log_scale);
    }

    if (config.exact_moments) {
        Eigen::MatrixXd centred = truth.z.rowwise() - truth.z.colwise().mean();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(centred);
        const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
        // Column signs follow the original draws.
        truth.z = q * std::sqrt(static_cast<double>(n - 1));
        for (int m = 0; m < k; ++m)
            if (truth.z.col(m).dot(centred.col(m)) < 0.0)
                truth.z.col(m) *= -1.0;
    }

    const Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(config.eigen_spectrum.data(), k).cwiseSqrt();
    std::vector<SurfaceMesh> meshes;
    for (int i = 0; i < n; ++i) {
        const std::string label = i < config.n_a ? "A" : "B";
        truth.labels.push_back(label);
        Shape s = base.vertices + unvec(truth.modes * truth.z.row(i).transpose().cwiseProduct(sd)) + asym +
                  noise[static_cast<std::size_t>(i)];
        if (label == "B")
            s += truth.group_shift;
        SurfaceMesh m;
        m.vertices = apply_similarity(s, truth.nuisance[static_cast<std::size_t>(i)]);
        m.triangles = base.triangles;
        meshes.push_back(std::move(m));
    }

    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "shape_%04d", i);
        names.emplace_back(buf);
    }
    out.sample = make_sample(meshes, names, config.n_b > 0 ? truth.labels : std::vector<std::string>{});
    out.sample.pairing = out.base.pairing;
    return out;
}

} // namespace surfshape
