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
#include "surfshape/mesh.hpp"

#include "surfshape/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace surfshape {

void validate_mesh(const SurfaceMesh& mesh)
{
    const Eigen::Index j = mesh.vertex_count();
    if (j == 0)
        throw ValidationError("no vertices");
    if (j < 3)
        throw ValidationError("mesh needs at least 3 vertices, got " + std::to_string(j));
    if (mesh.triangles.empty())
        throw ValidationError("mesh has no triangles");
    if (!mesh.vertices.allFinite()) {
        for (Eigen::Index v = 0; v < j; ++v)
            if (!mesh.vertices.row(v).allFinite())
                throw ValidationError("non-finite coordinate at vertex " + std::to_string(v));
    }

    std::vector<char> used(static_cast<std::size_t>(j), 0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int idx : tri) {
            if (idx < 0 || idx >= j)
                throw ValidationError("triangle " + std::to_string(t) + " references vertex " +
                                      std::to_string(idx) + " outside [0, " + std::to_string(j) + ")");
            used[static_cast<std::size_t>(idx)] = 1;
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw ValidationError("triangle " + std::to_string(t) + " repeats a vertex index");
    }
    for (Eigen::Index v = 0; v < j; ++v)
        if (!used[static_cast<std::size_t>(v)])
            throw ValidationError("vertex " + std::to_string(v) + " belongs to no triangle");

    for (const auto& [name, idx] : mesh.regions)
        for (int v : idx)
            if (v < 0 || v >= j)
                throw ValidationError("region '" + name + "' references vertex " + std::to_string(v) +
                                      " outside [0, " + std::to_string(j) + ")");
    for (const auto& [v, w] : mesh.weight_overrides) {
        if (v < 0 || v >= j)
            throw ValidationError("weight override for vertex " + std::to_string(v) + " out of range");
        if (w && !(*w >= 0.0))
            throw ValidationError("weight override for vertex " + std::to_string(v) + " is negative");
    }
}

double triangle_area(const Eigen::RowVector3d& p0, const Eigen::RowVector3d& p1,
                     const Eigen::RowVector3d& p2)
{
    const Eigen::Vector3d e1 = (p1 - p0).transpose();
    const Eigen::Vector3d e2 = (p2 - p0).transpose();
    return 0.5 * e1.cross(e2).norm();
}

double surface_area(const Shape& vertices, const Triangles& triangles)
{
    double total = 0.0;
    for (const auto& t : triangles)
        total += triangle_area(vertices.row(t[0]), vertices.row(t[1]), vertices.row(t[2]));
    return total;
}

AreaWeights vertex_areas(const Shape& vertices, const Triangles& triangles, const WeightOverrides& overrides)
{
    AreaWeights out;
    out.weights = Eigen::VectorXd::Zero(vertices.rows());
    double total = 0.0;
    for (const auto& t : triangles) {
        const double area = triangle_area(vertices.row(t[0]), vertices.row(t[1]), vertices.row(t[2]));
        total += area;
        for (int v : t)
            out.weights[v] += area / 3.0;
    }
    if (!(total > 0.0))
        throw NumericalError("zero-area surface");

    if (!overrides.empty()) {
        double surface_sum = 0.0;
        Eigen::Index surface_count = 0;
        for (Eigen::Index v = 0; v < out.weights.size(); ++v) {
            if (!overrides.count(static_cast<int>(v))) {
                surface_sum += out.weights[v];
                ++surface_count;
            }
        }
        const double mean_area = surface_count > 0 ? surface_sum / static_cast<double>(surface_count) : 0.0;
        for (const auto& [v, w] : overrides)
            out.weights[v] = w ? *w : mean_area;
        out.total_area = out.weights.sum();
    } else {
        out.total_area = total;
    }
    return out;
}

AreaWeights vertex_areas(const SurfaceMesh& mesh)
{
    return vertex_areas(mesh.vertices, mesh.triangles, mesh.weight_overrides);
}

Shape vertex_normals(const Shape& vertices, const Triangles& triangles)
{
    Shape acc = Shape::Zero(vertices.rows(), 3);
    std::vector<int> degree(static_cast<std::size_t>(vertices.rows()), 0);
    for (const auto& t : triangles) {
        const Eigen::Vector3d e1 = (vertices.row(t[1]) - vertices.row(t[0])).transpose();
        const Eigen::Vector3d e2 = (vertices.row(t[2]) - vertices.row(t[0])).transpose();
        // |e1 × e2| = 2·area, so summing raw cross products is area weighting.
        const Eigen::RowVector3d n = e1.cross(e2).transpose();
        for (int v : t) {
            acc.row(v) += n;
            ++degree[static_cast<std::size_t>(v)];
        }
    }
    for (Eigen::Index v = 0; v < acc.rows(); ++v) {
        if (degree[static_cast<std::size_t>(v)] == 0)
            throw ValidationError("vertex " + std::to_string(v) + " has no incident triangle");
        const double len = acc.row(v).norm();
        if (!(len > 0.0))
            throw NumericalError("vertex " + std::to_string(v) + " has only degenerate incident triangles");
        acc.row(v) /= len;
    }
    return acc;
}

Shape vertex_normals(const SurfaceMesh& mesh)
{
    return vertex_normals(mesh.vertices, mesh.triangles);
}

std::vector<int> BilateralPairing::midline() const
{
    std::vector<int> out;
    for (std::size_t j = 0; j < mirror.size(); ++j)
        if (mirror[j] == static_cast<int>(j))
            out.push_back(static_cast<int>(j));
    return out;
}

void validate_pairing(const BilateralPairing& pairing, Eigen::Index vertex_count)
{
    const auto n = static_cast<Eigen::Index>(pairing.mirror.size());
    if (n != vertex_count)
        throw ValidationError("pairing covers " + std::to_string(n) + " vertices, mesh has " +
                              std::to_string(vertex_count));
    for (Eigen::Index j = 0; j < n; ++j) {
        const int m = pairing.mirror[static_cast<std::size_t>(j)];
        if (m < 0 || m >= n)
            throw ValidationError("pairing maps vertex " + std::to_string(j) + " to out-of-range index " +
                                  std::to_string(m));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const int m = pairing.mirror[static_cast<std::size_t>(j)];
        if (pairing.mirror[static_cast<std::size_t>(m)] != j)
            throw ValidationError("pairing is not an involution: pair(pair(" + std::to_string(j) +
                                  ")) = " + std::to_string(pairing.mirror[static_cast<std::size_t>(m)]));
    }
    if (!(pairing.plane_normal.norm() > 0.0) || !pairing.plane_normal.allFinite())
        throw ValidationError("pairing plane normal must be a non-zero finite vector");
}

CorrespondenceReport validate_correspondence(std::span<const SurfaceMesh> meshes,
                                             std::span<const std::string> names)
{
    CorrespondenceReport report;
    auto label = [&](std::size_t i) {
        return i < names.size() ? names[i] : "shape " + std::to_string(i);
    };
    if (meshes.empty()) {
        report.issues.push_back("sample is empty");
        return report;
    }
    const auto& ref = meshes.front();
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        const auto& m = meshes[i];
        if (i > 0 && m.vertex_count() != ref.vertex_count()) {
            std::ostringstream os;
            os << label(i) << ": vertex count " << m.vertex_count() << " ≠ " << ref.vertex_count();
            report.issues.push_back(os.str());
        }
        if (i > 0 && m.triangles != ref.triangles) {
            std::ostringstream os;
            if (m.triangles.size() != ref.triangles.size()) {
                os << label(i) << ": triangle count " << m.triangles.size() << " ≠ " << ref.triangles.size();
            } else {
                const auto it = std::mismatch(m.triangles.begin(), m.triangles.end(), ref.triangles.begin());
                os << label(i) << ": triangle " << (it.first - m.triangles.begin())
                   << " differs from the reference triangulation";
            }
            report.issues.push_back(os.str());
        }
        for (Eigen::Index v = 0; v < m.vertices.rows(); ++v) {
            if (!m.vertices.row(v).allFinite()) {
                report.issues.push_back(label(i) + ": non-finite coordinate at vertex " + std::to_string(v));
            }
        }
    }
    return report;
}

ShapeSample make_sample(std::span<const SurfaceMesh> meshes, std::vector<std::string> names,
                        std::vector<std::string> labels)
{
    const auto report = validate_correspondence(meshes, names);
    if (!report.ok()) {
        std::string msg = "correspondence check failed: " + report.issues.front();
        if (report.issues.size() > 1)
            msg += " (+" + std::to_string(report.issues.size() - 1) + " more)";
        throw ValidationError(msg);
    }
    if (!labels.empty() && labels.size() != meshes.size())
        throw ValidationError("got " + std::to_string(labels.size()) + " labels for " +
                              std::to_string(meshes.size()) + " shapes");
    validate_mesh(meshes.front());

    ShapeSample sample;
    sample.triangles = meshes.front().triangles;
    sample.weight_overrides = meshes.front().weight_overrides;
    for (std::size_t i = 0; i < meshes.size(); ++i) {
        sample.shapes.push_back(meshes[i].vertices);
        sample.names.push_back(i < names.size() ? names[i] : "shape" + std::to_string(i));
    }
    sample.labels = std::move(labels);
    return sample;
}

std::optional<DifferenceMode> parse_difference_mode(const std::string& name)
{
    if (name == "x")
        return DifferenceMode::x;
    if (name == "y")
        return DifferenceMode::y;
    if (name == "z")
        return DifferenceMode::z;
    if (name == "normal")
        return DifferenceMode::normal;
    if (name == "signed_euclidean" || name == "signed-euclidean")
        return DifferenceMode::signed_euclidean;
    return std::nullopt;
}

std::string to_string(DifferenceMode mode)
{
    switch (mode) {
    case DifferenceMode::x:
        return "x";
    case DifferenceMode::y:
        return "y";
    case DifferenceMode::z:
        return "z";
    case DifferenceMode::normal:
        return "normal";
    case DifferenceMode::signed_euclidean:
        return "signed_euclidean";
    }
    return "?";
}

Eigen::VectorXd shape_difference_field(const Shape& base, const Shape& other, const Triangles& triangles,
                                       DifferenceMode mode)
{
    if (base.rows() != other.rows())
        throw ValidationError("vertex count " + std::to_string(other.rows()) + " ≠ " +
                              std::to_string(base.rows()));
    const Shape delta = other - base;
    switch (mode) {
    case DifferenceMode::x:
        return delta.col(0);
    case DifferenceMode::y:
        return delta.col(1);
    case DifferenceMode::z:
        return delta.col(2);
    case DifferenceMode::normal:
    case DifferenceMode::signed_euclidean:
        break;
    }
    const Shape normals = vertex_normals(base, triangles);
    const Eigen::VectorXd projected = delta.cwiseProduct(normals).rowwise().sum();
    if (mode == DifferenceMode::normal)
        return projected;
    Eigen::VectorXd out(base.rows());
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        const double len = delta.row(j).norm();
        out[j] = projected[j] < 0.0 ? -len : len;
    }
    return out;
}

} // namespace surfshape
