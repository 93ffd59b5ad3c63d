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

#include "surfshape/shape.hpp"

#include <Eigen/Core>

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace surfshape {

using Triangle = std::array<int, 3>;
using Triangles = std::vector<Triangle>;

/// Named vertex subsets ("nose", "upper_lip", ...). Index lists are sorted
/// and unique.
using RegionMap = std::map<std::string, std::vector<int>>;

/// Per-vertex area weight overrides. A value of std::nullopt means "use the
/// mean area of the non-overridden vertices", which is how embedded curve
/// points without a surface patch of their own are weighted.
using WeightOverrides = std::map<int, std::optional<double>>;

struct SurfaceMesh
{
    Shape vertices;
    Triangles triangles;
    RegionMap regions;
    WeightOverrides weight_overrides;

    Eigen::Index vertex_count() const { return vertices.rows(); }
};

/// Throws ValidationError unless: J >= 3, T >= 1, every index is in [0, J),
/// no triangle repeats a vertex, every vertex belongs to some triangle, every
/// region and override index is in range and coordinates are finite.
void validate_mesh(const SurfaceMesh& mesh);

/// Diagonal of A: a_j = (1/3) Σ_{t incident to j} |T_t|.
struct AreaWeights
{
    Eigen::VectorXd weights;
    double total_area = 0.0;
};

double triangle_area(const Eigen::RowVector3d& p0, const Eigen::RowVector3d& p1,
                     const Eigen::RowVector3d& p2);

AreaWeights vertex_areas(const Shape& vertices, const Triangles& triangles,
                         const WeightOverrides& overrides = {});
AreaWeights vertex_areas(const SurfaceMesh& mesh);

/// Sum of triangle areas, ignoring overrides.
double surface_area(const Shape& vertices, const Triangles& triangles);

/// Area-weighted average of incident face normals, unit length. Orientation
/// follows the triangle winding (counterclockwise = outward).
Shape vertex_normals(const Shape& vertices, const Triangles& triangles);
Shape vertex_normals(const SurfaceMesh& mesh);

/// Left/right vertex involution across a nominal symmetry plane through the
/// origin with unit normal plane_normal.
struct BilateralPairing
{
    std::vector<int> mirror;
    Eigen::Vector3d plane_normal = Eigen::Vector3d::UnitX();

    std::vector<int> midline() const;
};

/// Throws ValidationError unless mirror is an involution on [0, J) and the
/// plane normal is non-zero. The stored normal is expected to be unit length.
void validate_pairing(const BilateralPairing& pairing, Eigen::Index vertex_count);

/// A cohort in vertex-wise correspondence sharing one triangulation.
struct ShapeSample
{
    std::vector<Shape> shapes;
    Triangles triangles;
    std::vector<std::string> names;
    std::vector<std::string> labels; // empty, or one per shape
    WeightOverrides weight_overrides;
    std::optional<BilateralPairing> pairing;

    std::size_t size() const { return shapes.size(); }
    Eigen::Index vertex_count() const { return shapes.empty() ? 0 : shapes.front().rows(); }
};

struct CorrespondenceReport
{
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

/// Compares every mesh against the first: vertex count, triangle list and
/// finiteness of coordinates. Never throws; failures go into the report.
CorrespondenceReport validate_correspondence(std::span<const SurfaceMesh> meshes,
                                             std::span<const std::string> names = {});

/// Builds a validated sample. Throws ValidationError carrying the
/// correspondence report if the meshes disagree.
ShapeSample make_sample(std::span<const SurfaceMesh> meshes, std::vector<std::string> names = {},
                        std::vector<std::string> labels = {});

enum class DifferenceMode
{
    x,
    y,
    z,
    normal,
    signed_euclidean
};

std::optional<DifferenceMode> parse_difference_mode(const std::string& name);
std::string to_string(DifferenceMode mode);

/// Per-vertex scalar describing how `other` departs from `base`. Normals are
/// taken on the base surface.
Eigen::VectorXd shape_difference_field(const Shape& base, const Shape& other,
                                       const Triangles& triangles, DifferenceMode mode);

} // namespace surfshape
