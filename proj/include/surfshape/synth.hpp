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

#include "surfshape/mesh.hpp"
#include "surfshape/registration.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace surfshape {

enum class BaseSurface
{
    sphere,
    ellipsoid,
    superellipsoid
};

std::optional<BaseSurface> parse_base_surface(const std::string& name);
std::string to_string(BaseSurface base);

/// Synthetic cohort with planted ground truth. Eigenvalues are in units of
/// the area-weighted inner product (area × length²).
struct SynthConfig
{
    BaseSurface base = BaseSurface::sphere;
    int subdivisions = 2;
    Eigen::Vector3d radii{50.0, 50.0, 50.0};
    double superellipsoid_exponent = 0.6;

    std::vector<double> eigen_spectrum{5.0, 3.0, 1.0, 0.5, 0.1};
    int n_a = 20;
    int n_b = 0;              // > 0 gives a labelled two-group cohort "A"/"B"
    int shift_mode = 0;       // 1-based planted mode shifted in group B, 0 for none
    double shift_sigmas = 0.0;
    double asymmetry_amplitude = 0.0; // mm, applied to every shape
    double noise_sd = 0.0;            // mm, iid per coordinate
    double rotation_deg = 0.0;        // nuisance rotation angle drawn from [-r, r]
    double translation_sd = 0.0;      // mm
    double log_scale_sd = 0.0;
    bool exact_moments = false; // whiten the draws so sample moments equal the plan
    std::uint64_t seed = 1;

    int n_modes() const { return static_cast<int>(eigen_spectrum.size()); }
    int n_samples() const { return n_a + n_b; }
};

/// Throws ValidationError on an invalid configuration.
void validate_config(const SynthConfig& config);

/// 10·4^s + 2 vertices for s subdivisions of the icosahedron.
int icosphere_vertex_count(int subdivisions);

struct SynthBase
{
    SurfaceMesh mesh;
    BilateralPairing pairing; // mirror across x = 0
};

/// Mirror-symmetric closed surface. Vertex j and its partner have bitwise
/// negated x-coordinates, and midline vertices have x = 0 exactly.
SynthBase synth_base_mesh(const SynthConfig& config);

/// n_modes smooth normal displacement fields (degree 2-4 harmonics times the
/// surface normal), A-orthonormal on the base and A-orthogonal to the seven
/// infinitesimal similarity motions. Returned as 3J × n_modes.
Eigen::MatrixXd planted_modes(const SurfaceMesh& base, int n_modes);

/// Localised bump along the normal on the +x side of the surface, peak 1 mm.
Shape asymmetry_field(const SurfaceMesh& base);

struct SynthGroundTruth
{
    Eigen::MatrixXd z;      // n × n_modes standard-normal draws
    Eigen::MatrixXd modes;  // 3J × n_modes
    std::vector<double> spectrum;
    std::vector<SimilarityTransform> nuisance;
    std::vector<std::string> labels;
    Shape base;
    Shape group_shift;      // added to group B
};

struct SynthCohort
{
    SynthBase base;
    ShapeSample sample;
    SynthGroundTruth truth;
};

/// shape_i = base + Σ_k z_ik √λ_k mode_k (+ shift for group B) + asymmetry
/// + noise, then a random similarity transform. Deterministic in the seed.
SynthCohort synth_cohort(const SynthConfig& config);

} // namespace surfshape
