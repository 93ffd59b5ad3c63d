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
#include "surfshape/individual.hpp"
#include "surfshape/mesh.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace surfshape {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- meshes

/// Reads the v/f subset of Wavefront OBJ. Face tokens may carry /vt/vn
/// suffixes and negative (relative) indices. Other record types are ignored.
SurfaceMesh read_mesh(const fs::path& path);
SurfaceMesh parse_obj(std::string_view text, const std::string& source = "<memory>");

/// Writes vertices with 9 significant digits and 1-based triangles.
void write_mesh(const SurfaceMesh& mesh, const fs::path& path);
std::string format_obj(const SurfaceMesh& mesh);

/// Sorted *.obj files of a directory; names are the file names.
struct MeshDirectory
{
    std::vector<SurfaceMesh> meshes;
    std::vector<std::string> names;
};
MeshDirectory read_mesh_directory(const fs::path& dir);

// ------------------------------------------------------------ painting

enum class ColorKind
{
    diverging,
    sequential
};

struct ColorMap
{
    ColorKind kind = ColorKind::diverging;
    double lo = -1.0;
    double hi = 1.0;
    double reference = 0.0; // neutral value (diverging only)

    static ColorMap diverging(double lo, double hi, double reference = 0.0);
    static ColorMap sequential(double lo, double hi);
    /// Symmetric diverging map around 0 covering max |field|.
    static ColorMap symmetric_for(const Eigen::VectorXd& field);
};

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kColdEnd{59, 76, 192};
inline constexpr Rgb kNeutral{221, 221, 221};
inline constexpr Rgb kWarmEnd{180, 4, 38};

void validate_colormap(const ColorMap& cmap);

/// Colour of a value already inside [lo, hi]; out-of-range values clamp.
Rgb map_color(const ColorMap& cmap, double value);

struct PaintReport
{
    int clamped = 0;
};

/// ascii PLY with per-vertex uchar red/green/blue.
PaintReport write_painted_mesh(const SurfaceMesh& mesh, const Eigen::VectorXd& field, const ColorMap& cmap,
                               const fs::path& path);
std::string format_painted_ply(const SurfaceMesh& mesh, const Eigen::VectorXd& field, const ColorMap& cmap,
                               PaintReport* report = nullptr);

// -------------------------------------------------------------- models

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const FpcaModel& model);
nlohmann::json to_json(const ControlModel& model);
FpcaModel fpca_from_json(const nlohmann::json& j);
ControlModel control_from_json(const nlohmann::json& j);

void save_model(const FpcaModel& model, const fs::path& path);
void save_model(const ControlModel& model, const fs::path& path);
FpcaModel load_fpca_model(const fs::path& path);
ControlModel load_control_model(const fs::path& path);

/// Value of the "schema" field of a model file.
std::string model_schema(const fs::path& path);

// ---------------------------------------------------------------- CSVs

/// vertex_index,region_name (header optional).
RegionMap read_regions(const fs::path& path, Eigen::Index vertex_count);

/// index,mirror_index (header optional) plus an optional
/// plane_normal,x,y,z line. Every vertex must appear once.
BilateralPairing read_pairing(const fs::path& path, Eigen::Index vertex_count);
void write_pairing(const BilateralPairing& pairing, const fs::path& path);

/// vertex_index,weight where weight is a number or "mean".
WeightOverrides read_weight_overrides(const fs::path& path, Eigen::Index vertex_count);

/// filename,label (header optional).
std::map<std::string, std::string> read_labels(const fs::path& path);

/// Loads a cohort directory; labels are looked up by file name.
ShapeSample read_cohort(const fs::path& dir, const std::optional<fs::path>& labels = std::nullopt,
                        const std::optional<fs::path>& weight_overrides = std::nullopt,
                        const std::optional<fs::path>& pairing = std::nullopt);

// ------------------------------------------------------------- writers

/// %.17g, with "nan"/"inf" spelled out.
std::string format_double(double v);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

/// Pretty-printed with two-space indent and a trailing newline.
void write_json(const nlohmann::json& j, const fs::path& path);
nlohmann::json read_json(const fs::path& path);

using CsvRow = std::vector<std::string>;
std::string format_csv(const CsvRow& header, const std::vector<CsvRow>& rows);
void write_csv(const CsvRow& header, const std::vector<CsvRow>& rows, const fs::path& path);

/// Parsed rows of a simple CSV (double quotes may wrap a field); blank and
/// #-lines dropped.
std::vector<CsvRow> parse_csv(const std::string& text);

} // namespace surfshape
