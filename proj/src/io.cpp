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
#include "surfshape/io.hpp"

#include "surfshape/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace surfshape {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        const std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        if (i > start)
            out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::optional<double> to_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

std::optional<long long> to_int(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

std::string fmt9(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& what)
{
    throw ValidationError(source + ":" + std::to_string(line) + ": " + what);
}

} // namespace

// ---------------------------------------------------------------- meshes

SurfaceMesh parse_obj(std::string_view text, const std::string& source)
{
    std::vector<Eigen::RowVector3d> verts;
    Triangles tris;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty())
            continue;
        if (tok[0] == "v") {
            if (tok.size() < 4 || tok.size() > 7)
                fail_at(source, line_no, "malformed vertex record");
            Eigen::RowVector3d p;
            for (int d = 0; d < 3; ++d) {
                const auto v = to_double(tok[static_cast<std::size_t>(d) + 1]);
                if (!v)
                    fail_at(source, line_no, "malformed vertex coordinate '" + std::string(tok[d + 1]) + "'");
                p[d] = *v;
            }
            verts.push_back(p);
        } else if (tok[0] == "f") {
            if (tok.size() != 4)
                fail_at(source, line_no,
                        "face with " + std::to_string(tok.size() - 1) + " vertices; only triangles are supported");
            Triangle t{};
            for (int k = 0; k < 3; ++k) {
                std::string_view s = tok[static_cast<std::size_t>(k) + 1];
                s = s.substr(0, s.find('/'));
                const auto idx = to_int(s);
                if (!idx || *idx == 0)
                    fail_at(source, line_no, "malformed face index '" + std::string(tok[k + 1]) + "'");
                const long long count = static_cast<long long>(verts.size());
                const long long zero_based = *idx > 0 ? *idx - 1 : count + *idx;
                if (zero_based < 0 || zero_based >= count)
                    fail_at(source, line_no, "face index " + std::to_string(*idx) + " out of range");
                t[static_cast<std::size_t>(k)] = static_cast<int>(zero_based);
            }
            tris.push_back(t);
        }
        if (end == text.size())
            break;
    }
    if (verts.empty())
        throw ValidationError(source + ": no vertices");
    SurfaceMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i)
        mesh.vertices.row(static_cast<Eigen::Index>(i)) = verts[i];
    mesh.triangles = std::move(tris);
    return mesh;
}

SurfaceMesh read_mesh(const fs::path& path)
{
    return parse_obj(read_text(path), path.string());
}

std::string format_obj(const SurfaceMesh& mesh)
{
    std::string out;
    out.reserve(static_cast<std::size_t>(mesh.vertices.rows()) * 40 + mesh.triangles.size() * 20);
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
        out += "v ";
        out += fmt9(mesh.vertices(i, 0));
        out += ' ';
        out += fmt9(mesh.vertices(i, 1));
        out += ' ';
        out += fmt9(mesh.vertices(i, 2));
        out += '\n';
    }
    for (const auto& t : mesh.triangles)
        out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' + std::to_string(t[2] + 1) +
               '\n';
    return out;
}

void write_mesh(const SurfaceMesh& mesh, const fs::path& path)
{
    write_text(path, format_obj(mesh));
}

MeshDirectory read_mesh_directory(const fs::path& dir)
{
    if (!fs::is_directory(dir))
        throw ValidationError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".obj")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
    if (files.empty())
        throw ValidationError("no .obj files in " + dir.string());
    MeshDirectory out;
    for (const auto& f : files) {
        out.meshes.push_back(read_mesh(f));
        out.names.push_back(f.filename().string());
    }
    return out;
}

// ------------------------------------------------------------ painting

ColorMap ColorMap::diverging(double lo, double hi, double reference)
{
    return {ColorKind::diverging, lo, hi, reference};
}

ColorMap ColorMap::sequential(double lo, double hi)
{
    return {ColorKind::sequential, lo, hi, lo};
}

ColorMap ColorMap::symmetric_for(const Eigen::VectorXd& field)
{
    double m = field.size() > 0 ? field.cwiseAbs().maxCoeff() : 0.0;
    if (!(m > 0.0))
        m = 1.0;
    return diverging(-m, m, 0.0);
}

void validate_colormap(const ColorMap& c)
{
    if (!std::isfinite(c.lo) || !std::isfinite(c.hi) || !(c.lo < c.hi))
        throw ValidationError("colour map needs finite lo < hi");
    if (c.kind == ColorKind::diverging && !(c.reference >= c.lo && c.reference <= c.hi))
        throw ValidationError("colour map reference must lie in [lo, hi]");
}

namespace {

using Lab = Eigen::Vector3d;

constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

double lab_f(double t)
{
    constexpr double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}

double lab_finv(double t)
{
    constexpr double d = 6.0 / 29.0;
    return t > d ? t * t * t : 3.0 * d * d * (t - 4.0 / 29.0);
}

Lab to_lab(const Rgb& c)
{
    Eigen::Vector3d lin;
    for (int k = 0; k < 3; ++k) {
        const double s = c[static_cast<std::size_t>(k)] / 255.0;
        lin[k] = s <= 0.04045 ? s / 12.92 : std::pow((s + 0.055) / 1.055, 2.4);
    }
    const double x = 0.4124564 * lin[0] + 0.3575761 * lin[1] + 0.1804375 * lin[2];
    const double y = 0.2126729 * lin[0] + 0.7151522 * lin[1] + 0.0721750 * lin[2];
    const double z = 0.0193339 * lin[0] + 0.1191920 * lin[1] + 0.9503041 * lin[2];
    const double fx = lab_f(x / kWhiteX), fy = lab_f(y / kWhiteY), fz = lab_f(z / kWhiteZ);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Rgb from_lab(const Lab& lab)
{
    const double fy = (lab[0] + 16.0) / 116.0;
    const double x = kWhiteX * lab_finv(fy + lab[1] / 500.0);
    const double y = kWhiteY * lab_finv(fy);
    const double z = kWhiteZ * lab_finv(fy - lab[2] / 200.0);
    const double lin[3] = {3.2404542 * x - 1.5371385 * y - 0.4985314 * z,
                           -0.9692660 * x + 1.8760108 * y + 0.0415560 * z,
                           0.0556434 * x - 0.2040259 * y + 1.0572252 * z};
    Rgb out{};
    for (int k = 0; k < 3; ++k) {
        const double l = std::clamp(lin[k], 0.0, 1.0);
        const double s = l <= 0.0031308 ? 12.92 * l : 1.055 * std::pow(l, 1.0 / 2.4) - 0.055;
        out[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0));
    }
    return out;
}

Rgb blend(const Rgb& from, const Rgb& to, double t)
{
    if (t <= 0.0)
        return from;
    if (t >= 1.0)
        return to;
    return from_lab((1.0 - t) * to_lab(from) + t * to_lab(to));
}

} // namespace

Rgb map_color(const ColorMap& c, double value)
{
    const double v = std::clamp(value, c.lo, c.hi);
    if (c.kind == ColorKind::sequential)
        return blend(kNeutral, kWarmEnd, (v - c.lo) / (c.hi - c.lo));
    if (v < c.reference)
        return blend(kNeutral, kColdEnd, (c.reference - v) / (c.reference - c.lo));
    if (v > c.reference)
        return blend(kNeutral, kWarmEnd, (v - c.reference) / (c.hi - c.reference));
    return kNeutral;
}

std::string format_painted_ply(const SurfaceMesh& mesh, const Eigen::VectorXd& field, const ColorMap& cmap,
                               PaintReport* report)
{
    validate_colormap(cmap);
    const Eigen::Index j = mesh.vertices.rows();
    if (field.size() != j)
        throw ValidationError("painted field has " + std::to_string(field.size()) + " values for " +
                              std::to_string(j) + " vertices");
    PaintReport rep;
    for (Eigen::Index i = 0; i < j; ++i) {
        if (!std::isfinite(field[i]))
            throw ValidationError("painted field is not finite at vertex " + std::to_string(i));
        if (field[i] < cmap.lo || field[i] > cmap.hi)
            ++rep.clamped;
    }

    std::string out = "ply\nformat ascii 1.0\ncomment surfshape painted mesh\n";
    out += "comment colormap " + std::string(cmap.kind == ColorKind::diverging ? "diverging" : "sequential") +
           " lo " + format_double(cmap.lo) + " hi " + format_double(cmap.hi) + " reference " +
           format_double(cmap.reference) + "\n";
    out += "comment clamped " + std::to_string(rep.clamped) + "\n";
    out += "element vertex " + std::to_string(j) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    out += "property double value\n";
    out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
    out += "property list uchar int vertex_indices\nend_header\n";
    for (Eigen::Index i = 0; i < j; ++i) {
        const Rgb c = map_color(cmap, field[i]);
        out += fmt9(mesh.vertices(i, 0)) + ' ' + fmt9(mesh.vertices(i, 1)) + ' ' + fmt9(mesh.vertices(i, 2)) + ' ' +
               std::to_string(c[0]) + ' ' + std::to_string(c[1]) + ' ' + std::to_string(c[2]) + ' ' +
               format_double(field[i]) + '\n';
    }
    for (const auto& t : mesh.triangles)
        out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
    if (report)
        *report = rep;
    return out;
}

PaintReport write_painted_mesh(const SurfaceMesh& mesh, const Eigen::VectorXd& field, const ColorMap& cmap,
                               const fs::path& path)
{
    PaintReport rep;
    write_text(path, format_painted_ply(mesh, field, cmap, &rep));
    return rep;
}

// -------------------------------------------------------------- models

namespace {

json vector_json(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

json shape_json(const Shape& x)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        rows.push_back({x(i, 0), x(i, 1), x(i, 2)});
    return rows;
}

const json& field(const json& j, const std::string& name, const std::string& where)
{
    if (!j.is_object() || !j.contains(name))
        throw ValidationError(where + ": missing field '" + name + "'");
    return j.at(name);
}

template <typename T>
T get_field(const json& j, const std::string& name, const std::string& where)
{
    const json& f = field(j, name, where);
    try {
        return f.get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + ": field '" + name + "' has the wrong type");
    }
}

Eigen::VectorXd get_vector(const json& j, const std::string& name, const std::string& where)
{
    const auto v = get_field<std::vector<double>>(j, name, where);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Shape get_shape(const json& j, const std::string& name, const std::string& where)
{
    const auto rows = get_field<std::vector<std::array<double, 3>>>(j, name, where);
    Shape x(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int d = 0; d < 3; ++d)
            x(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<std::size_t>(d)];
    return x;
}

void check_header(const json& j, const std::string& schema, const std::string& where)
{
    const auto s = get_field<std::string>(j, "schema", where);
    if (s != schema)
        throw ValidationError(where + ": schema '" + s + "' where '" + schema + "' was expected");
    const auto version = get_field<int>(j, "schema_version", where);
    if (version != kSchemaVersion)
        throw ValidationError(where + ": schema_version " + std::to_string(version) + " is not supported (expected " +
                              std::to_string(kSchemaVersion) + ")");
}

json fpca_body(const FpcaModel& m)
{
    json j;
    j["vertex_count"] = m.vertex_count();
    j["components"] = m.components();
    j["mean"] = shape_json(m.mean);
    j["vertex_weights"] = vector_json(m.weights.weights);
    j["total_area"] = m.weights.total_area;
    j["eigenvalues"] = vector_json(m.eigenvalues);
    j["explained"] = vector_json(m.explained);
    json ef = json::array();
    for (Eigen::Index k = 0; k < m.eigenfunctions.cols(); ++k)
        ef.push_back(vector_json(m.eigenfunctions.col(k)));
    j["eigenfunctions"] = std::move(ef);
    j["total_variance"] = m.total_variance;
    j["n_samples"] = m.n_samples;
    j["rank"] = m.rank;
    json tris = json::array();
    for (const auto& t : m.triangles)
        tris.push_back({t[0], t[1], t[2]});
    j["triangles"] = std::move(tris);
    j["warnings"] = m.warnings;
    return j;
}

FpcaModel fpca_body_from(const json& j, const std::string& where)
{
    FpcaModel m;
    const auto jv = get_field<long long>(j, "vertex_count", where);
    const auto k = get_field<int>(j, "components", where);
    m.mean = get_shape(j, "mean", where);
    m.weights.weights = get_vector(j, "vertex_weights", where);
    m.weights.total_area = get_field<double>(j, "total_area", where);
    m.eigenvalues = get_vector(j, "eigenvalues", where);
    m.explained = get_vector(j, "explained", where);
    m.total_variance = get_field<double>(j, "total_variance", where);
    m.n_samples = get_field<int>(j, "n_samples", where);
    m.rank = get_field<int>(j, "rank", where);
    const auto ef = get_field<std::vector<std::vector<double>>>(j, "eigenfunctions", where);
    const auto tris = get_field<std::vector<std::array<int, 3>>>(j, "triangles", where);
    m.warnings = get_field<std::vector<std::string>>(j, "warnings", where);

    if (jv < 1 || m.mean.rows() != jv)
        throw ValidationError(where + ": mean has " + std::to_string(m.mean.rows()) + " rows, vertex_count is " +
                              std::to_string(jv));
    if (m.weights.weights.size() != jv)
        throw ValidationError(where + ": vertex_weights length does not match vertex_count");
    if (!(m.weights.weights.array() > 0.0).all())
        throw ValidationError(where + ": vertex_weights must be positive");
    if (k < 0 || m.eigenvalues.size() != k || m.explained.size() != k || static_cast<int>(ef.size()) != k)
        throw ValidationError(where + ": eigenvalues, explained and eigenfunctions must all have 'components' entries");
    for (int i = 0; i < k; ++i) {
        if (!(m.eigenvalues[i] > 0.0))
            throw ValidationError(where + ": eigenvalues must be positive");
        if (i > 0 && m.eigenvalues[i] > m.eigenvalues[i - 1])
            throw ValidationError(where + ": eigenvalues are not sorted in non-increasing order");
    }
    m.eigenfunctions.resize(3 * jv, k);
    for (int i = 0; i < k; ++i) {
        if (static_cast<long long>(ef[static_cast<std::size_t>(i)].size()) != 3 * jv)
            throw ValidationError(where + ": eigenfunction " + std::to_string(i + 1) + " has the wrong length");
        m.eigenfunctions.col(i) =
            Eigen::Map<const Eigen::VectorXd>(ef[static_cast<std::size_t>(i)].data(), 3 * jv);
    }
    for (const auto& t : tris)
        for (int v : t)
            if (v < 0 || v >= jv)
                throw ValidationError(where + ": triangle index " + std::to_string(v) + " out of range");
    m.triangles = tris;
    return m;
}

} // namespace

json to_json(const FpcaModel& model)
{
    json j = fpca_body(model);
    j["schema"] = "surfshape.fpca_model";
    j["schema_version"] = kSchemaVersion;
    return j;
}

json to_json(const ControlModel& m)
{
    json j;
    j["schema"] = "surfshape.control_model";
    j["schema_version"] = kSchemaVersion;
    j["fpca"] = fpca_body(m.fpca);
    j["p"] = m.p;
    j["variance_threshold"] = m.variance_threshold;
    j["chi2_threshold"] = m.chi2_threshold;
    j["nu"] = vector_json(m.nu);
    j["q95"] = m.q95;
    j["control_d"] = vector_json(m.control_d);
    j["control_r"] = vector_json(m.control_r);
    j["allow_scaling"] = m.allow_scaling;
    j["asymmetry_reference"] = m.asymmetry_reference;
    j["warnings"] = m.warnings;
    return j;
}

FpcaModel fpca_from_json(const json& j)
{
    const std::string where = "fpca model";
    check_header(j, "surfshape.fpca_model", where);
    return fpca_body_from(j, where);
}

ControlModel control_from_json(const json& j)
{
    const std::string where = "control model";
    check_header(j, "surfshape.control_model", where);
    ControlModel m;
    m.fpca = fpca_body_from(field(j, "fpca", where), where + " fpca");
    m.p = get_field<int>(j, "p", where);
    m.variance_threshold = get_field<double>(j, "variance_threshold", where);
    m.chi2_threshold = get_field<double>(j, "chi2_threshold", where);
    m.nu = get_vector(j, "nu", where);
    m.q95 = get_field<double>(j, "q95", where);
    m.control_d = get_vector(j, "control_d", where);
    m.control_r = get_vector(j, "control_r", where);
    m.allow_scaling = get_field<bool>(j, "allow_scaling", where);
    m.asymmetry_reference = get_field<std::map<std::string, std::vector<double>>>(j, "asymmetry_reference", where);
    m.warnings = get_field<std::vector<std::string>>(j, "warnings", where);
    if (m.p < 1 || m.p != m.fpca.components())
        throw ValidationError(where + ": p must equal the number of stored components");
    if (m.nu.size() != m.fpca.vertex_count() || !(m.nu.array() > 0.0).all())
        throw ValidationError(where + ": nu must hold one positive value per vertex");
    if (m.control_d.size() != m.control_r.size())
        throw ValidationError(where + ": control_d and control_r lengths differ");
    return m;
}

void save_model(const FpcaModel& model, const fs::path& path)
{
    write_json(to_json(model), path);
}

void save_model(const ControlModel& model, const fs::path& path)
{
    write_json(to_json(model), path);
}

FpcaModel load_fpca_model(const fs::path& path)
{
    const json j = read_json(path);
    try {
        return fpca_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

ControlModel load_control_model(const fs::path& path)
{
    const json j = read_json(path);
    try {
        return control_from_json(j);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string model_schema(const fs::path& path)
{
    return get_field<std::string>(read_json(path), "schema", path.string());
}

// ---------------------------------------------------------------- CSVs

std::vector<CsvRow> parse_csv(const std::string& text)
{
    std::vector<CsvRow> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        CsvRow row;
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const char c = t[i];
            if (quoted) {
                if (c == '"' && i + 1 < t.size() && t[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else if (c == '"')
                    quoted = false;
                else
                    cell += c;
            } else if (c == '"')
                quoted = true;
            else if (c == ',') {
                row.emplace_back(trim(cell));
                cell.clear();
            } else
                cell += c;
        }
        row.emplace_back(trim(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

// Drops a header row whose first cell is not an integer.
std::vector<CsvRow> csv_body(const fs::path& path)
{
    auto rows = parse_csv(read_text(path));
    if (!rows.empty() && !rows.front().empty() && !to_int(rows.front().front()) &&
        rows.front().front() != "plane_normal")
        rows.erase(rows.begin());
    return rows;
}

int checked_index(const std::string& cell, Eigen::Index vertex_count, const fs::path& path, std::size_t row)
{
    const auto v = to_int(cell);
    if (!v)
        throw ValidationError(path.string() + ": row " + std::to_string(row) + ": '" + cell +
                              "' is not a vertex index");
    if (*v < 0 || *v >= vertex_count)
        throw ValidationError(path.string() + ": row " + std::to_string(row) + ": vertex index " +
                              std::to_string(*v) + " out of range [0, " + std::to_string(vertex_count) + ")");
    return static_cast<int>(*v);
}

} // namespace

std::string format_csv(const CsvRow& header, const std::vector<CsvRow>& rows)
{
    std::string out;
    auto emit = [&](const CsvRow& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i > 0)
                out += ',';
            out += csv_cell(r[i]);
        }
        out += '\n';
    };
    emit(header);
    for (const auto& r : rows)
        emit(r);
    return out;
}

void write_csv(const CsvRow& header, const std::vector<CsvRow>& rows, const fs::path& path)
{
    write_text(path, format_csv(header, rows));
}

RegionMap read_regions(const fs::path& path, Eigen::Index vertex_count)
{
    RegionMap regions;
    const auto rows = csv_body(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != 2 || rows[r][1].empty())
            throw ValidationError(path.string() + ": row " + std::to_string(r + 1) +
                                  ": expected vertex_index,region_name");
        regions[rows[r][1]].push_back(checked_index(rows[r][0], vertex_count, path, r + 1));
    }
    for (auto& [name, idx] : regions) {
        std::sort(idx.begin(), idx.end());
        if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
            throw ValidationError(path.string() + ": region '" + name + "' lists a vertex twice");
    }
    return regions;
}

BilateralPairing read_pairing(const fs::path& path, Eigen::Index vertex_count)
{
    BilateralPairing pairing;
    pairing.mirror.assign(static_cast<std::size_t>(vertex_count), -1);
    const auto rows = csv_body(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (!row.empty() && row[0] == "plane_normal") {
            if (row.size() != 4)
                throw ValidationError(path.string() + ": plane_normal needs three components");
            Eigen::Vector3d n;
            for (int d = 0; d < 3; ++d) {
                const auto v = to_double(row[static_cast<std::size_t>(d) + 1]);
                if (!v)
                    throw ValidationError(path.string() + ": malformed plane_normal component");
                n[d] = *v;
            }
            if (!(n.norm() > 0.0) || !n.allFinite())
                throw ValidationError(path.string() + ": plane_normal must be non-zero");
            pairing.plane_normal = n.normalized();
            continue;
        }
        if (row.size() != 2)
            throw ValidationError(path.string() + ": row " + std::to_string(r + 1) + ": expected index,mirror_index");
        const int a = checked_index(row[0], vertex_count, path, r + 1);
        const int b = checked_index(row[1], vertex_count, path, r + 1);
        if (pairing.mirror[static_cast<std::size_t>(a)] != -1)
            throw ValidationError(path.string() + ": vertex " + std::to_string(a) + " is listed twice");
        pairing.mirror[static_cast<std::size_t>(a)] = b;
    }
    for (std::size_t i = 0; i < pairing.mirror.size(); ++i)
        if (pairing.mirror[i] < 0)
            throw ValidationError(path.string() + ": vertex " + std::to_string(i) + " has no mirror entry");
    validate_pairing(pairing, vertex_count);
    return pairing;
}

void write_pairing(const BilateralPairing& pairing, const fs::path& path)
{
    std::vector<CsvRow> rows;
    rows.reserve(pairing.mirror.size() + 1);
    for (std::size_t i = 0; i < pairing.mirror.size(); ++i)
        rows.push_back({std::to_string(i), std::to_string(pairing.mirror[i])});
    rows.push_back({"plane_normal", format_double(pairing.plane_normal[0]), format_double(pairing.plane_normal[1]),
                    format_double(pairing.plane_normal[2])});
    write_csv({"index", "mirror_index"}, rows, path);
}

WeightOverrides read_weight_overrides(const fs::path& path, Eigen::Index vertex_count)
{
    WeightOverrides out;
    const auto rows = csv_body(path);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != 2)
            throw ValidationError(path.string() + ": row " + std::to_string(r + 1) + ": expected vertex_index,weight");
        const int idx = checked_index(rows[r][0], vertex_count, path, r + 1);
        if (rows[r][1] == "mean") {
            out[idx] = std::nullopt;
            continue;
        }
        const auto w = to_double(rows[r][1]);
        if (!w || !(*w > 0.0) || !std::isfinite(*w))
            throw ValidationError(path.string() + ": row " + std::to_string(r + 1) +
                                  ": weight must be a positive number or 'mean'");
        out[idx] = *w;
    }
    return out;
}

std::map<std::string, std::string> read_labels(const fs::path& path)
{
    std::map<std::string, std::string> out;
    auto rows = parse_csv(read_text(path));
    if (!rows.empty() && rows.front().size() == 2 && rows.front()[0] == "filename")
        rows.erase(rows.begin());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != 2 || rows[r][0].empty() || rows[r][1].empty())
            throw ValidationError(path.string() + ": row " + std::to_string(r + 1) + ": expected filename,label");
        if (!out.emplace(rows[r][0], rows[r][1]).second)
            throw ValidationError(path.string() + ": file '" + rows[r][0] + "' labelled twice");
    }
    return out;
}

ShapeSample read_cohort(const fs::path& dir, const std::optional<fs::path>& labels,
                        const std::optional<fs::path>& weight_overrides, const std::optional<fs::path>& pairing)
{
    MeshDirectory md = read_mesh_directory(dir);
    std::vector<std::string> lab;
    if (labels) {
        const auto table = read_labels(*labels);
        for (const auto& name : md.names) {
            auto it = table.find(name);
            if (it == table.end())
                it = table.find(fs::path(name).stem().string());
            if (it == table.end())
                throw ValidationError(labels->string() + ": no label for " + name);
            lab.push_back(it->second);
        }
    }
    ShapeSample sample = make_sample(md.meshes, md.names, lab);
    if (weight_overrides)
        sample.weight_overrides = read_weight_overrides(*weight_overrides, sample.vertex_count());
    if (pairing)
        sample.pairing = read_pairing(*pairing, sample.vertex_count());
    return sample;
}

// ------------------------------------------------------------- writers

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw ValidationError("cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out)
        throw ValidationError("failed writing " + path.string());
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_json(const json& j, const fs::path& path)
{
    write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path)
{
    const std::string text = read_text(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": truncated or malformed JSON (" + e.what() + ")");
    }
}

} // namespace surfshape
