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
#include "oracles.hpp"

#include "surfshape/errors.hpp"
#include "surfshape/io.hpp"
#include "surfshape/registration.hpp"
#include "surfshape/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <string>

using namespace surfshape;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "surfshape_test_io";
    fs::create_directories(dir);
    return dir / name;
}

std::string error_of(auto&& fn)
{
    try {
        fn();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "<no error>";
}

FpcaModel small_model()
{
    SynthConfig c;
    c.n_a = 10;
    c.noise_sd = 0.05;
    c.rotation_deg = 10;
    const SynthCohort co = synth_cohort(c);
    const GpaResult g = weighted_gpa(co.sample);
    FpcaModel m = fit_fpca(g.mean, tangent_coordinates(g.aligned, g.mean), g.mean_weights, ComponentRule::fixed(4));
    m.triangles = co.sample.triangles;
    return m;
}

} // namespace

TEST_CASE("OBJ round trip")
{
    const SurfaceMesh cube = oracle::unit_cube();
    const fs::path p = scratch("cube.obj");
    write_mesh(cube, p);
    const SurfaceMesh back = read_mesh(p);
    CHECK(back.vertices == cube.vertices);
    CHECK(back.triangles == cube.triangles);
    CHECK(format_obj(back) == read_text(p));

    const SurfaceMesh m = parse_obj("# comment\nv 0 0 0\nv 1 0 0 0.5 0.5 0.5\nv 0 1 0\nvn 0 0 1\nv 0 0 1\n"
                                    "f 1/1/1 2//1 3\nf -4 -3 -1\ng group\n");
    CHECK(m.vertices.rows() == 4);
    REQUIRE(m.triangles.size() == 2);
    CHECK(m.triangles[0] == Triangle{0, 1, 2});
    CHECK(m.triangles[1] == Triangle{0, 1, 3});
}

TEST_CASE("OBJ errors name the offending line")
{
    CHECK(error_of([] { parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n", "quad.obj"); }) ==
          "quad.obj:5: face with 4 vertices; only triangles are supported");
    CHECK(error_of([] { parse_obj("", "empty.obj"); }) == "empty.obj: no vertices");
    CHECK(error_of([] { parse_obj("v 0 0\n", "short.obj"); }).starts_with("short.obj:1:"));
    CHECK(error_of([] { parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n", "range.obj"); }).starts_with("range.obj:4:"));
    CHECK(error_of([] { parse_obj("v 0 0 x\n", "bad.obj"); }).starts_with("bad.obj:1:"));
}

TEST_CASE("diverging colour map pins neutral and endpoints")
{
    const ColorMap cm = ColorMap::diverging(-2.0, 2.0);
    CHECK(map_color(cm, 0.0) == kNeutral);
    CHECK(map_color(cm, -2.0) == kColdEnd);
    CHECK(map_color(cm, 2.0) == kWarmEnd);
    CHECK(map_color(cm, -50.0) == kColdEnd);
    CHECK(map_color(cm, 50.0) == kWarmEnd);
    const Rgb mid = map_color(cm, 1.0);
    CHECK(mid != kNeutral);
    CHECK(mid != kWarmEnd);
    CHECK(mid[0] > mid[2]);

    const ColorMap shifted = ColorMap::diverging(0.0, 10.0, 3.0);
    CHECK(map_color(shifted, 3.0) == kNeutral);
    const ColorMap seq = ColorMap::sequential(0.0, 1.0);
    CHECK(map_color(seq, 0.0) == kNeutral);
    CHECK(map_color(seq, 1.0) == kWarmEnd);

    CHECK_THROWS_AS(validate_colormap(ColorMap::diverging(1.0, 1.0)), ValidationError);
    CHECK_THROWS_AS(validate_colormap(ColorMap::diverging(0.0, 1.0, 2.0)), ValidationError);
    CHECK(ColorMap::symmetric_for(Eigen::Vector3d(-1.0, 3.0, 0.5)).hi == 3.0);
    CHECK(ColorMap::symmetric_for(Eigen::Vector3d(-1.0, 3.0, 0.5)).lo == -3.0);
}

TEST_CASE("painted PLY layout and clamp count")
{
    const SurfaceMesh cube = oracle::unit_cube();
    Eigen::VectorXd constant = Eigen::VectorXd::Constant(8, 0.0);
    PaintReport rep;
    const std::string ply = format_painted_ply(cube, constant, ColorMap::diverging(-1, 1), &rep);
    CHECK(rep.clamped == 0);
    CHECK(ply.starts_with("ply\nformat ascii 1.0\n"));
    CHECK(ply.find("element vertex 8\n") != std::string::npos);
    CHECK(ply.find("element face 12\n") != std::string::npos);
    CHECK(ply.find(" 221 221 221 0\n") != std::string::npos);
    CHECK(ply.find(" 59 76 192 ") == std::string::npos);

    Eigen::VectorXd field(8);
    field << -3, -1, -0.5, 0, 0.5, 1, 2, 7;
    const std::string painted = format_painted_ply(cube, field, ColorMap::diverging(-1, 1), &rep);
    CHECK(rep.clamped == 3);
    CHECK(painted.find("comment clamped 3\n") != std::string::npos);
    CHECK(painted.find(" 59 76 192 -3\n") != std::string::npos);
    CHECK(painted.find(" 180 4 38 7\n") != std::string::npos);

    CHECK_THROWS_AS(format_painted_ply(cube, Eigen::VectorXd::Zero(7), ColorMap{}), ValidationError);
    field[2] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(format_painted_ply(cube, field, ColorMap{}), ValidationError);
}

TEST_CASE("model round trip preserves scores and eigenvalues")
{
    const FpcaModel m = small_model();
    const fs::path p = scratch("model.json");
    save_model(m, p);
    CHECK(model_schema(p) == "surfshape.fpca_model");
    const FpcaModel back = load_fpca_model(p);
    CHECK(back.eigenvalues == m.eigenvalues);
    CHECK(back.eigenfunctions == m.eigenfunctions);
    CHECK(back.mean == m.mean);
    CHECK(back.triangles == m.triangles);
    Rng rng(60);
    for (int t = 0; t < 5; ++t) {
        Shape x = m.mean;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            x.row(i) += 0.01 * Eigen::RowVector3d(rng.normal(), rng.normal(), rng.normal());
        CHECK((scores(back, x) - scores(m, x)).cwiseAbs().maxCoeff() < 1e-10);
    }
    // writing the loaded model reproduces the file byte for byte
    const fs::path p2 = scratch("model2.json");
    save_model(back, p2);
    CHECK(read_text(p) == read_text(p2));
}

TEST_CASE("control model round trip")
{
    SynthConfig c;
    c.n_a = 12;
    c.noise_sd = 0.05;
    c.asymmetry_amplitude = 0.5;
    const SynthCohort co = synth_cohort(c);
    const ControlModel m = fit_control_model(co.sample);
    const fs::path p = scratch("control.json");
    save_model(m, p);
    CHECK(model_schema(p) == "surfshape.control_model");
    const ControlModel back = load_control_model(p);
    CHECK(back.p == m.p);
    CHECK(back.nu == m.nu);
    CHECK(back.q95 == m.q95);
    CHECK(back.chi2_threshold == m.chi2_threshold);
    CHECK(back.asymmetry_reference == m.asymmetry_reference);
    CHECK(back.fpca.eigenvalues == m.fpca.eigenvalues);
    CHECK_THROWS_AS(load_fpca_model(p), ValidationError);
}

TEST_CASE("corrupt model files are rejected with specific messages")
{
    const FpcaModel m = small_model();
    const nlohmann::json good = to_json(m);

    nlohmann::json unsorted = good;
    std::swap(unsorted["eigenvalues"][0], unsorted["eigenvalues"][1]);
    CHECK(error_of([&] { fpca_from_json(unsorted); }).find("not sorted") != std::string::npos);

    nlohmann::json missing = good;
    missing.erase("eigenfunctions");
    CHECK(error_of([&] { fpca_from_json(missing); }).find("missing field 'eigenfunctions'") != std::string::npos);

    nlohmann::json version = good;
    version["schema_version"] = 99;
    CHECK(error_of([&] { fpca_from_json(version); }).find("schema_version 99") != std::string::npos);

    nlohmann::json wrong_type = good;
    wrong_type["eigenvalues"] = "many";
    CHECK(error_of([&] { fpca_from_json(wrong_type); }).find("wrong type") != std::string::npos);

    nlohmann::json bad_tri = good;
    bad_tri["triangles"][0][1] = 100000;
    CHECK(error_of([&] { fpca_from_json(bad_tri); }).find("out of range") != std::string::npos);

    const fs::path p = scratch("truncated.json");
    const std::string text = good.dump(2);
    write_text(p, text.substr(0, text.size() / 2));
    CHECK(error_of([&] { load_fpca_model(p); }).find("truncated or malformed JSON") != std::string::npos);
}

TEST_CASE("region, pairing and weight CSVs")
{
    const fs::path regions = scratch("regions.csv");
    write_text(regions, "vertex_index,region_name\n0,left\n1,left\n2,right\n# comment\n\n7,right\n");
    const RegionMap r = read_regions(regions, 8);
    CHECK(r.at("left") == std::vector<int>{0, 1});
    CHECK(r.at("right") == std::vector<int>{2, 7});
    write_text(regions, "0,left\n8,left\n");
    CHECK(error_of([&] { read_regions(regions, 8); }).find("vertex index") != std::string::npos);

    const fs::path pairing = scratch("pairing.csv");
    BilateralPairing bp;
    bp.mirror = {1, 0, 2, 4, 3};
    bp.plane_normal = Eigen::Vector3d(0, 1, 0);
    write_pairing(bp, pairing);
    const BilateralPairing back = read_pairing(pairing, 5);
    CHECK(back.mirror == bp.mirror);
    CHECK(back.plane_normal == bp.plane_normal);
    CHECK_THROWS_AS(read_pairing(pairing, 6), ValidationError);
    write_text(pairing, "0,1\n1,2\n2,0\n");
    CHECK_THROWS_AS(read_pairing(pairing, 3), ValidationError);

    const fs::path weights = scratch("weights.csv");
    write_text(weights, "vertex_index,weight\n3,0.5\n4,mean\n");
    const WeightOverrides w = read_weight_overrides(weights, 8);
    CHECK(w.at(3) == 0.5);
    CHECK_FALSE(w.at(4).has_value());
    write_text(weights, "3,-1\n");
    CHECK_THROWS_AS(read_weight_overrides(weights, 8), ValidationError);
}

TEST_CASE("cohort directories and labels")
{
    const fs::path dir = scratch("cohort");
    fs::remove_all(dir);
    SynthConfig c;
    c.n_a = 2;
    c.n_b = 2;
    const SynthCohort co = synth_cohort(c);
    for (std::size_t i = 0; i < 4; ++i)
        write_mesh({co.sample.shapes[i], co.sample.triangles, {}, {}}, dir / (co.sample.names[i] + ".obj"));
    write_text(dir / "notes.txt", "ignored\n");
    const fs::path labels = scratch("labels.csv");
    write_text(labels, "filename,label\nshape_0000.obj,ctrl\nshape_0001,ctrl\nshape_0002.obj,case\nshape_0003.obj,case\n");
    const ShapeSample s = read_cohort(dir, labels);
    CHECK(s.size() == 4);
    CHECK(s.names[0] == "shape_0000.obj");
    CHECK(s.labels == std::vector<std::string>{"ctrl", "ctrl", "case", "case"});
    write_text(labels, "shape_0000.obj,ctrl\n");
    CHECK(error_of([&] { read_cohort(dir, labels); }).find("no label for") != std::string::npos);
}

TEST_CASE("writers are deterministic")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_csv({"a", "b"}, {{"1", "2"}, {"3", "4"}}) == "a,b\n1,2\n3,4\n");
    const auto rows = parse_csv("a,b\n# skip\n\n1,\"x,y\"\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][1] == "x,y");
    const SurfaceMesh oct = oracle::octahedron();
    CHECK(format_obj(oct) == format_obj(oct));
    const Eigen::VectorXd f = Eigen::VectorXd::LinSpaced(6, -1, 1);
    CHECK(format_painted_ply(oct, f, ColorMap::symmetric_for(f)) ==
          format_painted_ply(oct, f, ColorMap::symmetric_for(f)));
}
