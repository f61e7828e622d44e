#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stereoshape/kitti_io.hpp"
#include "stereoshape/rng.hpp"
#include "stereoshape/tensor_io.hpp"

using namespace stereoshape;

TEST_CASE("label parsing follows the devkit field order") {
    const std::string line =
        "Car 0.00 0 1.57 100 100 200 200 1.5 1.6 4.0 2.0 1.5 10.0 1.60\n";
    const std::vector<LabelRecord> records = parse_label_file(line, "labels");
    REQUIRE(records.size() == 1);
    const LabelRecord& r = records[0];
    CHECK(r.type == "Car");
    CHECK(r.truncated == 0.0);
    CHECK(r.occluded == 0);
    CHECK(r.alpha == doctest::Approx(1.57));
    CHECK(r.bbox.left == 100.0);
    CHECK(r.bbox.bottom == 200.0);
    CHECK(r.height == doctest::Approx(1.5));
    CHECK(r.width == doctest::Approx(1.6));
    CHECK(r.length == doctest::Approx(4.0));
    CHECK(r.location.x == doctest::Approx(2.0));
    CHECK(r.location.z == doctest::Approx(10.0));
    CHECK(r.rotation_y == doctest::Approx(1.60));
    CHECK(!r.score.has_value());
    CHECK(!r.dont_care);
}

TEST_CASE("16-field lines populate the score") {
    const std::string line =
        "Car 0.00 0 1.57 100 100 200 200 1.5 1.6 4.0 2.0 1.5 10.0 1.60 0.93\n";
    const std::vector<LabelRecord> records = parse_label_file(line, "preds");
    REQUIRE(records.size() == 1);
    REQUIRE(records[0].score.has_value());
    CHECK(*records[0].score == doctest::Approx(0.93));
}

TEST_CASE("label parsing is strict") {
    // 14 fields
    CHECK_THROWS_AS(
        parse_label_file("Car 0.00 0 1.57 100 100 200 200 1.5 1.6 4.0 2.0 1.5 10.0\n", "bad"),
        MalformedLine);
    // non-numeric field
    CHECK_THROWS_AS(
        parse_label_file("Car 0.00 0 oops 100 100 200 200 1.5 1.6 4.0 2.0 1.5 10.0 1.60\n",
                         "bad"),
        MalformedLine);
    // inverted box
    CHECK_THROWS_AS(
        parse_label_file("Car 0.00 0 1.57 200 100 100 200 1.5 1.6 4.0 2.0 1.5 10.0 1.60\n",
                         "bad"),
        MalformedLine);
    // the error carries its location
    try {
        parse_label_file(
            "Car 0.00 0 1.57 100 100 200 200 1.5 1.6 4.0 2.0 1.5 10.0 1.60\n"
            "Car 0.00 0 bad 100 100 200 200 1.5 1.6 4.0 2.0 1.5 10.0 1.60\n",
            "two_lines");
        FAIL("expected MalformedLine");
    } catch (const MalformedLine& e) {
        CHECK(e.line() == 2);
        CHECK(e.source() == "two_lines");
    }
}

TEST_CASE("DontCare rows are retained with a flag") {
    const std::string line =
        "DontCare -1 -1 -10 500 150 550 180 -1 -1 -1 -1000 -1000 -1000 -10\n";
    const std::vector<LabelRecord> records = parse_label_file(line, "labels");
    REQUIRE(records.size() == 1);
    CHECK(records[0].dont_care);
}

TEST_CASE("labels round trip through write_label_file") {
    const std::string text =
        "Car 0.12 1 -1.21 101.5 102.25 210.75 220.5 1.48 1.62 3.97 2.05 1.51 10.33 1.58 0.7\n"
        "Pedestrian 0 0 0.5 50 60 70 120 1.8 0.6 0.9 -3 1.4 7.5 0.5\n";
    const std::vector<LabelRecord> records = parse_label_file(text, "a");
    const std::string written = write_label_file(records);
    const std::vector<LabelRecord> again = parse_label_file(written, "b");
    REQUIRE(again.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(again[i].type == records[i].type);
        CHECK(again[i].location.z == doctest::Approx(records[i].location.z).epsilon(1e-6));
        CHECK(again[i].rotation_y == doctest::Approx(records[i].rotation_y).epsilon(1e-6));
    }
    CHECK(write_label_file(again) == written);  // fixed point after one round
}

TEST_CASE("calibration parsing derives intrinsics and baseline") {
    const double fx = 721.5377;
    const std::string text =
        "P0: 1 0 0 0 0 1 0 0 0 0 1 0\n"
        "P2: 721.5377 0 609.5593 0 0 721.5377 172.854 0 0 0 1 0\n"
        "P3: 721.5377 0 609.5593 -389.6304 0 721.5377 172.854 0 0 0 1 0\n";
    const CalibRecord c = parse_calib_file(text, "calib");
    CHECK(c.fx == doctest::Approx(fx));
    CHECK(c.cx == doctest::Approx(609.5593));
    CHECK(c.cy == doctest::Approx(172.854));
    CHECK(std::abs(c.baseline_m - 389.6304 / fx) < 1e-9);

    const std::string identity =
        "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
        "P3: 1 0 0 -0.5 0 1 0 0 0 0 1 0\n";
    const CalibRecord id = parse_calib_file(identity, "calib");
    CHECK(id.fx == doctest::Approx(1.0));
    CHECK(id.cx == doctest::Approx(0.0));
    CHECK(id.baseline_m == doctest::Approx(0.5));

    CHECK_THROWS_AS(parse_calib_file("P2: 1 0 0 0 0 1 0 0 0 0 1 0\n", "calib"), MissingKey);
    CHECK_THROWS_AS(parse_calib_file("P2: 1 0 0\nP3: 1 0 0 0 0 1 0 0 0 0 1 0\n", "calib"),
                    MalformedMatrix);
}

TEST_CASE("box_from_label lifts the bottom-center location") {
    LabelRecord r;
    r.type = "Car";
    r.height = 1.5;
    r.width = 1.6;
    r.length = 4.0;
    r.location = {2.0, 1.5, 10.0};  // KITTI y sits on the ground
    r.rotation_y = 0.3;
    const Box3D box = box_from_label(r);
    CHECK(box.center.y == doctest::Approx(0.75));
    CHECK(box.center.x == doctest::Approx(2.0));
    CHECK(box.yaw == doctest::Approx(0.3));
}

TEST_CASE("OBJ writing and parsing") {
    SUBCASE("an empty mesh writes no records") {
        CHECK(write_mesh_obj(TriangleMesh{}) == "");
        const TriangleMesh parsed = parse_mesh_obj("", "empty");
        CHECK(parsed.empty());
    }

    SUBCASE("one triangle gives exactly 3 v lines and 1 f line") {
        TriangleMesh mesh;
        mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
        mesh.triangles = {{0, 1, 2}};
        const std::string obj = write_mesh_obj(mesh);
        std::size_t v_lines = 0, f_lines = 0, pos = 0;
        std::istringstream iss(obj);
        std::string line;
        while (std::getline(iss, line)) {
            if (line.rfind("v ", 0) == 0) ++v_lines;
            if (line.rfind("f ", 0) == 0) ++f_lines;
        }
        (void)pos;
        CHECK(v_lines == 3);
        CHECK(f_lines == 1);
    }

    SUBCASE("write-then-parse is lossless at 6 significant digits") {
        Rng rng(301);
        TriangleMesh mesh;
        for (int i = 0; i < 60; ++i)
            mesh.vertices.push_back({rng.next_uniform(-4, 4), rng.next_uniform(-4, 4),
                                     rng.next_uniform(-4, 4)});
        for (int i = 0; i + 2 < 60; i += 3)
            mesh.triangles.push_back({static_cast<std::uint32_t>(i),
                                      static_cast<std::uint32_t>(i + 1),
                                      static_cast<std::uint32_t>(i + 2)});
        const std::string obj = write_mesh_obj(mesh);
        const TriangleMesh parsed = parse_mesh_obj(obj, "roundtrip");
        REQUIRE(parsed.vertices.size() == mesh.vertices.size());
        REQUIRE(parsed.triangles == mesh.triangles);
        for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
            CHECK(std::abs(parsed.vertices[i].x - mesh.vertices[i].x) <
                  1e-5 * std::max(1.0, std::abs(mesh.vertices[i].x)));
            CHECK(std::abs(parsed.vertices[i].y - mesh.vertices[i].y) <
                  1e-5 * std::max(1.0, std::abs(mesh.vertices[i].y)));
        }
        CHECK(write_mesh_obj(parsed) == obj);  // byte-stable after one round
    }

    SUBCASE("strictness") {
        CHECK_THROWS_AS(parse_mesh_obj("v 0 0\n", "bad"), MalformedLine);
        CHECK_THROWS_AS(parse_mesh_obj("v 0 0 0\nf 1 2 3\n", "bad"), MalformedLine);
        CHECK_THROWS_AS(parse_mesh_obj("vt 0 0\n", "bad"), MalformedLine);
        CHECK_THROWS_AS(parse_mesh_obj("v 0 0 zero\n", "bad"), MalformedLine);
    }
}

TEST_CASE("binary STL round trips at float precision") {
    Rng rng(303);
    TriangleMesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.5, 0.5, 1.0}};
    mesh.triangles = {{0, 1, 2}, {0, 1, 3}};
    const std::string bytes = write_mesh_stl(mesh);
    CHECK(bytes.size() == 84 + 2 * 50);
    const TriangleMesh parsed = parse_mesh_stl(bytes, "stl");
    REQUIRE(parsed.triangles.size() == 2);
    // STL stores per-triangle vertices; compare triangle by triangle
    for (std::size_t t = 0; t < 2; ++t)
        for (int c = 0; c < 3; ++c) {
            const Vec3& orig = mesh.vertices[mesh.triangles[t][c]];
            const Vec3& got = parsed.vertices[parsed.triangles[t][c]];
            CHECK(std::abs(orig.x - got.x) < 1e-6);
            CHECK(std::abs(orig.y - got.y) < 1e-6);
            CHECK(std::abs(orig.z - got.z) < 1e-6);
        }
    CHECK_THROWS_AS(parse_mesh_stl("short", "stl"), ParseError);
    CHECK_THROWS_AS(parse_mesh_stl(bytes.substr(0, 100), "stl"), ParseError);
}

TEST_CASE("PLY and XYZ cloud round trips") {
    Rng rng(305);
    PointCloud cloud(Frame::OCS, {});
    for (int i = 0; i < 100; ++i)
        cloud.points.push_back({rng.next_uniform(-0.5, 0.5), rng.next_uniform(-0.5, 0.5),
                                rng.next_uniform(-0.5, 0.5)});

    const std::string ply = write_cloud_ply(cloud);
    const PointCloud from_ply = parse_cloud_ply(ply, "ply", Frame::OCS);
    REQUIRE(from_ply.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        CHECK(std::abs(from_ply.points[i].x - cloud.points[i].x) < 1e-6);
    CHECK(write_cloud_ply(from_ply) == ply);

    const std::string xyz = write_cloud_xyz(cloud);
    const PointCloud from_xyz = parse_cloud_xyz(xyz, "xyz", Frame::OCS);
    REQUIRE(from_xyz.size() == cloud.size());
    CHECK(write_cloud_xyz(from_xyz) == xyz);

    // padding-tagged points are not exported
    PointCloud padded = cloud;
    padded.padding.assign(cloud.size(), 0);
    padded.padding[0] = 1;
    CHECK(parse_cloud_ply(write_cloud_ply(padded), "p", Frame::OCS).size() == cloud.size() - 1);
}

TEST_CASE("PLY parsing is strict") {
    CHECK_THROWS_AS(parse_cloud_ply("not a ply\n", "bad"), MalformedLine);
    CHECK_THROWS_AS(parse_cloud_ply("ply\nformat binary 1.0\n", "bad"), MalformedLine);
    const std::string missing_count =
        "ply\nformat ascii 1.0\nproperty float x\nproperty float y\nproperty float z\n"
        "end_header\n";
    CHECK_THROWS_AS(parse_cloud_ply(missing_count, "bad"), MalformedLine);
    const std::string short_body =
        "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
        "property float z\nend_header\n0 0 0\n";
    CHECK_THROWS_AS(parse_cloud_ply(short_body, "bad"), MalformedLine);
    CHECK_THROWS_AS(parse_cloud_xyz("1 2\n", "bad"), MalformedLine);
}

TEST_CASE("PGM and PFM rasters round trip") {
    GrayImage gray;
    gray.width = 5;
    gray.height = 3;
    gray.pixels = {0, 255, 0, 0, 255, 255, 0, 0, 0, 0, 0, 0, 255, 0, 255};
    const std::string pgm = write_pgm(gray);
    const GrayImage gray2 = parse_pgm(pgm, "pgm");
    CHECK(gray2.width == 5);
    CHECK(gray2.height == 3);
    CHECK(gray2.pixels == gray.pixels);

    FloatImage disp;
    disp.width = 4;
    disp.height = 2;
    disp.pixels = {0.0f, 1.5f, 2.25f, 0.0f, 10.0f, 0.0f, 0.0f, 3.75f};
    const std::string pfm = write_pfm(disp);
    const FloatImage disp2 = parse_pfm(pfm, "pfm");
    CHECK(disp2.width == 4);
    CHECK(disp2.pixels == disp.pixels);

    CHECK_THROWS_AS(parse_pgm("P2\n1 1\n255\n0", "bad"), ParseError);
    CHECK_THROWS_AS(parse_pgm(pgm.substr(0, pgm.size() - 2), "bad"), ParseError);
    CHECK_THROWS_AS(parse_pfm("Pf\n2 2\n1.0\n", "bad"), ParseError);  // positive scale
}

TEST_CASE("masks round trip through raster pairs") {
    ForegroundMask mask;
    mask.origin_u = 10.0;
    mask.origin_v = 20.0;
    mask.width = 6;
    mask.height = 4;
    mask.pixels.push_back({{12.0, 21.0}, 8.5});
    mask.pixels.push_back({{10.0, 20.0}, 9.25});
    mask.pixels.push_back({{15.0, 23.0}, 7.75});

    const auto [gray, disp] = mask_to_images(mask);
    const ForegroundMask back = mask_from_images(gray, disp, 10.0, 20.0, "mask");
    REQUIRE(back.pixels.size() == mask.pixels.size());
    // raster order: sorted by row then column
    CHECK(back.pixels[0].px.u == 10.0);
    CHECK(back.pixels[0].disparity == doctest::Approx(9.25));
    CHECK(back.pixels[1].px.u == 12.0);
    CHECK(back.pixels[2].disparity == doctest::Approx(7.75));

    GrayImage wrong = gray;
    wrong.width = 3;
    wrong.pixels.resize(3 * gray.height);
    CHECK_THROWS_AS(mask_from_images(wrong, disp, 0, 0, "mask"), ParseError);
}

TEST_CASE("flat tensor files round trip and reject malformed input") {
    Tensor t;
    t.dims = {2, 3};
    t.values = {1.0f, 2.5f, -3.0f, 0.0f, 9.0f, 42.0f};
    const std::string path = "/tmp/stereoshape_test_tensor.bin";
    save_tensor(t, path);
    const Tensor back = load_tensor(path);
    CHECK(back.dims == t.dims);
    CHECK(back.values == t.values);

    CHECK_THROWS_AS(parse_tensor("dims: 2 2\nxx", "t"), ParseError);     // short payload
    CHECK_THROWS_AS(parse_tensor("shape: 2 2\n", "t"), ParseError);      // wrong header
    CHECK_THROWS_AS(parse_tensor("dims: 0 2\n", "t"), ParseError);       // zero dim
    CHECK_THROWS_AS(parse_tensor("dims: a\n", "t"), ParseError);         // bad dim
    CHECK_THROWS_AS(parse_tensor("no newline", "t"), ParseError);
}
