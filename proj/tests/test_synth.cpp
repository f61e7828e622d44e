#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "stereoshape/metrics.hpp"
#include "stereoshape/synth.hpp"

using namespace stereoshape;

namespace {

SynthScene desk_scene(std::uint64_t seed = 7) {
    SynthScene scene;
    scene.rig = StereoRig(CameraIntrinsics(500.0, 500.0, 320.0, 240.0), 0.54);
    scene.seed = seed;
    for (SynthShape shape : {SynthShape::Sphere, SynthShape::BoxShell, SynthShape::ToyCar})
        scene.items.push_back({Box3D({0.0, 0.0, 8.0}, 1.5, 1.6, 4.0, 0.0), shape});
    return scene;
}

}  // namespace

TEST_CASE("template clouds respect their shape invariants") {
    SUBCASE("sphere points lie on the diameter-1 surface") {
        const PointCloud sphere = template_cloud(SynthShape::Sphere, 500, 3);
        REQUIRE(sphere.size() == 500);
        for (const Vec3& p : sphere.points) CHECK(std::abs(p.norm() - 0.5) < 1e-9);
    }

    SUBCASE("box shell points sit on one of the six faces") {
        const PointCloud box = template_cloud(SynthShape::BoxShell, 500, 4);
        for (const Vec3& p : box.points) {
            const bool on_x = std::abs(std::abs(p.x) - 0.5) < 1e-9;
            const bool on_y = std::abs(std::abs(p.y) - 0.1875) < 1e-9;
            const bool on_z = std::abs(std::abs(p.z) - 0.2) < 1e-9;
            CHECK((on_x || on_y || on_z));
            CHECK(std::abs(p.x) <= 0.5 + 1e-9);
            CHECK(std::abs(p.y) <= 0.1875 + 1e-9);
            CHECK(std::abs(p.z) <= 0.2 + 1e-9);
        }
    }

    SUBCASE("toy car stays within its body and cabin envelope") {
        const PointCloud car = template_cloud(SynthShape::ToyCar, 500, 5);
        for (const Vec3& p : car.points) {
            CHECK(std::abs(p.x) <= 0.5 + 1e-9);
            CHECK(std::abs(p.z) <= 0.2 + 1e-9);
            CHECK(p.y <= 0.1875 + 1e-9);           // ground side
            CHECK(p.y >= -0.1875 - 1e-9);          // cabin top
        }
    }

    SUBCASE("deterministic per seed") {
        const PointCloud a = template_cloud(SynthShape::ToyCar, 200, 11);
        const PointCloud b = template_cloud(SynthShape::ToyCar, 200, 11);
        const PointCloud c = template_cloud(SynthShape::ToyCar, 200, 12);
        REQUIRE(a.size() == b.size());
        bool same_ab = true, same_ac = true;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.points[i].x != b.points[i].x) same_ab = false;
            if (a.points[i].x != c.points[i].x) same_ac = false;
        }
        CHECK(same_ab);
        CHECK(!same_ac);
    }

    SUBCASE("shape names round trip") {
        CHECK(synth_shape_from_string("sphere") == SynthShape::Sphere);
        CHECK(to_string(SynthShape::ToyCar) == "toy_car");
        CHECK_THROWS_AS(synth_shape_from_string("teapot"), UnknownShape);
        CHECK_THROWS_AS(template_cloud(SynthShape::Sphere, 0, 1), IndexOutOfRange);
    }
}

TEST_CASE("render_instance produces a consistent mask") {
    const SynthScene scene = desk_scene();

    SUBCASE("frontal box shell shows only the near face band") {
        const auto [mask, partial] = render_instance(scene, 1);
        REQUIRE(!mask.pixels.empty());
        const double z_near = 8.0 - 0.5 * 1.6;  // box center minus half width
        for (const Vec3& p : partial.points) {
            CHECK(p.z >= z_near - 1e-9);
            CHECK(p.z <= z_near * 1.02 + 1e-9);  // documented z-buffer slack
        }
        // dominant disparity mode = the constant near-face depth
        const double near_disp = depth_to_disparity(z_near, scene.rig);
        std::size_t exact = 0;
        for (const MaskPixel& m : mask.pixels)
            if (m.disparity == doctest::Approx(near_disp).epsilon(1e-12)) ++exact;
        CHECK(exact > mask.pixels.size() / 2);
    }

    SUBCASE("mask pixels backproject onto the recorded surface") {
        for (std::size_t index : {std::size_t(0), std::size_t(1), std::size_t(2)}) {
            const auto [mask, partial] = render_instance(scene, index);
            const PointCloud rec =
                extract_visible(mask, scene.rig, scene.rig.left, mask.pixels.size(), 1);
            double depth_max = 0.0;
            for (const Vec3& p : partial.points) depth_max = std::max(depth_max, p.z);
            const double bound = std::sqrt(2.0) * depth_max / scene.rig.left.fx;
            CHECK(chamfer(rec, partial) < 2.0 * bound);
        }
    }

    SUBCASE("rendering is pure given the seed") {
        const auto [mask_a, partial_a] = render_instance(scene, 2);
        const auto [mask_b, partial_b] = render_instance(scene, 2);
        REQUIRE(mask_a.pixels.size() == mask_b.pixels.size());
        for (std::size_t i = 0; i < mask_a.pixels.size(); ++i) {
            CHECK(mask_a.pixels[i].px.u == mask_b.pixels[i].px.u);
            CHECK(mask_a.pixels[i].disparity == mask_b.pixels[i].disparity);
        }
    }

    SUBCASE("bad index is an error") {
        CHECK_THROWS_AS(render_instance(scene, 99), IndexOutOfRange);
    }
}

TEST_CASE("mirror completion beats the partial cloud on every template") {
    const SynthScene scene = desk_scene();
    for (std::size_t index = 0; index < scene.items.size(); ++index) {
        const auto [mask, partial] = render_instance(scene, index);
        const PointCloud rec =
            extract_visible(mask, scene.rig, scene.rig.left, mask.pixels.size(), 9);
        const PointCloud partial_ocs = ocs_transform(rec, scene.items[index].box);
        const PointCloud completed = mirror_hallucinate(partial_ocs, 4096);
        const TemplateLibrary lib = TemplateLibrary::from_clouds(
            {to_string(scene.items[index].shape)},
            {template_cloud(scene.items[index].shape, 2048, scene.seed + 99)}, 0);
        const double before = mmd(partial_ocs, lib);
        const double after = mmd(completed, lib);
        CAPTURE(to_string(scene.items[index].shape));
        CHECK(after < before);
    }
}

TEST_CASE("scene configs parse and validate") {
    const std::string text =
        "# desk scene\n"
        "fx = 500\nfy = 500\ncx = 320\ncy = 240\nbaseline = 0.54\nseed = 9\n"
        "surface_samples = 5000\n"
        "instance = sphere, 0, 0, 8, 1.5, 1.6, 4.0, 0.0\n"
        "instance = toy_car, 1, 0, 12, 1.5, 1.6, 4.0, 0.3\n";
    const SynthScene scene = parse_scene_config(text, "scene");
    CHECK(scene.rig.left.fx == 500.0);
    CHECK(scene.rig.baseline_m == 0.54);
    CHECK(scene.seed == 9);
    CHECK(scene.surface_samples == 5000);
    REQUIRE(scene.items.size() == 2);
    CHECK(scene.items[1].shape == SynthShape::ToyCar);
    CHECK(scene.items[1].box.yaw == doctest::Approx(0.3));

    CHECK_THROWS_AS(parse_scene_config("focal = 1\n", "scene"), MalformedLine);
    CHECK_THROWS_AS(parse_scene_config("instance = sphere, 1, 2\n", "scene"), MalformedLine);
    CHECK_THROWS_AS(parse_scene_config("instance = cone, 0,0,8, 1,1,1, 0\n", "scene"),
                    UnknownShape);
    // a box behind the camera violates the scene invariant
    CHECK_THROWS_AS(parse_scene_config("instance = sphere, 0, 0, -8, 1.5, 1.6, 4.0, 0\n",
                                       "scene"),
                    IndexOutOfRange);
}
