#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "stereoshape/instance.hpp"
#include "stereoshape/rng.hpp"

using namespace stereoshape;

namespace {

// Independent oracle: build the literal 4x4 object-to-camera matrix (rotation
// scaled by l on every row), invert it with Gauss-Jordan, apply to a point.
struct Mat4 {
    double m[4][4] = {};
};

Mat4 ocs_matrix(const Box3D& b) {
    Mat4 o;
    const double c = std::cos(b.yaw), s = std::sin(b.yaw), l = b.length;
    o.m[0][0] = c * l;
    o.m[0][2] = s * l;
    o.m[0][3] = b.center.x;
    o.m[1][1] = l;
    o.m[1][3] = b.center.y;
    o.m[2][0] = -s * l;
    o.m[2][2] = c * l;
    o.m[2][3] = b.center.z;
    o.m[3][3] = 1.0;
    return o;
}

Mat4 invert4(Mat4 a) {
    Mat4 inv;
    for (int i = 0; i < 4; ++i) inv.m[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a.m[r][col]) > std::abs(a.m[pivot][col])) pivot = r;
        std::swap(a.m[col], a.m[pivot]);
        std::swap(inv.m[col], inv.m[pivot]);
        const double d = a.m[col][col];
        for (int c = 0; c < 4; ++c) {
            a.m[col][c] /= d;
            inv.m[col][c] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = a.m[r][col];
            for (int c = 0; c < 4; ++c) {
                a.m[r][c] -= f * a.m[col][c];
                inv.m[r][c] -= f * inv.m[col][c];
            }
        }
    }
    return inv;
}

Vec3 apply4(const Mat4& m, const Vec3& p) {
    const double in[4] = {p.x, p.y, p.z, 1.0};
    double out[4] = {};
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out[r] += m.m[r][c] * in[c];
    return {out[0], out[1], out[2]};
}

ForegroundMask make_mask(std::size_t count, double disparity) {
    ForegroundMask mask;
    mask.origin_u = 40.0;
    mask.origin_v = 40.0;
    mask.width = 64;
    mask.height = 64;
    for (std::size_t i = 0; i < count; ++i) {
        MaskPixel m;
        m.px = {40.0 + static_cast<double>(i % 64), 40.0 + static_cast<double>(i / 64)};
        m.disparity = disparity;
        mask.pixels.push_back(m);
    }
    return mask;
}

}  // namespace

TEST_CASE("Box3D validates dimensions and normalizes yaw") {
    CHECK_THROWS_AS(Box3D({0, 0, 0}, 0.0, 1.0, 1.0, 0.0), DegenerateBox);
    CHECK_THROWS_AS(Box3D({0, 0, 0}, 1.0, -1.0, 1.0, 0.0), DegenerateBox);
    const Box3D b({0, 0, 0}, 1.0, 1.0, 1.0, 3.0 * M_PI);
    CHECK(b.yaw == doctest::Approx(M_PI));
}

TEST_CASE("sample_foreground") {
    SUBCASE("exact-size mask returns the full set") {
        const ForegroundMask mask = make_mask(4, 10.0);
        const auto sample = sample_foreground(mask, 4, 1);
        REQUIRE(sample.size() == 4);
        std::set<std::pair<double, double>> got, want;
        for (const MaskPixel& m : sample) {
            CHECK(!m.is_padding);
            got.insert({m.px.u, m.px.v});
        }
        for (const MaskPixel& m : mask.pixels) want.insert({m.px.u, m.px.v});
        CHECK(got == want);
    }

    SUBCASE("small masks are zero padded with flags") {
        const ForegroundMask mask = make_mask(2, 10.0);
        const auto sample = sample_foreground(mask, 4, 1);
        REQUIRE(sample.size() == 4);
        CHECK(!sample[0].is_padding);
        CHECK(!sample[1].is_padding);
        CHECK(sample[2].is_padding);
        CHECK(sample[3].is_padding);
    }

    SUBCASE("sampling is deterministic per seed and without replacement") {
        ForegroundMask mask;
        mask.origin_u = 0.0;
        mask.origin_v = 0.0;
        mask.width = 200;
        mask.height = 200;
        for (std::size_t i = 0; i < 10000; ++i) {
            MaskPixel m;
            m.px = {static_cast<double>(i % 200), static_cast<double>(i / 200)};
            m.disparity = 5.0;
            mask.pixels.push_back(m);
        }
        const auto a = sample_foreground(mask, 2048, 77);
        const auto b = sample_foreground(mask, 2048, 77);
        REQUIRE(a.size() == b.size());
        std::set<std::pair<double, double>> distinct;
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].px.u == b[i].px.u);
            CHECK(a[i].px.v == b[i].px.v);
            distinct.insert({a[i].px.u, a[i].px.v});
        }
        CHECK(distinct.size() == 2048);  // without replacement

        const auto c = sample_foreground(mask, 2048, 78);
        bool same = true;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].px.u != c[i].px.u || a[i].px.v != c[i].px.v) same = false;
        CHECK(!same);
    }

    SUBCASE("empty mask is an error") {
        const ForegroundMask mask = make_mask(0, 10.0);
        CHECK_THROWS_AS(sample_foreground(mask, 4, 1), EmptyMask);
    }
}

TEST_CASE("extract_visible backprojects sampled pixels") {
    const CameraIntrinsics k(100.0, 100.0, 50.0, 50.0);
    const StereoRig rig(k, 0.5);

    SUBCASE("single pixel at the principal point") {
        ForegroundMask mask;
        mask.origin_u = 50.0;
        mask.origin_v = 50.0;
        mask.width = 1;
        mask.height = 1;
        mask.pixels.push_back({{50.0, 50.0}, 10.0});
        const PointCloud cloud = extract_visible(mask, rig, k, 1, 1);
        REQUIRE(cloud.size() == 1);
        CHECK(cloud.points[0].x == doctest::Approx(0.0));
        CHECK(cloud.points[0].y == doctest::Approx(0.0));
        CHECK(cloud.points[0].z == doctest::Approx(5.0));
    }

    SUBCASE("constant disparity puts points on a fronto-parallel plane") {
        const ForegroundMask mask = make_mask(4, 12.5);
        const PointCloud cloud = extract_visible(mask, rig, k, 4, 1);
        const double depth = 100.0 * 0.5 / 12.5;
        for (const Vec3& p : cloud.points) CHECK(std::abs(p.z - depth) < 1e-9);
    }

    SUBCASE("padding points are flagged zeros") {
        const ForegroundMask mask = make_mask(2, 10.0);
        const PointCloud cloud = extract_visible(mask, rig, k, 5, 1);
        REQUIRE(cloud.size() == 5);
        CHECK(cloud.valid_count() == 2);
        CHECK(cloud.is_padding(2));
        CHECK(cloud.points[2].x == 0.0);
        CHECK(cloud.points[2].z == 0.0);
    }

    SUBCASE("non-positive disparity is an error") {
        ForegroundMask mask = make_mask(2, 10.0);
        mask.pixels[1].disparity = -1.0;
        CHECK_THROWS_AS(extract_visible(mask, rig, k, 2, 1), NonPositiveDisparity);
    }
}

TEST_CASE("ocs_transform examples") {
    SUBCASE("unit box at the origin is the identity") {
        const Box3D b({0, 0, 0}, 1.0, 1.0, 1.0, 0.0);
        PointCloud cloud(Frame::CCS, {{0.3, -0.2, 0.7}});
        const PointCloud out = ocs_transform(cloud, b);
        CHECK(out.frame == Frame::OCS);
        CHECK(out.points[0].x == doctest::Approx(0.3));
        CHECK(out.points[0].y == doctest::Approx(-0.2));
        CHECK(out.points[0].z == doctest::Approx(0.7));
    }

    SUBCASE("box center maps to the origin") {
        const Box3D b({2.0, 0.0, 10.0}, 1.5, 1.6, 4.0, 0.0);
        PointCloud cloud(Frame::CCS, {{2.0, 0.0, 10.0}});
        const PointCloud out = ocs_transform(cloud, b);
        CHECK(std::abs(out.points[0].x) < 1e-12);
        CHECK(std::abs(out.points[0].y) < 1e-12);
        CHECK(std::abs(out.points[0].z) < 1e-12);
    }

    SUBCASE("matches the explicit 4x4 inverse oracle") {
        const Box3D b({0.0, 0.0, 0.0}, 1.0, 1.0, 2.0, M_PI / 2.0);
        PointCloud cloud(Frame::CCS, {{1.0, 0.0, 0.0}});
        const PointCloud out = ocs_transform(cloud, b);
        const Vec3 oracle = apply4(invert4(ocs_matrix(b)), {1.0, 0.0, 0.0});
        CHECK(out.points[0].x == doctest::Approx(oracle.x).epsilon(1e-12));
        CHECK(out.points[0].y == doctest::Approx(oracle.y).epsilon(1e-12));
        CHECK(out.points[0].z == doctest::Approx(oracle.z).epsilon(1e-12));
    }

    SUBCASE("random boxes and points match the oracle") {
        Rng rng(17);
        for (int i = 0; i < 200; ++i) {
            const Box3D b({rng.next_uniform(-10, 10), rng.next_uniform(-2, 2),
                           rng.next_uniform(1, 60)},
                          rng.next_uniform(0.5, 3.0), rng.next_uniform(0.5, 3.0),
                          rng.next_uniform(0.5, 6.0), rng.next_uniform(-4.0, 4.0));
            const Vec3 p{rng.next_uniform(-20, 20), rng.next_uniform(-5, 5),
                         rng.next_uniform(-20, 60)};
            const PointCloud out = ocs_transform(PointCloud(Frame::CCS, {p}), b);
            const Vec3 oracle = apply4(invert4(ocs_matrix(b)), p);
            CHECK(std::abs(out.points[0].x - oracle.x) < 1e-9);
            CHECK(std::abs(out.points[0].y - oracle.y) < 1e-9);
            CHECK(std::abs(out.points[0].z - oracle.z) < 1e-9);
        }
    }
}

TEST_CASE("ocs corners land on the forced lattice") {
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const Box3D b({rng.next_uniform(-10, 10), rng.next_uniform(-2, 2),
                       rng.next_uniform(1, 60)},
                      rng.next_uniform(0.5, 3.0), rng.next_uniform(0.5, 3.0),
                      rng.next_uniform(0.5, 6.0), rng.next_uniform(-4.0, 4.0));
        const PointCloud corners(Frame::CCS, b.corners());
        const PointCloud out = ocs_transform(corners, b);
        const double ey = b.height / (2.0 * b.length);
        const double ez = b.width / (2.0 * b.length);
        for (const Vec3& p : out.points) {
            CHECK(std::abs(std::abs(p.x) - 0.5) < 1e-9);
            CHECK(std::abs(std::abs(p.y) - ey) < 1e-9);
            CHECK(std::abs(std::abs(p.z) - ez) < 1e-9);
        }

        // per-axis scaling instead maps corners to the unit half-cube
        const PointCloud per_axis = ocs_transform(corners, b, OcsScale::PerAxis);
        for (const Vec3& p : per_axis.points) {
            CHECK(std::abs(std::abs(p.x) - 0.5) < 1e-9);
            CHECK(std::abs(std::abs(p.y) - 0.5) < 1e-9);
            CHECK(std::abs(std::abs(p.z) - 0.5) < 1e-9);
        }
    }
}

TEST_CASE("ocs transform round trips") {
    Rng rng(23);
    for (int i = 0; i < 200; ++i) {
        const Box3D b({rng.next_uniform(-10, 10), rng.next_uniform(-2, 2),
                       rng.next_uniform(1, 60)},
                      rng.next_uniform(0.5, 3.0), rng.next_uniform(0.5, 3.0),
                      rng.next_uniform(0.5, 6.0), rng.next_uniform(-4.0, 4.0));
        PointCloud cloud(Frame::CCS, {});
        for (int j = 0; j < 10; ++j)
            cloud.points.push_back({rng.next_uniform(-20, 20), rng.next_uniform(-5, 5),
                                    rng.next_uniform(-20, 60)});
        const OcsScale scale = i % 2 == 0 ? OcsScale::UniformL : OcsScale::PerAxis;
        const PointCloud there = ocs_transform(cloud, b, scale);
        const PointCloud back = ocs_inverse(there, b, scale);
        for (std::size_t j = 0; j < cloud.size(); ++j) {
            CHECK(std::abs(back.points[j].x - cloud.points[j].x) < 1e-9);
            CHECK(std::abs(back.points[j].y - cloud.points[j].y) < 1e-9);
            CHECK(std::abs(back.points[j].z - cloud.points[j].z) < 1e-9);
        }
    }
    Box3D degenerate;
    degenerate.length = 0.0;  // sidestep the constructor guard
    CHECK_THROWS_AS(
        ocs_transform(PointCloud(Frame::CCS, {{0, 0, 0}}), degenerate, OcsScale::UniformL),
        DegenerateBox);
    CHECK_THROWS_AS(
        ocs_inverse(PointCloud(Frame::OCS, {{0, 0, 0}}), degenerate, OcsScale::UniformL),
        DegenerateBox);
}

TEST_CASE("padding points pin to the OCS origin and stay flagged") {
    const Box3D b({5.0, 1.0, 20.0}, 1.5, 1.6, 4.0, 0.7);
    PointCloud cloud(Frame::CCS, {{5.5, 1.0, 20.0}, {0.0, 0.0, 0.0}});
    cloud.padding = {0, 1};
    const PointCloud out = ocs_transform(cloud, b);
    CHECK(out.is_padding(1));
    CHECK(out.points[1].x == 0.0);
    CHECK(out.points[1].y == 0.0);
    CHECK(out.points[1].z == 0.0);
    CHECK(out.valid_count() == 1);
    const PointCloud back = ocs_inverse(out, b);
    CHECK(back.is_padding(1));
}

TEST_CASE("resample_fps") {
    SUBCASE("n equal to the cloud size permutes the input") {
        PointCloud cloud(Frame::OCS, {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0, 0, 3}});
        const PointCloud out = resample_fps(cloud, 4);
        REQUIRE(out.size() == 4);
        std::set<std::tuple<double, double, double>> got, want;
        for (const Vec3& p : out.points) got.insert({p.x, p.y, p.z});
        for (const Vec3& p : cloud.points) want.insert({p.x, p.y, p.z});
        CHECK(got == want);
    }

    SUBCASE("collinear points keep their endpoints") {
        PointCloud cloud(Frame::OCS, {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
        const PointCloud out = resample_fps(cloud, 2);
        REQUIRE(out.size() == 2);
        CHECK(out.points[0].x == doctest::Approx(2.0));  // max-norm start
        CHECK(out.points[1].x == doctest::Approx(0.0));  // farthest from it
    }

    SUBCASE("n = 1 returns the max-norm start point") {
        PointCloud cloud(Frame::OCS, {{0.1, 0, 0}, {0, -0.9, 0}, {0.5, 0.5, 0}});
        const PointCloud out = resample_fps(cloud, 1);
        REQUIRE(out.size() == 1);
        CHECK(out.points[0].y == doctest::Approx(-0.9));
    }

    SUBCASE("n beyond the cloud size repeats cyclically") {
        PointCloud cloud(Frame::OCS, {{0, 0, 0}, {1, 0, 0}});
        const PointCloud out = resample_fps(cloud, 5);
        REQUIRE(out.size() == 5);
        int zeros = 0, ones = 0;
        for (const Vec3& p : out.points) (p.x == 0.0 ? zeros : ones)++;
        CHECK(zeros + ones == 5);
        CHECK(std::abs(zeros - ones) <= 1);
    }

    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(resample_fps(PointCloud(Frame::OCS, {}), 3), EmptyCloud);
    }
}

TEST_CASE("mirror_hallucinate") {
    SUBCASE("a single point gains its lateral reflection") {
        PointCloud cloud(Frame::OCS, {{0.3, 0.0, 0.2}});
        const PointCloud out = mirror_hallucinate(cloud, 2);
        REQUIRE(out.size() == 2);
        std::set<std::tuple<double, double, double>> got;
        for (const Vec3& p : out.points) got.insert({p.x, p.y, p.z});
        CHECK(got.count({0.3, 0.0, 0.2}) == 1);
        CHECK(got.count({0.3, 0.0, -0.2}) == 1);
    }

    SUBCASE("laterally symmetric input stays within its own point set") {
        PointCloud cloud(Frame::OCS,
                         {{0.1, 0.0, 0.2}, {0.1, 0.0, -0.2}, {0.4, 0.1, 0.0}});
        const PointCloud out = mirror_hallucinate(cloud, 3);
        std::set<std::tuple<double, double, double>> want;
        for (const Vec3& p : cloud.points) want.insert({p.x, p.y, p.z});
        for (const Vec3& p : out.points) CHECK(want.count({p.x, p.y, p.z}) == 1);
    }

    SUBCASE("output is invariant under lateral reflection as a set") {
        Rng rng(31);
        PointCloud cloud(Frame::OCS, {});
        for (int i = 0; i < 40; ++i)
            cloud.points.push_back({rng.next_uniform(-0.5, 0.5), rng.next_uniform(-0.2, 0.2),
                                    rng.next_uniform(0.0, 0.25)});
        // pre-resampling merge is symmetric: completing to the full merged
        // size must contain each point's reflection
        const PointCloud out = mirror_hallucinate(cloud, 80);
        std::set<std::tuple<double, double, double>> got;
        for (const Vec3& p : out.points) got.insert({p.x, p.y, p.z});
        for (const Vec3& p : out.points) CHECK(got.count({p.x, p.y, -p.z}) == 1);
    }

    SUBCASE("padding-only cloud is an error") {
        PointCloud cloud(Frame::OCS, {{0, 0, 0}});
        cloud.padding = {1};
        CHECK_THROWS_AS(mirror_hallucinate(cloud, 4), EmptyCloud);
    }

    SUBCASE("the Hallucinator interface routes to the mirror baseline") {
        const MirrorHallucinator h;
        PointCloud cloud(Frame::OCS, {{0.3, 0.0, 0.2}});
        const PointCloud out = h.complete(cloud, 6);
        CHECK(out.size() == 6);
    }
}

TEST_CASE("encode_shape packs coordinates into an opaque code") {
    PointCloud cloud(Frame::OCS, {{0.1, 0.2, 0.3}, {-0.4, 0.5, -0.6}});
    const ShapeCode code = encode_shape(cloud);
    CHECK(code.dimension() == 6);
    CHECK(code.values[0] == 0.1);
    CHECK(code.values[5] == -0.6);
    for (double v : code.values) CHECK(std::isfinite(v));
    CHECK_THROWS_AS(encode_shape(PointCloud(Frame::OCS, {})), EmptyCloud);
}

TEST_CASE("visible-extraction pipeline is translation equivariant") {
    const CameraIntrinsics k(500.0, 500.0, 320.0, 240.0);
    const StereoRig rig(k, 0.54);
    Rng rng(37);

    // A handful of scene points near a box; translate box and points together.
    const Box3D base({0.4, 0.1, 12.0}, 1.5, 1.6, 4.0, 0.4);
    std::vector<Vec3> pts;
    for (int i = 0; i < 64; ++i)
        pts.push_back({base.center.x + rng.next_uniform(-1.5, 1.5),
                       base.center.y + rng.next_uniform(-0.7, 0.7),
                       base.center.z + rng.next_uniform(-0.7, 0.7)});

    const auto run = [&](const Vec3& shift) {
        ForegroundMask mask;
        mask.origin_u = 0.0;
        mask.origin_v = 0.0;
        mask.width = 4000;
        mask.height = 4000;
        for (const Vec3& p : pts) {
            const Vec3 moved = p + shift;
            MaskPixel m;
            m.px = project(moved, k);
            m.disparity = depth_to_disparity(moved.z, rig);
            mask.pixels.push_back(m);
        }
        const Box3D box({base.center.x + shift.x, base.center.y + shift.y,
                         base.center.z + shift.z},
                        base.height, base.width, base.length, base.yaw);
        const PointCloud visible = extract_visible(mask, rig, k, pts.size(), 5);
        return mirror_hallucinate(ocs_transform(visible, box), 64);
    };

    const PointCloud a = run({0.0, 0.0, 0.0});
    const PointCloud b = run({1.3, -0.4, 6.0});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a.points[i].x - b.points[i].x) < 1e-9);
        CHECK(std::abs(a.points[i].y - b.points[i].y) < 1e-9);
        CHECK(std::abs(a.points[i].z - b.points[i].z) < 1e-9);
    }
}
