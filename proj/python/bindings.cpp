#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stereoshape/evaluation.hpp"
#include "stereoshape/kitti_io.hpp"
#include "stereoshape/occupancy.hpp"
#include "stereoshape/synth.hpp"

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)

namespace py = pybind11;
using namespace stereoshape;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_points(const Array& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3)
        throw py::value_error("expected an (N, 3) array");
    std::vector<Vec3> pts(static_cast<std::size_t>(arr.shape(0)));
    const auto view = arr.unchecked<2>();
    for (py::ssize_t i = 0; i < arr.shape(0); ++i)
        pts[static_cast<std::size_t>(i)] = {view(i, 0), view(i, 1), view(i, 2)};
    return pts;
}

PointCloud to_cloud(const Array& arr, Frame frame) {
    return PointCloud(frame, to_points(arr));
}

py::array_t<double> from_points(const std::vector<Vec3>& pts) {
    py::array_t<double> arr({static_cast<py::ssize_t>(pts.size()), py::ssize_t(3)});
    auto view = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        view(static_cast<py::ssize_t>(i), 0) = pts[i].x;
        view(static_cast<py::ssize_t>(i), 1) = pts[i].y;
        view(static_cast<py::ssize_t>(i), 2) = pts[i].z;
    }
    return arr;
}

Rect2D to_rect(const std::array<double, 4>& r) { return {r[0], r[1], r[2], r[3]}; }

}  // namespace

PYBIND11_MODULE(_stereoshape, m) {
    m.doc() = "stereo 3D detection shape pipeline and evaluation metrics";

    py::register_exception<Error>(m, "StereoShapeError");

    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init<double, double, double, double>(), py::arg("fx"), py::arg("fy"),
             py::arg("cx"), py::arg("cy"))
        .def_readonly("fx", &CameraIntrinsics::fx)
        .def_readonly("fy", &CameraIntrinsics::fy)
        .def_readonly("cx", &CameraIntrinsics::cx)
        .def_readonly("cy", &CameraIntrinsics::cy);

    py::class_<StereoRig>(m, "StereoRig")
        .def(py::init<CameraIntrinsics, double>(), py::arg("left"), py::arg("baseline_m"))
        .def_readonly("left", &StereoRig::left)
        .def_readonly("baseline_m", &StereoRig::baseline_m)
        .def_property_readonly("focal", &StereoRig::focal);

    py::class_<Box3D>(m, "Box3D")
        .def(py::init([](double x, double y, double z, double h, double w, double l,
                         double yaw, std::optional<double> score) {
                 return Box3D({x, y, z}, h, w, l, yaw, score);
             }),
             py::arg("x"), py::arg("y"), py::arg("z"), py::arg("h"), py::arg("w"),
             py::arg("l"), py::arg("yaw"), py::arg("score") = py::none())
        .def_property_readonly("center",
                               [](const Box3D& b) {
                                   return py::make_tuple(b.center.x, b.center.y, b.center.z);
                               })
        .def_readonly("height", &Box3D::height)
        .def_readonly("width", &Box3D::width)
        .def_readonly("length", &Box3D::length)
        .def_readonly("yaw", &Box3D::yaw)
        .def_readonly("score", &Box3D::score)
        .def("corners", [](const Box3D& b) { return from_points(b.corners()); });

    m.def(
        "project",
        [](const Array& pts, const CameraIntrinsics& k) {
            const std::vector<Vec3> p = to_points(pts);
            py::array_t<double> out({static_cast<py::ssize_t>(p.size()), py::ssize_t(2)});
            auto view = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < p.size(); ++i) {
                const Pixel px = project(p[i], k);
                view(static_cast<py::ssize_t>(i), 0) = px.u;
                view(static_cast<py::ssize_t>(i), 1) = px.v;
            }
            return out;
        },
        py::arg("points"), py::arg("intrinsics"),
        "Perspective projection of (N, 3) camera-frame points to (N, 2) pixels.");

    m.def(
        "backproject",
        [](const Array& pixels, const Array& depths, const CameraIntrinsics& k) {
            if (pixels.ndim() != 2 || pixels.shape(1) != 2)
                throw py::value_error("expected an (N, 2) pixel array");
            if (depths.ndim() != 1 || depths.shape(0) != pixels.shape(0))
                throw py::value_error("expected an (N,) depth array");
            const auto px = pixels.unchecked<2>();
            const auto d = depths.unchecked<1>();
            std::vector<Vec3> out(static_cast<std::size_t>(pixels.shape(0)));
            for (py::ssize_t i = 0; i < pixels.shape(0); ++i)
                out[static_cast<std::size_t>(i)] =
                    backproject({px(i, 0), px(i, 1)}, d(i), k);
            return from_points(out);
        },
        py::arg("pixels"), py::arg("depths"), py::arg("intrinsics"));

    m.def("disparity_to_depth", &disparity_to_depth, py::arg("disparity"), py::arg("rig"));
    m.def("depth_to_disparity", &depth_to_disparity, py::arg("depth"), py::arg("rig"));

    m.def(
        "ocs_transform",
        [](const Array& pts, const Box3D& box, bool per_axis) {
            return from_points(ocs_transform(to_cloud(pts, Frame::CCS), box,
                                             per_axis ? OcsScale::PerAxis
                                                      : OcsScale::UniformL)
                                   .points);
        },
        py::arg("points"), py::arg("box"), py::arg("per_axis") = false,
        "Normalize camera-frame points into the box's canonical object frame.");

    m.def(
        "ocs_inverse",
        [](const Array& pts, const Box3D& box, bool per_axis) {
            return from_points(ocs_inverse(to_cloud(pts, Frame::OCS), box,
                                           per_axis ? OcsScale::PerAxis : OcsScale::UniformL)
                                   .points);
        },
        py::arg("points"), py::arg("box"), py::arg("per_axis") = false);

    m.def(
        "mirror_hallucinate",
        [](const Array& pts, std::size_t n) {
            return from_points(mirror_hallucinate(to_cloud(pts, Frame::OCS), n).points);
        },
        py::arg("points"), py::arg("count"),
        "Mirror-symmetry completion: reflect across z=0, merge, resample to count.");

    m.def(
        "resample_fps",
        [](const Array& pts, std::size_t n) {
            return from_points(resample_fps(to_cloud(pts, Frame::OCS), n).points);
        },
        py::arg("points"), py::arg("count"));

    m.def(
        "chamfer",
        [](const Array& a, const Array& b, bool squared) {
            return chamfer(to_cloud(a, Frame::OCS), to_cloud(b, Frame::OCS),
                           squared ? ChamferNorm::SquaredL2 : ChamferNorm::L2);
        },
        py::arg("a"), py::arg("b"), py::arg("squared") = false);

    py::class_<TemplateLibrary>(m, "TemplateLibrary")
        .def(py::init([](const std::vector<Array>& clouds, std::size_t resample_n) {
                 std::vector<std::string> names;
                 std::vector<PointCloud> pcs;
                 for (std::size_t i = 0; i < clouds.size(); ++i) {
                     names.push_back(std::to_string(i));
                     pcs.push_back(to_cloud(clouds[i], Frame::OCS));
                 }
                 return TemplateLibrary::from_clouds(std::move(names), std::move(pcs),
                                                     resample_n);
             }),
             py::arg("clouds"), py::arg("resample_n") = 0)
        .def("__len__", &TemplateLibrary::size);

    m.def(
        "mmd",
        [](const Array& p, const TemplateLibrary& lib, bool squared) {
            return mmd(to_cloud(p, Frame::OCS), lib,
                       squared ? ChamferNorm::SquaredL2 : ChamferNorm::L2);
        },
        py::arg("cloud"), py::arg("library"), py::arg("squared") = false,
        "Minimal matching distance: min Chamfer distance over the library.");

    m.def(
        "iou_2d",
        [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
            return iou_2d(to_rect(a), to_rect(b));
        },
        py::arg("a"), py::arg("b"), "IoU of (left, top, right, bottom) rectangles.");
    m.def("iou_bev", &iou_bev, py::arg("a"), py::arg("b"));
    m.def("iou_3d", &iou_3d, py::arg("a"), py::arg("b"));

    m.def(
        "ap_11",
        [](const std::vector<std::pair<double, double>>& pairs) {
            std::vector<RecallPoint> points;
            points.reserve(pairs.size());
            for (const auto& [r, v] : pairs) points.push_back({r, v});
            return ap_11(points);
        },
        py::arg("recall_value_pairs"),
        "11-point interpolated average of (recall, value) pairs.");
    m.def("delta_mmd", &delta_mmd, py::arg("mmd_value"));
    m.def("orientation_similarity", &orientation_similarity, py::arg("yaw_a"), py::arg("yaw_b"));

    m.def(
        "marching_cubes",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
           const std::array<double, 3>& min_corner, const std::array<double, 3>& max_corner,
           double iso) {
            if (values.ndim() != 3) throw py::value_error("expected a 3D value lattice");
            const std::size_t nx = static_cast<std::size_t>(values.shape(0));
            const std::size_t ny = static_cast<std::size_t>(values.shape(1));
            const std::size_t nz = static_cast<std::size_t>(values.shape(2));
            std::vector<double> v(values.data(), values.data() + values.size());
            const Vec3 lo{min_corner[0], min_corner[1], min_corner[2]};
            const Vec3 hi{max_corner[0], max_corner[1], max_corner[2]};
            const TabulatedField field(lo, hi, nx, ny, nz, std::move(v));
            const TriangleMesh mesh =
                marching_cubes(field, IsoGridSpec{lo, hi, nx, ny, nz}, iso);

            py::array_t<std::uint32_t> tris(
                {static_cast<py::ssize_t>(mesh.triangles.size()), py::ssize_t(3)});
            auto tv = tris.mutable_unchecked<2>();
            for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
                for (int c = 0; c < 3; ++c)
                    tv(static_cast<py::ssize_t>(t), c) = mesh.triangles[t][c];
            return py::make_tuple(from_points(mesh.vertices), tris);
        },
        py::arg("values"), py::arg("min_corner"), py::arg("max_corner"), py::arg("iso") = 0.5,
        "Isosurface of a confidence lattice; returns (vertices, triangles).");

    m.def(
        "template_cloud",
        [](const std::string& shape, std::size_t n, std::uint64_t seed) {
            return from_points(template_cloud(synth_shape_from_string(shape), n, seed).points);
        },
        py::arg("shape"), py::arg("count"), py::arg("seed") = 1,
        "Canonical surface samples of a synthetic template (sphere, box_shell, toy_car).");

#ifdef VERSION_INFO
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
