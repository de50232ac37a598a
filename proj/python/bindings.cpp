#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twoview/bench.hpp"
#include "twoview/metrics.hpp"
#include "twoview/robust.hpp"
#include "twoview/solvers.hpp"
#include "twoview/synth.hpp"

namespace py = pybind11;
using namespace twoview;

namespace {

std::array<std::array<double, 3>, 3> to_rows(const Mat3& m) {
  return {{{m[0], m[1], m[2]}, {m[3], m[4], m[5]}, {m[6], m[7], m[8]}}};
}

Mat3 from_rows(const std::array<std::array<double, 3>, 3>& rows) {
  return {rows[0][0], rows[0][1], rows[0][2], rows[1][0], rows[1][1],
          rows[1][2], rows[2][0], rows[2][1], rows[2][2]};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-view matching and fundamental-matrix estimation toolkit";

  py::register_exception<Error>(m, "TwoViewError");

  py::class_<ImageDims>(m, "ImageDims")
      .def(py::init([](int h, int w) { return ImageDims{h, w}; }),
           py::arg("h"), py::arg("w"))
      .def_readwrite("h", &ImageDims::h)
      .def_readwrite("w", &ImageDims::w)
      .def("diagonal", &ImageDims::diagonal)
      .def("diagonal_factor", &ImageDims::diagonal_factor);

  py::class_<Correspondence>(m, "Correspondence")
      .def(py::init([](double u1, double v1, double u2, double v2,
                       std::optional<double> ratio) {
             return Correspondence{{u1, v1}, {u2, v2}, ratio};
           }),
           py::arg("u1"), py::arg("v1"), py::arg("u2"), py::arg("v2"),
           py::arg("ratio") = py::none())
      .def_property_readonly("u1",
                             [](const Correspondence& c) { return c.p1.u; })
      .def_property_readonly("v1",
                             [](const Correspondence& c) { return c.p1.v; })
      .def_property_readonly("u2",
                             [](const Correspondence& c) { return c.p2.u; })
      .def_property_readonly("v2",
                             [](const Correspondence& c) { return c.p2.v; })
      .def_property_readonly(
          "ratio", [](const Correspondence& c) { return c.nn_ratio; });

  py::class_<FundamentalMatrix>(m, "FundamentalMatrix")
      .def_static("from_rows",
                  [](const std::array<std::array<double, 3>, 3>& rows) {
                    return canonicalize(from_rows(rows));
                  })
      .def_property_readonly(
          "rows", [](const FundamentalMatrix& f) { return to_rows(f.m); })
      .def("transposed", &FundamentalMatrix::transposed)
      .def("__eq__", [](const FundamentalMatrix& a,
                        const FundamentalMatrix& b) { return a == b; });

  py::enum_<RigKind>(m, "RigKind")
      .value("SHORT_BASELINE_FORWARD", RigKind::ShortBaselineForward)
      .value("WIDE_BASELINE", RigKind::WideBaseline)
      .value("RANDOM", RigKind::Random);

  py::class_<SceneConfig>(m, "SceneConfig")
      .def(py::init([](RigKind rig, int n_points, double noise_sigma,
                       double outlier_rate, ImageDims dims,
                       std::uint64_t seed) {
             return SceneConfig{rig, n_points, noise_sigma, outlier_rate,
                                dims, seed};
           }),
           py::arg("rig") = RigKind::Random, py::arg("n_points") = 100,
           py::arg("noise_sigma") = 0.0, py::arg("outlier_rate") = 0.0,
           py::arg("dims") = ImageDims{480, 640}, py::arg("seed") = 0);

  py::class_<SyntheticPair>(m, "SyntheticPair")
      .def_readonly("f_gt", &SyntheticPair::f_gt)
      .def_readonly("inlier_truth", &SyntheticPair::inlier_truth)
      .def_readonly("dims1", &SyntheticPair::dims1)
      .def_readonly("dims2", &SyntheticPair::dims2)
      .def_property_readonly("correspondences", [](const SyntheticPair& p) {
        return p.corrs.correspondences;
      });

  m.def("generate_pair", &generate_pair, py::arg("config"));

  py::enum_<EstimatorKind>(m, "EstimatorKind")
      .value("RANSAC", EstimatorKind::Ransac)
      .value("MSAC", EstimatorKind::Msac)
      .value("LMEDS", EstimatorKind::LMedS)
      .value("COARSE_TO_FINE", EstimatorKind::CoarseToFine);

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init([](EstimatorKind kind, int max_iterations,
                       double confidence, double inlier_threshold,
                       std::uint64_t seed) {
             return EstimatorConfig{kind, max_iterations, confidence,
                                    inlier_threshold, seed};
           }),
           py::arg("kind") = EstimatorKind::Ransac,
           py::arg("max_iterations") = 2000, py::arg("confidence") = 0.99,
           py::arg("inlier_threshold") = 1.0, py::arg("seed") = 0);

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("f", &EstimationResult::f)
      .def_readonly("inlier_mask", &EstimationResult::inlier_mask)
      .def_readonly("iterations_used", &EstimationResult::iterations_used)
      .def_readonly("score", &EstimationResult::score)
      .def_readonly("inlier_cutoff", &EstimationResult::inlier_cutoff);

  m.def(
      "estimate",
      [](const std::vector<Correspondence>& corrs,
         const EstimatorConfig& cfg) { return estimate(corrs, cfg); },
      py::arg("correspondences"), py::arg("config"));

  m.def(
      "solve_eight_point",
      [](const std::vector<Correspondence>& corrs) {
        return solve_eight_point(corrs);
      },
      py::arg("correspondences"));
  m.def(
      "solve_seven_point",
      [](const std::vector<Correspondence>& corrs) {
        return solve_seven_point(corrs);
      },
      py::arg("correspondences"));

  m.def(
      "sort_by_ratio",
      [](const std::vector<Correspondence>& corrs) {
        return sort_by_ratio(corrs);
      },
      py::arg("correspondences"));

  py::class_<SgdConfig>(m, "SgdConfig")
      .def(py::init([](int n_samples, std::uint64_t seed, ImageDims dims1,
                       ImageDims dims2) {
             return SgdConfig{n_samples, seed, dims1, dims2};
           }),
           py::arg("n_samples") = 1000, py::arg("seed") = 0,
           py::arg("dims1") = ImageDims{480, 640},
           py::arg("dims2") = ImageDims{480, 640});

  m.def("compute_sgd", &compute_sgd, py::arg("f1"), py::arg("f2"),
        py::arg("config"));
  m.def("compute_nsgd", &compute_nsgd, py::arg("f1"), py::arg("f2"),
        py::arg("config"));
  m.def("nsgd", &nsgd, py::arg("sgd_px"), py::arg("dims1"), py::arg("dims2"));
  m.def(
      "recall",
      [](const std::vector<double>& values, double threshold) {
        return recall(values, threshold);
      },
      py::arg("nsgd_values"), py::arg("threshold") = 0.05);
  m.def(
      "inlier_rate",
      [](const std::vector<Correspondence>& corrs,
         const FundamentalMatrix& f_gt, const ImageDims& d1,
         const ImageDims& d2, double alpha) {
        return inlier_rate(corrs, f_gt, d1, d2, alpha);
      },
      py::arg("correspondences"), py::arg("f_gt"), py::arg("dims1"),
      py::arg("dims2"), py::arg("alpha") = 0.003);

  m.def(
      "ratio_test_list",
      [](const std::vector<Correspondence>& corrs, double threshold) {
        MatchSet ms;
        ms.correspondences = corrs;
        ms.keypoints1 = ms.keypoints2 = corrs.size();
        return ratio_test(ms, threshold).correspondences;
      },
      py::arg("correspondences"), py::arg("threshold"));

  m.def("load_fmatrix", &load_fmatrix, py::arg("path"));
  m.def("save_fmatrix", &save_fmatrix, py::arg("path"), py::arg("f"));
}
