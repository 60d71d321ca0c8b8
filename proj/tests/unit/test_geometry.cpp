#include <doctest.h>

#include <cmath>

#include "eigstab/error.hpp"
#include "eigstab/experiments.hpp"
#include "eigstab/geometry.hpp"
#include "support.hpp"

using namespace eigstab;
using eigstab::testing::Rng;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an eigstab::Error");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("polygon validation") {
  CHECK_NOTHROW(unit_square());
  CHECK(unit_square().signed_area() == doctest::Approx(1.0));
  CHECK(kind_of([] { PolygonSpec({{0, 0}, {1, 0}}); }) == ErrorKind::InvalidArgument);
  // Clockwise order is rejected.
  CHECK(kind_of([] { PolygonSpec({{0, 0}, {0, 1}, {1, 1}, {1, 0}}); }) == ErrorKind::InvalidArgument);
  // Bow-tie.
  CHECK(kind_of([] { PolygonSpec({{0, 0}, {1, 1}, {1, 0}, {0, 1}}); }) == ErrorKind::SelfIntersecting);
  CHECK(kind_of([] { PolygonSpec({{0, 0}, {1, 0}, {NAN, 1}}); }) == ErrorKind::InvalidArgument);

  auto p = PolygonSpec::from_parameters(std::vector<double>{0, 1, 1, 0, 0, 0, 1, 1});
  CHECK(p.vertices() == unit_square().vertices());
  CHECK(p.parameters() == std::vector<double>{0, 1, 1, 0, 0, 0, 1, 1});
  CHECK(p.diameter() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("perturb_polygon") {
  SUBCASE("stretch of the unit square") {
    auto r = perturb_polygon(unit_square(), {rect_stretch_direction(), 1e-4});
    CHECK(r[1].x == 1.0 + 1e-4);
    CHECK(r[2].x == 1.0 + 1e-4);
    CHECK(r[2].y == 1.0);
    CHECK(r[0] == Point2{0, 0});
    CHECK(r[3] == Point2{0, 1});
  }
  SUBCASE("t = 0 is the identity") {
    Rng rng(3);
    auto p = eigstab::testing::random_convex_polygon(rng, 7);
    CHECK(perturb_polygon(p, {eigstab::testing::random_direction(rng, 7), 0.0}).vertices() == p.vertices());
  }
  SUBCASE("triangle case A moves the apex right") {
    auto r = perturb_polygon(equilateral_triangle(), {triangle_direction(TriangleCase::A), 1e-6});
    CHECK(r[2].x == 0.5 + 1e-6);
    CHECK(r[2].y == std::sqrt(3.0) / 2);
  }
  SUBCASE("errors") {
    // Pushing a square vertex across the opposite edge folds the polygon.
    std::vector<double> e{0, 0, -3, 0, 0, 0, 0, 0};
    CHECK(kind_of([&] { perturb_polygon(unit_square(), {e, 1.0}); }) == ErrorKind::SelfIntersecting);
    CHECK(kind_of([] { perturb_polygon(unit_square(), {{1, 0, 0}, 0.1}); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([] { perturb_polygon(unit_square(), {std::vector<double>(8, 0.0), 0.1}); }) ==
          ErrorKind::InvalidArgument);
    CHECK(kind_of([] { perturb_polygon(unit_square(), {rect_stretch_direction(), -0.1}); }) ==
          ErrorKind::InvalidArgument);
  }
}

TEST_CASE("fan_macro_triangulation") {
  CHECK(fan_macro_triangulation(equilateral_triangle()).triangles.size() == 1);
  auto sq = fan_macro_triangulation(unit_square());
  REQUIRE(sq.triangles.size() == 2);
  CHECK(sq.triangles[0] == std::array<std::size_t, 3>{0, 1, 2});
  CHECK(sq.triangles[1] == std::array<std::size_t, 3>{0, 2, 3});

  std::vector<Point2> pent;
  for (int i = 0; i < 5; ++i) pent.push_back({std::cos(2 * M_PI * i / 5), std::sin(2 * M_PI * i / 5)});
  CHECK(fan_macro_triangulation(PolygonSpec(pent)).triangles.size() == 3);

  // Reflex vertex.
  PolygonSpec dart({{0, 0}, {2, 0}, {1, 0.3}, {2, 2}, {0, 2}});
  CHECK(kind_of([&] { fan_macro_triangulation(dart); }) == ErrorKind::NonConvex);
  // Collinear middle vertex is not strictly convex.
  PolygonSpec flat({{0, 0}, {1, 0}, {2, 0}, {1, 1}});
  CHECK(kind_of([&] { fan_macro_triangulation(flat); }) == ErrorKind::NonConvex);
}

TEST_CASE("affine_from_triangles") {
  Triangle2 ref{Point2{0, 0}, Point2{1, 0}, Point2{0, 1}};
  auto id = affine_from_triangles(ref, ref);
  CHECK(id.det() == doctest::Approx(1.0));
  CHECK((id.linear() - Eigen::Matrix2d::Identity()).norm() < 1e-15);

  const double t = 0.1;
  auto m = affine_from_triangles(ref, {Point2{0, 0}, Point2{1 + t, 0}, Point2{0, 1}});
  CHECK(m.linear()(0, 0) == doctest::Approx(1 + t));
  CHECK(std::abs(m.linear()(0, 1)) < 1e-15);
  CHECK(std::abs(m.linear()(1, 0)) < 1e-15);
  CHECK(m.linear()(1, 1) == doctest::Approx(1.0));
  CHECK(m.det() == doctest::Approx(1 + t));
  CHECK(m.offset().norm() < 1e-15);

  CHECK(kind_of([&] { affine_from_triangles({Point2{0, 0}, Point2{1, 0}, Point2{2, 0}}, ref); }) ==
        ErrorKind::DegenerateTriangle);
  CHECK(kind_of([&] { affine_from_triangles(ref, {Point2{0, 0}, Point2{1, 1}, Point2{2, 2}}); }) ==
        ErrorKind::DegenerateTriangle);

  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    auto a = eigstab::testing::random_triangle(rng), b = eigstab::testing::random_triangle(rng);
    auto map = affine_from_triangles(a, b);
    for (int i = 0; i < 3; ++i) CHECK(distance(map.apply(a[i]), b[i]) <= 1e-12 * diameter(b));
    CHECK((map.linear() * map.inverse() - Eigen::Matrix2d::Identity()).norm() < 1e-13);
  }
}

TEST_CASE("macro_maps") {
  const double t = 0.1;
  auto sq = unit_square();
  auto macro = fan_macro_triangulation(sq);
  auto maps = macro_maps(macro, sq, perturb_polygon(sq, {rect_stretch_direction(), t}));
  REQUIRE(maps.size() == 2);
  for (const auto& m : maps) {
    CHECK((m.linear() - Eigen::Vector2d(1 + t, 1).asDiagonal().toDenseMatrix()).norm() < 1e-15);
    CHECK(m.offset().norm() < 1e-15);
  }

  for (const auto& m : macro_maps(macro, sq, sq)) CHECK((m.linear() - Eigen::Matrix2d::Identity()).norm() < 1e-15);

  auto tri = equilateral_triangle();
  const double eps = 1e-6;
  auto tmaps = macro_maps(fan_macro_triangulation(tri), tri, perturb_polygon(tri, {triangle_direction(TriangleCase::C), eps}));
  REQUIRE(tmaps.size() == 1);
  CHECK(distance(tmaps[0].apply({0, 0}), Point2{0, 0}) < 1e-15);
  CHECK(distance(tmaps[0].apply({1, 0}), Point2{1, 0}) < 1e-15);
  CHECK(distance(tmaps[0].apply(tri[2]), Point2{0.5, std::sqrt(3.0) / 2 + eps}) < 1e-15);

  // Vertex 2 on the line through vertices 0 and 1 collapses macro triangle (0,1,2).
  PolygonSpec collapsed({{0, 0}, {1, 0}, {2, 0}, {0, 1}});
  CHECK(kind_of([&] { macro_maps(macro, sq, collapsed); }) == ErrorKind::DegenerateTriangle);
  CHECK(kind_of([&] { macro_maps(macro, sq, equilateral_triangle()); }) == ErrorKind::InvalidArgument);
}
