#include <doctest.h>

#include <cmath>

#include "aasm/mesh.hpp"
#include "support.hpp"

using namespace aasm;

TEST_CASE("mesh parameters are validated") {
  CHECK_NOTHROW((MeshParams{64, 8, 4}).validate());
  CHECK_NOTHROW((MeshParams{16, 4, 2}).validate());  // d = n/(2N)
  CHECK_THROWS_AS((MeshParams{64, 8, 5}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((MeshParams{64, 8, 0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((MeshParams{64, 7, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((MeshParams{0, 1, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((MeshParams{8, 0, 1}).validate(), std::invalid_argument);

  const MeshParams m{64, 8, 4};
  CHECK(m.h() == 1.0 / 64);
  CHECK(m.H() == 1.0 / 8);
  CHECK(m.delta() == 4.0 / 64);
  CHECK(m.ratio() == 8);
}

TEST_CASE("P1 numbering") {
  const P1Space space(4, MeshLevel::fine);
  CHECK(space.num_nodes() == 25);
  CHECK(space.num_dofs() == 9);
  CHECK(space.triangles().size() == 32);
  CHECK(space.node_index(1, 1) == 6);
  CHECK(space.node_dof(space.node_index(1, 1)) == 0);
  CHECK(space.node_dof(space.node_index(3, 2)) == 5);
  CHECK(space.node_dof(space.node_index(0, 2)) == -1);
  CHECK(space.node_dof(space.node_index(4, 4)) == -1);
  for (std::size_t k = 0; k < space.num_dofs(); ++k)
    CHECK(space.node_dof(space.dof_node(static_cast<int>(k))) == static_cast<int>(k));
  const auto c = space.node_coords(space.node_index(3, 1));
  CHECK(c[0] == 0.75);
  CHECK(c[1] == 0.25);
  CHECK_THROWS(P1Space(1, MeshLevel::fine));
}

TEST_CASE("hat gradients of the single interior node at n = 2") {
  // cell (i, j), lower triangle then upper triangle
  const std::array<std::array<Vec2, 2>, 4> expected = {{
      {{{0.0, 2.0}, {2.0, 0.0}}},    // (0,0)
      {{{0.0, 0.0}, {-2.0, 2.0}}},   // (1,0)
      {{{2.0, -2.0}, {0.0, 0.0}}},   // (0,1)
      {{{-2.0, 0.0}, {0.0, -2.0}}},  // (1,1)
  }};
  const P1Space space(2, MeshLevel::fine);
  const auto g = p1_gradient(space, std::vector<double>{1.0});
  REQUIRE(g.size() == 8);
  for (int cell = 0; cell < 4; ++cell)
    for (int t = 0; t < 2; ++t) {
      CHECK(g[2 * cell + t][0] == doctest::Approx(expected[cell][t][0]));
      CHECK(g[2 * cell + t][1] == doctest::Approx(expected[cell][t][1]));
    }
}

TEST_CASE("triangles cover the square and gradients reproduce linear functions") {
  const P1Space space(6, MeshLevel::fine);
  double area = 0.0;
  for (const auto& t : space.triangles()) area += t.area;
  CHECK(area == doctest::Approx(1.0));

  const auto values = nodal_interpolate_all([](double x, double y) { return 3.0 * x - 2.0 * y + 1.0; }, space);
  for (const auto& g : p1_nodal_gradient(space, values)) {
    CHECK(g[0] == doctest::Approx(3.0));
    CHECK(g[1] == doctest::Approx(-2.0));
  }
  const auto interior = nodal_interpolate([](double x, double y) { return x + y; }, space);
  CHECK(interior.size() == space.num_dofs());
  CHECK(interior[0] == doctest::Approx(2.0 / 6));
}

TEST_CASE("RT0 numbering and orientation") {
  const RT0Space space(4);
  CHECK(space.num_cells() == 16);
  CHECK(space.edges().size() == 40);
  CHECK(space.num_dofs() == 24);
  CHECK(space.vertical_edge(2, 1) == 7);
  CHECK(space.horizontal_edge(0, 0) == 20);
  const auto& cell = space.cells()[space.cell_index(1, 2)];
  CHECK(cell.edges[0] == space.vertical_edge(1, 2));
  CHECK(cell.edges[1] == space.vertical_edge(2, 2));
  CHECK(cell.edges[2] == space.horizontal_edge(1, 2));
  CHECK(cell.edges[3] == space.horizontal_edge(1, 3));
  CHECK(space.edges()[space.vertical_edge(0, 1)].dof == -1);
  CHECK(space.edges()[space.horizontal_edge(2, 4)].dof == -1);
  CHECK(space.edges()[space.vertical_edge(1, 0)].dof >= 0);
  const auto c = space.cell_center(space.cell_index(1, 2));
  CHECK(c[0] == 0.375);
  CHECK(c[1] == 0.625);
  CHECK_THROWS(RT0Space(1));
}

TEST_CASE("RT0 divergence is the discrete flux balance") {
  const RT0Space space(3);
  // the field x (1 - x) e_x has divergence 1 - 2x
  Vector u(space.num_dofs(), 0.0);
  for (const auto& e : space.edges())
    if (e.dof >= 0 && e.orientation == EdgeOrientation::vertical) {
      const double x = e.i * space.h();
      u[e.dof] = x * (1.0 - x);
    }
  const auto div = rt0_divergence(space, u);
  for (std::size_t c = 0; c < space.num_cells(); ++c) {
    const int i = static_cast<int>(c) % 3;
    const double xl = i / 3.0, xr = (i + 1) / 3.0;
    CHECK(div[c] == doctest::Approx((xr * (1 - xr) - xl * (1 - xl)) * 3.0));
  }
  double total = 0.0;
  for (double d : rt0_divergence(space, testing::random_vector(space.num_dofs(), 9))) total += d;
  CHECK(total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("coarse interpolation holds the coarse hat values at fine nodes") {
  const P1Space coarse(4, MeshLevel::coarse);
  const P1Space fine(16, MeshLevel::fine);
  const auto p = testing::dense(coarse_interpolation(coarse, fine));
  REQUIRE(p.rows() == static_cast<int>(fine.num_dofs()));
  REQUIRE(p.cols() == static_cast<int>(coarse.num_dofs()));
  for (std::size_t f = 0; f < fine.num_dofs(); ++f) {
    const auto x = fine.node_coords(fine.dof_node(static_cast<int>(f)));
    for (std::size_t c = 0; c < coarse.num_dofs(); ++c) {
      const auto X = coarse.node_coords(coarse.dof_node(static_cast<int>(c)));
      CHECK(p(f, c) == doctest::Approx(testing::courant_hat((x[0] - X[0]) * 4, (x[1] - X[1]) * 4)));
    }
  }
}
