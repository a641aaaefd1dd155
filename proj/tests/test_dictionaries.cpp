#include "doctest.h"
#include "oracles.hpp"
#include "revloc/dictionaries.hpp"
#include "revloc/simulator.hpp"

#include <cmath>

using namespace revloc;
using P = Position<double>;

namespace {

double wrap(double a) {
  a = std::fmod(a, 2 * M_PI);
  if (a > M_PI) a -= 2 * M_PI;
  if (a <= -M_PI) a += 2 * M_PI;
  return a;
}

}  // namespace

TEST_CASE("wavenumber") {
  CHECK(std::abs(wavenumber(1000.0, 340.0) - 18.48) < 0.005);
  CHECK(std::abs(wavenumber(2000.0, 340.0) - 36.96) < 0.01);
  CHECK(wavenumber(340.0 / (2 * M_PI), 340.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wavenumber(1000.0f, 340.0f) == doctest::Approx(18.48).epsilon(1e-3));

  CHECK_THROWS_AS(wavenumber(0.0, 340.0), DomainError);
  CHECK_THROWS_AS(wavenumber(1000.0, -1.0), DomainError);
  CHECK_THROWS_AS(wavenumber(std::nan(""), 340.0), DomainError);
  CHECK_THROWS_AS(WaveContext<double>(1000, 0), DomainError);
}

TEST_CASE("point-source Green's function") {
  const WaveContext<double> ctx(1000, 340);
  const double k = ctx.wavenumber();
  const P o(0, 0, 0);

  SUBCASE("unit magnitude at r = 1/(4 pi)") {
    for (double f : {100.0, 1000.0, 4321.0}) {
      const WaveContext<double> c(f, 340);
      CHECK(std::abs(point_source_green(c, o, P(1 / (4 * M_PI), 0, 0))) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("closed form at r = 1") {
    const auto g = point_source_green(ctx, o, P(0, 1, 0));
    CHECK(std::abs(g) == doctest::Approx(1 / (4 * M_PI)).epsilon(1e-14));
    CHECK(std::abs(g) == doctest::Approx(0.07958).epsilon(1e-4));
    CHECK(std::abs(wrap(std::arg(g) - k)) < 1e-12);
  }
  SUBCASE("1/r decay") {
    const P d(0.3, -0.4, 1.2);
    CHECK(std::abs(point_source_green(ctx, o, P(2 * d))) / std::abs(point_source_green(ctx, o, d)) ==
          doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("reciprocity and oracle agreement") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 4);
    for (int i = 0; i < 50; ++i) {
      const P a(u(rng), u(rng), u(rng)), b(u(rng), u(rng), u(rng));
      const auto g = point_source_green(ctx, a, b);
      CHECK(std::abs(g - point_source_green(ctx, b, a)) == 0.0);
      CHECK(std::abs(g - oracle::green(k, a, b)) <= 1e-12 * std::abs(g));
    }
  }
  SUBCASE("coincident points") {
    CHECK_THROWS_AS(point_source_green(ctx, P(1, 2, 3), P(1, 2, 3)), SingularityError);
  }
}

TEST_CASE("planewave atom") {
  const WaveContext<double> ctx(1000, 340);
  const auto ex = Direction<double>(P(1, 0, 0));
  CHECK(planewave_green(ctx, P(0, 0, 0), ex) == std::complex<double>(1, 0));
  CHECK(std::abs(wrap(std::arg(planewave_green(ctx, P(1, 0, 0), ex)) + ctx.wavenumber())) < 1e-12);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const auto d = Direction<double>::normalized(P(n(rng), n(rng), n(rng)));
    CHECK(std::abs(std::abs(planewave_green(ctx, P(n(rng), n(rng), n(rng)), d)) - 1.0) <= 1e-12);
  }

  CHECK_THROWS_AS(Direction<double>(P(1, 1, 0)), DomainError);
  CHECK_THROWS_AS(Direction<double>::normalized(P(0, 0, 0)), DomainError);
}

TEST_CASE("candidate grid") {
  const P room(4.1, 6.2, 3.9);
  const auto grid = build_grid(room, GridSpec<double>{1.6, 40, 40, 0.05});
  CHECK(grid.size() == 1600);
  CHECK(grid.front().isApprox(P(0.05, 0.05, 1.6)));
  CHECK(grid.back().isApprox(P(4.05, 6.15, 1.6)));
  // row-major, x fastest
  CHECK(grid[1].x() > grid[0].x());
  CHECK(grid[1].y() == grid[0].y());
  CHECK(grid[40].y() > grid[0].y());
  for (const auto& p : grid) CHECK(p.z() == 1.6);

  const auto one = build_grid(room, GridSpec<double>{1.6, 1, 1, 0.05});
  REQUIRE(one.size() == 1);
  CHECK(one[0].isApprox(P(2.05, 3.1, 1.6)));

  CHECK_THROWS_AS(build_grid(room, GridSpec<double>{1.6, 40, 40, 2.1}), ConfigError);
  CHECK_THROWS_AS(build_grid(room, GridSpec<double>{1.6, 0, 4, 0.05}), ConfigError);
  CHECK_THROWS_AS(build_grid(room, GridSpec<double>{1.6, 4, 4, 0.0}), ConfigError);
  CHECK_THROWS_AS(build_grid(room, GridSpec<double>{4.0, 4, 4, 0.05}), ConfigError);
}

TEST_CASE("planewave directions") {
  const auto four = build_directions(DirectionSpec<double>{4, DirectionMode::InPlaneCircle});
  REQUIRE(four.size() == 4);
  const P expect[] = {P(1, 0, 0), P(0, 1, 0), P(-1, 0, 0), P(0, -1, 0)};
  for (int i = 0; i < 4; ++i) CHECK((four[i].vector() - expect[i]).norm() < 1e-15);

  const auto many = build_directions(DirectionSpec<double>{3000, DirectionMode::InPlaneCircle});
  const double step = std::acos(std::clamp(many[0].vector().dot(many[1].vector()), -1.0, 1.0));
  CHECK(step == doctest::Approx(2 * M_PI / 3000).epsilon(1e-6));
  CHECK(step * 180 / M_PI == doctest::Approx(0.12).epsilon(1e-6));

  const auto sphere = build_directions(DirectionSpec<double>{500, DirectionMode::FibonacciSphere});
  P mean = P::Zero();
  for (const auto& d : sphere) {
    CHECK(std::abs(d.vector().norm() - 1) < 1e-12);
    mean += d.vector();
  }
  CHECK(mean.norm() / 500 < 0.01);

  CHECK_THROWS_AS(build_directions(DirectionSpec<double>{0, DirectionMode::InPlaneCircle}), ConfigError);
}

TEST_CASE("dictionary construction") {
  const WaveContext<double> ctx(1000, 340);
  const P room(4.1, 6.2, 3.9);
  const auto mics = build_perimeter_array(room, 106, 1.6);
  const auto grid = build_grid(room, GridSpec<double>{1.6, 40, 40, 0.05});
  const auto dirs = build_directions(DirectionSpec<double>{3000, DirectionMode::InPlaneCircle});

  const auto G0 = build_point_source_dictionary<double>(ctx, mics, grid);
  const auto W = build_planewave_dictionary<double>(ctx, mics, dirs);
  CHECK(G0.rows() == 106);
  CHECK(G0.cols() == 1600);
  CHECK(W.rows() == 106);
  CHECK(W.cols() == 3000);
  G0.validate();
  W.validate();
  CHECK(G0.is_point_source_column(17));
  CHECK(W.is_planewave_column(17));
  CHECK(G0.position(17) == grid[17]);
  CHECK_THROWS_AS(W.position(0), ContractError);
  CHECK(G0.matrix(5, 77) == point_source_green(ctx, mics[5], grid[77]));
  CHECK(W.matrix(9, 1234) == planewave_green(ctx, mics[9], dirs[1234]));

  const auto A = concatenate(G0, W);
  CHECK(A.cols() == 4600);
  CHECK(A.is_point_source_column(1599));
  CHECK(A.is_planewave_column(1600));
  CHECK(A.matrix.col(1600) == W.matrix.col(0));

  SUBCASE("one mic, one column") {
    const std::vector<P> m{P(0.5, 0.5, 1.6)};
    const std::vector<P> g{P(1.0, 2.0, 1.6)};
    const auto d = build_point_source_dictionary<double>(ctx, m, g);
    REQUIRE(d.matrix.size() == 1);
    CHECK(d.matrix(0, 0) == point_source_green(ctx, m[0], g[0]));
  }
  SUBCASE("grid point on a microphone") {
    const std::vector<P> m{P(1.0, 2.0, 1.6)};
    CHECK_THROWS_AS(build_point_source_dictionary<double>(ctx, m, m), SingularityError);
  }
  SUBCASE("contract checks") {
    Dictionary<double> bad = G0;
    bad.column_meta.pop_back();
    CHECK_THROWS_AS(bad.validate(), ContractError);
    bad = G0;
    bad.matrix.col(3).setZero();
    CHECK_THROWS_AS(bad.validate(), ContractError);
    Dictionary<double> short_rows;
    short_rows.matrix = ComplexMatrix<double>::Ones(5, 2);
    short_rows.column_meta = {P(1, 1, 1), P(2, 2, 2)};
    CHECK_THROWS_AS(concatenate(G0, short_rows), ContractError);
    CHECK_THROWS_AS(check_rows(G0, ComplexField<double>(ComplexField<double>::Zero(5)), "t"), ContractError);
    CHECK_THROWS_AS(check_pairing(G0, WeightVector<double>{ComplexVector<double>::Zero(3)}, "t"), ContractError);
  }
  SUBCASE("column normalization") {
    auto n = G0;
    const auto norms = normalize_columns(n);
    CHECK(norms(0) == doctest::Approx(G0.matrix.col(0).norm()));
    CHECK((n.matrix.colwise().norm().array() - 1).abs().maxCoeff() < 1e-12);
  }
}
