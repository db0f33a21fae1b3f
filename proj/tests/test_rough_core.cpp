#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "rsde/noise.hpp"
#include "rsde/path_io.hpp"
#include "rsde/rough_path.hpp"

using namespace rsde;

namespace {

RoughPath corner_path_lift() {
  // (0,0) -> (1,0) -> (1,1) on the grid {0, 1/2, 1}
  const TimeGrid grid({0.0, 0.5, 1.0});
  const std::vector<double> samples = {0, 0, 1, 0, 1, 1};
  return lift_piecewise_linear(samples, grid, 2);
}

RoughPath random_lift(std::uint64_t seed, std::size_t n = 128, std::size_t d = 2) {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, n);
  return lift_piecewise_linear(noise::sample_brownian(grid, d, seed), grid, d);
}

}  // namespace

TEST_CASE("piecewise-linear lift of a constant path is zero") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 5);
  std::vector<double> samples(grid.n_points() * 2, 3.25);
  const RoughPath rp = lift_piecewise_linear(samples, grid, 2);
  for (std::size_t k = 0; k < rp.n_cells(); ++k) {
    for (double v : rp.inc(k)) REQUIRE(v == 0.0);
    for (double v : rp.second(k)) REQUIRE(v == 0.0);
  }
}

TEST_CASE("lift of x(t) = t reproduces the closed-form iterated integral") {
  const TimeGrid grid({0.0, 0.5, 1.0});
  const std::vector<double> samples = {0.0, 0.5, 1.0};
  const RoughPath rp = lift_piecewise_linear(samples, grid, 1);
  const auto full = chen_extend(rp, 0, 2);
  REQUIRE_THAT(full.x[0], Catch::Matchers::WithinAbs(1.0, 1e-15));
  REQUIRE_THAT(full.xx[0], Catch::Matchers::WithinAbs(0.5, 1e-15));  // int_0^1 r dr
}

TEST_CASE("corner path composes to the hand-computed second level") {
  const RoughPath rp = corner_path_lift();
  // segment values: cell 1 = (1,0) with XX = diag(1/2, 0); cell 2 = (0,1)
  // with XX = diag(0, 1/2); Chen adds the cross term (1,0) (x) (0,1).
  const auto full = chen_extend(rp, 0, 2);
  const std::vector<double> expect = {0.5, 1.0, 0.0, 0.5};
  for (std::size_t i = 0; i < 4; ++i)
    REQUIRE_THAT(full.xx[i], Catch::Matchers::WithinAbs(expect[i], 1e-15));
  const double levy = 0.5 * (full.xx[1] - full.xx[2]);
  REQUIRE_THAT(levy, Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("non-finite samples are rejected with the offending index") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 2);
  std::vector<double> samples = {0.0, 1.0, std::nan(""), 2.0, 1.0, 0.0};
  try {
    lift_piecewise_linear(samples, grid, 2);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    REQUIRE(std::string(e.what()).find("index 2") != std::string::npos);
  }
}

TEST_CASE("quadrature lift integrates polynomials exactly at low order") {
  const TimeGrid grid({0.0, 1.0});
  auto path = [](double t, std::span<double> o) { o[0] = t * t; };
  auto deriv = [](double t, std::span<double> o) { o[0] = 2.0 * t; };
  const RoughPath rp = lift_smooth_quadrature(path, deriv, grid, 1, 2);
  // int_0^1 r^2 2r dr = 1/2 = X^2 / 2
  REQUIRE_THAT(rp.second(0)[0], Catch::Matchers::WithinAbs(0.5, 1e-14));
  REQUIRE_THAT(rp.inc(0)[0], Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("quadrature lift of a constant path is zero") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 2.0, 4);
  auto path = [](double, std::span<double> o) { o[0] = -1.5; o[1] = 2.0; };
  auto deriv = [](double, std::span<double> o) { o[0] = 0.0; o[1] = 0.0; };
  const RoughPath rp = lift_smooth_quadrature(path, deriv, grid, 2, 3);
  for (std::size_t k = 0; k < rp.n_cells(); ++k) {
    for (double v : rp.inc(k)) REQUIRE(std::abs(v) < 1e-15);
    for (double v : rp.second(k)) REQUIRE(std::abs(v) < 1e-15);
  }
}

TEST_CASE("quarter circle lift matches the fine Riemann-sum oracle") {
  const double end = 0.5 * std::numbers::pi;
  const TimeGrid grid = TimeGrid::uniform(0.0, end, 64);
  auto path = [](double t, std::span<double> o) {
    o[0] = std::cos(t);
    o[1] = std::sin(t);
  };
  auto deriv = [](double t, std::span<double> o) {
    o[0] = -std::sin(t);
    o[1] = std::cos(t);
  };
  const RoughPath rp = lift_smooth_quadrature(path, deriv, grid, 2, 4);
  const auto full = chen_extend(rp, 0, 64);
  const auto oracle = oracles::riemann_second_level(path, 2, 0.0, end, 1000000);
  for (std::size_t i = 0; i < 4; ++i)
    REQUIRE_THAT(full.xx[i], Catch::Matchers::WithinAbs(oracle[i], 1e-8));
}

TEST_CASE("chen extension base cases") {
  const RoughPath rp = corner_path_lift();
  SECTION("adjacent pair returns the stored cell") {
    const auto p = chen_extend(rp, 1, 2);
    for (std::size_t i = 0; i < 2; ++i) REQUIRE(p.x[i] == rp.inc(1)[i]);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(p.xx[i] == rp.second(1)[i]);
  }
  SECTION("zero increments give zero extension") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 3);
    const RoughPath z =
        lift_piecewise_linear(std::vector<double>(grid.n_points(), 1.0), grid, 1);
    const auto p = chen_extend(z, 0, 3);
    REQUIRE(p.x[0] == 0.0);
    REQUIRE(p.xx[0] == 0.0);
  }
  SECTION("ordering is enforced") {
    REQUIRE_THROWS_AS(chen_extend(rp, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(chen_extend(rp, 2, 1), std::invalid_argument);
  }
}

TEST_CASE("chen extension is associative across split points") {
  const RoughPath rp = random_lift(42, 256);
  const auto full = chen_extend(rp, 10, 200);
  for (std::size_t split : {11u, 57u, 128u, 199u}) {
    const auto a = chen_extend(rp, 10, split);
    const auto b = chen_extend(rp, split, 200);
    for (std::size_t i = 0; i < 4; ++i) {
      const double recomposed = a.xx[i] + b.xx[i] + a.x[i / 2] * b.x[i % 2];
      REQUIRE_THAT(recomposed, Catch::Matchers::WithinAbs(full.xx[i], 1e-12));
    }
  }
}

TEST_CASE("rough seminorm closed forms") {
  SECTION("zero path") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    const RoughPath z =
        lift_piecewise_linear(std::vector<double>(grid.n_points(), 0.0), grid, 1);
    REQUIRE(rough_seminorm(z).value() == 0.0);
  }
  SECTION("x(t) = t at alpha 0.4 attains 1.5 at the full span") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 16);
    std::vector<double> samples(grid.n_points());
    for (std::size_t p = 0; p < grid.n_points(); ++p) samples[p] = grid[p];
    const RoughPath rp = lift_piecewise_linear(samples, grid, 1, 0.4);
    const auto rep = rough_seminorm(rp);
    REQUIRE_THAT(rep.level1, Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(rep.level2, Catch::Matchers::WithinAbs(0.5, 1e-12));
  }
  SECTION("dyadic pair set is a lower bound for the full pair set") {
    const RoughPath rp = random_lift(7);
    const auto all = rough_seminorm(rp, PairSet::all);
    const auto dyadic = rough_seminorm(rp, PairSet::dyadic);
    REQUIRE(dyadic.value() <= all.value() + 1e-15);
  }
}

TEST_CASE("seminorm scales per term under signal scaling") {
  const RoughPath rp = random_lift(9);
  const double lambda = -3.0;
  std::vector<double> inc, xx;
  for (std::size_t k = 0; k < rp.n_cells(); ++k) {
    for (double v : rp.inc(k)) inc.push_back(lambda * v);
    for (double v : rp.second(k)) xx.push_back(lambda * lambda * v);
  }
  const RoughPath scaled(rp.grid(), rp.dim(), rp.alpha(), std::move(inc), std::move(xx));
  const auto a = rough_seminorm(rp);
  const auto b = rough_seminorm(scaled);
  REQUIRE_THAT(b.level1, Catch::Matchers::WithinRel(std::abs(lambda) * a.level1, 1e-12));
  REQUIRE_THAT(b.level2, Catch::Matchers::WithinRel(lambda * lambda * a.level2, 1e-12));
}

TEST_CASE("rough distance is a pseudometric") {
  const RoughPath a = random_lift(1), b = random_lift(2), c = random_lift(3);
  SECTION("identity") { REQUIRE(rough_distance(a, a) == 0.0); }
  SECTION("symmetry") {
    REQUIRE_THAT(rough_distance(a, b), Catch::Matchers::WithinRel(rough_distance(b, a), 1e-13));
  }
  SECTION("triangle inequality") {
    REQUIRE(rough_distance(a, b) <= rough_distance(a, c) + rough_distance(c, b) + 1e-12);
  }
  SECTION("analytic value against the zero path") {
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 16);
    std::vector<double> samples(grid.n_points());
    for (std::size_t p = 0; p < grid.n_points(); ++p) samples[p] = grid[p];
    const RoughPath line = lift_piecewise_linear(samples, grid, 1, 0.4);
    const RoughPath zero =
        lift_piecewise_linear(std::vector<double>(grid.n_points(), 0.0), grid, 1, 0.4);
    REQUIRE_THAT(rough_distance(line, zero), Catch::Matchers::WithinAbs(1.5, 1e-12));
  }
  SECTION("grid mismatch is rejected without resampling") {
    const RoughPath other = random_lift(1, 64);
    REQUIRE_THROWS_AS(rough_distance(a, other), grid_mismatch_error);
  }
}

TEST_CASE("chen residual check detects corruption") {
  const RoughPath rp = random_lift(11, 64);
  const auto [mx, mxx] = rp.max_levels();
  REQUIRE(check_chen(rp) <= 1e-12 * (1.0 + mxx));

  SECTION("a perturbed pair value trips the triple residual") {
    auto full = chen_extend(rp, 4, 20);
    const auto left = chen_extend(rp, 4, 12);
    const auto right = chen_extend(rp, 12, 20);
    REQUIRE(chen_triple_residual(full, left, right) <= 1e-13 * (1.0 + mxx));
    full.xx[1] += 1e-3;
    REQUIRE(chen_triple_residual(full, left, right) >= 1e-3 * (1.0 - 1e-9));
  }
  SECTION("a corrupted cell breaks the geometric symmetry") {
    std::vector<double> inc, xx;
    for (std::size_t k = 0; k < rp.n_cells(); ++k) {
      inc.insert(inc.end(), rp.inc(k).begin(), rp.inc(k).end());
      xx.insert(xx.end(), rp.second(k).begin(), rp.second(k).end());
    }
    xx[3 * 4 + 1] += 1e-3;  // off-diagonal entry of cell 3
    const RoughPath bad(rp.grid(), rp.dim(), rp.alpha(), std::move(inc), std::move(xx));
    REQUIRE(check_geometric(bad) >= 0.5e-3 * (1.0 - 1e-9));
  }
}

TEST_CASE("geometric check separates Ito and Stratonovich lifts") {
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 256);
  const auto fine = noise::sample_fine_brownian(grid, 1, 17, 1);
  const RoughPath strat = noise::brownian_lift(fine, noise::Interpretation::stratonovich);
  const RoughPath ito = noise::brownian_lift(fine, noise::Interpretation::ito);
  const auto [mx, mxx] = strat.max_levels();

  REQUIRE(check_geometric(strat) <= 1e-12 * (1.0 + mx * mx));
  // the Ito defect on a cell is exactly dt/2
  const double dt = grid.dt(0);
  REQUIRE(check_geometric(ito) >= 0.5 * dt * 0.999);
  REQUIRE(check_geometric(ito_to_stratonovich(ito)) <= 1e-12 * (1.0 + mx * mx));
}

TEST_CASE("ito to stratonovich adds half dt on the diagonal") {
  const TimeGrid grid({0.0, 0.25});
  const RoughPath zero(grid, 2, 0.4, std::vector<double>(2, 0.0), std::vector<double>(4, 0.0));
  const RoughPath shifted = ito_to_stratonovich(zero);
  REQUIRE(shifted.second(0)[0] == 0.125);
  REQUIRE(shifted.second(0)[3] == 0.125);
  REQUIRE(shifted.second(0)[1] == 0.0);

  const RoughPath rp = random_lift(5);
  const RoughPath round = stratonovich_to_ito(ito_to_stratonovich(rp));
  for (std::size_t k = 0; k < rp.n_cells(); ++k)
    for (std::size_t i = 0; i < 4; ++i)
      REQUIRE_THAT(round.second(k)[i],
                   Catch::Matchers::WithinAbs(rp.second(k)[i], 1e-16 + 1e-15 * std::abs(rp.second(k)[i])));
}

TEST_CASE("restriction composes cells exactly") {
  const RoughPath rp = random_lift(23, 64);
  const RoughPath coarse = restrict_stride(rp, 8);
  REQUIRE(coarse.n_cells() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    const auto p = chen_extend(rp, 8 * k, 8 * (k + 1));
    for (std::size_t i = 0; i < 2; ++i) REQUIRE(coarse.inc(k)[i] == p.x[i]);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(coarse.second(k)[i] == p.xx[i]);
  }
}

TEST_CASE("columnar serialization round-trips exactly") {
  const RoughPath rp = random_lift(31, 16);
  std::ostringstream os;
  write_rough_path(os, rp);
  std::istringstream is(os.str());
  const RoughPath back = read_rough_path(is);
  REQUIRE(back.dim() == rp.dim());
  REQUIRE(back.alpha() == rp.alpha());
  REQUIRE(back.grid().same_as(rp.grid()));
  for (std::size_t k = 0; k < rp.n_cells(); ++k) {
    for (std::size_t i = 0; i < 2; ++i) REQUIRE(back.inc(k)[i] == rp.inc(k)[i]);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(back.second(k)[i] == rp.second(k)[i]);
  }
}

TEST_CASE("golden path file stays stable") {
  const RoughPath rp = corner_path_lift();
  std::ostringstream os;
  write_rough_path(os, rp);
  const std::string path = std::string(RSDE_TEST_DATA_DIR) + "/golden_roughpath.txt";
  std::ifstream f(path);
  REQUIRE(f.good());
  std::stringstream golden;
  golden << f.rdbuf();
  REQUIRE(os.str() == golden.str());
}
