#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spinsqz/error.hpp"
#include "spinsqz/lattice.hpp"

using namespace spinsqz;

TEST_CASE("minimum image lies in (-L/2, L/2]") {
  for (int L : {2, 3, 4, 5, 8}) {
    for (int d = -3 * L; d <= 3 * L; ++d) {
      const int m = min_image(d, L);
      CHECK(2 * m > -L);
      CHECK(2 * m <= L);
      CHECK(((d - m) % L + L) % L == 0);
    }
  }
  CHECK(min_image(2, 4) == 2);
  CHECK(min_image(-2, 4) == 2);
  CHECK(min_image(3, 4) == -1);
}

TEST_CASE("nearest-neighbour square lattice") {
  for (int L : {3, 4, 6}) {
    const auto cm = build_couplings(LatticeGeometry::square(L), CouplingSpec{});
    CHECK(cm.J0 == doctest::Approx(4.0));
    for (int i = 0; i < cm.size(); ++i) {
      CHECK(cm.values.row(i).sum() == doctest::Approx(4.0));
      CHECK((cm.values.row(i).array() > 0.0).count() == 4);
      CHECK(cm.values(i, i) == 0.0);
    }
    CHECK(cm.is_translation_invariant());
    CHECK((cm.values - cm.values.transpose()).norm() == 0.0);
  }
}

TEST_CASE("rydberg-dressed couplings") {
  CouplingSpec spec{CouplingFamily::RydbergDressed, 1.0, 3.0, 1.5};
  const auto cm = build_couplings(LatticeGeometry::square(4), spec);
  CHECK(cm.J0 == doctest::Approx(7.27).epsilon(0.01 / 7.27));
  CHECK(cm.values(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cm.J0 / 30.0 == doctest::Approx(0.242).epsilon(0.002 / 0.242));
  CHECK(cm.is_translation_invariant());
  CHECK((cm.values.array() >= 0.0).all());
}

TEST_CASE("power law with large alpha approaches nearest neighbour") {
  const auto geo = LatticeGeometry::square(6);
  const auto nn = build_couplings(geo, CouplingSpec{});
  const auto pl = build_couplings(geo, CouplingSpec{CouplingFamily::PowerLaw, 1.0, 50.0, 0.0});
  CHECK((nn.values - pl.values).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fourier transform") {
  SUBCASE("nearest neighbour closed form") {
    for (int L : {4, 5, 6}) {
      const auto cm = build_couplings(LatticeGeometry::square(L), CouplingSpec{});
      const auto grid = fourier_coupling(cm);
      REQUIRE(grid.k.size() == static_cast<std::size_t>(L * L));
      CHECK(grid.k[0].Jk == doctest::Approx(cm.J0));
      for (const auto& k : grid.k) {
        CHECK(k.Jk == doctest::Approx(2.0 * (std::cos(k.kx) + std::cos(k.ky))).epsilon(1e-12));
      }
    }
  }
  SUBCASE("sum rule, Parseval and inversion symmetry for all families") {
    const std::vector<CouplingSpec> specs = {
        {CouplingFamily::NearestNeighbor, 1.0, 3.0, 0.0},
        {CouplingFamily::PowerLaw, 1.0, 3.0, 0.0},
        {CouplingFamily::PowerLaw, 0.7, 1.5, 0.0},
        {CouplingFamily::RydbergDressed, 1.0, 3.0, 2.0},
        {CouplingFamily::AllToAll, 1.0, 3.0, 0.0},
    };
    for (const auto& spec : specs) {
      for (int L : {4, 5}) {
        const auto cm = build_couplings(LatticeGeometry::square(L), spec);
        const auto grid = fourier_coupling(cm);
        const int N = cm.size();
        double sum = 0.0, sq = 0.0;
        for (const auto& k : grid.k) {
          sum += k.Jk;
          sq += k.Jk * k.Jk;
          // J_{-k} = J_k
          const int mx = (L - k.nx) % L, my = (L - k.ny) % L;
          CHECK(grid.k[mx + L * my].Jk == doctest::Approx(k.Jk).epsilon(1e-12));
        }
        CHECK(std::abs(sum) < 1e-10);
        const double rhs = cm.values.squaredNorm() / N;
        CHECK(sq / N == doctest::Approx(rhs).epsilon(1e-12));
        CHECK(grid.k[0].Jk == doctest::Approx(cm.J0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("invalid coupling parameters are configuration errors") {
  CHECK_THROWS_AS(build_couplings(LatticeGeometry::square(4), CouplingSpec{CouplingFamily::PowerLaw, 1.0, -1.0, 0.0}),
                  ConfigError);
  CHECK_THROWS_AS(build_couplings(LatticeGeometry::square(4), CouplingSpec{CouplingFamily::NearestNeighbor, 0.0, 3.0, 0.0}),
                  ConfigError);
  CHECK_THROWS_AS(build_couplings(LatticeGeometry::square(4), CouplingSpec{CouplingFamily::RydbergDressed, 1.0, 3.0, -1.0}),
                  ConfigError);
  CHECK_THROWS_AS(LatticeGeometry::square(1), ConfigError);
  CHECK_THROWS_AS(parse_family("dipolar"), ConfigError);
  CHECK(parse_family(to_string(CouplingFamily::RydbergDressed)) == CouplingFamily::RydbergDressed);
}

TEST_CASE("non-translation-invariant input is rejected by the transform") {
  auto cm = build_couplings(LatticeGeometry::square(4), CouplingSpec{});
  cm.values(0, 5) = cm.values(5, 0) = 0.3;
  CHECK_FALSE(cm.is_translation_invariant());
  CHECK_THROWS_AS(fourier_coupling(cm), NumericalError);
}
