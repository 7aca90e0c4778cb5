#include "wsm/casimir_polder.hpp"
#include "wsm/potential_table.hpp"
#include "wsm/regularization.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wsm;

namespace {

const LatticeUnits U = make_units(rubidium87(), 532e-9);
const PolarizabilityModel RB = load_polarizability("rb-bundled");

double point_cp(double z) { return vcp_zero_temperature(z, RB, SurfaceModel{}, U); }

// int_0^{2R} w(u) (z + u)^-3 du for the uniform sphere, by hand.
double uniform_cubic_closed_form(double zd, double rd) {
  const long double z = zd, r = rd, b = z + 2.0L * r;
  const long double v = -std::log1p(2.0L * r / z) + 2.0L * (r + z) * (1.0L / z - 1.0L / b) -
                        0.5L * z * (2.0L * r + z) * (1.0L / (z * z) - 1.0L / (b * b));
  return static_cast<double>(3.0L / (4.0L * r * r * r) * v);
}

} // namespace

TEST(PotentialTable, ReproducesConstantsAndPowerLaws) {
  GridSpec g{0.01, 50.0, 200, 16, 1e-4};
  const auto flat = build_potential_table([](double) { return -2.5; }, g);
  const auto cube = build_potential_table([](double z) { return -4.0 / (z * z * z); }, g);
  EXPECT_EQ(cube.mode(), PotentialTable::Mode::LogLog);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lz(std::log(0.01), std::log(50.0));
  for (int i = 0; i < 500; ++i) {
    const double z = std::exp(lz(rng));
    EXPECT_NEAR(flat(z), -2.5, 1e-13);
    EXPECT_NEAR(cube(z) / (-4.0 / (z * z * z)), 1.0, 1e-12);
  }
  // Power-law extrapolation outside the grid.
  EXPECT_NEAR(cube(0.001) / (-4.0e9), 1.0, 1e-10);
  EXPECT_THROW((void)cube(0.0), DomainError);
}

TEST(PotentialTable, SignChangingTableAndProbeFailure) {
  const auto t = build_potential_table([](double z) { return std::sin(z); },
                                       GridSpec{0.1, 6.0, 400, 16, 1e-4});
  EXPECT_EQ(t.mode(), PotentialTable::Mode::LogLinear);
  EXPECT_NEAR(t(1.3), std::sin(1.3), 1e-6);
  try {
    (void)build_potential_table([](double z) { return 2.0 + std::sin(40.0 * std::log(z)); },
                          GridSpec{0.01, 100.0, 20, 8, 1e-4});
    FAIL() << "expected probe failure";
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("denser grid"), std::string::npos);
  }
  EXPECT_THROW(PotentialTable(1.0, 0.5, {1, 2, 3, 4}), ValidationError);
  EXPECT_THROW(PotentialTable(0.1, 1.0, {1, 2}), ValidationError);
}

TEST(PotentialTable, CasimirPolderTableMeetsProbeContract) {
  const auto t = build_potential_table(point_cp, GridSpec{0.005, 100.0, 200, 16, 1e-4});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lz(std::log(0.005), std::log(100.0));
  for (int i = 0; i < 40; ++i) {
    const double z = std::exp(lz(rng));
    EXPECT_NEAR(t(z) / point_cp(z), 1.0, 1e-4) << "z = " << z;
  }
}

TEST(AxialWeight, ShapeAndNormalization) {
  for (auto kind : {DensityKind::Uniform, DensityKind::Parabolic}) {
    for (double r : {1e-4, 0.3, 2.0}) {
      const AxialWeight w(kind, r);
      const double norm = integrate(w, 0.0, 2.0 * r, 1e-10, "norm").value;
      EXPECT_NEAR(norm, 1.0, 1e-10);
      EXPECT_EQ(w(0.0), 0.0);
      EXPECT_EQ(w(2.0 * r), 0.0);
      EXPECT_EQ(w(-r), 0.0);
      for (double u = 0.0; u <= 2.0 * r; u += r / 50.0)
        EXPECT_GE(w(u), 0.0);
    }
  }
  const AxialWeight w(DensityKind::Uniform, 0.7);
  EXPECT_NEAR(w(0.7), 3.0 / (4.0 * 0.7), 1e-15);
  EXPECT_EQ(parse_density_kind("rho2"), DensityKind::Parabolic);
  EXPECT_THROW(parse_density_kind("cubic"), ValidationError);
  EXPECT_THROW(axial_weight(DensityProfile{DensityKind::Uniform, 0.0}), ValidationError);
}

TEST(AxialWeight, CosineMoment) {
  for (auto kind : {DensityKind::Uniform, DensityKind::Parabolic}) {
    const AxialWeight w(kind, 0.05);
    const double k = 2.0 * std::numbers::pi;
    const double direct = integrate(
        [&](double u) { return w(u) * std::cos(k * (u - 0.05)); }, 0.0, 0.1, 1e-11, "m").value;
    EXPECT_NEAR(cosine_moment(w, k), direct, 1e-13);
    EXPECT_LT(cosine_moment(w, k), 1.0);
  }
}

TEST(Regularize, ConstantAndVanishingRadius) {
  for (auto kind : {DensityKind::Uniform, DensityKind::Parabolic}) {
    const AxialWeight w(kind, 0.01);
    for (double z : {1e-5, 0.1, 3.0})
      EXPECT_NEAR(regularize([](double) { return -7.0; }, w, z), -7.0, 1e-10);
  }
  double prev = 1.0;
  for (double r : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double dev = std::abs(regularize(point_cp, AxialWeight(DensityKind::Uniform, r), 0.5) /
                                    point_cp(0.5) -
                                1.0);
    EXPECT_LT(dev, prev);
    prev = dev;
  }
  EXPECT_LT(prev, 1e-4);
  EXPECT_THROW(regularize(point_cp, AxialWeight(DensityKind::Uniform, 0.01), 0.0), DomainError);
}

TEST(Regularize, CubicCoreClosedFormAndExponent) {
  const double r = 2e-3;
  auto cubic = [](double z) { return -1.0 / (z * z * z); };
  const AxialWeight w(DensityKind::Uniform, r);
  for (double z : {1e-7, 1e-5, 1e-3, 0.01, 0.05})
    EXPECT_NEAR(regularize(cubic, w, z) / -uniform_cubic_closed_form(z, r), 1.0, 1e-9);
  const auto source = build_potential_table(cubic, GridSpec{1e-6, 10.0, 300, 16, 1e-6});
  const auto reg =
      regularize_table(source, DensityProfile{DensityKind::Uniform, r}, 1.0,
                       GridSpec{1e-6, 5.0, 300, 16, 1e-6});
  for (double z : {3e-6, 1e-4, 0.01, 1.0})
    EXPECT_NEAR(reg(z) / -uniform_cubic_closed_form(z, r), 1.0, 1e-6) << z;
  auto vreg = [&](double z) { return regularize(cubic, w, z); };
  EXPECT_LT(std::abs(power_law_exponent(vreg, r / 100.0) - 1.0), 0.15);
}

TEST(Regularize, CasimirPolderCoreBecomesInverseLinear) {
  for (double nm : {0.1, 1.0, 10.0}) {
    const double r = nm * 1e-9 / U.length_unit;
    const AxialWeight w(DensityKind::Uniform, r);
    auto vreg = [&](double z) { return regularize(point_cp, w, z); };
    EXPECT_LT(std::abs(power_law_exponent(vreg, r / 100.0) - 1.0), 0.15) << nm << " nm";
    // Far from contact the point exponent returns.
    EXPECT_NEAR(power_law_exponent(vreg, 300.0 * r), power_law_exponent(point_cp, 300.0 * r),
                0.05);
  }
}

TEST(Regularize, ProfileAndRadiusOrdering) {
  const DensityProfile u200{DensityKind::Uniform, 200e-12};
  const DensityProfile p200{DensityKind::Parabolic, 200e-12};
  const DensityProfile u300{DensityKind::Uniform, 300e-12};
  for (double z : {1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0, 5.0}) {
    const double a = regularize(point_cp, u200, z, U.length_unit);
    const double b = regularize(point_cp, p200, z, U.length_unit);
    const double c = regularize(point_cp, u300, z, U.length_unit);
    EXPECT_LT(a, 0.0);
    EXPECT_LT(std::abs(c), std::abs(a)) << z;
    if (z >= 0.5)
      EXPECT_LT(std::abs(a / b - 1.0), 0.02) << z;
  }
}

TEST(Regularize, TableFromCasimirPolderSource) {
  const DensityProfile prof{DensityKind::Parabolic, 300e-12};
  const auto src = build_potential_table(point_cp, GridSpec{1e-5, 60.0, 400, 16, 1e-4});
  const auto reg = regularize_table(src, prof, U.length_unit, GridSpec{1e-5, 50.0, 400, 16, 1e-4});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lz(std::log(1e-5), std::log(50.0));
  for (int i = 0; i < 30; ++i) {
    const double z = std::exp(lz(rng));
    EXPECT_NEAR(reg(z) / regularize(point_cp, prof, z, U.length_unit), 1.0, 1e-4) << z;
  }
  const auto trimmed = regularize_table(src, prof, U.length_unit);
  EXPECT_LT(trimmed.z_max(), src.z_max());
  EXPECT_THROW(regularize_table(src, prof, U.length_unit, GridSpec{1e-5, 60.0, 100, 8, 1e-4}),
               ValidationError);
  const auto flat = build_potential_table([](double) { return 3.0; }, GridSpec{1e-4, 10.0});
  const auto flat_reg = regularize_table(flat, prof, U.length_unit);
  for (std::size_t i = 0; i < flat_reg.size(); ++i)
    EXPECT_NEAR(flat_reg.values()[i], 3.0, 1e-10);
}
