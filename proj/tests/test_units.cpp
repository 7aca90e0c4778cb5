#include "wsm/units.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace wsm;

namespace {
const double kLambda = 532e-9;
}

TEST(Units, RecoilEnergyOfRb87At532nm) {
  const auto u = make_units(rubidium87(), kLambda);
  EXPECT_NEAR(u.recoil_energy, 5.37e-30, 0.01e-30);
  EXPECT_NEAR(u.to_hz(1.0), 8.11e3, 0.005e3);
  EXPECT_DOUBLE_EQ(u.length_unit, 266e-9);
}

TEST(Units, GravityStepMatchesLadderSpacing) {
  const auto u = make_units(rubidium87(), kLambda);
  EXPECT_NEAR(u.gravity_step, 0.070068, 1e-5);
  EXPECT_NEAR(u.to_hz(u.gravity_step), 568.34, 568.34 * 2e-3);
}

TEST(Units, GravityStepWithRoundedMassStaysClose) {
  SpeciesData s{"Rb87", 1.4432e-25, "rb-bundled"};
  const auto u = make_units(s, kLambda);
  EXPECT_NEAR(u.gravity_step / 0.070068 - 1.0, 0.0, 2e-4);
}

TEST(Units, MassScaling) {
  auto s = rubidium87();
  const auto a = make_units(s, kLambda);
  s.mass *= 2.0;
  const auto b = make_units(s, kLambda);
  EXPECT_NEAR(b.recoil_energy / a.recoil_energy, 0.5, 1e-15);
  EXPECT_NEAR(b.gravity_step / a.gravity_step, 4.0, 1e-14);
}

TEST(Units, HzConversion) {
  const auto u = make_units(rubidium87(), kLambda);
  EXPECT_EQ(to_hz(0.0, u), 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = d(rng), b = d(rng);
    EXPECT_NEAR(to_hz(a + b, u), to_hz(a, u) + to_hz(b, u), 1e-12 * 8.2e4);
    EXPECT_NEAR(u.from_hz(u.to_hz(a)), a, 1e-13 * std::abs(a) + 1e-300);
  }
}

TEST(Units, ConstantsInvariants) {
  PhysicalConstants c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_NEAR(c.h, 2.0 * std::numbers::pi * c.hbar, 1e-15 * c.h);
  c.G = -1.0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(make_units(rubidium87(), 0.0), ValidationError);
  SpeciesData bad{"x", 0.0, ""};
  EXPECT_THROW(make_units(bad, kLambda), ValidationError);
}
