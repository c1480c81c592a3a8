//
// bilevel-rt - Copyright 2026 the bilevel-rt authors.
// SPDX-License-Identifier: Apache-2.0
//
#include <random>

#include <doctest.h>

#include "brt/errors.hpp"
#include "brt/evaluation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using brt::DoseBounds;
using brt::DoseStats;

TEST_CASE("dose statistics on small inputs") {
  const std::vector<double> dose{1.0, 2.0, 3.0};
  const std::vector<int> all{0, 1, 2};
  DoseStats stats = brt::dose_stats(dose, all);
  CHECK(stats.d_min == 1.0);
  CHECK(stats.d_mean == 2.0);
  CHECK(stats.d_max == 3.0);

  const std::vector<int> singleton{1};
  stats = brt::dose_stats(dose, singleton);
  CHECK(stats.d_min == 2.0);
  CHECK(stats.d_mean == 2.0);
  CHECK(stats.d_max == 2.0);

  CHECK_THROWS_AS(brt::dose_stats(dose, std::vector<int>{}),
                  brt::config_error);
}

TEST_CASE("dose statistics match a linear scan on random masks") {
  std::mt19937_64 engine(5);
  std::uniform_real_distribution<double> value(0.0, 80.0);
  std::vector<double> dose(100);
  for (double& d : dose) d = value(engine);
  std::vector<int> mask;
  for (int v = 0; v < 100; ++v) mask.push_back(v);

  const DoseStats stats = brt::dose_stats(dose, mask);
  CHECK(stats.d_min == oracles::naive_min(dose));
  CHECK(stats.d_mean == doctest::Approx(oracles::naive_mean(dose)).epsilon(1e-14));
  CHECK(stats.d_max == oracles::naive_max(dose));
}

TEST_CASE("violation terms follow the bound definitions") {
  DoseBounds bounds;
  bounds.min = 51.30;
  const DoseStats stats{48.00, 53.0, 56.0};
  const brt::ViolationTerms terms = brt::violations(stats, bounds);
  CHECK(terms.below_min == doctest::Approx(3.30).epsilon(1e-12));
  CHECK(terms.below_mean == 0.0);
  CHECK(terms.above_mean == 0.0);
  CHECK(terms.above_max == 0.0);

  // No bounds defined: all four terms vanish.
  CHECK(brt::violations(stats, DoseBounds{}).total() == 0.0);

  // A mean exactly on its bound does not violate it.
  DoseBounds mean_bound;
  mean_bound.mean_high = 53.0;
  CHECK(brt::violations(stats, mean_bound).total() == 0.0);
}

namespace {

brt::CaseDefinition bounded_case() {
  brt::CaseDefinition kase;
  kase.grid = {6, 1, 1, 1.0};
  brt::Beam beam;
  beam.beamlets_u = 2;
  kase.beams.beams.push_back(beam);

  brt::Structure ptv;
  ptv.id = "ptv";
  ptv.kind = brt::StructureKind::ptv;
  ptv.voxels = {0, 1, 2};
  ptv.params = {60.0, -10.0, 5.0, false, false, false, {}, {}, {}};
  ptv.bounds = brt::derive_ptv_bounds(60.0);
  kase.structures.push_back(ptv);

  brt::Structure oar;
  oar.id = "oar";
  oar.kind = brt::StructureKind::oar_parallel;
  oar.voxels = {3, 4};
  oar.params = {26.0, 1.0, 5.0, false, false, false, {}, {}, {}};
  oar.bounds.mean_high = 26.0;
  kase.structures.push_back(oar);

  brt::Structure serial;
  serial.id = "serial";
  serial.kind = brt::StructureKind::oar_serial;
  serial.voxels = {5};
  serial.params = {50.0, 10.0, 5.0, false, false, false, {}, {}, {}};
  serial.bounds.max = 50.0;
  kase.structures.push_back(serial);

  brt::PriorityObjective priority;
  priority.name = "oar";
  priority.structures = {1};
  kase.priorities.push_back(priority);
  return kase;
}

}  // namespace

TEST_CASE("f0 is zero exactly when every bound holds") {
  const brt::CaseDefinition kase = bounded_case();
  // PTV voxels right at prescription, OAR well under its mean bound.
  std::vector<double> dose{60.0, 59.0, 61.0, 10.0, 12.0, 30.0};
  CHECK(brt::f0(dose, kase) == 0.0);

  // One violated mean bound by 2.5 Gy.
  dose = {60.0, 59.0, 61.0, 28.0, 29.0, 30.0};
  CHECK(brt::f0(dose, kase) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("f0 matches the term-by-term transcription on random plans") {
  const brt::CaseDefinition kase = bounded_case();
  std::mt19937_64 engine(11);
  std::uniform_real_distribution<double> value(0.0, 90.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> dose(6);
    for (double& d : dose) d = value(engine);
    CHECK(brt::f0(dose, kase) ==
          doctest::Approx(oracles::naive_f0(kase, dose)).epsilon(1e-12));
  }
}

TEST_CASE("priority objectives support mean, max, and grouping modes") {
  brt::CaseDefinition kase = bounded_case();
  std::vector<double> dose{0, 0, 0, 10.0, 30.0, 44.0};
  CHECK(brt::f_priority(dose, kase, 0) == doctest::Approx(20.0));

  kase.priorities[0].metric = brt::PriorityMetric::max_dose;
  CHECK(brt::f_priority(dose, kase, 0) == doctest::Approx(30.0));

  // Union of OAR and serial versus sum of their means.
  kase.priorities[0].metric = brt::PriorityMetric::mean_dose;
  kase.priorities[0].structures = {1, 2};
  kase.priorities[0].grouping = brt::PriorityGrouping::mean_of_union;
  CHECK(brt::f_priority(dose, kase, 0) == doctest::Approx(28.0));
  kase.priorities[0].grouping = brt::PriorityGrouping::sum_of_means;
  CHECK(brt::f_priority(dose, kase, 0) == doctest::Approx(64.0));

  CHECK_THROWS_AS(brt::f_priority(dose, kase, 3), brt::config_error);
  CHECK_THROWS_AS(brt::f_priority(dose, kase, -1), brt::config_error);
}

TEST_CASE("objective vector is a pure function of the dose") {
  const brt::CaseDefinition kase = bounded_case();
  const std::vector<double> dose{55.0, 58.0, 61.0, 20.0, 24.0, 45.0};
  CHECK(brt::objective_vector(dose, kase) ==
        brt::objective_vector(dose, kase));
  CHECK(brt::objective_vector(dose, kase).size() == 2);
}

TEST_CASE("dvh curve is a nonincreasing survival function") {
  const std::vector<double> dose{70.0, 68.0, 66.0, 60.0};
  const std::vector<int> mask{0, 1, 2, 3};
  const brt::Dvh curve = brt::dvh(dose, mask);
  CHECK(curve.fraction_at(0.0) == 1.0);
  CHECK(curve.fraction_at(66.0) == doctest::Approx(0.75));
  CHECK(curve.fraction_at(70.0 + 1e-9) == 0.0);
  for (std::size_t i = 1; i < curve.curve_fraction.size(); ++i) {
    CHECK(curve.curve_fraction[i] <= curve.curve_fraction[i - 1]);
    CHECK(curve.curve_dose[i] >= curve.curve_dose[i - 1]);
  }

  std::mt19937_64 engine(13);
  std::uniform_real_distribution<double> value(0.0, 80.0);
  std::vector<double> random_dose(64);
  for (double& d : random_dose) d = value(engine);
  std::vector<int> all;
  for (int v = 0; v < 64; ++v) all.push_back(v);
  const brt::Dvh random_curve = brt::dvh(random_dose, all);
  for (double level : {0.0, 10.0, 35.5, 79.9, 81.0}) {
    CHECK(random_curve.fraction_at(level) ==
          doctest::Approx(oracles::naive_dvh_fraction(random_dose, level)));
  }
}

TEST_CASE("dx percent is the order-statistic definition") {
  const std::vector<double> doses{70.0, 68.0, 66.0, 60.0};
  CHECK(brt::dx_percent(doses, 50.0) == 68.0);
  CHECK(brt::dx_percent(doses, 100.0) == 60.0);  // degenerates to the minimum
  CHECK_THROWS_AS(brt::dx_percent(doses, 0.0), brt::config_error);
  CHECK_THROWS_AS(brt::dx_percent(doses, 100.5), brt::config_error);

  std::mt19937_64 engine(17);
  std::uniform_real_distribution<double> value(0.0, 80.0);
  std::uniform_real_distribution<double> percent(0.5, 100.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> samples(1 + trial % 50);
    for (double& d : samples) d = value(engine);
    const double x = percent(engine);
    CHECK(brt::dx_percent(samples, x) ==
          oracles::naive_dx_percent(samples, x));
  }
}

TEST_CASE("PTV bound derivation reproduces the canonical rows") {
  const DoseBounds b54 = brt::derive_ptv_bounds(54.0);
  CHECK(*b54.min == doctest::Approx(48.60).epsilon(1e-12));
  CHECK(*b54.mean_low == doctest::Approx(52.92).epsilon(1e-12));
  CHECK(*b54.mean_high == doctest::Approx(55.08).epsilon(1e-12));
  CHECK(*b54.max == doctest::Approx(59.40).epsilon(1e-12));
  CHECK(*b54.d98_min == doctest::Approx(51.30).epsilon(1e-12));
  CHECK(*b54.d2_max == doctest::Approx(57.78).epsilon(1e-12));

  const DoseBounds b66 = brt::derive_ptv_bounds(66.0);
  CHECK(*b66.min == doctest::Approx(59.40).epsilon(1e-12));
  CHECK(*b66.mean_low == doctest::Approx(64.68).epsilon(1e-12));
  CHECK(*b66.mean_high == doctest::Approx(67.32).epsilon(1e-12));
  CHECK(*b66.max == doctest::Approx(72.60).epsilon(1e-12));
  CHECK(*b66.d98_min == doctest::Approx(62.70).epsilon(1e-12));
  CHECK(*b66.d2_max == doctest::Approx(70.62).epsilon(1e-12));

  const DoseBounds b100 = brt::derive_ptv_bounds(100.0);
  CHECK(*b100.min == 90.0);
  CHECK(*b100.mean_low == 98.0);
  CHECK(*b100.mean_high == 102.0);
  CHECK(*b100.max == doctest::Approx(110.0).epsilon(1e-12));

  CHECK_THROWS_AS(brt::derive_ptv_bounds(0.0), brt::config_error);
}

TEST_CASE("the canonical case file may carry the printed 64.67 bound") {
  const brt::CaseDefinition kase = fixtures::head_neck_case();
  const int ptv66 = kase.structure_index("ptv66");
  REQUIRE(ptv66 >= 0);
  CHECK(*kase.structures[ptv66].bounds.mean_low == 64.67);
  CHECK(*kase.structures[ptv66].bounds.d98_min ==
        doctest::Approx(62.70).epsilon(1e-12));
  CHECK(*kase.structures[ptv66].bounds.d2_max ==
        doctest::Approx(70.62).epsilon(1e-12));
}

TEST_CASE("plan evaluation reports real structures with Dx metrics") {
  const brt::CaseDefinition kase =
      brt::derive_virtual_ptvs(bounded_case());
  const std::vector<double> dose{55.0, 58.0, 61.0, 20.0, 24.0, 45.0};
  const brt::PlanEvaluation evaluation = brt::evaluate_plan(kase, dose);
  CHECK(evaluation.structures.size() == 3);  // virtual PTV excluded
  CHECK(evaluation.structures[0].d98.has_value());
  CHECK_FALSE(evaluation.structures[1].d98.has_value());
  CHECK(evaluation.objectives.size() == 2);
}
