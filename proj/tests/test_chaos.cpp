#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "cpn/chaos.hpp"

using namespace cpn;

namespace {

const SeedSpec kSeeds{0x51edu, 0xc0deu, false};

CouplingParams small_params() {
  CouplingParams p;
  p.population = 8;
  p.n_ref = 32;
  p.replications = 8;
  p.coupled = 2;
  p.w2_times = 5;
  p.horizon = 0.5;
  p.dt = 0.05;
  p.seeds = kSeeds;
  return p;
}

// Runge-Kutta integration of u' = k (u + sqrt(u)) from u(0) = a. Nothing in
// it touches the closed form, so agreement is evidence, not tautology.
double ode_envelope(double a, double k, double t, int steps) {
  auto f = [k](double u) { return k * (u + std::sqrt(u)); };
  const double h = t / steps;
  double u = a;
  for (int s = 0; s < steps; ++s) {
    const double k1 = f(u);
    const double k2 = f(u + 0.5 * h * k1);
    const double k3 = f(u + 0.5 * h * k2);
    const double k4 = f(u + h * k3);
    u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

}  // namespace

TEST_CASE("comparison envelope matches hand-computed values") {
  CHECK(gronwall_envelope(0.0, 2.0, 1.0, 1e-2) ==
        doctest::Approx(2.9524924420125593).epsilon(1e-14));
  CHECK(gronwall_envelope(0.04, 2.0, 1.0, 0.01) ==
        doctest::Approx(5.116364394158428).epsilon(1e-14));
  CHECK(gronwall_envelope(1.7, 3.5, 1.0, 0.05) ==
        doctest::Approx(150.25088071728877).epsilon(1e-14));

  // a = 0 is the degenerate start: the bound does not depend on eps.
  CHECK(gronwall_envelope(0.0, 2.0, 1.0, 0.3) ==
        doctest::Approx(2.9524924420125593).epsilon(1e-14));
  CHECK(gronwall_envelope(0.0, 1.0, 0.0, 1e-2) == 0.0);

  // At t = 0 the envelope returns the anchor itself.
  CHECK(gronwall_envelope(0.7, 3.0, 0.0, 1e-2) ==
        doctest::Approx(0.7).epsilon(1e-13));
}

TEST_CASE("envelope solves the comparison ODE") {
  for (const auto& [a, k, t] : std::vector<std::array<double, 3>>{
           {0.04, 2.0, 1.0}, {1.7, 3.5, 1.0}, {0.01, 1.0, 2.0}}) {
    const double closed = gronwall_envelope(a, k, t, 0.01);
    const double ode = ode_envelope(a, k, t, 20000);
    CHECK(closed == doctest::Approx(ode).epsilon(1e-8));
  }
}

TEST_CASE("envelope dominates the classical linear bound") {
  // g(u) = u + sqrt(u) >= u, so the bound must sit above a e^{kt}.
  for (double a : {0.01, 0.5, 2.0})
    for (double kt : {0.1, 1.0, 3.0})
      CHECK(gronwall_envelope(a, kt, 1.0, 0.01) >= a * std::exp(kt));
}

TEST_CASE("envelope transforms invert each other and respect the domain") {
  const GronwallEnvelope env(0.01);
  for (double u : {0.01, 0.04, 0.9, 7.3, 512.0})
    CHECK(env.Ginv(env.G(u)) == doctest::Approx(u).epsilon(1e-12));
  CHECK(env.G(0.01) < env.G(0.02));  // strictly increasing

  // Monotone in both the anchor and the time argument.
  CHECK(env.envelope(0.5, 1.0) < env.envelope(0.6, 1.0));
  CHECK(env.envelope(0.5, 1.0) < env.envelope(0.5, 1.1));

  CHECK_THROWS_AS(env.envelope(0.005, 1.0), InputError);  // 0 < a < eps
  CHECK_THROWS_AS(env.envelope(-0.1, 1.0), InputError);
  CHECK_THROWS_AS(env.envelope(0.5, -1.0), InputError);
  CHECK_THROWS_AS(env.G(-1.0), InputError);
  CHECK_THROWS_AS(GronwallEnvelope(0.0), InputError);
  CHECK_THROWS_AS(GronwallEnvelope(-1.0), InputError);
  CHECK_THROWS_AS(gronwall_envelope(0.5, 0.0, 1.0, 0.01), InputError);
  CHECK_THROWS_AS(gronwall_envelope(0.5, 1.0, -1.0, 0.01), InputError);
}

TEST_CASE("envelope report grows anchors from the measured W2 error") {
  ConvergenceStudy study;
  study.horizon = 1.0;
  StudyRow r1;
  r1.n = 8;
  r1.path_err_sq = 2.0;
  r1.w2_err_sq = 0.25;
  StudyRow r2;
  r2.n = 32;
  r2.path_err_sq = 50.0;  // deliberately above any reasonable bound
  r2.w2_err_sq = 0.0;
  StudyRow r3;
  r3.n = 128;
  r3.path_err_sq = 0.001;
  r3.w2_err_sq = 1e-9;  // anchor lands in (0, eps) and gets lifted
  study.rows = {r1, r2, r3};

  const double k = 1.0;
  const auto rep = envelope_check(study, k);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.k == k);
  CHECK(rep.eps == 0.01);

  const double a1 = k * 1.0 * (0.25 + 0.5);
  CHECK(rep.rows[0].a == doctest::Approx(a1).epsilon(1e-15));
  CHECK(rep.rows[0].bound ==
        doctest::Approx(gronwall_envelope(a1, k, 1.0, 0.01)).epsilon(1e-14));
  CHECK(rep.rows[0].within);
  CHECK(rep.rows[0].ratio ==
        doctest::Approx(2.0 / rep.rows[0].bound).epsilon(1e-14));

  CHECK(rep.rows[1].a == 0.0);
  CHECK(rep.rows[1].bound ==
        doctest::Approx(gronwall_envelope(0.0, k, 1.0, 0.01)).epsilon(1e-14));
  CHECK_FALSE(rep.rows[1].within);

  CHECK(rep.rows[2].a == 0.01);  // the lift
  CHECK(rep.rows[2].within);

  CHECK_FALSE(rep.within);
  CHECK(rep.max_ratio == doctest::Approx(50.0 / rep.rows[1].bound));

  CHECK_THROWS_AS(envelope_check(study, 0.0), InputError);
  CHECK_THROWS_AS(envelope_check(ConvergenceStudy{}, 1.0), InputError);
  ConvergenceStudy no_horizon = study;
  no_horizon.horizon = 0.0;
  CHECK_THROWS_AS(envelope_check(no_horizon, 1.0), InputError);
}

TEST_CASE("zero model has no coupling gap and no spread") {
  const auto model = build_zero();
  auto p = small_params();
  const std::size_t grid[] = {2, 4, 8};
  const auto study = convergence_study(model, p, grid);

  REQUIRE(study.rows.size() == 3);
  CHECK(study.horizon == p.horizon);
  for (const auto& row : study.rows) {
    CHECK(row.path_err_sq == 0.0);
    CHECK(row.path_err_se == 0.0);
    CHECK(row.w2_err_sq == 0.0);
    CHECK(row.replications == p.replications);
  }
  CHECK_FALSE(study.slope_path_defined);
  CHECK_FALSE(study.slope_w2_defined);
  CHECK(study.slope_path == 0.0);
  for (const auto& col : study.per_rep_path)
    for (double v : col) CHECK(v == 0.0);
}

TEST_CASE("measure independence kills the path gap but not the W2 gap") {
  // With no measure feedback the conditioned particle replays the finite
  // particle exactly; the empirical measures still differ by sampling.
  SystemicRiskParams q;
  q.mean_reversion = 0.0;
  q.vol = 0.3;
  q.jump_scale = 0.2;
  q.lambda0 = 1.0;
  q.lambda1 = 0.0;
  q.lambda_bar = 1.0;
  const auto model = build_systemic_risk(q);

  auto p = small_params();
  const std::size_t grid[] = {2, 4, 8};
  const auto study = convergence_study(model, p, grid);

  for (const auto& row : study.rows) {
    CHECK(row.path_err_sq == 0.0);
    CHECK(row.w2_err_sq > 0.0);
  }
  CHECK_FALSE(study.slope_path_defined);
  CHECK(study.slope_w2_defined);
}

TEST_CASE("interacting model produces a significant coupling error") {
  const auto model = build_systemic_risk({});
  auto p = small_params();
  p.population = 16;
  p.replications = 16;
  const auto res = run_synchronous_coupling(model, p);
  CHECK(res.path_err_sq > 3.0 * res.path_err_se);
  CHECK(res.w2_err_sq > 3.0 * res.w2_err_se);
  CHECK(res.w2_argmax_time >= 0.0);
  CHECK(res.w2_argmax_time <= p.horizon);
}

TEST_CASE("study rows reduce their own per-replication columns") {
  const auto model = build_systemic_risk({});
  auto p = small_params();
  const std::size_t grid[] = {4, 8};
  const auto study = convergence_study(model, p, grid);

  REQUIRE(study.per_rep_path.size() == 2);
  REQUIRE(study.per_rep_w2.size() == 2);
  for (std::size_t row = 0; row < 2; ++row) {
    REQUIRE(study.per_rep_path[row].size() == p.replications);
    REQUIRE(study.per_rep_w2[row].size() == p.replications);
    const auto pv = mean_var(study.per_rep_path[row]);
    const auto wv = mean_var(study.per_rep_w2[row]);
    CHECK(pv.mean == doctest::Approx(study.rows[row].path_err_sq).epsilon(1e-13));
    CHECK(pv.se == doctest::Approx(study.rows[row].path_err_se).epsilon(1e-13));
    CHECK(wv.mean == doctest::Approx(study.rows[row].w2_err_sq).epsilon(1e-13));
  }
}

TEST_CASE("study results do not depend on the thread layout") {
  const auto model = build_systemic_risk({});
  auto p = small_params();
  const std::size_t grid[] = {4, 8};
  p.threads = 1;
  const auto s1 = convergence_study(model, p, grid);
  p.threads = 4;
  const auto s2 = convergence_study(model, p, grid);

  REQUIRE(s1.rows.size() == s2.rows.size());
  for (std::size_t i = 0; i < s1.rows.size(); ++i) {
    CHECK(s1.rows[i].path_err_sq == s2.rows[i].path_err_sq);
    CHECK(s1.rows[i].w2_err_sq == s2.rows[i].w2_err_sq);
  }
  CHECK(s1.per_rep_path == s2.per_rep_path);
  CHECK(s1.per_rep_w2 == s2.per_rep_w2);
  CHECK(s1.slope_path == s2.slope_path);
}

TEST_CASE("experiment preconditions are validated") {
  const auto model = build_systemic_risk({});
  auto p = small_params();

  p.coupled = p.population + 1;
  CHECK_THROWS_AS(run_synchronous_coupling(model, p), ConfigError);
  p = small_params();
  p.population = p.n_ref + 1;
  CHECK_THROWS_AS(run_synchronous_coupling(model, p), ConfigError);
  p = small_params();
  p.replications = 1;
  CHECK_THROWS_AS(run_synchronous_coupling(model, p), ConfigError);
  p = small_params();
  p.dt = 0.0;
  CHECK_THROWS_AS(run_synchronous_coupling(model, p), ConfigError);

  p = small_params();
  const std::size_t flat[] = {4, 4};
  CHECK_THROWS_AS(convergence_study(model, p, flat), ConfigError);
  const std::size_t down[] = {8, 4};
  CHECK_THROWS_AS(convergence_study(model, p, down), ConfigError);
  const std::size_t high[] = {4, 16};  // 16 > n_ref / 4
  CHECK_THROWS_AS(convergence_study(model, p, high), ConfigError);
  CHECK_THROWS_AS(convergence_study(model, p, {}), ConfigError);
  const std::size_t big[] = {4, 64};  // above n_ref entirely
  CHECK_THROWS_AS(convergence_study(model, p, big), ConfigError);

  CHECK_THROWS_AS(test_exchangeability(model, p), ConfigError);  // reps < 100
  p.replications = 100;
  p.population = 1;
  CHECK_THROWS_AS(test_exchangeability(model, p), ConfigError);

  p = small_params();
  p.replications = 31;
  p.coupled = 256;
  CHECK_THROWS_AS(test_conditional_independence(model, p, false), ConfigError);
  p.replications = 32;
  p.coupled = 255;
  CHECK_THROWS_AS(test_conditional_independence(model, p, false), ConfigError);
}

TEST_CASE("exchangeable particles pass the symmetry tests") {
  const auto model = build_systemic_risk({});
  auto p = small_params();
  p.population = 4;
  p.replications = 100;
  p.dt = 0.1;

  const auto res = test_exchangeability(model, p);
  CHECK(res.pass);
  CHECK(res.ks_p > res.threshold);
  CHECK(res.wilcoxon_p > res.threshold);
  CHECK(res.ks_stat >= 0.0);
  CHECK(res.ks_stat <= 1.0);

  const auto sup = test_exchangeability(model, p, true);
  CHECK(sup.pass);
}

TEST_CASE("a biased particle is caught by the symmetry tests") {
  const auto model = build_systemic_risk({});
  auto p = small_params();
  p.population = 4;
  p.replications = 100;
  p.dt = 0.1;

  const auto res = test_exchangeability(model, p, false, DriftBias{0, 5.0});
  CHECK_FALSE(res.pass);
}

TEST_CASE("decoupled dynamics show no correlation in either direction") {
  // No interaction and zero jump size: the pair members are independent
  // outright, so both the conditional and the unconditional checks read 0.
  SystemicRiskParams q;
  q.mean_reversion = 0.0;
  q.vol = 0.3;
  q.jump_scale = 0.0;
  q.lambda0 = 0.5;
  q.lambda1 = 0.0;
  q.lambda_bar = 0.5;
  const auto model = build_systemic_risk(q);

  auto p = small_params();
  p.n_ref = 64;
  p.replications = 32;
  p.coupled = 256;
  p.dt = 0.1;

  const auto res = test_conditional_independence(model, p, false);
  CHECK(res.pass_conditional);
  CHECK(res.pass_unconditional);
  CHECK(res.pass);
  CHECK_FALSE(res.expect_unconditional);
  CHECK(std::abs(res.within_corr_mean) <= 4.0 * res.within_corr_se);
  CHECK(res.half_w2_sq_mean >= 0.0);
}
