#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cpn/base_field.hpp"
#include "cpn/empirical.hpp"
#include "cpn/model.hpp"
#include "cpn/regime.hpp"
#include "cpn/thinning.hpp"

namespace cpn {

// Test hook: adds a constant to drift coordinate 0 of one particle, which
// breaks exchangeability on purpose (negative controls).
struct DriftBias {
  int particle = -1;  // -1 disables
  double value = 0.0;
};

struct SimConfig {
  double horizon = 1.0;
  double dt = 1e-3;  // target uniform step; candidate times refine the grid
  std::size_t population = 1;
  SeedSpec seeds;
  std::uint32_t replication = 0;
  std::uint32_t entity_offset = 0;  // reference runs use kRefEntityBase
  double divergence_threshold = 1e8;
  DriftBias bias;
};

// One accepted jump of the common noise, with the post-drift pre-jump states
// of every particle. Those are the cadlag left limits at the jump time.
struct JumpRecord {
  std::size_t grid_index;
  int dim;
  Mark mark;
  double height;
  std::size_t base_index;
  std::vector<double> pre_states;  // population * d
};

// States of one simulated population on the full integration grid. The grid
// is the uniform target grid refined by every base-field candidate time, so
// two systems coupled to the same field consume Brownian increments over
// identical intervals even when their accepted jumps differ.
struct TrajectorySet {
  std::vector<double> grid;
  std::size_t population = 0;
  int d = 1;
  std::vector<double> states;          // grid-major: (g * population + i) * d
  std::vector<std::uint8_t> is_jump;   // per grid index
  std::vector<JumpRecord> jumps;       // in time order
  MeasurePath path;                    // own empirical measure per grid point

  std::span<const double> state(std::size_t g, std::size_t i) const {
    const auto dd = static_cast<std::size_t>(d);
    return {states.data() + (g * population + i) * dd, dd};
  }
  // Left limit at grid point g: the pre-jump state when a jump landed there,
  // otherwise the state itself.
  std::span<const double> left_state(std::size_t g, std::size_t i) const;
  // Exact-match lookup; throws InputError when t is not a grid time.
  std::size_t grid_index(double t) const;
};

// Idiosyncratic Brownian increments tabulated on a master grid so the same
// noise can drive integrations at different resolutions. Any integration
// grid must be a subset of the master grid; its increment over [a, b) is the
// sum of the tabulated increments it covers.
class BrownianLattice {
 public:
  static BrownianLattice generate(const SeedSpec& seeds,
                                  std::uint32_t replication,
                                  std::uint32_t entity_offset, std::size_t n,
                                  int k, std::span<const double> master_grid);

  std::span<const double> times() const { return times_; }
  void increment(std::size_t particle, double a, double b,
                 std::span<double> out) const;

 private:
  std::vector<double> times_;
  std::size_t n_ = 0;
  int k_ = 1;
  std::vector<double> table_;  // particle-major: (i * intervals + g) * k

  std::size_t index_of(double t) const;
};

// Uniform grid horizon * g / G for G = max(1, round(horizon / dt)), refined
// by every candidate time of the base field, sorted and deduplicated.
std::vector<double> build_grid(double horizon, double dt,
                               const BasePointField& base);

// The dominating field a model expects: height bounds equal to the declared
// intensity bounds, marks from the model's own laws.
BasePointField model_base_field(const CoefficientSet& model,
                                const SeedSpec& seeds,
                                std::uint32_t replication, double horizon);

// Euler scheme for the interacting system driven by the given base field.
// Left-endpoint convention throughout: the drift, diffusion and compensator
// over [t_g, t_{g+1}) and the thinning decision and jump coefficient at
// t_{g+1} all read the empirical measure recorded at t_g. With a lattice the
// Brownian increments are summed from it instead of drawn from streams.
TrajectorySet simulate_finite_system(const CoefficientSet& model,
                                     const SimConfig& cfg,
                                     const BasePointField& base,
                                     const BrownianLattice* lattice = nullptr);

// Same dynamics with entities moved to the reserved reference block, so the
// result is driven by Brownian motions independent of any finite system of
// the same replication. Its measure path is the conditional-law proxy.
TrajectorySet simulate_reference(const CoefficientSet& model,
                                 const SimConfig& cfg, std::size_t n_ref,
                                 const BasePointField& base);

// One particle of the conditional mean-field dynamics: the measure
// argument is the frozen environment path instead of the system's own
// empirical measure. Entity `particle` reuses the finite system's Brownian
// and initial-condition streams, which is the synchronous coupling. The
// accepted jumps come from thinning the base field against the environment,
// so feeding a finite system's own recorded path reproduces that particle
// bit for bit.
TrajectorySet simulate_conditioned_particle(const CoefficientSet& model,
                                            const SimConfig& cfg,
                                            const BasePointField& base,
                                            const MeasurePath& env,
                                            std::uint32_t particle);

// Common switching regime on top of a population of diffusions. The regime
// transitions when an accepted base point's mark falls in the acceptance
// interval of the current state; everything reads left-endpoint values.
struct RegimeTrajectory {
  TrajectorySet particles;
  std::vector<int> regime_state;               // per grid index, cadlag
  std::vector<std::pair<double, int>> switches;  // (time, new state)
};

// The base field a regime model expects: one dimension, unit height bound,
// marks Lebesgue on [0, mark_span()].
BasePointField regime_base_field(const RegimeSpec& spec, const SeedSpec& seeds,
                                 std::uint32_t replication, double horizon);

RegimeTrajectory simulate_regime_switching(const RegimeModel& model,
                                           const SimConfig& cfg,
                                           const BasePointField& base);

}  // namespace cpn
