#pragma once

#include <functional>
#include <span>
#include <vector>

#include "cpn/empirical.hpp"
#include "cpn/marks.hpp"

namespace cpn {

// A stochastic intensity candidate lambda_t(nu, r) per noise dimension,
// together with its declared ceiling. The ceiling is a hard contract: any
// evaluation above it aborts the run (clipping would bias the law).
// When `mark_independent` is set, evaluate may be called with an empty mark
// and exact kernel integrals skip Monte Carlo.
struct IntensityCandidate {
  int dims = 1;  // l
  std::function<double(double t, const EmpiricalMeasure& nu, const Mark& r,
                       int j)>
      evaluate;
  std::vector<double> bound;     // per dimension
  double lipschitz_w2 = 0.0;     // declared W2-Lipschitz constant of lambda
  bool mark_independent = false;
};

struct MassEstimate {
  std::vector<double> value;  // per dimension
  std::vector<double> se;     // 0 where the integral is exact
};

// Frozen kernel at one time: per-dimension masses of lambda * Q together
// with the mark-density evaluator.
struct IntensityKernelEval {
  double t = 0.0;
  std::vector<double> mass;
  std::function<double(const Mark& r, int j)> density;
};

// Per-dimension masses of the kernel lambda_t(nu, .) Q(dr). Exact for finite
// mark spaces and for mark-independent intensities; Monte Carlo with
// `budget` draws otherwise. A null stream falls back to a fixed internal
// stream so results stay deterministic.
MassEstimate kernel_mass(const IntensityCandidate& lambda,
                         std::span<const QSampler> q, double t,
                         const EmpiricalMeasure& nu, std::size_t budget,
                         RandomStream* stream = nullptr);

IntensityKernelEval kernel_at(const IntensityCandidate& lambda,
                              std::span<const QSampler> q, double t,
                              const EmpiricalMeasure& nu, std::size_t budget,
                              RandomStream* stream = nullptr);

// Matrix-valued integrand u(t, r) applied columnwise, one column per noise
// dimension. This is the shape of jump coefficients and of test integrands.
struct JumpIntegrand {
  int d = 1;
  int l = 1;
  std::function<void(double t, const Mark& r, int j, std::span<double> out)>
      column;
  bool mark_independent = false;
};

struct ScalarEstimate {
  double value = 0.0;
  double se = 0.0;
};

// Squared random norm sum_j int |u_j(t, r)|^2 lambda_t(nu, r) Q_j(dr):
// the instantaneous quadratic variation rate of the compensated integral.
ScalarEstimate random_norm_sq(const JumpIntegrand& u,
                              const IntensityCandidate& lambda,
                              std::span<const QSampler> q, double t,
                              const EmpiricalMeasure& nu, std::size_t budget,
                              RandomStream* stream = nullptr);

// Per-dimension kernel average of a column integrand:
// out += sum_j int u_j(t, r) lambda_t(nu, r, j) Q_j(dr), the compensator
// drift of the marked integral. Same exact/Monte-Carlo routing as
// kernel_mass.
void kernel_column_integral(const JumpIntegrand& u,
                            const IntensityCandidate& lambda,
                            std::span<const QSampler> q, double t,
                            const EmpiricalMeasure& nu, std::size_t budget,
                            RandomStream* stream, std::span<double> out);

}  // namespace cpn
