#include "cpn/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cpn {
namespace {

void require_same_dim(const std::vector<double>& a, const std::vector<double>& b,
                      const char* what) {
  if (a.empty() || a.size() != b.size())
    throw InputError(std::string("InitSpec: ") + what + " needs matching nonempty parameters");
}

}  // namespace

InitSpec InitSpec::point(std::vector<double> loc) {
  if (loc.empty()) throw InputError("InitSpec: point needs a location");
  InitSpec s;
  s.kind = Kind::point;
  s.a = std::move(loc);
  return s;
}

InitSpec InitSpec::gaussian(std::vector<double> mean, std::vector<double> sd) {
  require_same_dim(mean, sd, "gaussian");
  for (double v : sd)
    if (!(v >= 0.0)) throw InputError("InitSpec: gaussian sd must be >= 0");
  InitSpec s;
  s.kind = Kind::gaussian;
  s.a = std::move(mean);
  s.b = std::move(sd);
  return s;
}

InitSpec InitSpec::uniform(std::vector<double> lo, std::vector<double> hi) {
  require_same_dim(lo, hi, "uniform");
  for (std::size_t c = 0; c < lo.size(); ++c)
    if (!(hi[c] >= lo[c])) throw InputError("InitSpec: uniform needs hi >= lo");
  InitSpec s;
  s.kind = Kind::uniform;
  s.a = std::move(lo);
  s.b = std::move(hi);
  return s;
}

void InitSpec::sample(RandomStream& stream, std::span<double> out) const {
  if (out.size() != a.size()) throw InputError("InitSpec: output dimension mismatch");
  switch (kind) {
    case Kind::point:
      std::copy(a.begin(), a.end(), out.begin());
      return;
    case Kind::gaussian:
      for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = a[c] + b[c] * stream.normal();
      return;
    case Kind::uniform:
      for (std::size_t c = 0; c < out.size(); ++c)
        out[c] = stream.uniform(a[c], b[c]);
      return;
  }
  throw InputError("InitSpec: corrupt kind");
}

CoefficientSet build_systemic_risk(const SystemicRiskParams& p, InitSpec init) {
  if (!std::isfinite(p.mean_reversion) || !std::isfinite(p.vol) ||
      !std::isfinite(p.jump_scale))
    throw InputError("systemic risk: coefficients must be finite");
  if (p.vol < 0.0) throw InputError("systemic risk: vol must be >= 0");
  if (p.lambda0 < 0.0) throw InputError("systemic risk: lambda0 must be >= 0");
  if (p.lambda1 < 0.0) throw InputError("systemic risk: lambda1 must be >= 0");
  if (!(p.lambda_bar >= p.lambda0))
    throw InputError("systemic risk: lambda_bar must be >= lambda0");
  if (init.dim() != 1) throw InputError("systemic risk: init must be scalar");

  const double a = p.mean_reversion;
  const double vol = p.vol;
  const double js = p.jump_scale;
  const double l0 = p.lambda0, l1 = p.lambda1, lbar = p.lambda_bar;

  CoefficientSet m;
  m.dims = {1, 1, 1};
  m.drift = [a](double, const EmpiricalMeasure& nu, std::span<const double> x,
                std::span<double> out) { out[0] = a * (nu.mean()[0] - x[0]); };
  m.diffusion = [vol](double, const EmpiricalMeasure&, std::span<const double>,
                      std::span<double> out) { out[0] = vol; };
  m.jump = [js](double, const EmpiricalMeasure&, const Mark& r, int,
                std::span<const double>, std::span<double> out) {
    out[0] = js * r[0];
  };
  // Gaussian marks are centered, so the compensator drift vanishes.
  m.jump_compensator = [](double, const EmpiricalMeasure&,
                          std::span<const double>, std::span<double> out) {
    out[0] = 0.0;
  };
  m.intensity.dims = 1;
  m.intensity.evaluate = [l0, l1, lbar](double, const EmpiricalMeasure& nu,
                                        const Mark&, int) {
    return std::min(l0 + l1 * nu.variance(), lbar);
  };
  m.intensity.bound = {lbar};
  m.intensity.mark_independent = true;
  // Var is W2-Lipschitz only on bounded sets; the constant below is valid on
  // the validators' sampling box (coordinates within [-10, 10]).
  m.intensity.lipschitz_w2 = 40.0 * l1;
  m.mark_law = {QSampler::gaussian()};

  // |b(nu,x) - b(nu',x')|^2 = a^2 |d_mean - d_x|^2 <= 2 a^2 (W2^2 + |d_x|^2);
  // sigma and gamma do not move with (nu, x).
  m.constants.lipschitz_state = 2.0 * a * a;
  m.constants.lipschitz_measure = 2.0 * a * a;
  // Valid once W2(nu, delta_0) + |x| >= 1 (the validators' sampling floor):
  // |b| <= a (W2 + |x|), ||sigma|| = vol, and the jump norm is at most
  // js * sqrt(lambda_bar) since E r^2 = 1.
  m.constants.growth = a + vol + std::abs(js) * std::sqrt(lbar);
  // E r^4 = 3 for standard Gaussian marks.
  m.constants.fourth_moment = 3.0 * js * js * js * js;
  m.init = std::move(init);
  return m;
}

CoefficientSet build_zero(Dims dims) {
  if (dims.d < 1 || dims.k < 1 || dims.l < 1)
    throw InputError("zero model: dims must be >= 1");
  CoefficientSet m;
  m.dims = dims;
  m.drift = [](double, const EmpiricalMeasure&, std::span<const double>,
               std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  m.diffusion = [](double, const EmpiricalMeasure&, std::span<const double>,
                   std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  m.jump = [](double, const EmpiricalMeasure&, const Mark&, int,
              std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  m.jump_compensator = [](double, const EmpiricalMeasure&,
                          std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  m.intensity.dims = dims.l;
  m.intensity.evaluate = [](double, const EmpiricalMeasure&, const Mark&, int) {
    return 0.0;
  };
  m.intensity.bound.assign(static_cast<std::size_t>(dims.l), 0.0);
  m.intensity.mark_independent = true;
  m.mark_law.assign(static_cast<std::size_t>(dims.l), QSampler::uniform01());
  m.init = InitSpec::point(std::vector<double>(static_cast<std::size_t>(dims.d), 0.0));
  return m;
}

}  // namespace cpn
