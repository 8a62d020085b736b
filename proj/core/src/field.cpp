#include "alab/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "alab/errors.hpp"
#include "alab/parallel.hpp"
#include "alab/rng.hpp"
#include "alab/stats.hpp"

namespace alab {

LatticeBox::LatticeBox(std::vector<int> lower, std::vector<int> extent)
    : lower_(std::move(lower)), extent_(std::move(extent)) {
  if (lower_.size() != extent_.size()) {
    throw DomainError("LatticeBox: lower corner and extent differ in dimension");
  }
  size_ = lower_.empty() ? 0 : 1;
  for (int e : extent_) {
    if (e < 0) throw DomainError("LatticeBox: negative extent");
    size_ *= static_cast<std::size_t>(e);
  }
}

LatticeBox LatticeBox::centered(int d, int radius) {
  return LatticeBox(std::vector<int>(d, -radius),
                    std::vector<int>(d, 2 * radius + 1));
}

bool LatticeBox::contains(std::span<const int> site) const noexcept {
  if (site.size() != lower_.size()) return false;
  for (std::size_t a = 0; a < site.size(); ++a) {
    const int rel = site[a] - lower_[a];
    if (rel < 0 || rel >= extent_[a]) return false;
  }
  return !lower_.empty();
}

std::size_t LatticeBox::index_of(std::span<const int> site) const {
  std::size_t index = 0;
  for (std::size_t a = 0; a < lower_.size(); ++a) {
    index = index * static_cast<std::size_t>(extent_[a]) +
            static_cast<std::size_t>(site[a] - lower_[a]);
  }
  return index;
}

std::vector<int> LatticeBox::site(std::size_t index) const {
  std::vector<int> s(lower_.size());
  for (std::size_t a = lower_.size(); a-- > 0;) {
    const auto e = static_cast<std::size_t>(extent_[a]);
    s[a] = lower_[a] + static_cast<int>(index % e);
    index /= e;
  }
  return s;
}

LatticeBox LatticeBox::dilated(int margin) const {
  std::vector<int> lo(lower_), ext(extent_);
  for (std::size_t a = 0; a < lo.size(); ++a) {
    lo[a] -= margin;
    ext[a] += 2 * margin;
  }
  return LatticeBox(std::move(lo), std::move(ext));
}

std::string_view to_string(FieldKind kind) {
  switch (kind) {
    case FieldKind::IidUniform: return "iid-uniform";
    case FieldKind::MovingAverage: return "moving-average";
    case FieldKind::SquaredGaussianMa: return "squared-gaussian-ma";
  }
  return "unknown";
}

FieldKind parse_field_kind(std::string_view text) {
  if (text == "iid-uniform") return FieldKind::IidUniform;
  if (text == "moving-average") return FieldKind::MovingAverage;
  if (text == "squared-gaussian-ma") return FieldKind::SquaredGaussianMa;
  throw ConfigError("unknown field kind '" + std::string(text) +
                    "' (expected iid-uniform, moving-average or "
                    "squared-gaussian-ma)");
}

std::size_t FieldSpec::window_volume() const {
  if (kind == FieldKind::IidUniform) return 1;
  std::size_t w = 1;
  for (int a = 0; a < region.dim(); ++a) w *= static_cast<std::size_t>(2 * window + 1);
  return w;
}

void FieldSpec::validate() const {
  if (region.empty()) throw DomainError("field region is empty");
  if (window < 0) throw DomainError("field window R must be >= 0");
  if (!(law.amplitude >= 0.0) || !std::isfinite(law.amplitude)) {
    throw DomainError("field amplitude must be finite and >= 0");
  }
  if (kind != FieldKind::SquaredGaussianMa) {
    if (!(law.low >= 0.0) || !(law.high >= law.low) || !std::isfinite(law.high)) {
      throw DomainError("uniform site law needs 0 <= low <= high < inf");
    }
  }
}

FieldSample::FieldSample(FieldSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
  if (values_.size() != spec_.region.size()) {
    throw DomainError("FieldSample: value count does not match region size");
  }
}

namespace {

struct InnovationDraw {
  std::vector<double> values;
  double log_likelihood_ratio = 0.0;
};

// Innovations for every site of `box`, in box order.
InnovationDraw draw_innovations(const FieldSpec& spec, const LatticeBox& box,
                                double tilt) {
  Engine engine = make_engine(spec.seed);
  InnovationDraw draw;
  draw.values.resize(box.size());

  if (spec.kind == FieldKind::SquaredGaussianMa) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : draw.values) v = normal(engine);
    return draw;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double low = spec.law.low;
  const double width = spec.law.high - spec.law.low;
  if (tilt == 0.0 || width == 0.0) {
    for (double& v : draw.values) v = low + width * unit(engine);
    return draw;
  }

  // Inverse CDF of the density proportional to exp(-tilt * u) on [low, high].
  const double c = -std::expm1(-tilt * width);
  const double log_z = -tilt * low + std::log(c / tilt);
  const double log_width = std::log(width);
  double llr = 0.0;
  for (double& v : draw.values) {
    const double u = unit(engine);
    v = low - std::log1p(-u * c) / tilt;
    llr += tilt * v + log_z - log_width;
  }
  draw.log_likelihood_ratio = llr;
  return draw;
}

std::vector<double> window_average(const FieldSpec& spec,
                                   const LatticeBox& inner_box,
                                   std::span<const double> innovations,
                                   double normalization) {
  const LatticeBox& region = spec.region;
  const int d = region.dim();
  const LatticeBox window = LatticeBox::centered(d, spec.window);

  std::vector<std::ptrdiff_t> stride(d, 1);
  for (int a = d - 1; a > 0; --a) stride[a - 1] = stride[a] * inner_box.extent()[a];
  std::vector<std::ptrdiff_t> offsets(window.size());
  for (std::size_t w = 0; w < window.size(); ++w) {
    const std::vector<int> off = window.site(w);
    std::ptrdiff_t lin = 0;
    for (int a = 0; a < d; ++a) lin += off[a] * stride[a];
    offsets[w] = lin;
  }

  std::vector<double> out(region.size());
  for (std::size_t i = 0; i < region.size(); ++i) {
    const auto center =
        static_cast<std::ptrdiff_t>(inner_box.index_of(region.site(i)));
    double sum = 0.0;
    for (std::ptrdiff_t off : offsets) sum += innovations[center + off];
    out[i] = sum / normalization;
  }
  return out;
}

FieldSample realize(const FieldSpec& spec, const InnovationDraw& draw,
                    const LatticeBox& box) {
  const double amp = spec.law.amplitude;
  std::vector<double> values;
  switch (spec.kind) {
    case FieldKind::IidUniform:
      values = draw.values;
      for (double& v : values) v *= amp;
      break;
    case FieldKind::MovingAverage: {
      const auto w = static_cast<double>(spec.window_volume());
      values = window_average(spec, box, draw.values, w);
      for (double& v : values) v *= amp;
      break;
    }
    case FieldKind::SquaredGaussianMa: {
      const double norm = std::sqrt(static_cast<double>(spec.window_volume()));
      values = window_average(spec, box, draw.values, norm);
      for (double& v : values) v = amp * v * v;
      break;
    }
  }
  return FieldSample(spec, std::move(values));
}

LatticeBox innovation_box(const FieldSpec& spec) {
  return spec.kind == FieldKind::IidUniform ? spec.region
                                            : spec.region.dilated(spec.window);
}

}  // namespace

FieldSample generate_field(const FieldSpec& spec) {
  spec.validate();
  const LatticeBox box = innovation_box(spec);
  return realize(spec, draw_innovations(spec, box, 0.0), box);
}

bool supports_tilting(const FieldSpec& spec) noexcept {
  return spec.kind != FieldKind::SquaredGaussianMa &&
         spec.law.high > spec.law.low;
}

TiltedSample generate_tilted_field(const FieldSpec& spec, double tilt) {
  spec.validate();
  if (tilt != 0.0 && !supports_tilting(spec)) {
    throw DomainError("exponential tilting needs a non-degenerate uniform "
                      "innovation law");
  }
  const LatticeBox box = innovation_box(spec);
  InnovationDraw draw = draw_innovations(spec, box, tilt);
  const double llr = draw.log_likelihood_ratio;
  return TiltedSample{realize(spec, draw, box), llr};
}

double tilted_site_mean(const FieldSpec& spec, double tilt) {
  if (spec.kind == FieldKind::SquaredGaussianMa) {
    if (tilt != 0.0) throw DomainError("tilting unsupported for gaussian innovations");
    return spec.law.amplitude;
  }
  const double width = spec.law.high - spec.law.low;
  const double x = tilt * width;
  double offset;
  if (std::abs(x) < 1e-6) {
    offset = width * (0.5 - x / 12.0);
  } else {
    offset = 1.0 / tilt - width / std::expm1(x);
  }
  return spec.law.amplitude * (spec.law.low + offset);
}

double expected_exp_neg(const FieldSpec& spec) {
  const double amp = spec.law.amplitude;
  // E[exp(-c u)] for u ~ U[low, high].
  auto uniform_mgf = [&](double c) {
    const double width = spec.law.high - spec.law.low;
    if (c * width == 0.0) return std::exp(-c * spec.law.low);
    return std::exp(-c * spec.law.low) * (-std::expm1(-c * width)) / (c * width);
  };
  switch (spec.kind) {
    case FieldKind::IidUniform:
      return uniform_mgf(amp);
    case FieldKind::MovingAverage: {
      const auto w = static_cast<double>(spec.window_volume());
      return std::pow(uniform_mgf(amp / w), w);
    }
    case FieldKind::SquaredGaussianMa:
      return 1.0 / std::sqrt(1.0 + 2.0 * amp);
  }
  return 1.0;
}

namespace {

double empirical_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

MixingDiagnostics estimate_mixing(const FieldSpec& spec,
                                  std::span<const int> distances,
                                  std::size_t trials, unsigned workers) {
  spec.validate();
  if (trials < 1000) throw DomainError("estimate_mixing needs trials >= 1000");
  if (distances.empty()) throw DomainError("estimate_mixing needs distances");
  std::vector<int> grid(distances.begin(), distances.end());
  std::sort(grid.begin(), grid.end());
  const int max_distance = grid.back();
  if (grid.front() < 1) throw DomainError("mixing distances must be >= 1");
  if (2 * max_distance >= spec.region.extent()[0]) {
    std::ostringstream msg;
    msg << "mixing distance " << max_distance << " does not fit the region: "
        << "three collinear sites need 2*L < extent " << spec.region.extent()[0];
    throw DomainError(msg.str());
  }

  // Sites x0, x0 + L e_0, x0 + 2L e_0 for every L, inside one segment.
  FieldSpec probe = spec;
  std::vector<int> ext(spec.region.dim(), 1);
  ext[0] = 2 * max_distance + 1;
  probe.region = LatticeBox(spec.region.lower(), ext);

  const std::size_t columns = static_cast<std::size_t>(ext[0]);
  std::vector<double> values(trials * columns);
  parallel_for(trials, workers, [&](std::size_t t) {
    FieldSpec s = probe;
    s.seed = derive_seed(spec.seed, t);
    const FieldSample sample = generate_field(s);
    std::copy(sample.values().begin(), sample.values().end(),
              values.begin() + static_cast<std::ptrdiff_t>(t * columns));
  });
  auto at = [&](std::size_t t, std::size_t offset) {
    return values[t * columns + offset];
  };

  MixingDiagnostics out;
  out.trials = trials;
  out.distance_grid = grid;
  std::vector<double> origin(trials);
  for (std::size_t t = 0; t < trials; ++t) origin[t] = at(t, 0);
  for (double q : kMixingQuantiles) out.thresholds.push_back(empirical_quantile(origin, q));

  const double n = static_cast<double>(trials);
  for (int dist : grid) {
    const auto off = static_cast<std::size_t>(dist);
    double alpha = 0.0;
    double se = 0.0;
    for (double qa : out.thresholds) {
      for (double qb : out.thresholds) {
        std::size_t a = 0, b = 0, ab = 0;
        for (std::size_t t = 0; t < trials; ++t) {
          const bool ea = at(t, 0) <= qa;
          const bool eb = at(t, off) <= qb;
          a += ea;
          b += eb;
          ab += ea && eb;
        }
        const double pa = a / n, pb = b / n;
        alpha = std::max(alpha, std::abs(ab / n - pa * pb));
        se = std::max(se, std::sqrt(pa * (1 - pa) * pb * (1 - pb) / n));
      }
    }
    out.alpha_estimates.push_back(std::min(alpha, 1.0));
    out.alpha_standard_errors.push_back(se);

    double m0 = 0, m1 = 0, m2 = 0, m01 = 0, m012 = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double f0 = std::exp(-at(t, 0));
      const double f1 = std::exp(-at(t, off));
      const double f2 = std::exp(-at(t, 2 * off));
      m0 += f0;
      m1 += f1;
      m2 += f2;
      m01 += f0 * f1;
      m012 += f0 * f1 * f2;
    }
    m0 /= n;
    m1 /= n;
    m2 /= n;
    out.moment_gap_pair.push_back(std::abs(m01 / n - m0 * m1));
    out.moment_gap_triple.push_back(std::abs(m012 / n - m0 * m1 * m2));
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (out.alpha_estimates[i] > 3.0 * out.alpha_standard_errors[i]) {
      xs.push_back(grid[i]);
      ys.push_back(std::log(out.alpha_estimates[i]));
    }
  }
  if (xs.size() >= 2) out.fitted_c1 = -fit_line(xs, ys).slope;
  return out;
}

double max_cdf_increment(std::vector<double> samples, double eps) {
  if (samples.empty()) throw DomainError("max_cdf_increment: no samples");
  std::sort(samples.begin(), samples.end());
  std::size_t best = 0;
  std::size_t j = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    j = std::max(j, i);
    while (j < samples.size() && samples[j] < samples[i] + eps) ++j;
    best = std::max(best, j - i);
  }
  return static_cast<double>(best) / static_cast<double>(samples.size());
}

LogHolderFit estimate_log_holder(const FieldSpec& spec,
                                 std::span<const double> epsilons,
                                 std::size_t trials, unsigned workers) {
  spec.validate();
  if (epsilons.size() < 3) {
    throw DomainError("log-Hoelder fit needs at least 3 epsilons");
  }
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0 && epsilons[i] < 1.0)) {
      throw DomainError("log-Hoelder epsilons must lie in (0, 1)");
    }
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) {
      throw DomainError("log-Hoelder epsilons must be strictly decreasing");
    }
  }
  if (trials < 10) throw DomainError("log-Hoelder fit needs trials >= 10");

  FieldSpec probe = spec;
  probe.region = LatticeBox(spec.region.lower(), std::vector<int>(spec.region.dim(), 1));
  std::vector<double> samples(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    FieldSpec s = probe;
    s.seed = derive_seed(spec.seed, t);
    samples[t] = generate_field(s)[0];
  });

  LogHolderFit fit;
  fit.epsilons.assign(epsilons.begin(), epsilons.end());
  std::vector<double> xs, ys;
  for (double eps : epsilons) {
    const double inc = max_cdf_increment(samples, eps);
    fit.increments.push_back(inc);
    xs.push_back(std::log(std::abs(std::log(eps))));
    ys.push_back(std::log(inc));
  }
  const LinearFit line = fit_line(xs, ys);
  fit.kappa = -line.slope;
  fit.log_const = line.intercept;
  fit.residual = line.rms_residual;
  return fit;
}

}  // namespace alab
