#pragma once

// Probability laws for failure, obsolescence and combined replacement time,
// plus the counter-based random streams every simulation draw comes from.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "fracval/error.hpp"

namespace fracval {

using Years = double;
using Probability = double;

/// Weibull failure law with scale alpha (years) and shape beta.
///
///    F(t) = 1 - exp(-(t/alpha)^beta),  f(t) = (beta/alpha)(t/alpha)^(beta-1) exp(-(t/alpha)^beta)
///
/// for t >= 0, and zero for negative t.
struct WeibullLaw {
  double scale = 1.0;
  double shape = 1.0;

  static WeibullLaw make(double scale, double shape) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !(shape > 0.0) || !std::isfinite(shape)) {
      throw ConfigError("weibull law needs finite scale > 0 and shape > 0 (got scale=" +
                        std::to_string(scale) + ", shape=" + std::to_string(shape) + ")");
    }
    return WeibullLaw{scale, shape};
  }

  [[nodiscard]] Probability cdf(Years t) const {
    if (t <= 0.0) return 0.0;
    return -std::expm1(-std::pow(t / scale, shape));
  }

  [[nodiscard]] Probability survival(Years t) const {
    if (t <= 0.0) return 1.0;
    return std::exp(-std::pow(t / scale, shape));
  }

  [[nodiscard]] double pdf(Years t) const {
    if (t < 0.0) return 0.0;
    if (t == 0.0) {
      if (shape == 1.0) return 1.0 / scale;
      return shape < 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    const double z = t / scale;
    return (shape / scale) * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
  }

  [[nodiscard]] Years mean() const { return scale * std::tgamma(1.0 + 1.0 / shape); }

  /// Inverse-CDF draw from a uniform in (0, 1).
  [[nodiscard]] Years from_uniform(double u) const {
    return scale * std::pow(-std::log(u), 1.0 / shape);
  }
};

/// Log-normal law configured by the mean and standard deviation of the
/// variable itself (not of its logarithm). The underlying normal parameters
/// are obtained by moment matching:
///
///    sigma_log^2 = ln(1 + (std_dev/mean)^2),   mu_log = ln(mean) - sigma_log^2 / 2
struct LogNormalLaw {
  double mean = 1.0;
  double std_dev = 1.0;
  double mu_log = 0.0;
  double sigma_log = 1.0;

  static LogNormalLaw from_moments(double mean, double std_dev) {
    if (!(mean > 0.0) || !std::isfinite(mean) || !(std_dev > 0.0) || !std::isfinite(std_dev)) {
      throw ConfigError("log-normal law needs finite mean > 0 and std_dev > 0 (got mean=" +
                        std::to_string(mean) + ", std_dev=" + std::to_string(std_dev) + ")");
    }
    const double cv = std_dev / mean;
    const double var_log = std::log1p(cv * cv);
    return LogNormalLaw{mean, std_dev, std::log(mean) - 0.5 * var_log, std::sqrt(var_log)};
  }

  [[nodiscard]] Probability cdf(Years t) const {
    if (t <= 0.0) return 0.0;
    return 0.5 * std::erfc(-(std::log(t) - mu_log) / (sigma_log * std::numbers::sqrt2));
  }

  [[nodiscard]] Probability survival(Years t) const {
    if (t <= 0.0) return 1.0;
    return 0.5 * std::erfc((std::log(t) - mu_log) / (sigma_log * std::numbers::sqrt2));
  }

  [[nodiscard]] double pdf(Years t) const {
    if (t <= 0.0) return 0.0;
    const double z = (std::log(t) - mu_log) / sigma_log;
    return std::exp(-0.5 * z * z) / (t * sigma_log * std::sqrt(2.0 * std::numbers::pi));
  }

  /// Analytic moments of the parameterised law; they reproduce mean/std_dev.
  [[nodiscard]] double analytic_mean() const {
    return std::exp(mu_log + 0.5 * sigma_log * sigma_log);
  }
  [[nodiscard]] double analytic_std_dev() const {
    const double s2 = sigma_log * sigma_log;
    return std::sqrt(std::expm1(s2)) * std::exp(mu_log + 0.5 * s2);
  }

  [[nodiscard]] Years from_normal(double z) const { return std::exp(mu_log + sigma_log * z); }
};

/// Zero-variance law: the event happens exactly at `at`. An infinite `at`
/// models a unit that never fails. Used for oracles and test scenarios.
struct PointMass {
  Years at = 1.0;

  static PointMass make(Years at) {
    if (!(at > 0.0) || std::isnan(at)) {
      throw ConfigError("point-mass law needs at > 0 (got " + std::to_string(at) + ")");
    }
    return PointMass{at};
  }

  [[nodiscard]] Probability cdf(Years t) const { return t >= at ? 1.0 : 0.0; }
  [[nodiscard]] Probability survival(Years t) const { return t >= at ? 0.0 : 1.0; }
  // No density exists; zero everywhere except the atom.
  [[nodiscard]] double pdf(Years) const { return 0.0; }
};

using TimeLaw = std::variant<WeibullLaw, LogNormalLaw, PointMass>;

inline Probability cdf(const TimeLaw& law, Years t) {
  return std::visit([t](const auto& l) { return l.cdf(t); }, law);
}

/// 1 - cdf, accurate in the upper tail.
inline Probability survival(const TimeLaw& law, Years t) {
  return std::visit([t](const auto& l) { return l.survival(t); }, law);
}

inline double pdf(const TimeLaw& law, Years t) {
  return std::visit([t](const auto& l) { return l.pdf(t); }, law);
}

/// Counter-based uniform stream. Each (master seed, trial, subsystem, draw)
/// tuple selects an independent SplitMix64 sequence, so a given physical
/// subsystem sees the same draws regardless of which architecture hosts it.
class UniformStream {
 public:
  UniformStream(std::uint64_t master_seed, std::uint64_t trial_index, std::string_view subsystem_id,
                std::uint64_t draw_index) {
    std::uint64_t h = mix(master_seed ^ 0x6a09e667f3bcc909ULL);
    h = mix(h ^ trial_index);
    h = mix(h ^ fnv1a(subsystem_id));
    h = mix(h ^ draw_index);
    state_ = h;
  }

  /// Uniform in the open interval (0, 1).
  double next() {
    state_ += kGolden;
    const std::uint64_t z = mix(state_);
    return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two uniforms.
  double next_normal() {
    const double u1 = next();
    const double u2 = next();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
};

inline Years sample(const TimeLaw& law, UniformStream& stream) {
  return std::visit(
      [&stream](const auto& l) -> Years {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, WeibullLaw>) {
          return l.from_uniform(stream.next());
        } else if constexpr (std::is_same_v<L, LogNormalLaw>) {
          return l.from_normal(stream.next_normal());
        } else {
          return l.at;
        }
      },
      law);
}

/// Replacement time T = min(O, F) of independent obsolescence O and failure F.
/// Without an obsolescence law the unit never becomes obsolete and T = F.
struct ReplacementLaw {
  TimeLaw failure = WeibullLaw{};
  std::optional<TimeLaw> obsolescence;
};

/// G(t) = 1 - (1 - Phi(t)) (1 - Psi(t))
inline Probability replacement_cdf(const ReplacementLaw& law, Years t) {
  const Probability psi = cdf(law.failure, t);
  if (!law.obsolescence) return psi;
  const Probability phi = cdf(*law.obsolescence, t);
  return 1.0 - (1.0 - phi) * (1.0 - psi);
}

/// P(T > t) = (1 - Phi(t)) (1 - Psi(t)), evaluated from the tail side.
inline Probability replacement_survival(const ReplacementLaw& law, Years t) {
  const Probability s = survival(law.failure, t);
  return law.obsolescence ? s * survival(*law.obsolescence, t) : s;
}

/// g(t) = phi(t) (1 - Psi(t)) + psi(t) (1 - Phi(t))
inline double replacement_pdf(const ReplacementLaw& law, Years t) {
  if (t < 0.0) return 0.0;
  const double psi_density = pdf(law.failure, t);
  if (!law.obsolescence) return psi_density;
  return pdf(*law.obsolescence, t) * survival(law.failure, t) +
         psi_density * survival(*law.obsolescence, t);
}

enum class ReplacementCause { failure, obsolescence };

inline std::string_view to_string(ReplacementCause c) {
  return c == ReplacementCause::failure ? "failure" : "obsolescence";
}

struct StreamKey {
  std::uint64_t trial_index = 0;
  std::string_view subsystem_id;
  std::uint64_t draw_index = 0;  // prior replacements of this subsystem in the trial
};

struct ReplacementDraw {
  Years time = 0.0;
  ReplacementCause cause = ReplacementCause::failure;
};

/// Draws min(failure, obsolescence) from the stream selected by `key`.
/// Failure is drawn first, then obsolescence. A zero result is redrawn from
/// the same stream so every event consumes strictly positive time.
inline ReplacementDraw sample_replacement_time(const ReplacementLaw& law, const StreamKey& key,
                                               std::uint64_t master_seed) {
  UniformStream stream(master_seed, key.trial_index, key.subsystem_id, key.draw_index);
  for (;;) {
    ReplacementDraw draw{sample(law.failure, stream), ReplacementCause::failure};
    if (law.obsolescence) {
      const Years o = sample(*law.obsolescence, stream);
      if (o < draw.time) draw = {o, ReplacementCause::obsolescence};
    }
    if (draw.time > 0.0) return draw;
  }
}

}  // namespace fracval
