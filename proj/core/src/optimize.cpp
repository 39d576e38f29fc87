#include "rydpar/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "rydpar/errors.hpp"

namespace rydpar {

std::vector<double> Box::clip(std::vector<double> x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

namespace {

void check_box(const Box& box, const std::vector<double>& x0) {
  if (box.lower.size() != box.upper.size() || box.lower.size() != x0.size())
    throw InputError("optimizer bounds do not match the parameter dimension");
  for (std::size_t i = 0; i < box.dim(); ++i)
    if (!(box.lower[i] <= box.upper[i])) throw InputError("optimizer bounds are inverted");
}

}  // namespace

OptimizeResult nelder_mead(const Objective& f, const Box& box, std::vector<double> x0,
                           int max_evaluations, double initial_scale, double xtol) {
  check_box(box, x0);
  const std::size_t n = x0.size();
  OptimizeResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };
  x0 = box.clip(std::move(x0));
  std::vector<std::vector<double>> simplex{x0};
  std::vector<double> values{eval(x0)};
  if (max_evaluations < static_cast<int>(n) + 2 || n == 0) {
    res.x = x0;
    res.value = values[0];
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x = x0;
    const double width = box.upper[i] - box.lower[i];
    double step = initial_scale * (width > 0.0 ? width : 1.0);
    if (x[i] + step > box.upper[i]) step = -step;
    x[i] = std::clamp(x[i] + step, box.lower[i], box.upper[i]);
    simplex.push_back(x);
    values.push_back(eval(x));
  }

  std::vector<std::size_t> order(n + 1);
  auto sort = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  };
  auto lerp = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a[i] + t * (b[i] - a[i]);
    return box.clip(std::move(x));
  };

  while (res.evaluations < max_evaluations) {
    sort();
    ++res.iterations;
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    double diameter = 0.0;
    for (std::size_t v = 0; v <= n; ++v)
      for (std::size_t i = 0; i < n; ++i) {
        const double width = box.upper[i] - box.lower[i];
        diameter = std::max(diameter, std::abs(simplex[v][i] - simplex[best][i]) /
                                          (width > 0.0 ? width : 1.0));
      }
    if (diameter < xtol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v <= n; ++v)
      if (v != worst)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / n;

    auto xr = lerp(centroid, simplex[worst], -1.0);
    const double fr = eval(xr);
    if (fr < values[best]) {
      auto xe = lerp(centroid, simplex[worst], -2.0);
      const double fe = res.evaluations < max_evaluations ? eval(xe) : fr;
      if (fe < fr) {
        simplex[worst] = xe;
        values[worst] = fe;
      } else {
        simplex[worst] = xr;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = xr;
      values[worst] = fr;
    } else {
      const bool outside = fr < values[worst];
      auto xc = lerp(centroid, outside ? xr : simplex[worst], 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : values[worst])) {
        simplex[worst] = xc;
        values[worst] = fc;
      } else {
        for (std::size_t v = 0; v <= n && res.evaluations < max_evaluations; ++v) {
          if (v == best) continue;
          simplex[v] = lerp(simplex[best], simplex[v], 0.5);
          values[v] = eval(simplex[v]);
        }
      }
    }
  }
  sort();
  res.x = simplex[order.front()];
  res.value = values[order.front()];
  return res;
}

namespace {

class TsallisVisitor {
 public:
  TsallisVisitor(double qv, const Box& box, std::mt19937_64& rng) : qv_(qv), box_(box), rng_(rng) {
    const double f2 = std::exp((4.0 - qv) * std::log(qv - 1.0));
    const double f3 = std::exp((2.0 - qv) * std::log(2.0) / (qv - 1.0));
    factor4_p_ = std::sqrt(std::numbers::pi) * f2 / (f3 * (3.0 - qv));
    const double f5 = 1.0 / (qv - 1.0) - 0.5;
    const double d1 = 2.0 - f5;
    factor6_ = std::numbers::pi * (1.0 - f5) / std::sin(std::numbers::pi * (1.0 - f5)) / std::exp(std::lgamma(d1));
  }

  double draw(double temperature) {
    const double x = normal_(rng_), y = normal_(rng_);
    const double factor1 = std::exp(std::log(temperature) / (qv_ - 1.0));
    const double factor4 = factor4_p_ * factor1;
    const double sigma =
        std::exp(-(qv_ - 1.0) * std::log(factor6_ / factor4) / (3.0 - qv_));
    const double den = std::exp((qv_ - 1.0) * std::log(std::abs(y)) / (3.0 - qv_));
    return x * sigma / den;
  }

  // Moves all coordinates when step < dim, otherwise coordinate step - dim.
  std::vector<double> visit(const std::vector<double>& x, std::size_t step, double temperature) {
    const std::size_t dim = x.size();
    std::vector<double> out = x;
    if (step < dim) {
      std::vector<double> v(dim);
      for (auto& vi : v) vi = draw(temperature);
      const double up = uniform_(rng_), lo = uniform_(rng_);
      for (std::size_t i = 0; i < dim; ++i) {
        if (v[i] > kTail) v[i] = kTail * up;
        if (v[i] < -kTail) v[i] = -kTail * lo;
        out[i] = wrap(x[i] + v[i], i);
      }
    } else {
      const std::size_t i = step - dim;
      double v = draw(temperature);
      if (v > kTail) v = kTail * uniform_(rng_);
      else if (v < -kTail) v = -kTail * uniform_(rng_);
      out[i] = wrap(x[i] + v, i);
    }
    return out;
  }

  double uniform() { return uniform_(rng_); }

 private:
  static constexpr double kTail = 1e8;
  static constexpr double kMinVisit = 1e-10;

  double wrap(double v, std::size_t i) const {
    const double range = box_.upper[i] - box_.lower[i];
    if (!(range > 0.0)) return box_.lower[i];
    if (!std::isfinite(v)) v = box_.lower[i];
    const double a = v - box_.lower[i];
    const double b = std::fmod(a, range) + range;
    double w = std::fmod(b, range) + box_.lower[i];
    if (std::abs(w - box_.lower[i]) < kMinVisit) w += kMinVisit;
    return w;
  }

  double qv_;
  const Box& box_;
  std::mt19937_64& rng_;
  double factor4_p_ = 0.0, factor6_ = 0.0;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace

OptimizeResult dual_annealing(const Objective& f, const Box& box, std::vector<double> x0,
                              const AnnealingOptions& opt) {
  check_box(box, x0);
  if (opt.max_iterations < 1) throw InputError("annealing budget must be at least 1");
  std::mt19937_64 rng(opt.seed);
  TsallisVisitor visitor(opt.visiting, box, rng);
  OptimizeResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };

  std::vector<double> cur = box.clip(std::move(x0));
  double e_cur = eval(cur);
  std::vector<double> best = cur;
  double e_best = e_cur;
  res.iterations = 1;
  const std::size_t dim = cur.size();
  const double qv = opt.visiting, qa = opt.accept;
  const double t1 = std::exp((qv - 1.0) * std::log(2.0)) - 1.0;

  for (int i = 0; i + 1 < opt.max_iterations; ++i) {
    const double t2 = std::exp((qv - 1.0) * std::log(i + 2.0)) - 1.0;
    const double temperature = opt.initial_temperature * t1 / t2;
    const double temperature_step = temperature / (i + 1.0);
    bool improved = i == 0;
    for (std::size_t j = 0; j < 2 * dim; ++j) {
      std::vector<double> x = visitor.visit(cur, j, temperature);
      const double e = eval(x);
      if (e < e_cur) {
        cur = x;
        e_cur = e;
        if (e < e_best) {
          best = x;
          e_best = e;
          improved = true;
        }
      } else {
        const double r = visitor.uniform();
        const double pqv_temp = 1.0 - (1.0 - qa) * (e - e_cur) / temperature_step;
        const double pqv = pqv_temp <= 0.0 ? 0.0 : std::exp(std::log(pqv_temp) / (1.0 - qa));
        if (r <= pqv) {
          cur = x;
          e_cur = e;
        }
      }
    }
    if (improved && opt.local_evaluations > 0) {
      OptimizeResult local = nelder_mead(f, box, best, opt.local_evaluations);
      res.evaluations += local.evaluations;
      if (local.value < e_best) {
        best = local.x;
        e_best = local.value;
        cur = best;
        e_cur = e_best;
      }
    }
    ++res.iterations;
  }
  res.x = best;
  res.value = e_best;
  return res;
}

OptimizeResult basin_hopping(const Objective& f, const Box& box, std::vector<double> x0,
                             const HoppingOptions& opt) {
  check_box(box, x0);
  if (opt.hops < 1) throw InputError("basin-hopping budget must be at least 1");
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  OptimizeResult res;

  x0 = box.clip(std::move(x0));
  const double e0 = f(x0);
  ++res.evaluations;
  std::vector<double> cur = x0;
  double e_cur = e0;
  if (opt.hops > 1 && opt.local_evaluations > 0) {
    OptimizeResult local = nelder_mead(f, box, x0, opt.local_evaluations);
    res.evaluations += local.evaluations;
    if (local.value < e_cur) {
      cur = local.x;
      e_cur = local.value;
    }
  }
  std::vector<double> best = cur;
  double e_best = e_cur;
  const double temperature =
      std::isfinite(e0) && e0 != 0.0 ? opt.temperature_fraction * std::abs(e0) : 1.0;
  res.iterations = 1;

  for (int h = 1; h < opt.hops; ++h) {
    std::vector<double> x = cur;
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] += opt.step_fraction * (box.upper[i] - box.lower[i]) * unit(rng);
    x = box.clip(std::move(x));
    OptimizeResult local = nelder_mead(f, box, x, std::max(1, opt.local_evaluations));
    res.evaluations += local.evaluations;
    const double r = u01(rng);
    if (local.value < e_cur || r < std::exp(-(local.value - e_cur) / temperature)) {
      cur = local.x;
      e_cur = local.value;
    }
    if (local.value < e_best) {
      best = local.x;
      e_best = local.value;
    }
    ++res.iterations;
  }
  res.x = best;
  res.value = e_best;
  return res;
}

}  // namespace rydpar
