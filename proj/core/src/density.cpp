#include "histolim/density.hpp"

#include <algorithm>
#include <cmath>

#include "histolim/error.hpp"

namespace histolim {
namespace {

constexpr double kSimpsonTolerance = 1e-9;
constexpr int kMaxHalvings = 22;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double polyval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

std::vector<double> trimmed(std::vector<double> c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  return c;
}

double poly_integral(const std::vector<double>& c, double x0, double x1) {
  std::vector<double> anti(c.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) anti[k + 1] = c[k] / static_cast<double>(k + 1);
  return polyval(anti, x1) - polyval(anti, x0);
}

// Roots of a polynomial of degree <= 2 strictly inside (x0, x1), ascending.
std::vector<double> interior_roots(const std::vector<double>& c, double x0, double x1) {
  std::vector<double> roots;
  if (c.size() == 2) {
    roots.push_back(-c[0] / c[1]);
  } else if (c.size() == 3) {
    const double a = c[2], b = c[1], k = c[0];
    const double disc = b * b - 4 * a * k;
    if (disc > 0) {
      // Numerically stable pair.
      const double s = std::sqrt(disc);
      const double qq = -0.5 * (b + std::copysign(s, b));
      roots.push_back(qq / a);
      if (qq != 0.0) roots.push_back(k / qq);
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> inside;
  for (double r : roots) {
    if (r > x0 && r < x1) inside.push_back(r);
  }
  return inside;
}

template <class F>
double simpson(const F& f, double x0, double x1) {
  auto composite = [&](int n) {
    const double h = (x1 - x0) / n;
    double s = f(x0) + f(x1);
    for (int i = 1; i < n; ++i) s += f(x0 + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
  };
  int n = 2;
  double previous = composite(n);
  for (int k = 0; k < kMaxHalvings; ++k) {
    n *= 2;
    const double current = composite(n);
    if (!std::isfinite(current)) throw NumericError("integrand is not finite", "non_integrable");
    if (std::abs(current - previous) < kSimpsonTolerance) return current;
    previous = current;
  }
  throw NumericError("quadrature did not converge", "non_integrable");
}

double piecewise_at(const PiecewiseDensity& d, double x) {
  return d.cell_values.at(cell_of(*d.partition, x));
}

void add_breakpoints(const Density& f, double a, double b, std::vector<double>& points) {
  if (const auto* pw = std::get_if<PiecewiseDensity>(&f)) {
    for (const Cell& c : pw->partition->cells()) {
      for (const Endpoint* e : {&c.lower, &c.upper}) {
        if (!e->is_finite()) continue;
        const double x = e->to_double();
        if (x > a && x < b) points.push_back(x);
      }
    }
  }
}

// Restriction of f to an interval containing no breakpoint, as a polynomial
// when f is piecewise constant or polynomial.
std::optional<std::vector<double>> local_polynomial(const Density& f, double x0, double x1) {
  return std::visit(
      Overloaded{
          [&](const PiecewiseDensity& d) -> std::optional<std::vector<double>> {
            return std::vector<double>{piecewise_at(d, 0.5 * (x0 + x1))};
          },
          [](const PolynomialDensity& d) -> std::optional<std::vector<double>> { return d.coefficients; },
          [](const FunctionDensity&) -> std::optional<std::vector<double>> { return std::nullopt; },
      },
      f);
}

double abs_integral(const Density& f, const Density& g, double x0, double x1) {
  const auto pf = local_polynomial(f, x0, x1);
  const auto pg = local_polynomial(g, x0, x1);
  if (pf && pg) {
    std::vector<double> d(std::max(pf->size(), pg->size()), 0.0);
    for (std::size_t k = 0; k < pf->size(); ++k) d[k] += (*pf)[k];
    for (std::size_t k = 0; k < pg->size(); ++k) d[k] -= (*pg)[k];
    d = trimmed(std::move(d));
    if (d.size() <= 3) {
      std::vector<double> cuts{x0};
      for (double r : interior_roots(d, x0, x1)) cuts.push_back(r);
      cuts.push_back(x1);
      double total = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += std::abs(poly_integral(d, cuts[i], cuts[i + 1]));
      return total;
    }
  }
  return simpson([&](double x) { return std::abs(evaluate(f, x) - evaluate(g, x)); }, x0, x1);
}

double signed_integral(const Density& f, double x0, double x1) {
  if (const auto p = local_polynomial(f, x0, x1)) return poly_integral(*p, x0, x1);
  return simpson([&](double x) { return evaluate(f, x); }, x0, x1);
}

std::vector<double> pieces(const Density& f, const Density* g, double a, double b) {
  std::vector<double> points{a, b};
  add_breakpoints(f, a, b, points);
  if (g) add_breakpoints(*g, a, b, points);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

const PiecewiseDensity& require_piecewise(const Density& f) {
  const auto* pw = std::get_if<PiecewiseDensity>(&f);
  if (!pw) throw Unsupported("a histogram reference needs piecewise densities");
  return *pw;
}

}  // namespace

double PolynomialDensity::operator()(double x) const { return polyval(coefficients, x); }

double evaluate(const Density& f, double x) {
  return std::visit(Overloaded{
                        [&](const PiecewiseDensity& d) { return piecewise_at(d, x); },
                        [&](const PolynomialDensity& d) { return d(x); },
                        [&](const FunctionDensity& d) { return d.f(x); },
                    },
                    f);
}

double tv_distance_density(const Density& f, const Density& g, const ReferenceMeasure& q) {
  if (const auto* leb = std::get_if<LebesgueReference>(&q)) {
    if (!std::isfinite(leb->a) || !std::isfinite(leb->b) || !(leb->a < leb->b)) {
      throw ValidationError("Lebesgue reference needs a finite interval a < b");
    }
    const auto cuts = pieces(f, &g, leb->a, leb->b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += abs_integral(f, g, cuts[i], cuts[i + 1]);
    return 0.5 * total;
  }
  const Histogram& ref = std::get<Histogram>(q);
  const PiecewiseDensity& pf = require_piecewise(f);
  const PiecewiseDensity& pg = require_piecewise(g);
  const RefinementMap mf = refine_map(pf.partition, ref.partition());
  const RefinementMap mg = refine_map(pg.partition, ref.partition());
  std::vector<double> fv(ref.size()), gv(ref.size());
  for (std::size_t i = 0; i < mf.groups.size(); ++i) {
    for (std::size_t j : mf.groups[i]) fv[j] = pf.cell_values[i];
  }
  for (std::size_t i = 0; i < mg.groups.size(); ++i) {
    for (std::size_t j : mg.groups[i]) gv[j] = pg.cell_values[i];
  }
  double total = 0.0;
  for (std::size_t j = 0; j < ref.size(); ++j) {
    if (ref[j] < 0.0) throw ValidationError("reference measure must be nonnegative");
    total += std::abs(fv[j] - gv[j]) * ref[j];
  }
  return 0.5 * total;
}

Histogram integrate_lebesgue(const Density& f, const PartitionPtr& p, HistogramKind kind) {
  std::vector<double> values(p->size(), 0.0);
  for (std::size_t i = 0; i < p->size(); ++i) {
    const Cell& c = p->cell(i);
    if (c.singleton) continue;
    if (!c.bounded()) throw DomainError("cannot integrate over the unbounded cell " + c.to_string());
    const double a = c.lower.to_double();
    const double b = c.upper.to_double();
    const auto cuts = pieces(f, nullptr, a, b);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) values[i] += signed_integral(f, cuts[k], cuts[k + 1]);
  }
  return Histogram(p, std::move(values), kind);
}

}  // namespace histolim
