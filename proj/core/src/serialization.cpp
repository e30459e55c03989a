#include "histolim/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "histolim/error.hpp"

namespace histolim {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("missing field '") + key + "'", "malformed_json");
  return j.at(key);
}

double number_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? parse_number(j.at(key)) : fallback;
}

int integer(const Json& j) {
  const double v = parse_number(j);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError("expected an integer", "malformed_json");
  return static_cast<int>(v);
}

std::string text(const Json& j) {
  if (!j.is_string()) throw ValidationError("expected a string", "malformed_json");
  return j.get<std::string>();
}

Json pair_to_json(const BetaPair& p) { return Json::array({number(p.first), number(p.second)}); }

BetaPair pair_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("beta pairs are [a, b]", "malformed_json");
  return {parse_number(j[0]), parse_number(j[1])};
}

const char* kernel_name(KernelType t) {
  switch (t) {
    case KernelType::kMin:
      return "min";
    case KernelType::kExponential:
      return "exponential";
    case KernelType::kSquaredExponential:
      break;
  }
  return "squared_exponential";
}

KernelType kernel_from_name(const std::string& s) {
  if (s == "min") return KernelType::kMin;
  if (s == "exponential") return KernelType::kExponential;
  if (s == "squared_exponential") return KernelType::kSquaredExponential;
  throw ValidationError("unknown kernel '" + s + "'");
}

Json covariance_to_json(const CovarianceSpec& spec) {
  return std::visit(
      Overloaded{
          [](const DiagonalCovariance& d) { return Json{{"type", "diagonal"}, {"sigma2", measure_to_json(d.sigma2)}}; },
          [](const ConstantCovariance& c) {
            return Json{{"type", "constant"}, {"c", number(c.c)}, {"mu", measure_to_json(c.mu)}};
          },
          [](const PointMassCovariance& p) {
            Json rows = Json::array();
            for (Eigen::Index i = 0; i < p.sigma0.rows(); ++i) {
              Json row = Json::array();
              for (Eigen::Index k = 0; k < p.sigma0.cols(); ++k) row.push_back(number(p.sigma0(i, k)));
              rows.push_back(std::move(row));
            }
            return Json{{"type", "point_mass"}, {"sites", p.sites}, {"sigma0", rows}};
          },
          [](const KernelCovariance& k) {
            return Json{{"type", "kernel"},        {"kernel", kernel_name(k.type)}, {"length", number(k.length)},
                        {"variance", number(k.variance)}, {"order", k.order}};
          },
          [](const GreensCovariance& g) {
            return Json{{"type", "greens"}, {"dimension", g.dimension}, {"cutoff", number(g.cutoff)},
                        {"c0", number(g.c0)},  {"c1", number(g.c1)},        {"order", g.order}};
          },
      },
      spec);
}

CovarianceSpec covariance_from_json(const Json& j) {
  const std::string type = text(field(j, "type"));
  if (type == "diagonal") {
    return DiagonalCovariance{j.contains("sigma2") ? measure_from_json(j.at("sigma2")) : MeasureDescriptor::lebesgue()};
  }
  if (type == "constant") {
    return ConstantCovariance{number_or(j, "c", 1.0),
                              j.contains("mu") ? measure_from_json(j.at("mu")) : MeasureDescriptor::lebesgue()};
  }
  if (type == "point_mass") {
    PointMassCovariance p;
    for (const auto& s : field(j, "sites")) p.sites.push_back(parse_number(s));
    const Json& rows = field(j, "sigma0");
    const auto n = static_cast<Eigen::Index>(p.sites.size());
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
      throw ValidationError("sigma0 must be a square matrix over the sites");
    }
    p.sigma0.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& row = rows[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
        throw ValidationError("sigma0 must be a square matrix over the sites");
      }
      for (Eigen::Index k = 0; k < n; ++k) p.sigma0(i, k) = parse_number(row[static_cast<std::size_t>(k)]);
    }
    return p;
  }
  if (type == "kernel") {
    KernelCovariance k;
    if (j.contains("kernel")) k.type = kernel_from_name(text(j.at("kernel")));
    k.length = number_or(j, "length", k.length);
    k.variance = number_or(j, "variance", k.variance);
    if (j.contains("order")) k.order = integer(j.at("order"));
    return k;
  }
  if (type == "greens") {
    GreensCovariance g;
    if (j.contains("dimension")) g.dimension = integer(j.at("dimension"));
    g.cutoff = number_or(j, "cutoff", g.cutoff);
    g.c0 = number_or(j, "c0", g.c0);
    g.c1 = number_or(j, "c1", g.c1);
    if (j.contains("order")) g.order = integer(j.at("order"));
    return g;
  }
  throw ValidationError("unknown covariance type '" + type + "'");
}

Json rule_to_json(const BetaRule& rule) {
  return std::visit(
      Overloaded{
          [](const HomogeneousRule& h) { return Json{{"type", "homogeneous"}, {"beta", h.expr.text()}}; },
          [](const DirichletRelationRule& d) {
            return Json{{"type", "dirichlet_relation"}, {"measure", measure_to_json(d.measure)},
                        {"domain", d.domain.to_string()}};
          },
          [](const CantorTrigRule&) { return Json{{"type", "cantor_trig"}}; },
          [](const TableRule& t) {
            Json nodes = Json::object();
            for (const auto& [e, p] : t.nodes) nodes[e.empty() ? std::string("root") : e.to_string()] = pair_to_json(p);
            Json levels = Json::object();
            for (const auto& [l, p] : t.levels) levels[std::to_string(l)] = pair_to_json(p);
            return Json{{"type", "table"}, {"nodes", nodes}, {"levels", levels}, {"fallback", pair_to_json(t.fallback)}};
          },
      },
      rule);
}

BetaRule rule_from_json(const Json& j) {
  const std::string type = text(field(j, "type"));
  if (type == "homogeneous") {
    const Json& b = field(j, "beta");
    return HomogeneousRule{BetaExpression::parse(b.is_string() ? b.get<std::string>() : format_double(parse_number(b)))};
  }
  if (type == "dirichlet_relation") {
    DirichletRelationRule d;
    if (j.contains("measure")) d.measure = measure_from_json(j.at("measure"));
    if (j.contains("domain")) d.domain = Domain::parse(text(j.at("domain")));
    return d;
  }
  if (type == "cantor_trig") return CantorTrigRule{};
  if (type == "table") {
    TableRule t;
    if (j.contains("nodes")) {
      for (const auto& [k, v] : j.at("nodes").items()) {
        t.nodes[k == "root" ? CellIndex() : CellIndex::parse(k)] = pair_from_json(v);
      }
    }
    if (j.contains("levels")) {
      for (const auto& [k, v] : j.at("levels").items()) {
        int level = 0;
        const auto [ptr, ec] = std::from_chars(k.data(), k.data() + k.size(), level);
        if (ec != std::errc() || ptr != k.data() + k.size() || level < 0) {
          throw ValidationError("table level keys must be nonnegative integers", "malformed_json");
        }
        t.levels[level] = pair_from_json(v);
      }
    }
    if (j.contains("fallback")) t.fallback = pair_from_json(j.at("fallback"));
    return t;
  }
  throw ValidationError("unknown beta rule '" + type + "'");
}

Json cell_to_json(const Cell& c, const std::optional<CellIndex>& label) {
  Json j{{"lower", c.lower.to_string()}, {"upper", c.upper.to_string()}, {"upper_closed", c.upper_closed},
         {"singleton", c.singleton}};
  j["label"] = label ? Json(label->empty() ? std::string("root") : label->to_string()) : Json(nullptr);
  return j;
}

Json series_to_json(const Series& s) {
  Json out = Json::array();
  for (const auto& [m, v] : s) out.push_back(Json::array({m, number(v)}));
  return out;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    try {
      return to_double(parse_rational(s));
    } catch (const Error&) {
      throw ValidationError("malformed number '" + s + "'", "malformed_json");
    }
  }
  throw ValidationError("expected a number", "malformed_json");
}

Json measure_to_json(const MeasureDescriptor& m) {
  Json atoms = Json::array();
  for (const auto& [x, w] : m.atoms) atoms.push_back(Json::array({number(x), number(w)}));
  return Json{{"lebesgue", number(m.lebesgue_scale)}, {"atoms", atoms}};
}

MeasureDescriptor measure_from_json(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "lebesgue") return MeasureDescriptor::lebesgue();
  if (!j.is_object()) throw ValidationError("a measure is {\"lebesgue\": s, \"atoms\": [[x, w], ...]}", "malformed_json");
  MeasureDescriptor m;
  m.lebesgue_scale = number_or(j, "lebesgue", 0.0);
  if (j.contains("atoms")) {
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw ValidationError("atoms are [location, weight]", "malformed_json");
      m.atoms.emplace_back(parse_number(a[0]), parse_number(a[1]));
    }
  }
  return m;
}

Json system_to_json(const HistogramSystem& sys) {
  return std::visit(
      Overloaded{
          [](const DirichletSystem& d) {
            Json j{{"family", "dirichlet"}};
            if (d.base.descriptor()) {
              j["base"] = measure_to_json(*d.base.descriptor());
            } else {
              Json w = Json::array();
              for (double v : d.base.weights()) w.push_back(number(v));
              j["base"] = Json{{"partition", partition_to_json(*d.base.finest())}, {"weights", w}};
            }
            return j;
          },
          [](const PolyaTreeSystem& p) {
            return Json{{"family", "polya"}, {"rule", rule_to_json(p.rule)}, {"p0", number(p.p0)}};
          },
          [](const GaussianSystem& g) {
            return Json{{"family", "gaussian"}, {"centre", measure_to_json(g.centre)},
                        {"covariance", covariance_to_json(g.covariance)}};
          },
          [](const LeakageSystem& l) {
            return Json{{"family", "leakage"}, {"delta", number(l.delta)}, {"boundary", l.boundary}};
          },
      },
      sys);
}

HistogramSystem system_from_json(const Json& j) {
  const std::string family = text(field(j, "family"));
  HistogramSystem sys;
  if (family == "dirichlet") {
    DirichletSystem d;
    if (j.contains("base")) {
      const Json& b = j.at("base");
      if (b.is_object() && b.contains("weights")) {
        std::vector<double> w;
        for (const auto& v : b.at("weights")) w.push_back(parse_number(v));
        d.base = BaseMeasure(partition_from_json(field(b, "partition")), std::move(w));
      } else {
        d.base = BaseMeasure(measure_from_json(b));
      }
    }
    sys = d;
  } else if (family == "polya") {
    PolyaTreeSystem p;
    if (j.contains("rule")) p.rule = rule_from_json(j.at("rule"));
    p.p0 = number_or(j, "p0", 0.0);
    sys = p;
  } else if (family == "gaussian") {
    GaussianSystem g;
    if (j.contains("centre")) g.centre = measure_from_json(j.at("centre"));
    if (j.contains("covariance")) g.covariance = covariance_from_json(j.at("covariance"));
    sys = g;
  } else if (family == "leakage") {
    LeakageSystem l;
    l.delta = number_or(j, "delta", l.delta);
    if (j.contains("boundary")) l.boundary = j.at("boundary").get<bool>();
    sys = l;
  } else {
    throw ValidationError("unknown family '" + family + "'");
  }
  validate(sys);
  return sys;
}

Json partition_to_json(const Partition& p) {
  Json cells = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i) cells.push_back(cell_to_json(p.cell(i), p.label(i)));
  return Json{{"domain", p.domain().to_string()}, {"cells", cells}};
}

PartitionPtr partition_from_json(const Json& j) {
  const Domain domain = Domain::parse(text(field(j, "domain")));
  std::vector<Cell> cells;
  std::vector<std::optional<CellIndex>> labels;
  for (const auto& c : field(j, "cells")) {
    const bool singleton = c.value("singleton", false);
    if (singleton) {
      const Endpoint x = Endpoint::parse(text(field(c, "lower")));
      if (!x.is_finite()) throw ValidationError("singleton cells need a finite point");
      cells.push_back(Cell::point(x.value()));
    } else {
      cells.push_back(Cell::interval(Endpoint::parse(text(field(c, "lower"))), Endpoint::parse(text(field(c, "upper"))),
                                     c.value("upper_closed", true)));
    }
    if (c.contains("label") && !c.at("label").is_null()) {
      const std::string l = text(c.at("label"));
      labels.emplace_back(l == "root" ? CellIndex() : CellIndex::parse(l));
    } else {
      labels.emplace_back(std::nullopt);
    }
  }
  return std::make_shared<const Partition>(domain, std::move(cells), std::move(labels));
}

Json chain_to_json(const PartitionChain& chain) {
  const char* kind = chain.kind() == ChainKind::kDyadic ? "dyadic" : chain.kind() == ChainKind::kTriangular ? "triangular" : "custom";
  Json levels = Json::array();
  for (const auto& p : chain.levels()) levels.push_back(partition_to_json(*p));
  return Json{{"type", "explicit"}, {"kind", kind}, {"levels", levels}};
}

PartitionChain chain_from_json(const Json& j, const ChainLimits& limits) {
  const std::string type = text(field(j, "type"));
  if (type == "dyadic") {
    const Domain domain = j.contains("domain") ? Domain::parse(text(j.at("domain"))) : Domain{};
    return dyadic_chain(domain, integer(field(j, "depth")), limits);
  }
  if (type == "triangular") {
    std::vector<std::vector<double>> levels;
    for (const auto& row : field(j, "levels")) {
      levels.emplace_back();
      for (const auto& x : row) levels.back().push_back(parse_number(x));
    }
    return triangular_chain(levels, limits);
  }
  if (type == "leakage") {
    return leakage_chain(integer(field(j, "depth")), j.value("boundary", false), limits);
  }
  if (type == "explicit") {
    std::vector<PartitionPtr> levels;
    for (const auto& p : field(j, "levels")) levels.push_back(partition_from_json(p));
    if (levels.empty()) throw ValidationError("a chain needs at least one level");
    if (static_cast<int>(levels.size()) - 1 > limits.max_depth) {
      throw CapacityError("chain depth exceeds the limit " + std::to_string(limits.max_depth));
    }
    const std::string kind = j.value("kind", std::string("custom"));
    if (kind == "dyadic") {
      PartitionChain expected = dyadic_chain(levels.front()->domain(), static_cast<int>(levels.size()) - 1, limits);
      for (std::size_t m = 0; m < levels.size(); ++m) {
        if (!(*levels[m] == *expected.level(m))) {
          throw ValidationError("level " + std::to_string(m) + " is not the dyadic bisection");
        }
      }
      return expected;
    }
    return PartitionChain(std::move(levels), kind == "triangular" ? ChainKind::kTriangular : ChainKind::kCustom);
  }
  throw ValidationError("unknown chain type '" + type + "'");
}

Json histogram_to_json(const Histogram& h) {
  Json values = Json::array();
  for (double v : h.values()) values.push_back(number(v));
  return Json{{"kind", to_string(h.kind())}, {"partition", partition_to_json(*h.partition())}, {"values", values}};
}

Histogram histogram_from_json(const Json& j) {
  const std::string k = text(field(j, "kind"));
  HistogramKind kind;
  if (k == "probability") {
    kind = HistogramKind::kProbability;
  } else if (k == "positive") {
    kind = HistogramKind::kPositive;
  } else if (k == "signed") {
    kind = HistogramKind::kSigned;
  } else {
    throw ValidationError("unknown histogram kind '" + k + "'");
  }
  std::vector<double> values;
  for (const auto& v : field(j, "values")) values.push_back(parse_number(v));
  return Histogram(partition_from_json(field(j, "partition")), std::move(values), kind);
}

std::string histogram_to_csv(const Histogram& h) {
  std::ostringstream out;
  out << "index,label,lower,upper,value\n";
  const Partition& p = *h.partition();
  for (std::size_t i = 0; i < h.size(); ++i) {
    const Cell& c = p.cell(i);
    const auto& label = p.label(i);
    out << i << ',' << (label ? label->to_string() : std::string()) << ',' << c.lower.to_string() << ','
        << (c.singleton ? c.lower : c.upper).to_string() << ',' << format_double(h[i]) << '\n';
  }
  return out.str();
}

std::string path_to_csv(const std::vector<PathPoint>& path) {
  std::ostringstream out;
  out << "t,value\n";
  for (const auto& pt : path) out << format_double(pt.t) << ',' << format_double(pt.value) << '\n';
  return out.str();
}

Json verdict_to_json(const Verdict& v) {
  Json j{{"condition", v.condition}, {"anchor", v.anchor}, {"status", to_string(v.status)},
         {"argument", v.argument}, {"evidence", series_to_json(v.evidence)}};
  if (v.extrapolation) j["extrapolation"] = Json{{"method", v.extrapolation->method}, {"value", number(v.extrapolation->value)}};
  if (!v.auxiliary.empty()) {
    Json aux = Json::object();
    for (const auto& [k, s] : v.auxiliary) aux[k] = series_to_json(s);
    j["auxiliary"] = aux;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

Json coherence_to_json(const CoherenceResult& r) {
  Json first = Json::array();
  for (double z : r.z_first) first.push_back(number(z));
  Json second = Json::array();
  for (double z : r.z_second) second.push_back(number(z));
  return Json{{"pass", r.pass},         {"seed", r.seed},     {"coarse_level", r.coarse_level},
              {"replicates", r.replicates}, {"max_abs_z", number(r.max_abs_z)}, {"z_first", first},
              {"z_second", second}};
}

Json curve_to_json(const std::vector<CurvePoint>& curve, bool with_tail) {
  Json out = Json::array();
  for (const auto& c : curve) {
    Json j{{"depth", c.depth}};
    if (with_tail) j["L"] = number(c.L);
    j["mean"] = number(c.mean);
    j["stderr"] = number(c.stderr_);
    j["n"] = c.n;
    if (with_tail) j["tail"] = number(c.tail);
    out.push_back(std::move(j));
  }
  return out;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve, bool with_tail) {
  std::ostringstream out;
  out << "depth,L,mean,stderr,n" << (with_tail ? ",tail" : "") << '\n';
  for (const auto& c : curve) {
    out << c.depth << ',' << (with_tail ? format_double(c.L) : std::string()) << ',' << format_double(c.mean) << ','
        << format_double(c.stderr_) << ',' << c.n;
    if (with_tail) out << ',' << format_double(c.tail);
    out << '\n';
  }
  return out.str();
}

Json phase_report_to_json(const PhaseReport& r, const HistogramSystem& sys) {
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(verdict_to_json(v));
  Json j{{"family", r.family},
         {"system", system_to_json(sys)},
         {"completely_random", r.completely_random},
         {"declared_phase", to_string(r.declared_phase)},
         {"random_atomic", r.random_atomic},
         {"anchor", r.anchor},
         {"rationale", r.rationale},
         {"condition_verdicts", verdicts},
         {"atomicity_curve", curve_to_json(r.atomicity_curve, false)}};
  j["atomicity_trend"] = r.atomicity_trend ? Json(to_string(*r.atomicity_trend)) : Json(nullptr);
  j["domination_curve"] = curve_to_json(r.domination.curve, true);
  j["uncovered_depths"] = r.domination.uncovered_depths;
  return j;
}

Json leakage_report_to_json(const LeakageReport& r) {
  const auto rows = [](const std::vector<LeakageRow>& v) {
    Json out = Json::array();
    for (const auto& row : v) {
      out.push_back(Json{{"depth", row.depth}, {"compact", number(row.compact)},
                         {"outside_mass", number(row.outside_mass)}, {"escaped", row.escaped}});
    }
    return out;
  };
  Json boundary = Json::array();
  for (const auto& b : r.boundary_rows) {
    boundary.push_back(Json{{"depth", b.depth}, {"radius", number(b.radius)}, {"boundary_mass", number(b.boundary_mass)}});
  }
  return Json{{"delta", number(r.delta)}, {"summary", rows(r.summary)}, {"rows", rows(r.rows)},
              {"boundary", boundary},      {"verdict", verdict_to_json(r.verdict)}};
}

std::string leakage_report_to_csv(const LeakageReport& r) {
  std::ostringstream out;
  out << "depth,compact,outside_mass,escaped\n";
  for (const auto& row : r.summary) {
    out << row.depth << ',' << format_double(row.compact) << ',' << format_double(row.outside_mass) << ','
        << (row.escaped ? 1 : 0) << '\n';
  }
  return out.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read '" + path + "'", "io");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed JSON in '" + path + "': " + e.what(), "malformed_json");
  }
}

}  // namespace histolim
