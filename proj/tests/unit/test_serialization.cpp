#include <gtest/gtest.h>

#include <cmath>

#include "histolim/error.hpp"
#include "histolim/serialization.hpp"

using namespace histolim;

TEST(Numbers, FormatAndParse) {
  for (double x : {0.1, 1.0 / 3, 1e-300, -2.5, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(INFINITY), "inf");
  EXPECT_EQ(format_double(-INFINITY), "-inf");
  EXPECT_EQ(format_double(NAN), "nan");
  EXPECT_EQ(parse_number(Json("inf")), INFINITY);
  EXPECT_EQ(parse_number(Json("1/4")), 0.25);
  EXPECT_EQ(parse_number(Json(0.5)), 0.5);
  EXPECT_EQ(parse_number(Json("0.125")), 0.125);
  EXPECT_THROW(parse_number(Json("abc")), ValidationError);
  EXPECT_THROW(parse_number(Json::array()), ValidationError);
}

TEST(Systems, RoundTrip) {
  TableRule t;
  t.nodes[CellIndex::parse("01")] = {2.0, 3.0};
  t.levels[2] = {1.0, INFINITY};
  t.fallback = {4.0, 4.0};
  Eigen::MatrixXd s0(2, 2);
  s0 << 1.0, 0.25, 0.25, 2.0;
  const std::vector<HistogramSystem> systems{
      DirichletSystem{MeasureDescriptor{0.5, {{0.25, 2.0}}}},
      PolyaTreeSystem{HomogeneousRule{BetaExpression::parse("m^2")}, 0.0},
      PolyaTreeSystem{CantorTrigRule{}, 0.0},
      PolyaTreeSystem{t, 0.0},
      PolyaTreeSystem{DirichletRelationRule{MeasureDescriptor::lebesgue(2.0), Domain::parse("(0,2]")}, 0.0},
      GaussianSystem{},
      GaussianSystem{MeasureDescriptor::lebesgue(), ConstantCovariance{2.0, MeasureDescriptor::lebesgue()}},
      GaussianSystem{{}, PointMassCovariance{{0.1, 0.6}, s0}},
      GaussianSystem{{}, KernelCovariance{KernelType::kExponential, 0.5, 2.0, 6}},
      GaussianSystem{{}, GreensCovariance{3, 0.05, 1.0, 0, 8}},
      LeakageSystem{0.3, true},
  };
  for (const auto& sys : systems) {
    const Json j = system_to_json(sys);
    const Json again = system_to_json(system_from_json(Json::parse(j.dump())));
    EXPECT_EQ(j, again) << j.dump();
  }
}

TEST(Systems, InvalidSpecsRejected) {
  EXPECT_THROW(system_from_json(Json::parse(R"({"family": "nope"})")), ValidationError);
  EXPECT_THROW(system_from_json(Json::parse(R"({"family": "polya", "p0": 1})")), ValidationError);
  EXPECT_THROW(system_from_json(Json::parse(R"({"family": "leakage", "delta": 1.5})")), ValidationError);
  EXPECT_THROW(system_from_json(Json::parse(R"({"family": "polya", "rule": {"type": "homogeneous", "beta": "m+"}})")),
               ValidationError);
}

TEST(Chains, ShortFormsAndExplicitRoundTrip) {
  const PartitionChain dyadic = chain_from_json(Json::parse(R"({"type": "dyadic", "domain": "(0,1]", "depth": 4})"));
  EXPECT_EQ(dyadic.kind(), ChainKind::kDyadic);
  EXPECT_EQ(dyadic.depth(), 4u);
  const Json explicit_form = chain_to_json(dyadic);
  const PartitionChain back = chain_from_json(Json::parse(explicit_form.dump()));
  EXPECT_EQ(chain_to_json(back), explicit_form);
  EXPECT_EQ(back.kind(), ChainKind::kDyadic);

  const PartitionChain leak = chain_from_json(Json::parse(R"({"type": "leakage", "depth": 5, "boundary": false})"));
  EXPECT_EQ(chain_to_json(chain_from_json(chain_to_json(leak))), chain_to_json(leak));
  const PartitionChain tri = chain_from_json(Json::parse(R"({"type": "triangular", "levels": [[0], [-1, 0, 1]]})"));
  EXPECT_EQ(tri.depth(), 2u);
}

TEST(Chains, ExplicitDyadicClaimRevalidated) {
  const PartitionChain tri = chain_from_json(Json::parse(R"({"type": "triangular", "levels": [[0], [-1, 0, 1]]})"));
  Json j = chain_to_json(tri);
  j["kind"] = "dyadic";
  EXPECT_THROW(chain_from_json(j), Error);
  const Json too_deep = Json::parse(R"({"type": "dyadic", "domain": "(0,1]", "depth": 9})");
  EXPECT_THROW(chain_from_json(too_deep, ChainLimits{8}), CapacityError);
}

TEST(Histograms, JsonAndCsv) {
  const PartitionChain chain = dyadic_chain(Domain{}, 2);
  const Histogram h(chain.level(2), {0.1, 0.2, 0.3, 0.4}, HistogramKind::kProbability);
  const Histogram back = histogram_from_json(Json::parse(histogram_to_json(h).dump()));
  EXPECT_EQ(back.values(), h.values());
  EXPECT_EQ(back.kind(), h.kind());
  const std::string csv = histogram_to_csv(h);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "index,label,lower,upper,value");
  EXPECT_NE(csv.find("3,11,3/4,1,0.4"), std::string::npos) << csv;
  const std::string path = path_to_csv({{0.0, 0.0}, {0.5, 0.25}});
  EXPECT_EQ(path, "t,value\n0,0\n0.5,0.25\n");
}

TEST(Reports, VerdictAndLeakage) {
  Verdict v;
  v.condition = "polya_tight";
  v.anchor = "P-tight";
  v.status = VerdictStatus::kSufficientConditionFails;
  v.argument = "x";
  v.evidence = {{1, INFINITY}};
  const Json j = verdict_to_json(v);
  EXPECT_EQ(j.at("status"), "sufficient_condition_fails");
  EXPECT_EQ(j.dump().find("Infinity"), std::string::npos);
  const LeakageReport r = leakage_counterexample(0.2, 4);
  const std::string csv = leakage_report_to_csv(r);
  EXPECT_EQ(csv.rfind("depth,compact,outside_mass,escaped", 0), 0u) << csv;
  EXPECT_EQ(leakage_report_to_json(r).at("verdict").at("status"), "fails");
}

TEST(Files, MissingAndMalformed) {
  try {
    read_json_file("/nonexistent/x.json");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "io");
  }
}
