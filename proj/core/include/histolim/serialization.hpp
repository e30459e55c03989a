#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "histolim/conditions.hpp"
#include "histolim/diagnostics.hpp"
#include "histolim/histogram.hpp"
#include "histolim/samplers.hpp"
#include "histolim/systems.hpp"

namespace histolim {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double; "inf", "-inf", "nan"
/// for non-finite values.
std::string format_double(double x);
/// Numbers, or strings holding "inf", "-inf", a decimal or "p/q".
double parse_number(const Json& j);

Json measure_to_json(const MeasureDescriptor& m);
MeasureDescriptor measure_from_json(const Json& j);

Json system_to_json(const HistogramSystem& sys);
/// Families: dirichlet, polya, gaussian, leakage. Validates the result.
HistogramSystem system_from_json(const Json& j);

Json partition_to_json(const Partition& p);
PartitionPtr partition_from_json(const Json& j);

/// Explicit form listing every level; reading it back rebuilds and
/// revalidates every refinement map (and the dyadic shape when claimed).
Json chain_to_json(const PartitionChain& chain);
/// Also accepts the short forms {"type": "dyadic", "domain", "depth"},
/// {"type": "triangular", "levels"} and {"type": "leakage", "depth", "boundary"}.
PartitionChain chain_from_json(const Json& j, const ChainLimits& limits = {});

Json histogram_to_json(const Histogram& h);
Histogram histogram_from_json(const Json& j);
/// Columns: index, label, lower, upper, value.
std::string histogram_to_csv(const Histogram& h);
/// Columns: t, value.
std::string path_to_csv(const std::vector<PathPoint>& path);

Json verdict_to_json(const Verdict& v);
Json coherence_to_json(const CoherenceResult& r);
Json curve_to_json(const std::vector<CurvePoint>& curve, bool with_tail);
/// Columns: depth, L, mean, stderr, n (and tail when requested).
std::string curve_to_csv(const std::vector<CurvePoint>& curve, bool with_tail);
Json phase_report_to_json(const PhaseReport& r, const HistogramSystem& sys);
Json leakage_report_to_json(const LeakageReport& r);
std::string leakage_report_to_csv(const LeakageReport& r);

Json read_json_file(const std::string& path);

}  // namespace histolim
