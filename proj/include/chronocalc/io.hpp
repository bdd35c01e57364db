#pragma once

#include "chronocalc/chrono.hpp"
#include "chronocalc/fields.hpp"
#include "chronocalc/reach.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

// Text formats shared by the CLI and the tests. Field indices are 1-based in
// every document; the C++ API is 0-based.
namespace chronocalc::io {

using Json = nlohmann::ordered_json;

/// printf %.17g, which round-trips every double.
std::string format_double(double x);

/// "0,1,-0.5" -> ChartPoint. Whitespace around entries is ignored.
ChartPoint parse_point(const std::string& text);

/// Field document:
///   {"dim": n, "components": [[{"coef": c, "exps": [..]}, ..], ..], "smoothness_order": m}
/// or, for a piecewise-in-time field,
///   {"dim": n, "time_pieces": [{"begin": a, "end": b, "components": [...]}, ..]}
VectorField field_from_json(const Json& doc);
Json field_to_json(const VectorField& field);

/// Either a single field document or {"fields": [field, ..]}.
std::vector<VectorField> system_from_json(const Json& doc);
Json system_to_json(const std::vector<VectorField>& fields);

/// Builtin catalog name, or a path to a system document.
std::vector<VectorField> load_system(const std::string& name_or_path);

/// {"dim": n, "components": [...], "max_derivative_order": m}
Observable observable_from_json(const Json& doc);
/// "identity", "x<i>" (1-based coordinate), or a path to an observable document.
Observable load_observable(const std::string& spec, int dim);

Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

/// Header "segment,field_index,sign,duration".
std::string schedule_to_csv(const ControlSchedule& schedule);
ControlSchedule schedule_from_csv(const std::string& text);
/// {"segments": [{"field_index": i, "sign": s, "duration": d}, ..]}
Json schedule_to_json(const ControlSchedule& schedule);
/// Accepts a schedule document or a plan result (its "schedule" member).
ControlSchedule schedule_from_json(const Json& doc);
/// Picks the format from the content: JSON when it starts with '{'.
ControlSchedule load_schedule(const std::string& path);

/// {"schedule": {...}, "endpoint": [...], "residual": r, "iterations": n}
Json plan_result_to_json(const PlanResult& result);

Json vector_to_json(const Eigen::VectorXd& v);
Json matrix_to_json(const Eigen::MatrixXd& m);

/// Rows "t,norm,bound"; the bound column is empty when absent.
std::string order_estimate_to_csv(const OrderEstimate& estimate,
                                  const std::vector<std::optional<double>>& bounds = {});
/// {"t": [...], "norm": [...], "slope": s, "r_squared": r, "excluded": [...], "degenerate": b}
Json order_estimate_to_json(const OrderEstimate& estimate);
std::string remainder_reports_to_csv(const std::vector<RemainderReport>& reports);

} // namespace chronocalc::io
