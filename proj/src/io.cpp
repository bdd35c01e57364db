#include "chronocalc/io.hpp"

#include "chronocalc/catalog.hpp"
#include "chronocalc/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace chronocalc::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw ParseError("");
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot read " + what + " from '" + s + "'");
    }
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw ParseError("");
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot read " + what + " from '" + s + "'");
    }
}

template <class T>
T get(const Json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad value for '") + key + "': " + e.what());
    }
}

PolynomialMap polynomial_from_json(const Json& components, int dim_in) {
    if (!components.is_array()) throw ParseError("'components' must be an array");
    std::vector<PolynomialMap::Component> comps;
    for (const auto& c : components) {
        if (!c.is_array()) throw ParseError("each component must be a list of terms");
        PolynomialMap::Component comp;
        for (const auto& term : c) {
            comp.push_back({get<double>(term, "coef"), get<std::vector<int>>(term, "exps")});
            if (static_cast<int>(comp.back().exps.size()) != dim_in) {
                throw ParseError("term exponent tuple has the wrong length");
            }
        }
        comps.push_back(std::move(comp));
    }
    return PolynomialMap(dim_in, std::move(comps));
}

Json polynomial_to_json(const PolynomialMap& p) {
    Json comps = Json::array();
    for (const auto& c : p.components()) {
        Json terms = Json::array();
        for (const auto& t : c) terms.push_back({{"coef", t.coef}, {"exps", t.exps}});
        comps.push_back(std::move(terms));
    }
    return comps;
}

} // namespace

ChartPoint parse_point(const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.empty()) throw ParseError("empty point");
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i], "coordinate");
    return ChartPoint(v);
}

VectorField field_from_json(const Json& doc) {
    const int dim = get<int>(doc, "dim");
    if (dim < 1) throw ParseError("field dimension must be positive");
    const int order = doc.contains("smoothness_order") ? get<int>(doc, "smoothness_order") : 4;
    if (doc.contains("time_pieces")) {
        std::vector<TimePiece> pieces;
        for (const auto& p : doc.at("time_pieces")) {
            pieces.push_back({get<double>(p, "begin"), get<double>(p, "end"), polynomial_from_json(p.at("components"), dim)});
        }
        return VectorField::piecewise(std::move(pieces), order);
    }
    if (!doc.contains("components")) throw ParseError("field needs 'components' or 'time_pieces'");
    return VectorField::autonomous(polynomial_from_json(doc.at("components"), dim), order);
}

Json field_to_json(const VectorField& field) {
    Json doc{{"dim", field.dim()}};
    if (field.is_autonomous()) {
        doc["components"] = polynomial_to_json(field.piece_map(0));
    } else {
        Json pieces = Json::array();
        for (const auto& p : field.pieces()) {
            pieces.push_back({{"begin", p.begin}, {"end", p.end}, {"components", polynomial_to_json(p.map)}});
        }
        doc["time_pieces"] = std::move(pieces);
    }
    doc["smoothness_order"] = field.smoothness_order();
    return doc;
}

std::vector<VectorField> system_from_json(const Json& doc) {
    if (!doc.is_object()) throw ParseError("system document must be a JSON object");
    if (!doc.contains("fields")) return {field_from_json(doc)};
    std::vector<VectorField> out;
    for (const auto& f : doc.at("fields")) out.push_back(field_from_json(f));
    if (out.empty()) throw ParseError("system has no fields");
    for (const auto& f : out) {
        if (f.dim() != out.front().dim()) throw DimensionError("system fields live on different spaces");
    }
    return out;
}

Json system_to_json(const std::vector<VectorField>& fields) {
    Json arr = Json::array();
    for (const auto& f : fields) arr.push_back(field_to_json(f));
    return Json{{"fields", std::move(arr)}};
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what());
    }
}

std::vector<VectorField> load_system(const std::string& name_or_path) {
    if (catalog::has_system(name_or_path)) return catalog::system(name_or_path);
    if (!std::filesystem::exists(name_or_path)) {
        std::string names;
        for (const auto& n : catalog::system_names()) names += (names.empty() ? "" : ", ") + n;
        throw ValidationError("unknown system '" + name_or_path + "' (builtins: " + names + ")");
    }
    return system_from_json(read_json_file(name_or_path));
}

Observable observable_from_json(const Json& doc) {
    const int dim = get<int>(doc, "dim");
    if (dim < 1) throw ParseError("observable dimension must be positive");
    const int order = doc.contains("max_derivative_order") ? get<int>(doc, "max_derivative_order") : 4;
    if (!doc.contains("components")) throw ParseError("observable needs 'components'");
    return Observable{polynomial_from_json(doc.at("components"), dim), order};
}

Observable load_observable(const std::string& spec, int dim) {
    if (spec == "identity") return Observable::identity(dim);
    if (spec.size() > 1 && spec[0] == 'x' && spec.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int i = parse_int(spec.substr(1), "coordinate index");
        if (i < 1 || i > dim) throw IndexError("observable " + spec + " is outside R^" + std::to_string(dim));
        return Observable::coordinate(dim, i - 1);
    }
    Observable obs = observable_from_json(read_json_file(spec));
    if (obs.dim_in() != dim) throw DimensionError("observable dimension does not match the system");
    return obs;
}

std::string schedule_to_csv(const ControlSchedule& schedule) {
    std::string out = "segment,field_index,sign,duration\n";
    const auto& segs = schedule.segments();
    for (std::size_t i = 0; i < segs.size(); ++i) {
        out += std::to_string(i + 1) + "," + std::to_string(segs[i].field_index + 1) + "," +
               std::to_string(segs[i].sign) + "," + format_double(segs[i].duration) + "\n";
    }
    return out;
}

ControlSchedule schedule_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "segment,field_index,sign,duration") {
        throw ParseError("schedule CSV must start with the header segment,field_index,sign,duration");
    }
    std::vector<ControlSegment> segs;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split(trim(line), ',');
        if (cells.size() != 4) throw ParseError("schedule row needs 4 cells: '" + line + "'");
        segs.push_back({parse_int(cells[1], "field_index") - 1, parse_int(cells[2], "sign"),
                        parse_double(cells[3], "duration")});
    }
    return ControlSchedule(std::move(segs));
}

Json schedule_to_json(const ControlSchedule& schedule) {
    Json segs = Json::array();
    for (const auto& s : schedule.segments()) {
        segs.push_back({{"field_index", s.field_index + 1}, {"sign", s.sign}, {"duration", s.duration}});
    }
    return Json{{"segments", std::move(segs)}};
}

ControlSchedule schedule_from_json(const Json& doc) {
    if (doc.is_object() && doc.contains("schedule")) return schedule_from_json(doc.at("schedule"));
    if (!doc.is_object() || !doc.contains("segments")) throw ParseError("schedule document needs 'segments'");
    std::vector<ControlSegment> segs;
    for (const auto& s : doc.at("segments")) {
        segs.push_back({get<int>(s, "field_index") - 1, get<int>(s, "sign"), get<double>(s, "duration")});
    }
    return ControlSchedule(std::move(segs));
}

ControlSchedule load_schedule(const std::string& path) {
    const std::string text = read_text_file(path);
    if (trim(text).rfind('{', 0) == 0) {
        try {
            return schedule_from_json(Json::parse(text));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("'" + path + "' is not valid JSON: " + e.what());
        }
    }
    return schedule_from_csv(text);
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json arr = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
    return rows;
}

Json plan_result_to_json(const PlanResult& result) {
    return Json{{"schedule", schedule_to_json(result.schedule)},
                {"endpoint", vector_to_json(result.endpoint.coords())},
                {"residual", result.residual},
                {"iterations", result.iterations}};
}

std::string order_estimate_to_csv(const OrderEstimate& estimate, const std::vector<std::optional<double>>& bounds) {
    std::string out = "t,norm,bound\n";
    for (std::size_t i = 0; i < estimate.t_grid.size(); ++i) {
        out += format_double(estimate.t_grid[i]) + "," + format_double(estimate.norms[i]) + ",";
        if (i < bounds.size() && bounds[i]) out += format_double(*bounds[i]);
        out += "\n";
    }
    return out;
}

Json order_estimate_to_json(const OrderEstimate& estimate) {
    return Json{{"t", estimate.t_grid},
                {"norm", estimate.norms},
                {"slope", estimate.degenerate ? Json(nullptr) : Json(estimate.fitted_slope)},
                {"r_squared", estimate.degenerate ? Json(nullptr) : Json(estimate.r_squared)},
                {"excluded", estimate.excluded},
                {"degenerate", estimate.degenerate}};
}

std::string remainder_reports_to_csv(const std::vector<RemainderReport>& reports) {
    std::string out = "t,norm,bound\n";
    for (const auto& r : reports) {
        out += format_double(r.t) + "," + format_double(r.remainder_norm) + ",";
        if (r.bound) out += format_double(*r.bound);
        out += "\n";
    }
    return out;
}

} // namespace chronocalc::io
