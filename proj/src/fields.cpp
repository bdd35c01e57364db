#include "chronocalc/fields.hpp"

#include "chronocalc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace chronocalc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(const Eigen::VectorXd& v) {
    if (!v.allFinite()) throw ValidationError("chart point has non-finite coordinates");
}

void require_dim(int expected, int got, const char* what) {
    if (expected != got) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) + ", got " +
                             std::to_string(got));
    }
}

} // namespace

ChartPoint::ChartPoint(Eigen::VectorXd coords) : coords_(std::move(coords)) { require_finite(coords_); }

ChartPoint::ChartPoint(std::initializer_list<double> coords) : coords_(static_cast<Eigen::Index>(coords.size())) {
    Eigen::Index i = 0;
    for (double c : coords) coords_[i++] = c;
    require_finite(coords_);
}

Eigen::VectorXd Observable::operator()(const ChartPoint& q) const { return map(q.coords()); }

struct VectorField::Data {
    int dim;
    bool autonomous;
    int smoothness_order;
    std::vector<TimePiece> pieces;
};

VectorField VectorField::autonomous(PolynomialMap map, int smoothness_order) {
    if (map.dim_in() != map.dim_out()) throw DimensionError("a vector field must map R^n to R^n");
    if (smoothness_order < 1) throw ValidationError("smoothness order must be at least 1");
    const int n = map.dim_in();
    return VectorField(std::make_shared<const Data>(
        Data{n, true, smoothness_order, {TimePiece{-kInf, kInf, std::move(map)}}}));
}

VectorField VectorField::piecewise(std::vector<TimePiece> pieces, int smoothness_order) {
    if (pieces.empty()) throw ValidationError("piecewise field needs at least one piece");
    if (smoothness_order < 1) throw ValidationError("smoothness order must be at least 1");
    const int n = pieces.front().map.dim_in();
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        if (p.map.dim_in() != n || p.map.dim_out() != n) throw DimensionError("time pieces must all map R^n to R^n");
        if (!std::isfinite(p.begin) || !std::isfinite(p.end) || !(p.begin < p.end)) {
            throw ValidationError("time piece needs finite begin < end");
        }
        if (i > 0 && pieces[i - 1].end != p.begin) {
            throw ValidationError("time pieces must be ordered and contiguous");
        }
    }
    return VectorField(std::make_shared<const Data>(Data{n, false, smoothness_order, std::move(pieces)}));
}

VectorField VectorField::zero(int dim) { return autonomous(PolynomialMap(dim, dim)); }

VectorField VectorField::combine(double a, const VectorField& v, double b, const VectorField& w) {
    require_dim(v.dim(), w.dim(), "combining vector fields");
    const int order = std::min(v.smoothness_order(), w.smoothness_order());
    if (v.is_autonomous() && w.is_autonomous()) {
        return autonomous(v.piece_map(0) * a + w.piece_map(0) * b, order);
    }
    const auto [v0, v1] = v.time_window();
    const auto [w0, w1] = w.time_window();
    const double lo = std::max(v0, w0);
    const double hi = std::min(v1, w1);
    if (!(lo < hi)) throw TimeWindowError("combined fields have disjoint time windows");

    std::vector<double> cuts{lo};
    auto bv = v.breakpoints_between(lo, hi);
    auto bw = w.breakpoints_between(lo, hi);
    cuts.insert(cuts.end(), bv.begin(), bv.end());
    cuts.insert(cuts.end(), bw.begin(), bw.end());
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<TimePiece> pieces;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        pieces.push_back({cuts[i], cuts[i + 1], v.at_time(mid) * a + w.at_time(mid) * b});
    }
    return piecewise(std::move(pieces), order);
}

int VectorField::dim() const noexcept { return data_->dim; }
bool VectorField::is_autonomous() const noexcept { return data_->autonomous; }
int VectorField::smoothness_order() const noexcept { return data_->smoothness_order; }
const std::vector<TimePiece>& VectorField::pieces() const noexcept { return data_->pieces; }

std::pair<double, double> VectorField::time_window() const noexcept {
    return {data_->pieces.front().begin, data_->pieces.back().end};
}

bool VectorField::covers(double a, double b) const noexcept {
    const auto [lo, hi] = time_window();
    return std::min(a, b) >= lo && std::max(a, b) <= hi;
}

std::size_t VectorField::piece_index(double t) const {
    const auto& pieces = data_->pieces;
    if (!std::isfinite(t)) throw TimeWindowError("non-finite time");
    if (t < pieces.front().begin || t > pieces.back().end) {
        throw TimeWindowError("time " + std::to_string(t) + " outside the field's window [" +
                              std::to_string(pieces.front().begin) + ", " + std::to_string(pieces.back().end) + "]");
    }
    auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                               [](double value, const TimePiece& p) { return value < p.begin; });
    return static_cast<std::size_t>(std::distance(pieces.begin(), it)) - 1;
}

const PolynomialMap& VectorField::piece_map(std::size_t index) const {
    if (index >= data_->pieces.size()) throw IndexError("time piece index out of range");
    return data_->pieces[index].map;
}

std::vector<double> VectorField::breakpoints_between(double a, double b) const {
    std::vector<double> out;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    for (std::size_t i = 1; i < data_->pieces.size(); ++i) {
        const double s = data_->pieces[i].begin;
        if (s > lo && s < hi) out.push_back(s);
    }
    if (a > b) std::reverse(out.begin(), out.end());
    return out;
}

Eigen::VectorXd eval_field(const VectorField& field, double t, const ChartPoint& q) {
    require_dim(field.dim(), q.dim(), "eval_field");
    return field.at_time(t)(q.coords());
}

Eigen::MatrixXd field_jacobian(const VectorField& field, double t, const ChartPoint& q) {
    require_dim(field.dim(), q.dim(), "field_jacobian");
    return field.at_time(t).jacobian(q.coords());
}

Observable apply_lift(const VectorField& field, double t, const Observable& obs) {
    require_dim(field.dim(), obs.dim_in(), "apply_lift");
    if (obs.max_derivative_order < 1) {
        throw DefectExhaustedError("observable has no derivative order left to lift");
    }
    return {obs.map.directional_derivative(field.at_time(t)), obs.max_derivative_order - 1};
}

Observable iterate_lift(const std::vector<std::pair<VectorField, double>>& fields_seq, const Observable& obs) {
    if (static_cast<int>(fields_seq.size()) > obs.max_derivative_order) {
        throw DefectExhaustedError("lifting " + std::to_string(fields_seq.size()) +
                                   " times needs derivative order at least that, observable has " +
                                   std::to_string(obs.max_derivative_order));
    }
    Observable out = obs;
    for (const auto& [field, t] : fields_seq) out = apply_lift(field, t, out);
    return out;
}

LocallyBoundedWitness sample_witness(const VectorField& field, const Observable& obs, const ChartPoint& center,
                                     double radius, int order, double t_begin, double t_end, int samples,
                                     std::uint64_t seed) {
    require_dim(field.dim(), center.dim(), "sample_witness");
    if (!(radius > 0.0)) throw ValidationError("witness radius must be positive");
    if (order < 0 || order > obs.max_derivative_order) {
        throw DefectExhaustedError("witness order exceeds the observable's derivative order");
    }
    if (!field.covers(t_begin, t_end)) throw TimeWindowError("witness time interval outside the field's window");

    // Pieces active somewhere in [t_begin, t_end].
    std::vector<std::size_t> active;
    const double lo = std::min(t_begin, t_end);
    const double hi = std::max(t_begin, t_end);
    for (std::size_t i = 0; i < field.pieces().size(); ++i) {
        const auto& p = field.pieces()[i];
        if (p.end >= lo && p.begin <= hi) active.push_back(i);
    }

    // Every lifted observable V_{i_d} ... V_{i_1} phi over active piece tuples.
    std::vector<PolynomialMap> lifted{obs.map};
    std::vector<PolynomialMap> frontier{obs.map};
    for (int d = 1; d <= order; ++d) {
        std::vector<PolynomialMap> next;
        for (const auto& f : frontier) {
            for (std::size_t idx : active) next.push_back(f.directional_derivative(field.piece_map(idx)));
        }
        lifted.insert(lifted.end(), next.begin(), next.end());
        frontier = std::move(next);
    }

    const int n = center.dim();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double bound = 0.0;
    for (int s = 0; s <= samples; ++s) {
        Eigen::VectorXd x = center.coords();
        if (s > 0) {
            Eigen::VectorXd dir(n);
            for (int j = 0; j < n; ++j) dir[j] = gauss(rng);
            const double norm = dir.norm();
            if (norm > 0.0) x += dir / norm * radius * std::pow(unif(rng), 1.0 / n);
        }
        for (const auto& p : lifted) bound = std::max(bound, p(x).norm());
    }
    return {center, radius, bound, order};
}

} // namespace chronocalc
