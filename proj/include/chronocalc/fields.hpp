#pragma once

#include "chronocalc/polynomial.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <utility>
#include <vector>

namespace chronocalc {

/// A point of the coordinate chart. Always finite.
class ChartPoint {
public:
    explicit ChartPoint(Eigen::VectorXd coords);
    ChartPoint(std::initializer_list<double> coords);

    static ChartPoint origin(int dim) { return ChartPoint(Eigen::VectorXd::Zero(dim)); }

    const Eigen::VectorXd& coords() const noexcept { return coords_; }
    int dim() const noexcept { return static_cast<int>(coords_.size()); }
    double operator[](int i) const { return coords_[i]; }

private:
    Eigen::VectorXd coords_;
};

/// One polynomial piece of a time-dependent field, active on [begin, end).
struct TimePiece {
    double begin;
    double end;
    PolynomialMap map;
};

/// A vector field V_t on an n-dimensional chart, polynomial in space and
/// either autonomous or piecewise constant in time (finitely many breakpoints).
///
/// Immutable; copies share the underlying pieces.
class VectorField {
public:
    static VectorField autonomous(PolynomialMap map, int smoothness_order = 4);
    /// Pieces must be contiguous and ordered; together they form the time window.
    static VectorField piecewise(std::vector<TimePiece> pieces, int smoothness_order = 4);
    static VectorField zero(int dim);

    /// a V + b W over the common time window, splitting at the union of breakpoints.
    static VectorField combine(double a, const VectorField& v, double b, const VectorField& w);

    int dim() const noexcept;
    bool is_autonomous() const noexcept;
    int smoothness_order() const noexcept;
    std::pair<double, double> time_window() const noexcept;
    const std::vector<TimePiece>& pieces() const noexcept;

    /// Index of the piece active at t. At an interior breakpoint the later piece
    /// wins; the right end of the window belongs to the last piece.
    std::size_t piece_index(double t) const;
    const PolynomialMap& at_time(double t) const { return piece_map(piece_index(t)); }
    const PolynomialMap& piece_map(std::size_t index) const;

    /// Breakpoints strictly between a and b, ordered from a towards b.
    std::vector<double> breakpoints_between(double a, double b) const;
    bool covers(double a, double b) const noexcept;

private:
    struct Data;
    explicit VectorField(std::shared_ptr<const Data> data) : data_(std::move(data)) {}
    std::shared_ptr<const Data> data_;
};

/// A polynomial observable phi : R^n -> R^e with a declared derivative budget.
struct Observable {
    PolynomialMap map;
    int max_derivative_order = 4;

    static Observable identity(int dim, int order = 4) { return {PolynomialMap::identity(dim), order}; }
    static Observable coordinate(int dim, int index, int order = 4) {
        return {PolynomialMap::coordinate(dim, index), order};
    }

    int dim_in() const noexcept { return map.dim_in(); }
    int dim_out() const noexcept { return map.dim_out(); }
    Eigen::VectorXd operator()(const ChartPoint& q) const;
};

/// Sampled local bound C on a ball: C >= sup |(V^ o ... o V^)(phi)| for every
/// lift depth 0..order. A sampled estimate, not a certified bound.
struct LocallyBoundedWitness {
    ChartPoint center;
    double radius;
    double bound_C;
    int order;
};

Eigen::VectorXd eval_field(const VectorField& field, double t, const ChartPoint& q);
Eigen::MatrixXd field_jacobian(const VectorField& field, double t, const ChartPoint& q);

/// phi -> phi' V_t, consuming one derivative order.
Observable apply_lift(const VectorField& field, double t, const Observable& obs);

/// Lifts applied in list order: the first entry acts on obs first.
Observable iterate_lift(const std::vector<std::pair<VectorField, double>>& fields_seq, const Observable& obs);

/// Builds a witness by sampling `samples` uniform points of the ball (plus its
/// center) and every time piece of the field inside [t_begin, t_end].
LocallyBoundedWitness sample_witness(const VectorField& field, const Observable& obs, const ChartPoint& center,
                                     double radius, int order, double t_begin, double t_end, int samples = 2000,
                                     std::uint64_t seed = 7);

} // namespace chronocalc
