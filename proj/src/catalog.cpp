#include "chronocalc/catalog.hpp"

#include "chronocalc/errors.hpp"

#include <algorithm>

namespace chronocalc::catalog {

namespace {

using Term = PolynomialMap::Term;
using Component = PolynomialMap::Component;

VectorField field3(Component x, Component y, Component z) {
    return VectorField::autonomous(PolynomialMap(3, {std::move(x), std::move(y), std::move(z)}));
}

} // namespace

VectorField zero(int dim) { return VectorField::zero(dim); }

VectorField constant(const Eigen::VectorXd& c) {
    return VectorField::autonomous(PolynomialMap::constant(static_cast<int>(c.size()), c));
}

VectorField linear(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DimensionError("linear field needs a square matrix");
    return VectorField::autonomous(PolynomialMap::linear(a));
}

VectorField rotation2d() {
    Eigen::Matrix2d a;
    a << 0.0, -1.0, 1.0, 0.0;
    return linear(a);
}

VectorField nilpotent2d() {
    Eigen::Matrix2d a;
    a << 0.0, 1.0, 0.0, 0.0;
    return linear(a);
}

VectorField heisenberg_v1() {
    return field3({Term{1.0, {0, 0, 0}}}, {}, {Term{-0.5, {0, 1, 0}}});
}

VectorField heisenberg_v2() {
    return field3({}, {Term{1.0, {0, 0, 0}}}, {Term{0.5, {1, 0, 0}}});
}

VectorField brockett_v1() {
    return field3({Term{1.0, {0, 0, 0}}}, {}, {Term{-1.0, {0, 1, 0}}});
}

VectorField brockett_v2() {
    return field3({}, {Term{1.0, {0, 0, 0}}}, {Term{1.0, {1, 0, 0}}});
}

VectorField unicycle_drive() {
    return VectorField::autonomous(PolynomialMap(4, {
                                                        {Term{1.0, {0, 0, 1, 0}}},
                                                        {Term{1.0, {0, 0, 0, 1}}},
                                                        {},
                                                        {},
                                                    }));
}

VectorField unicycle_steer() {
    return VectorField::autonomous(PolynomialMap(4, {
                                                        {},
                                                        {},
                                                        {Term{-1.0, {0, 0, 0, 1}}},
                                                        {Term{1.0, {0, 0, 1, 0}}},
                                                    }));
}

std::vector<VectorField> system(const std::string& name) {
    if (name == "zero") return {zero(2)};
    if (name == "constant") return {constant(Eigen::Vector2d(1.0, 0.0)), constant(Eigen::Vector2d(0.0, 1.0))};
    if (name == "linear") return {nilpotent2d()};
    if (name == "rotation2d") return {rotation2d()};
    if (name == "heisenberg") return {heisenberg_v1(), heisenberg_v2()};
    if (name == "unicycle") return {unicycle_drive(), unicycle_steer()};
    if (name == "brockett") return {brockett_v1(), brockett_v2()};
    throw ValidationError("unknown builtin system '" + name + "'");
}

std::vector<std::string> system_names() {
    return {"zero", "constant", "linear", "rotation2d", "heisenberg", "unicycle", "brockett"};
}

bool has_system(const std::string& name) {
    const auto names = system_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

} // namespace chronocalc::catalog
