#pragma once

#include <Eigen/Dense>

#include <vector>

namespace chronocalc {

/// A polynomial map R^dim_in -> R^dim_out stored as a sparse list of monomials
/// per output component.
///
/// Components are kept in normal form: terms sorted by exponent tuple, like
/// terms merged, exact-zero coefficients dropped. Two maps that evaluate
/// identically with the same coefficients therefore compare equal with
/// operator==, which is what the "exact as polynomials" identities rely on.
class PolynomialMap {
public:
    struct Term {
        double coef = 0.0;
        std::vector<int> exps;

        bool operator==(const Term&) const = default;
    };
    using Component = std::vector<Term>;

    /// The zero map.
    PolynomialMap(int dim_in, int dim_out);
    /// Validates exponent tuples and normalizes every component.
    PolynomialMap(int dim_in, std::vector<Component> components);

    static PolynomialMap constant(int dim_in, const Eigen::VectorXd& value);
    /// x -> A x
    static PolynomialMap linear(const Eigen::MatrixXd& a);
    static PolynomialMap identity(int dim);
    /// Scalar map x -> x_index.
    static PolynomialMap coordinate(int dim, int index);

    int dim_in() const noexcept { return dim_in_; }
    int dim_out() const noexcept { return static_cast<int>(components_.size()); }
    const std::vector<Component>& components() const noexcept { return components_; }

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
    /// Entry (r, c) = d(component r) / d x_c, evaluated at x.
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

    /// Exact partial derivative with respect to x_var.
    PolynomialMap partial(int var) const;
    /// x -> P'(x) v(x), the derivative of this map along the field v.
    PolynomialMap directional_derivative(const PolynomialMap& v) const;

    /// Scalar polynomial x -> component `index`.
    PolynomialMap component(int index) const;
    /// Pointwise product of two scalar (dim_out == 1) polynomials.
    static PolynomialMap scalar_product(const PolynomialMap& a, const PolynomialMap& b);

    PolynomialMap operator+(const PolynomialMap& other) const;
    PolynomialMap operator-(const PolynomialMap& other) const;
    PolynomialMap operator-() const;
    PolynomialMap operator*(double s) const;
    friend PolynomialMap operator*(double s, const PolynomialMap& p) { return p * s; }

    bool operator==(const PolynomialMap& other) const = default;

    bool is_zero() const noexcept;
    int degree() const noexcept;
    double max_abs_coefficient() const noexcept;

private:
    int dim_in_;
    std::vector<Component> components_;
};

} // namespace chronocalc
