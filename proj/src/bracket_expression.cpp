#include "chronocalc/errors.hpp"
#include "chronocalc/liealg.hpp"

#include <algorithm>
#include <cctype>

namespace chronocalc {

struct BracketExpression::Node {
    int index = -1;                          // leaf only
    std::vector<BracketExpression> children; // empty for a leaf, {left, right} otherwise
    int degree = 1;
    int max_index = -1;
};

BracketExpression BracketExpression::leaf(int field_index) {
    if (field_index < 0) throw IndexError("field index must be nonnegative");
    auto node = std::make_shared<Node>();
    node->index = field_index;
    node->max_index = field_index;
    return BracketExpression(std::move(node));
}

BracketExpression BracketExpression::pair(BracketExpression left, BracketExpression right) {
    auto node = std::make_shared<Node>();
    node->degree = left.degree() + right.degree();
    node->max_index = std::max(left.max_field_index(), right.max_field_index());
    node->children = {std::move(left), std::move(right)};
    return BracketExpression(std::move(node));
}

bool BracketExpression::is_leaf() const noexcept { return node_->children.empty(); }

int BracketExpression::field_index() const {
    if (!is_leaf()) throw ValidationError("field_index of a bracket pair");
    return node_->index;
}

const BracketExpression& BracketExpression::left() const {
    if (is_leaf()) throw ValidationError("left child of a leaf");
    return node_->children[0];
}

const BracketExpression& BracketExpression::right() const {
    if (is_leaf()) throw ValidationError("right child of a leaf");
    return node_->children[1];
}

int BracketExpression::degree() const noexcept { return node_->degree; }
int BracketExpression::max_field_index() const noexcept { return node_->max_index; }

std::strong_ordering BracketExpression::operator<=>(const BracketExpression& other) const {
    if (node_ == other.node_) return std::strong_ordering::equal;
    if (auto c = degree() <=> other.degree(); c != 0) return c;
    if (is_leaf() || other.is_leaf()) {
        // Equal degree: both are leaves.
        return field_index() <=> other.field_index();
    }
    if (auto c = left() <=> other.left(); c != 0) return c;
    return right() <=> other.right();
}

bool BracketExpression::is_canonical() const {
    if (is_leaf()) return true;
    return left() < right() && left().is_canonical() && right().is_canonical();
}

std::string BracketExpression::to_string() const {
    if (is_leaf()) return "V" + std::to_string(field_index() + 1);
    return "[" + left().to_string() + "," + right().to_string() + "]";
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    BracketExpression parse_all() {
        BracketExpression e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing characters");
        return e;
    }

private:
    BracketExpression parse_expr() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        const char c = text_[pos_];
        if (c == '[') {
            ++pos_;
            BracketExpression l = parse_expr();
            expect(',');
            BracketExpression r = parse_expr();
            expect(']');
            return BracketExpression::pair(std::move(l), std::move(r));
        }
        if (c == 'V' || c == 'v') {
            ++pos_;
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("expected a field number after 'V'");
            if (pos_ - start > 6) fail("field number too large");
            const int n = std::stoi(std::string(text_.substr(start, pos_ - start)));
            if (n < 1) fail("field numbers start at V1");
            return BracketExpression::leaf(n - 1);
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw ParseError("bracket expression '" + std::string(text_) + "': " + why + " at position " +
                         std::to_string(pos_));
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

BracketExpression BracketExpression::parse(std::string_view text) { return Parser(text).parse_all(); }

std::vector<BracketExpression> enumerate_canonical_brackets(int num_fields, int max_degree) {
    if (num_fields < 1) throw ValidationError("need at least one generator");
    if (max_degree < 1) throw ValidationError("max_degree must be at least 1");
    std::vector<std::vector<BracketExpression>> by_degree(static_cast<std::size_t>(max_degree) + 1);
    for (int i = 0; i < num_fields; ++i) by_degree[1].push_back(BracketExpression::leaf(i));
    for (int d = 2; d <= max_degree; ++d) {
        auto& out = by_degree[static_cast<std::size_t>(d)];
        for (int dl = 1; dl <= d / 2; ++dl) {
            for (const auto& l : by_degree[static_cast<std::size_t>(dl)]) {
                for (const auto& r : by_degree[static_cast<std::size_t>(d - dl)]) {
                    if (l < r) out.push_back(BracketExpression::pair(l, r));
                }
            }
        }
        std::sort(out.begin(), out.end());
    }
    std::vector<BracketExpression> all;
    for (auto& level : by_degree) all.insert(all.end(), level.begin(), level.end());
    return all;
}

FlowBracketProgram compile_flow_bracket(const BracketExpression& expr, const std::vector<int>& time_exponents) {
    if (expr.is_leaf()) {
        const auto i = static_cast<std::size_t>(expr.field_index());
        int exponent = 1;
        if (!time_exponents.empty()) {
            if (i >= time_exponents.size()) throw IndexError("no time exponent for field V" + std::to_string(i + 1));
            exponent = time_exponents[i];
            if (exponent < 1) throw ValidationError("time exponents must be positive");
        }
        return {FlowSegment{expr.field_index(), +1, exponent}};
    }
    const FlowBracketProgram a = compile_flow_bracket(expr.left(), time_exponents);
    const FlowBracketProgram b = compile_flow_bracket(expr.right(), time_exponents);
    FlowBracketProgram out;
    out.reserve(2 * (a.size() + b.size()));
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    const auto ai = invert_program(a);
    const auto bi = invert_program(b);
    out.insert(out.end(), ai.begin(), ai.end());
    out.insert(out.end(), bi.begin(), bi.end());
    return out;
}

FlowBracketProgram invert_program(const FlowBracketProgram& program) {
    FlowBracketProgram out(program.rbegin(), program.rend());
    for (auto& s : out) s.sign = -s.sign;
    return out;
}

} // namespace chronocalc
