#pragma once

// Density expressions: a small arithmetic language over y1..yd and r = |y|.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?            (right associative)
//   primary := number | 'r' | 'y'<k> | func '(' expr ')'
//            | 'ind' '(' expr ('<' | '<=') expr ')' | '(' expr ')'
//   func    := exp | log | sin | cos | abs | sqrt
//
// Expressions are kept as a tree for printing and inspection and compiled
// to postfix code for evaluation.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hpl/core.hpp"

namespace hpl {

class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
        : Error(make_message(offset, expected, found)), offset_(offset), expected_(std::move(expected)) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
    [[nodiscard]] const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    static std::string make_message(std::size_t offset, const std::vector<std::string>& expected,
                                    const std::string& found) {
        std::string m = "parse error at offset " + std::to_string(offset) + ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) m += (i ? ", " : "") + expected[i];
        m += "; found " + found;
        return m;
    }
    std::size_t offset_;
    std::vector<std::string> expected_;
};

enum class Op {
    number, var_y, var_r, neg, add, sub, mul, div, pow,
    f_exp, f_log, f_sin, f_cos, f_abs, f_sqrt, ind_lt, ind_le
};

struct Node {
    Op op = Op::number;
    double value = 0.0;  // literal value
    int index = 0;       // 0-based coordinate index for var_y
    std::shared_ptr<const Node> lhs, rhs;
};

using NodePtr = std::shared_ptr<const Node>;

namespace detail {

[[nodiscard]] inline const char* function_name(Op op) {
    switch (op) {
        case Op::f_exp: return "exp";
        case Op::f_log: return "log";
        case Op::f_sin: return "sin";
        case Op::f_cos: return "cos";
        case Op::f_abs: return "abs";
        case Op::f_sqrt: return "sqrt";
        default: return "";
    }
}

[[nodiscard]] inline bool is_function(Op op) { return *function_name(op) != '\0'; }

[[nodiscard]] inline int precedence(const Node& n) {
    switch (n.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        case Op::number: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
        default: return 5;
    }
}

inline void print_node(std::ostream& os, const Node& n);

inline void print_child(std::ostream& os, const Node& child, bool parens) {
    if (parens) os << '(';
    print_node(os, child);
    if (parens) os << ')';
}

inline void print_node(std::ostream& os, const Node& n) {
    switch (n.op) {
        case Op::number:
            if (std::signbit(n.value)) os << "(-" << format_double(-n.value) << ')';
            else os << format_double(n.value);
            return;
        case Op::var_y: os << 'y' << (n.index + 1); return;
        case Op::var_r: os << 'r'; return;
        case Op::neg:
            os << '-';
            print_child(os, *n.lhs, precedence(*n.lhs) < 3);
            return;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: {
            const int p = precedence(n);
            const char sym = n.op == Op::add ? '+' : n.op == Op::sub ? '-' : n.op == Op::mul ? '*' : '/';
            print_child(os, *n.lhs, precedence(*n.lhs) < p);
            os << ' ' << sym << ' ';
            print_child(os, *n.rhs, precedence(*n.rhs) <= p);
            return;
        }
        case Op::pow:
            print_child(os, *n.lhs, precedence(*n.lhs) <= 4);
            os << '^';
            print_child(os, *n.rhs, precedence(*n.rhs) < 3);
            return;
        case Op::ind_lt:
        case Op::ind_le:
            os << "ind(";
            print_node(os, *n.lhs);
            os << (n.op == Op::ind_lt ? " < " : " <= ");
            print_node(os, *n.rhs);
            os << ')';
            return;
        default:
            os << function_name(n.op) << '(';
            print_node(os, *n.lhs);
            os << ')';
            return;
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : s_(text) {}

    NodePtr parse() {
        skip();
        if (pos_ >= s_.size()) fail({"expression"});
        NodePtr e = expr();
        skip();
        if (pos_ < s_.size()) fail({"operator", "end of input"});
        return e;
    }

private:
    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string found = pos_ >= s_.size() ? "end of input" : "'" + std::string(1, s_[pos_]) + "'";
        throw ParseError(pos_, std::move(expected), found);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail({std::string("'") + c + "'"});
    }

    static NodePtr make(Op op, NodePtr l = nullptr, NodePtr r = nullptr) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            if (accept('+')) lhs = make(Op::add, lhs, term());
            else if (accept('-')) lhs = make(Op::sub, lhs, term());
            else return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::mul, lhs, unary());
            else if (accept('/')) lhs = make(Op::div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Op::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail({"number", "variable", "function", "'('", "'-'"});
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string_view word = s_.substr(start, pos_ - start);
            if (word == "r") return make(Op::var_r);
            if (word.size() >= 2 && word[0] == 'y' && std::isdigit(static_cast<unsigned char>(word[1]))) {
                int k = 0;
                for (std::size_t i = 1; i < word.size(); ++i) {
                    if (!std::isdigit(static_cast<unsigned char>(word[i]))) {
                        pos_ = start;
                        fail({"variable"});
                    }
                    k = k * 10 + (word[i] - '0');
                    if (k > kMaxDim) break;
                }
                if (k < 1 || k > kMaxDim) {
                    pos_ = start;
                    fail({"y1..y" + std::to_string(kMaxDim)});
                }
                auto n = std::make_shared<Node>();
                n->op = Op::var_y;
                n->index = k - 1;
                return n;
            }
            if (word == "ind") {
                expect('(');
                NodePtr l = expr();
                Op op = Op::ind_lt;
                if (accept('<')) {
                    if (pos_ < s_.size() && s_[pos_] == '=') {
                        ++pos_;
                        op = Op::ind_le;
                    }
                } else {
                    fail({"'<'", "'<='"});
                }
                NodePtr r = expr();
                expect(')');
                return make(op, l, r);
            }
            static const std::pair<std::string_view, Op> funcs[] = {
                {"exp", Op::f_exp}, {"log", Op::f_log}, {"sin", Op::f_sin},
                {"cos", Op::f_cos}, {"abs", Op::f_abs}, {"sqrt", Op::f_sqrt}};
            for (const auto& [name, op] : funcs) {
                if (word == name) {
                    expect('(');
                    NodePtr arg = expr();
                    expect(')');
                    return make(op, arg);
                }
            }
            pos_ = start;
            fail({"number", "variable", "function"});
        }
        fail({"number", "variable", "function", "'('", "'-'"});
    }

    NodePtr number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) fail({"digit"});
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            const std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        auto nd = std::make_shared<Node>();
        nd->op = Op::number;
        nd->value = parse_double(s_.substr(start, pos_ - start));
        return nd;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

struct Instr {
    Op op;
    double value;
    int index;
};

}  // namespace detail

/// A parsed, compiled density expression. Cheap to copy (shared tree and
/// shared code).
class DensityExpr {
public:
    DensityExpr() : DensityExpr(constant(0.0).root_) {}
    explicit DensityExpr(NodePtr root) : root_(std::move(root)) { compile(); }

    static DensityExpr parse(std::string_view text) { return DensityExpr(detail::Parser(text).parse()); }

    static DensityExpr constant(double v) {
        auto n = std::make_shared<Node>();
        n->op = Op::number;
        n->value = v;
        return DensityExpr(n);
    }
    static DensityExpr radius() {
        auto n = std::make_shared<Node>();
        n->op = Op::var_r;
        return DensityExpr(n);
    }
    static DensityExpr coordinate(int index) {
        auto n = std::make_shared<Node>();
        n->op = Op::var_y;
        n->index = index;
        return DensityExpr(n);
    }

    [[nodiscard]] static DensityExpr binary(Op op, const DensityExpr& a, const DensityExpr& b) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->lhs = a.root_;
        n->rhs = b.root_;
        return DensityExpr(n);
    }
    [[nodiscard]] static DensityExpr unary(Op op, const DensityExpr& a) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->lhs = a.root_;
        return DensityExpr(n);
    }

    friend DensityExpr operator+(const DensityExpr& a, const DensityExpr& b) { return binary(Op::add, a, b); }
    friend DensityExpr operator-(const DensityExpr& a, const DensityExpr& b) { return binary(Op::sub, a, b); }
    friend DensityExpr operator*(const DensityExpr& a, const DensityExpr& b) { return binary(Op::mul, a, b); }
    friend DensityExpr operator/(const DensityExpr& a, const DensityExpr& b) { return binary(Op::div, a, b); }

    [[nodiscard]] const NodePtr& root() const noexcept { return root_; }

    [[nodiscard]] std::string print() const {
        std::ostringstream os;
        detail::print_node(os, *root_);
        return os.str();
    }

    /// Value at y; r is |y| (passed in so callers working in polar
    /// coordinates do not recompute it).
    [[nodiscard]] double eval(const double* y, double r) const {
        double stack_buf[64];
        stack_buf[0] = 0.0;  // every program pushes first; this only quiets -Wmaybe-uninitialized
        std::vector<double> heap_buf;
        double* st = stack_buf;
        if (max_depth_ > 64) {
            heap_buf.resize(static_cast<std::size_t>(max_depth_));
            st = heap_buf.data();
        }
        int sp = 0;
        for (const auto& in : code_) {
            switch (in.op) {
                case Op::number: st[sp++] = in.value; break;
                case Op::var_y: st[sp++] = y[in.index]; break;
                case Op::var_r: st[sp++] = r; break;
                case Op::neg: st[sp - 1] = -st[sp - 1]; break;
                case Op::add: --sp; st[sp - 1] += st[sp]; break;
                case Op::sub: --sp; st[sp - 1] -= st[sp]; break;
                case Op::mul: --sp; st[sp - 1] *= st[sp]; break;
                case Op::div: --sp; st[sp - 1] /= st[sp]; break;
                case Op::pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
                case Op::f_exp: st[sp - 1] = std::exp(st[sp - 1]); break;
                case Op::f_log: st[sp - 1] = std::log(st[sp - 1]); break;
                case Op::f_sin: st[sp - 1] = std::sin(st[sp - 1]); break;
                case Op::f_cos: st[sp - 1] = std::cos(st[sp - 1]); break;
                case Op::f_abs: st[sp - 1] = std::abs(st[sp - 1]); break;
                case Op::f_sqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
                case Op::ind_lt: --sp; st[sp - 1] = st[sp - 1] < st[sp] ? 1.0 : 0.0; break;
                case Op::ind_le: --sp; st[sp - 1] = st[sp - 1] <= st[sp] ? 1.0 : 0.0; break;
            }
        }
        return st[0];
    }

    [[nodiscard]] double eval(const Vec& y) const { return eval(y.begin(), norm(y)); }

    /// Largest coordinate index used plus one (0 when only r appears).
    [[nodiscard]] int coordinates_used() const noexcept { return coords_used_; }

    /// True when the expression depends on y only through r.
    [[nodiscard]] bool is_radial() const noexcept { return coords_used_ == 0; }

    /// Thresholds c of indicator subexpressions ind(r < c) / ind(r <= c) with
    /// constant c: radii where a radial expression may jump.
    [[nodiscard]] std::vector<double> radial_thresholds() const {
        std::set<double> out;
        collect_thresholds(*root_, out);
        return {out.begin(), out.end()};
    }

    /// True when any indicator's comparison involves a coordinate or a
    /// non-constant right-hand side (jumps that radial_thresholds misses).
    [[nodiscard]] bool has_general_indicators() const { return general_ind(*root_); }

    /// Evaluates a constant subtree; nullopt when it depends on variables.
    [[nodiscard]] static std::optional<double> constant_value(const Node& n) {
        switch (n.op) {
            case Op::number: return n.value;
            case Op::var_y:
            case Op::var_r: return std::nullopt;
            default: break;
        }
        const auto l = n.lhs ? constant_value(*n.lhs) : std::optional<double>(0.0);
        if (!l) return std::nullopt;
        std::optional<double> r = 0.0;
        if (n.rhs) {
            r = constant_value(*n.rhs);
            if (!r) return std::nullopt;
        }
        const DensityExpr e(std::make_shared<Node>(n));
        return e.eval(nullptr, 0.0);
    }

private:
    void compile() {
        code_.clear();
        coords_used_ = 0;
        int depth = 0;
        max_depth_ = 0;
        emit(*root_, depth);
    }

    void emit(const Node& n, int& depth) {
        if (n.lhs) emit(*n.lhs, depth);
        if (n.rhs) emit(*n.rhs, depth);
        if (n.op == Op::var_y) coords_used_ = std::max(coords_used_, n.index + 1);
        code_.push_back({n.op, n.value, n.index});
        if (!n.lhs && !n.rhs) ++depth;
        else if (n.rhs) --depth;
        max_depth_ = std::max(max_depth_, depth);
    }

    static void collect_thresholds(const Node& n, std::set<double>& out) {
        if ((n.op == Op::ind_lt || n.op == Op::ind_le) && n.lhs->op == Op::var_r) {
            if (auto c = constant_value(*n.rhs); c && std::isfinite(*c) && *c > 0.0) out.insert(*c);
        }
        if (n.lhs) collect_thresholds(*n.lhs, out);
        if (n.rhs) collect_thresholds(*n.rhs, out);
    }

    static bool general_ind(const Node& n) {
        if (n.op == Op::ind_lt || n.op == Op::ind_le) {
            if (n.lhs->op != Op::var_r || !constant_value(*n.rhs)) return true;
        }
        return (n.lhs && general_ind(*n.lhs)) || (n.rhs && general_ind(*n.rhs));
    }

    NodePtr root_;
    std::vector<detail::Instr> code_;
    int coords_used_ = 0;
    int max_depth_ = 0;
};

[[nodiscard]] inline DensityExpr parse_density(std::string_view text) { return DensityExpr::parse(text); }

/// Structural equality of two expression trees.
[[nodiscard]] inline bool same_tree(const Node& a, const Node& b) {
    if (a.op != b.op || a.index != b.index) return false;
    if (a.op == Op::number && std::bit_cast<std::uint64_t>(a.value) != std::bit_cast<std::uint64_t>(b.value))
        return false;
    if (static_cast<bool>(a.lhs) != static_cast<bool>(b.lhs) || static_cast<bool>(a.rhs) != static_cast<bool>(b.rhs))
        return false;
    return (!a.lhs || same_tree(*a.lhs, *b.lhs)) && (!a.rhs || same_tree(*a.rhs, *b.rhs));
}

}  // namespace hpl
