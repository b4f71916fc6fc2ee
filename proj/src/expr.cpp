#include "hilfer/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstddef>

namespace hilfer::expr {

struct ExprNode {
    enum class Op { constant, variable, add, sub, mul, div, pow, neg, exp, sin, cos, ln };
    Op op;
    double value = 0.0;
    int var = 0;
    std::shared_ptr<const ExprNode> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

double eval_node(const ExprNode& n, const Env& e) {
    using Op = ExprNode::Op;
    switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable:
        switch (n.var) {
        case Expression::kT: return e.t;
        case Expression::kS: return e.s;
        case Expression::kU: return e.u;
        case Expression::kX1: return e.x1;
        case Expression::kX2: return e.x2;
        default: return e.x3;
        }
    case Op::add: return eval_node(*n.a, e) + eval_node(*n.b, e);
    case Op::sub: return eval_node(*n.a, e) - eval_node(*n.b, e);
    case Op::mul: return eval_node(*n.a, e) * eval_node(*n.b, e);
    case Op::div: return eval_node(*n.a, e) / eval_node(*n.b, e);
    case Op::pow: return std::pow(eval_node(*n.a, e), eval_node(*n.b, e));
    case Op::neg: return -eval_node(*n.a, e);
    case Op::exp: return std::exp(eval_node(*n.a, e));
    case Op::sin: return std::sin(eval_node(*n.a, e));
    case Op::cos: return std::cos(eval_node(*n.a, e));
    case Op::ln: return std::log(eval_node(*n.a, e));
    }
    return 0.0;
}

class Parser {
public:
    Parser(const std::string& src) : src_(src) {}

    NodePtr run(unsigned& mask) {
        NodePtr n = parse_expr();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing characters");
        mask = mask_;
        return n;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
    unsigned mask_ = 0;

    [[noreturn]] void fail(const std::string& why) const {
        throw DomainError("expression: " + why + " at position " +
                          std::to_string(pos_) + " in \"" + src_ + "\"");
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool match(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr parse_expr() {
        NodePtr n = parse_term();
        for (;;) {
            if (match('+')) n = make({ExprNode::Op::add, 0, 0, n, parse_term()});
            else if (match('-')) n = make({ExprNode::Op::sub, 0, 0, n, parse_term()});
            else return n;
        }
    }

    NodePtr parse_term() {
        NodePtr n = parse_factor();
        for (;;) {
            if (match('*')) n = make({ExprNode::Op::mul, 0, 0, n, parse_factor()});
            else if (match('/')) n = make({ExprNode::Op::div, 0, 0, n, parse_factor()});
            else return n;
        }
    }

    NodePtr parse_factor() {
        if (match('-')) return make({ExprNode::Op::neg, 0, 0, parse_factor(), nullptr});
        if (match('+')) return parse_factor();
        NodePtr base = parse_primary();
        if (match('^')) // right-associative; exponent may carry its own sign
            return make({ExprNode::Op::pow, 0, 0, base, parse_factor()});
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr n = parse_expr();
            if (!match(')')) fail("missing ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail("unexpected character");
    }

    NodePtr parse_number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
        }
        try {
            std::size_t used = 0;
            const double v = std::stod(src_.substr(start, pos_ - start), &used);
            if (used != pos_ - start) fail("malformed number");
            return make({ExprNode::Op::constant, v, 0, nullptr, nullptr});
        } catch (const std::exception&) {
            fail("malformed number");
        }
    }

    NodePtr parse_ident() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_]))))
            ++pos_;
        const std::string name = src_.substr(start, pos_ - start);
        const auto var = [&](int idx) {
            mask_ |= 1u << idx;
            return make({ExprNode::Op::variable, 0, idx, nullptr, nullptr});
        };
        if (name == "t") return var(Expression::kT);
        if (name == "s") return var(Expression::kS);
        if (name == "u") return var(Expression::kU);
        if (name == "x1") return var(Expression::kX1);
        if (name == "x2") return var(Expression::kX2);
        if (name == "x3") return var(Expression::kX3);

        ExprNode::Op op;
        if (name == "exp") op = ExprNode::Op::exp;
        else if (name == "sin") op = ExprNode::Op::sin;
        else if (name == "cos") op = ExprNode::Op::cos;
        else if (name == "ln") op = ExprNode::Op::ln;
        else fail("unknown identifier '" + name + "'");
        if (!match('(')) fail("expected '(' after function name");
        NodePtr arg = parse_expr();
        if (!match(')')) fail("missing ')'");
        return make({op, 0, 0, arg, nullptr});
    }
};

} // namespace

Expression Expression::parse(const std::string& text) {
    Parser p(text);
    Expression e;
    e.root_ = p.run(e.mask_);
    e.text_ = text;
    return e;
}

double Expression::eval(const Env& env) const {
    if (!root_) return 0.0;
    return eval_node(*root_, env);
}

} // namespace hilfer::expr
