#pragma once

#include "hilfer/errors.hpp"

#include <memory>
#include <string>

namespace hilfer::expr {

struct ExprNode;

/// Variable bindings for expression evaluation. Slots an expression does not
/// reference are ignored; unbound slots read as 0.
struct Env {
    double t = 0.0;
    double s = 0.0;
    double u = 0.0;
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
};

/// A parsed arithmetic expression over the whitelisted configuration grammar:
/// identifiers t, s, u, x1, x2, x3; binary + - * / ^ (^ binds tightest,
/// right-associative); unary minus; functions exp, sin, cos, ln; decimal
/// literals; parentheses. This is the only way callables enter from config
/// files — no dynamic code loading.
///
/// A default-constructed Expression evaluates to 0 (convenient for omitted
/// kernels and maps).
class Expression {
public:
    static constexpr int kT = 0, kS = 1, kU = 2, kX1 = 3, kX2 = 4, kX3 = 5;

    Expression() = default;

    /// Throws DomainError with position information on any syntax error or
    /// non-whitelisted identifier.
    static Expression parse(const std::string& text);

    double eval(const Env& env) const;

    /// Whether the given variable slot (kT..kX3) appears in the expression.
    bool uses(int var_index) const { return (mask_ >> var_index) & 1u; }

    bool empty() const { return root_ == nullptr; }
    const std::string& text() const { return text_; }

private:
    std::shared_ptr<const ExprNode> root_;
    unsigned mask_ = 0;
    std::string text_;
};

} // namespace hilfer::expr
