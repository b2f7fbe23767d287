#pragma once

#include <memory>
#include <string>

#include "ermakov/errors.hpp"

namespace ermakov::expr {

// Univariate real expression in one free variable, always spelled `x` in
// source text. What `x` binds to (theta, t, a ratio y/x) is the caller's
// business.
//
// Grammar (infix, lowest to highest precedence):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          // right-associative
//   atom   := number | 'x' | ident '(' expr ')' | '(' expr ')'
//
// Function identifiers: sin cos tan cot sec csc exp ln sqrt abs sgn.
// No implicit multiplication ("2x" is a syntax error).

enum class NodeKind {
    Constant,
    Variable,
    Negate,
    Sin,
    Cos,
    Tan,
    Cot,
    Sec,
    Csc,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sgn,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

class Expression {
public:
    struct Node;

    Expression();  // the constant 0

    /// Parse source text. Throws ParseError on malformed input.
    static Expression parse(const std::string& source);

    static Expression constant(double value);
    static Expression variable();

    /// Value at x. Throws EvalDomainError when x is outside the domain of
    /// some node; the error names the offending subexpression.
    double evaluate(double x) const;

    /// Symbolic derivative d/dx. Total on the expression's domain;
    /// abs'(0) is 0 and sgn'(x) is 0 everywhere.
    Expression derivative() const;

    /// Infix rendering that re-parses to an evaluation-equivalent tree.
    std::string str() const;

    /// True when the tree is the literal constant `value` (after the
    /// constant folding done at construction time).
    bool isConstant(double value) const;

    NodeKind kind() const;

    // Structural constructors (fold constants where safe).
    static Expression unary(NodeKind op, Expression operand);
    static Expression binary(NodeKind op, Expression lhs, Expression rhs);

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    std::shared_ptr<const Node> root_;
};

/// Parse a real literal with the same syntax as expression numbers
/// (used by the CLI so that flags and expressions share one number format;
/// a leading '-' is accepted).
double parseReal(const std::string& text);

}  // namespace ermakov::expr
