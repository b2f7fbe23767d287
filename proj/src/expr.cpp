#include "ermakov/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace ermakov::expr {

struct Expression::Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

bool isUnary(NodeKind k) {
    switch (k) {
        case NodeKind::Negate:
        case NodeKind::Sin:
        case NodeKind::Cos:
        case NodeKind::Tan:
        case NodeKind::Cot:
        case NodeKind::Sec:
        case NodeKind::Csc:
        case NodeKind::Exp:
        case NodeKind::Ln:
        case NodeKind::Sqrt:
        case NodeKind::Abs:
        case NodeKind::Sgn:
            return true;
        default:
            return false;
    }
}

const char* functionName(NodeKind k) {
    switch (k) {
        case NodeKind::Sin: return "sin";
        case NodeKind::Cos: return "cos";
        case NodeKind::Tan: return "tan";
        case NodeKind::Cot: return "cot";
        case NodeKind::Sec: return "sec";
        case NodeKind::Csc: return "csc";
        case NodeKind::Exp: return "exp";
        case NodeKind::Ln: return "ln";
        case NodeKind::Sqrt: return "sqrt";
        case NodeKind::Abs: return "abs";
        case NodeKind::Sgn: return "sgn";
        default: return "";
    }
}

std::string formatValue(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Rendering with explicit precedence levels: 0 add/sub, 1 mul/div,
// 2 unary minus, 3 pow, 4 atoms.
int precedence(NodeKind k) {
    switch (k) {
        case NodeKind::Add:
        case NodeKind::Sub:
            return 0;
        case NodeKind::Mul:
        case NodeKind::Div:
            return 1;
        case NodeKind::Negate:
            return 2;
        case NodeKind::Pow:
            return 3;
        default:
            return 4;
    }
}

void render(const NodePtr& n, std::ostream& os, int parentPrec) {
    const int prec = precedence(n->kind);
    const bool needParens = prec < parentPrec;
    if (needParens) os << '(';
    switch (n->kind) {
        case NodeKind::Constant:
            if (n->value < 0 || std::signbit(n->value)) {
                // negative literals print as negations so the result re-parses
                os << '-';
                os << formatValue(-n->value);
            } else {
                os << formatValue(n->value);
            }
            break;
        case NodeKind::Variable:
            os << 'x';
            break;
        case NodeKind::Negate:
            os << '-';
            render(n->lhs, os, prec);
            break;
        case NodeKind::Add:
            render(n->lhs, os, prec);
            os << '+';
            render(n->rhs, os, prec + 1);
            break;
        case NodeKind::Sub:
            render(n->lhs, os, prec);
            os << '-';
            render(n->rhs, os, prec + 1);
            break;
        case NodeKind::Mul:
            render(n->lhs, os, prec);
            os << '*';
            render(n->rhs, os, prec + 1);
            break;
        case NodeKind::Div:
            render(n->lhs, os, prec);
            os << '/';
            render(n->rhs, os, prec + 1);
            break;
        case NodeKind::Pow:
            // right-associative; a negative or compound base needs parens
            render(n->lhs, os, 4);
            os << '^';
            render(n->rhs, os, prec);
            break;
        default:
            os << functionName(n->kind) << '(';
            render(n->lhs, os, 0);
            os << ')';
            break;
    }
    if (needParens) os << ')';
}

std::string renderNode(const NodePtr& n) {
    std::ostringstream os;
    render(n, os, 0);
    return os.str();
}

[[noreturn]] void domainFail(const NodePtr& n, double arg, const std::string& what) {
    throw EvalDomainError("domain error: " + what + " in '" + renderNode(n) + "' at argument " +
                              formatValue(arg),
                          renderNode(n), arg);
}

bool isIntegerValued(double v) {
    return std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9.007199254740992e15;
}

double evalPow(const NodePtr& n, double base, double exponent, double x) {
    if (base > 0.0) return std::pow(base, exponent);
    if (base == 0.0) {
        if (exponent > 0.0) return 0.0;
        if (exponent == 0.0) return 1.0;  // 0^0 := 1
        domainFail(n, x, "zero raised to a negative power");
    }
    if (!isIntegerValued(exponent)) {
        domainFail(n, x, "negative base with non-integer exponent");
    }
    return std::pow(base, exponent);
}

double evalNode(const NodePtr& n, double x) {
    switch (n->kind) {
        case NodeKind::Constant:
            return n->value;
        case NodeKind::Variable:
            return x;
        case NodeKind::Negate:
            return -evalNode(n->lhs, x);
        case NodeKind::Sin:
            return std::sin(evalNode(n->lhs, x));
        case NodeKind::Cos:
            return std::cos(evalNode(n->lhs, x));
        case NodeKind::Tan: {
            const double a = evalNode(n->lhs, x);
            const double c = std::cos(a);
            if (c == 0.0) domainFail(n, x, "tangent pole");
            return std::sin(a) / c;
        }
        case NodeKind::Cot: {
            const double a = evalNode(n->lhs, x);
            const double s = std::sin(a);
            if (s == 0.0) domainFail(n, x, "cotangent pole");
            return std::cos(a) / s;
        }
        case NodeKind::Sec: {
            const double a = evalNode(n->lhs, x);
            const double c = std::cos(a);
            if (c == 0.0) domainFail(n, x, "secant pole");
            return 1.0 / c;
        }
        case NodeKind::Csc: {
            const double a = evalNode(n->lhs, x);
            const double s = std::sin(a);
            if (s == 0.0) domainFail(n, x, "cosecant pole");
            return 1.0 / s;
        }
        case NodeKind::Exp:
            return std::exp(evalNode(n->lhs, x));
        case NodeKind::Ln: {
            const double a = evalNode(n->lhs, x);
            if (a <= 0.0) domainFail(n, x, "logarithm of a non-positive value");
            return std::log(a);
        }
        case NodeKind::Sqrt: {
            const double a = evalNode(n->lhs, x);
            if (a < 0.0) domainFail(n, x, "square root of a negative value");
            return std::sqrt(a);
        }
        case NodeKind::Abs:
            return std::abs(evalNode(n->lhs, x));
        case NodeKind::Sgn: {
            const double a = evalNode(n->lhs, x);
            if (a > 0.0) return 1.0;
            if (a < 0.0) return -1.0;
            return 0.0;
        }
        case NodeKind::Add:
            return evalNode(n->lhs, x) + evalNode(n->rhs, x);
        case NodeKind::Sub:
            return evalNode(n->lhs, x) - evalNode(n->rhs, x);
        case NodeKind::Mul:
            return evalNode(n->lhs, x) * evalNode(n->rhs, x);
        case NodeKind::Div: {
            const double denom = evalNode(n->rhs, x);
            if (denom == 0.0) domainFail(n, x, "division by zero");
            return evalNode(n->lhs, x) / denom;
        }
        case NodeKind::Pow:
            return evalPow(n, evalNode(n->lhs, x), evalNode(n->rhs, x), x);
    }
    throw Error("corrupt expression node");
}

// ---------------------------------------------------------------------------
// Parser: recursive descent over the grammar in the header.

struct Parser {
    const std::string& src;
    std::size_t pos = 0;
    int depth = 0;
    static constexpr int kMaxDepth = 200;

    explicit Parser(const std::string& s) : src(s) {}

    struct DepthGuard {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser) {
            if (++p.depth > kMaxDepth) {
                throw ParseError("expression nests deeper than " +
                                     std::to_string(kMaxDepth) + " levels",
                                 p.pos, {"a shallower expression"});
            }
        }
        ~DepthGuard() { --p.depth; }
    };

    void skipSpace() {
        while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t' || src[pos] == '\n' ||
                                    src[pos] == '\r')) {
            ++pos;
        }
    }

    bool atEnd() {
        skipSpace();
        return pos >= src.size();
    }

    char peek() {
        skipSpace();
        return pos < src.size() ? src[pos] : '\0';
    }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        skipSpace();
        std::ostringstream os;
        os << "syntax error at byte " << pos << ": expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) os << (i + 1 == expected.size() ? " or " : ", ");
            os << expected[i];
        }
        if (pos < src.size()) {
            os << ", found '" << src[pos] << "'";
        } else {
            os << ", found end of input";
        }
        throw ParseError(os.str(), pos, std::move(expected));
    }

    Expression parseExpr() {
        DepthGuard guard(*this);
        Expression lhs = parseTerm();
        while (true) {
            const char c = peek();
            if (c == '+' || c == '-') {
                ++pos;
                Expression rhs = parseTerm();
                lhs = Expression::binary(c == '+' ? NodeKind::Add : NodeKind::Sub,
                                         std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    Expression parseTerm() {
        Expression lhs = parseFactor();
        while (true) {
            const char c = peek();
            if (c == '*' || c == '/') {
                ++pos;
                Expression rhs = parseFactor();
                lhs = Expression::binary(c == '*' ? NodeKind::Mul : NodeKind::Div,
                                         std::move(lhs), std::move(rhs));
            } else {
                return lhs;
            }
        }
    }

    Expression parseFactor() {
        DepthGuard guard(*this);
        if (peek() == '-') {
            ++pos;
            return Expression::unary(NodeKind::Negate, parseFactor());
        }
        return parsePower();
    }

    Expression parsePower() {
        Expression base = parseAtom();
        if (peek() == '^') {
            ++pos;
            Expression exponent = parseFactor();
            return Expression::binary(NodeKind::Pow, std::move(base), std::move(exponent));
        }
        return base;
    }

    Expression parseAtom() {
        const char c = peek();
        if (c == '(') {
            ++pos;
            Expression inner = parseExpr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            return parseNumber();
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            return parseIdent();
        }
        fail({"a number", "'x'", "a function name", "'('", "'-'"});
    }

    void expect(char c) {
        if (peek() != c) {
            fail({std::string("'") + c + "'"});
        }
        ++pos;
    }

    Expression parseNumber() {
        skipSpace();
        const std::size_t start = pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos])))
                    ++pos;
            } else {
                pos = mark;  // 'e' belonged to something else; not part of the number
            }
        }
        const std::string text = src.substr(start, pos - start);
        if (text.empty() || text == ".") {
            pos = start;
            fail({"a number"});
        }
        return Expression::constant(std::strtod(text.c_str(), nullptr));
    }

    Expression parseIdent() {
        skipSpace();
        const std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) {
            ++pos;
        }
        const std::string name = src.substr(start, pos - start);
        if (name == "x") {
            return Expression::variable();
        }
        static const std::unordered_map<std::string, NodeKind> kFunctions = {
            {"sin", NodeKind::Sin}, {"cos", NodeKind::Cos}, {"tan", NodeKind::Tan},
            {"cot", NodeKind::Cot}, {"sec", NodeKind::Sec}, {"csc", NodeKind::Csc},
            {"exp", NodeKind::Exp}, {"ln", NodeKind::Ln},   {"sqrt", NodeKind::Sqrt},
            {"abs", NodeKind::Abs}, {"sgn", NodeKind::Sgn},
        };
        const auto it = kFunctions.find(name);
        if (it == kFunctions.end()) {
            const std::size_t at = start;
            throw ParseError("unknown identifier '" + name + "' at byte " + std::to_string(at),
                             at, {"'x'", "a function name"});
        }
        expect('(');
        Expression arg = parseExpr();
        expect(')');
        return Expression::unary(it->second, std::move(arg));
    }
};

NodePtr makeNode(NodeKind kind, double value, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->value = value;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

}  // namespace

Expression::Expression() : root_(makeNode(NodeKind::Constant, 0.0, nullptr, nullptr)) {}

Expression Expression::constant(double value) {
    return Expression(makeNode(NodeKind::Constant, value, nullptr, nullptr));
}

Expression Expression::variable() {
    return Expression(makeNode(NodeKind::Variable, 0.0, nullptr, nullptr));
}

NodeKind Expression::kind() const { return root_->kind; }

bool Expression::isConstant(double value) const {
    return root_->kind == NodeKind::Constant && root_->value == value;
}

Expression Expression::unary(NodeKind op, Expression operand) {
    if (operand.root_->kind == NodeKind::Constant) {
        // fold when the value is exactly representable without a domain issue
        try {
            Expression folded(makeNode(op, 0.0, operand.root_, nullptr));
            const double v = folded.evaluate(0.0);
            if (std::isfinite(v)) return constant(v);
        } catch (const EvalDomainError&) {
            // keep the node; evaluation will report the domain error
        }
    }
    if (op == NodeKind::Negate && operand.root_->kind == NodeKind::Negate) {
        return Expression(operand.root_->lhs);
    }
    return Expression(makeNode(op, 0.0, operand.root_, nullptr));
}

Expression Expression::binary(NodeKind op, Expression lhs, Expression rhs) {
    const bool lConst = lhs.root_->kind == NodeKind::Constant;
    const bool rConst = rhs.root_->kind == NodeKind::Constant;
    if (lConst && rConst) {
        try {
            Expression folded(makeNode(op, 0.0, lhs.root_, rhs.root_));
            const double v = folded.evaluate(0.0);
            if (std::isfinite(v)) return constant(v);
        } catch (const EvalDomainError&) {
        }
    }
    switch (op) {
        case NodeKind::Add:
            if (lhs.isConstant(0.0)) return rhs;
            if (rhs.isConstant(0.0)) return lhs;
            break;
        case NodeKind::Sub:
            if (rhs.isConstant(0.0)) return lhs;
            if (lhs.isConstant(0.0)) return unary(NodeKind::Negate, std::move(rhs));
            break;
        case NodeKind::Mul:
            if (lhs.isConstant(0.0) || rhs.isConstant(0.0)) return constant(0.0);
            if (lhs.isConstant(1.0)) return rhs;
            if (rhs.isConstant(1.0)) return lhs;
            break;
        case NodeKind::Div:
            if (lhs.isConstant(0.0) && !rhs.isConstant(0.0)) return constant(0.0);
            if (rhs.isConstant(1.0)) return lhs;
            break;
        case NodeKind::Pow:
            if (rhs.isConstant(1.0)) return lhs;
            if (rhs.isConstant(0.0)) return constant(1.0);
            break;
        default:
            break;
    }
    return Expression(makeNode(op, 0.0, lhs.root_, rhs.root_));
}

double Expression::evaluate(double x) const { return evalNode(root_, x); }

std::string Expression::str() const { return renderNode(root_); }

namespace {

Expression wrap(NodePtr n) {
    // local rebuild through the public constructors so folding applies
    switch (n->kind) {
        case NodeKind::Constant:
            return Expression::constant(n->value);
        case NodeKind::Variable:
            return Expression::variable();
        default:
            break;
    }
    if (isUnary(n->kind)) {
        return Expression::unary(n->kind, wrap(n->lhs));
    }
    return Expression::binary(n->kind, wrap(n->lhs), wrap(n->rhs));
}

Expression diffNode(const NodePtr& n);

Expression mul(Expression a, Expression b) {
    return Expression::binary(NodeKind::Mul, std::move(a), std::move(b));
}
Expression divE(Expression a, Expression b) {
    return Expression::binary(NodeKind::Div, std::move(a), std::move(b));
}
Expression add(Expression a, Expression b) {
    return Expression::binary(NodeKind::Add, std::move(a), std::move(b));
}
Expression sub(Expression a, Expression b) {
    return Expression::binary(NodeKind::Sub, std::move(a), std::move(b));
}
Expression neg(Expression a) { return Expression::unary(NodeKind::Negate, std::move(a)); }
Expression powE(Expression a, Expression b) {
    return Expression::binary(NodeKind::Pow, std::move(a), std::move(b));
}
Expression fn(NodeKind k, Expression a) { return Expression::unary(k, std::move(a)); }

Expression diffNode(const NodePtr& n) {
    switch (n->kind) {
        case NodeKind::Constant:
            return Expression::constant(0.0);
        case NodeKind::Variable:
            return Expression::constant(1.0);
        case NodeKind::Negate:
            return neg(diffNode(n->lhs));
        case NodeKind::Add:
            return add(diffNode(n->lhs), diffNode(n->rhs));
        case NodeKind::Sub:
            return sub(diffNode(n->lhs), diffNode(n->rhs));
        case NodeKind::Mul:
            return add(mul(diffNode(n->lhs), wrap(n->rhs)), mul(wrap(n->lhs), diffNode(n->rhs)));
        case NodeKind::Div:
            return divE(sub(mul(diffNode(n->lhs), wrap(n->rhs)),
                            mul(wrap(n->lhs), diffNode(n->rhs))),
                        powE(wrap(n->rhs), Expression::constant(2.0)));
        case NodeKind::Pow: {
            Expression base = wrap(n->lhs);
            Expression baseD = diffNode(n->lhs);
            if (n->rhs->kind == NodeKind::Constant) {
                // power rule keeps x^c differentiable for negative bases
                const double c = n->rhs->value;
                return mul(mul(Expression::constant(c),
                               powE(base, Expression::constant(c - 1.0))),
                           std::move(baseD));
            }
            Expression expo = wrap(n->rhs);
            Expression expoD = diffNode(n->rhs);
            // f^g * (g' ln f + g f'/f)
            return mul(powE(base, expo),
                       add(mul(std::move(expoD), fn(NodeKind::Ln, wrap(n->lhs))),
                           mul(wrap(n->rhs), divE(std::move(baseD), wrap(n->lhs)))));
        }
        case NodeKind::Sin:
            return mul(fn(NodeKind::Cos, wrap(n->lhs)), diffNode(n->lhs));
        case NodeKind::Cos:
            return neg(mul(fn(NodeKind::Sin, wrap(n->lhs)), diffNode(n->lhs)));
        case NodeKind::Tan:
            return mul(powE(fn(NodeKind::Sec, wrap(n->lhs)), Expression::constant(2.0)),
                       diffNode(n->lhs));
        case NodeKind::Cot:
            return neg(mul(powE(fn(NodeKind::Csc, wrap(n->lhs)), Expression::constant(2.0)),
                           diffNode(n->lhs)));
        case NodeKind::Sec:
            return mul(mul(fn(NodeKind::Sec, wrap(n->lhs)), fn(NodeKind::Tan, wrap(n->lhs))),
                       diffNode(n->lhs));
        case NodeKind::Csc:
            return neg(mul(mul(fn(NodeKind::Csc, wrap(n->lhs)), fn(NodeKind::Cot, wrap(n->lhs))),
                           diffNode(n->lhs)));
        case NodeKind::Exp:
            return mul(fn(NodeKind::Exp, wrap(n->lhs)), diffNode(n->lhs));
        case NodeKind::Ln:
            return divE(diffNode(n->lhs), wrap(n->lhs));
        case NodeKind::Sqrt:
            return divE(diffNode(n->lhs),
                        mul(Expression::constant(2.0), fn(NodeKind::Sqrt, wrap(n->lhs))));
        case NodeKind::Abs:
            // sgn(0) = 0 realizes the abs'(0) := 0 convention
            return mul(fn(NodeKind::Sgn, wrap(n->lhs)), diffNode(n->lhs));
        case NodeKind::Sgn:
            return Expression::constant(0.0);
    }
    throw Error("corrupt expression node");
}

}  // namespace

Expression Expression::derivative() const { return diffNode(root_); }

Expression Expression::parse(const std::string& source) {
    Parser p(source);
    if (p.atEnd()) {
        throw ParseError("empty input", 0, {"an expression"});
    }
    Expression e = p.parseExpr();
    if (!p.atEnd()) {
        p.fail({"an operator", "end of input"});
    }
    return e;
}

double parseReal(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    const std::string body = text.substr(i);
    Parser p(body);
    if (p.atEnd()) throw ParseError("empty number", 0, {"a number"});
    Expression e = p.parseNumber();
    if (!p.atEnd()) {
        throw ParseError("trailing characters after number in '" + text + "'", i + p.pos,
                         {"end of input"});
    }
    const double v = e.evaluate(0.0);
    return negative ? -v : v;
}

}  // namespace ermakov::expr
