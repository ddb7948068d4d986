#pragma once

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace holoflow {

using Complex = std::complex<double>;

// Raised for malformed input; offset is the byte position in the source text.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

// Raised when an evaluation produces a non-finite value (at or near a pole).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Sin, Cos, Log };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    Complex value{};   // Const
    int var = 0;       // Var index
    int exponent = 0;  // Pow
    NodePtr lhs, rhs;  // unary ops use lhs only
};

// Variables and named constants visible to the parser.
struct Scope {
    std::vector<std::string> variables{"z"};
    std::map<std::string, Complex> constants;
};

// Immutable expression tree with a flat compiled form for fast evaluation.
class Expr {
public:
    Expr();
    explicit Expr(NodePtr root);

    static Expr constant(Complex c);
    static Expr variable(int index);

    const Node& root() const { return *root_; }
    const NodePtr& node() const { return root_; }

    // Evaluation with one value per scope variable. Non-finite output is
    // returned as-is; use eval_checked to turn it into an EvalError.
    Complex eval(std::span<const Complex> vars) const;
    Complex eval(Complex z) const { return eval(std::span<const Complex>(&z, 1)); }
    Complex eval_checked(std::span<const Complex> vars) const;

    bool is_rational() const;
    bool is_constant() const;
    bool depends_on(int var) const;

private:
    struct Instr {
        Op op;
        Complex value;
        int arg;
    };
    void compile();

    NodePtr root_;
    std::shared_ptr<const std::vector<Instr>> program_;
    int stack_depth_ = 0;
};

Expr parse_expr(const std::string& text, const Scope& scope = {});
std::string print_expr(const Expr& e, const std::vector<std::string>& names = {"z"});

// Symbolic partial derivative with light algebraic simplification.
Expr derivative(const Expr& e, int var = 0);

// Replace variable `var` by `replacement` everywhere.
Expr substitute(const Expr& e, int var, const Expr& replacement);

// Simplifying constructors.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int n);
Expr exp(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr log(const Expr& a);

}  // namespace holoflow
