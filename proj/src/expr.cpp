#include "holoflow/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>

namespace holoflow {

namespace {

NodePtr make_node(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

NodePtr make_const(Complex c) {
    auto n = std::make_shared<Node>();
    n->op = Op::Const;
    n->value = c;
    return n;
}

NodePtr make_var(int index) {
    auto n = std::make_shared<Node>();
    n->op = Op::Var;
    n->var = index;
    return n;
}

NodePtr make_pow(NodePtr base, int exponent) {
    auto n = std::make_shared<Node>();
    n->op = Op::Pow;
    n->lhs = std::move(base);
    n->exponent = exponent;
    return n;
}

Complex ipow(Complex base, int n) {
    if (n == 0) return Complex(1.0, 0.0);
    bool invert = n < 0;
    unsigned m = invert ? static_cast<unsigned>(-(long long)n) : static_cast<unsigned>(n);
    Complex result(1.0, 0.0), b = base;
    while (m) {
        if (m & 1u) result *= b;
        b *= b;
        m >>= 1u;
    }
    return invert ? Complex(1.0, 0.0) / result : result;
}

// ---------------------------------------------------------------- parser

class Parser {
public:
    Parser(const std::string& text, const Scope& scope) : text_(text), scope_(scope) {}

    NodePtr run() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
        NodePtr e = expr();
        skip();
        if (pos_ < text_.size())
            throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (peek('+')) {
                ++pos_;
                lhs = make_node(Op::Add, lhs, term());
            } else if (peek('-')) {
                ++pos_;
                lhs = make_node(Op::Sub, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    NodePtr term() {
        NodePtr lhs = factor();
        while (true) {
            if (peek('*')) {
                ++pos_;
                lhs = make_node(Op::Mul, lhs, factor());
            } else if (peek('/')) {
                ++pos_;
                lhs = make_node(Op::Div, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    NodePtr factor() {
        if (peek('-')) {
            ++pos_;
            return make_node(Op::Neg, factor());
        }
        if (peek('+')) {
            ++pos_;
            return factor();
        }
        NodePtr b = base();
        if (peek('^')) {
            ++pos_;
            skip();
            bool negative = false;
            if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
                negative = text_[pos_] == '-';
                ++pos_;
                skip();
            }
            std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) throw ParseError("integer exponent expected", start);
            if (pos_ - start > 6) throw ParseError("exponent too large", start);
            int n = std::stoi(text_.substr(start, pos_ - start));
            b = make_pow(b, negative ? -n : n);
        }
        return b;
    }

    NodePtr base() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            if (!peek(')')) throw ParseError("')' expected", pos_);
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string id = text_.substr(start, pos_ - start);
            static const std::map<std::string, Op> funcs{
                {"exp", Op::Exp}, {"sin", Op::Sin}, {"cos", Op::Cos}, {"log", Op::Log}};
            if (auto f = funcs.find(id); f != funcs.end()) {
                if (!peek('(')) throw ParseError("'(' expected after " + id, pos_);
                ++pos_;
                NodePtr arg = expr();
                if (!peek(')')) throw ParseError("')' expected", pos_);
                ++pos_;
                return make_node(f->second, arg);
            }
            if (id == "i") return make_const(Complex(0.0, 1.0));
            for (std::size_t k = 0; k < scope_.variables.size(); ++k)
                if (scope_.variables[k] == id) return make_var(static_cast<int>(k));
            if (auto k = scope_.constants.find(id); k != scope_.constants.end())
                return make_const(k->second);
            throw ParseError("unknown identifier '" + id + "'", start);
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    NodePtr number() {
        std::size_t start = pos_;
        auto digits = [&] {
            std::size_t s = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            return pos_ - s;
        };
        std::size_t n = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;  // not an exponent; leave 'e' for the caller
        }
        return make_const(Complex(std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr), 0.0));
    }

    const std::string& text_;
    const Scope& scope_;
    std::size_t pos_ = 0;
};

// --------------------------------------------------------------- printer

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // Prefer the shortest representation that round-trips.
    for (int p = 1; p < 17; ++p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, v);
        if (std::strtod(buf, nullptr) == v) {
            s = buf;
            break;
        }
    }
    return s;
}

// Precedence levels: 1 sum, 2 product, 3 unary, 4 power base / atom.
struct Printed {
    std::string text;
    int level;
};

Printed print_node(const Node& n, const std::vector<std::string>& names);

std::string wrap(const Printed& p, int min_level) {
    return p.level >= min_level ? p.text : "(" + p.text + ")";
}

Printed print_const(Complex c) {
    double re = c.real(), im = c.imag();
    if (im == 0.0) {
        std::string s = fmt_real(std::abs(re));
        if (std::signbit(re)) return {"-" + s, 3};
        return {s, 4};
    }
    std::string imag;
    if (std::abs(im) == 1.0)
        imag = "i";
    else
        imag = fmt_real(std::abs(im)) + "*i";
    if (re == 0.0 && !std::signbit(re)) {
        if (std::signbit(im)) return {"-" + imag, 3};
        return {imag, std::abs(im) == 1.0 ? 4 : 2};
    }
    std::string s = fmt_real(re) + (std::signbit(im) ? "-" : "+") + imag;
    return {s, 1};
}

Printed print_node(const Node& n, const std::vector<std::string>& names) {
    switch (n.op) {
        case Op::Const:
            return print_const(n.value);
        case Op::Var:
            return {n.var < static_cast<int>(names.size()) ? names[n.var] : "v" + std::to_string(n.var), 4};
        case Op::Neg:
            return {"-" + wrap(print_node(*n.lhs, names), 3), 3};
        case Op::Add:
        case Op::Sub: {
            auto a = print_node(*n.lhs, names);
            auto b = print_node(*n.rhs, names);
            // Left-associative: right operand needs a strictly higher level to keep the tree shape.
            return {wrap(a, 1) + (n.op == Op::Add ? "+" : "-") + wrap(b, 2), 1};
        }
        case Op::Mul:
        case Op::Div: {
            auto a = print_node(*n.lhs, names);
            auto b = print_node(*n.rhs, names);
            return {wrap(a, 2) + (n.op == Op::Mul ? "*" : "/") + wrap(b, 3), 2};
        }
        case Op::Pow: {
            auto a = print_node(*n.lhs, names);
            return {wrap(a, 4) + "^" + std::to_string(n.exponent), 3};
        }
        case Op::Exp:
        case Op::Sin:
        case Op::Cos:
        case Op::Log: {
            static const std::map<Op, std::string> fn{
                {Op::Exp, "exp"}, {Op::Sin, "sin"}, {Op::Cos, "cos"}, {Op::Log, "log"}};
            return {fn.at(n.op) + "(" + print_node(*n.lhs, names).text + ")", 4};
        }
    }
    return {"?", 4};
}

bool is_const(const Expr& e, Complex* v = nullptr) {
    if (e.root().op != Op::Const) return false;
    if (v) *v = e.root().value;
    return true;
}

bool is_value(const Expr& e, double v) {
    Complex c;
    return is_const(e, &c) && c == Complex(v, 0.0);
}

}  // namespace

// ------------------------------------------------------------------ Expr

Expr::Expr() : Expr(make_const(Complex(0.0, 0.0))) {}

Expr::Expr(NodePtr root) : root_(std::move(root)) { compile(); }

Expr Expr::constant(Complex c) { return Expr(make_const(c)); }
Expr Expr::variable(int index) { return Expr(make_var(index)); }

void Expr::compile() {
    auto prog = std::make_shared<std::vector<Instr>>();
    int depth = 0, max_depth = 0;
    std::function<void(const Node&)> emit = [&](const Node& n) {
        switch (n.op) {
            case Op::Const:
                prog->push_back({Op::Const, n.value, 0});
                max_depth = std::max(max_depth, ++depth);
                return;
            case Op::Var:
                prog->push_back({Op::Var, {}, n.var});
                max_depth = std::max(max_depth, ++depth);
                return;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
                emit(*n.lhs);
                emit(*n.rhs);
                prog->push_back({n.op, {}, 0});
                --depth;
                return;
            case Op::Pow:
                emit(*n.lhs);
                prog->push_back({Op::Pow, {}, n.exponent});
                return;
            default:
                emit(*n.lhs);
                prog->push_back({n.op, {}, 0});
                return;
        }
    };
    emit(*root_);
    program_ = std::move(prog);
    stack_depth_ = max_depth;
}

Complex Expr::eval(std::span<const Complex> vars) const {
    constexpr int kInline = 32;
    Complex inline_stack[kInline];
    std::vector<Complex> heap;
    Complex* st = inline_stack;
    if (stack_depth_ > kInline) {
        heap.resize(stack_depth_);
        st = heap.data();
    }
    int sp = 0;
    for (const Instr& ins : *program_) {
        switch (ins.op) {
            case Op::Const: st[sp++] = ins.value; break;
            case Op::Var: st[sp++] = ins.arg < static_cast<int>(vars.size()) ? vars[ins.arg] : Complex{}; break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Add: st[sp - 2] += st[sp - 1]; --sp; break;
            case Op::Sub: st[sp - 2] -= st[sp - 1]; --sp; break;
            case Op::Mul: st[sp - 2] *= st[sp - 1]; --sp; break;
            case Op::Div: st[sp - 2] /= st[sp - 1]; --sp; break;
            case Op::Pow: st[sp - 1] = ipow(st[sp - 1], ins.arg); break;
            case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
            case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
            case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
            case Op::Log: st[sp - 1] = std::log(st[sp - 1]); break;
        }
    }
    return st[0];
}

Complex Expr::eval_checked(std::span<const Complex> vars) const {
    Complex v = eval(vars);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw EvalError("non-finite value (evaluation at or near a pole)");
    return v;
}

bool Expr::is_rational() const {
    for (const Instr& ins : *program_)
        if (ins.op == Op::Exp || ins.op == Op::Sin || ins.op == Op::Cos || ins.op == Op::Log) return false;
    return true;
}

bool Expr::is_constant() const {
    return std::none_of(program_->begin(), program_->end(), [](const Instr& i) { return i.op == Op::Var; });
}

bool Expr::depends_on(int var) const {
    return std::any_of(program_->begin(), program_->end(),
                       [var](const Instr& i) { return i.op == Op::Var && i.arg == var; });
}

Expr parse_expr(const std::string& text, const Scope& scope) { return Expr(Parser(text, scope).run()); }

std::string print_expr(const Expr& e, const std::vector<std::string>& names) {
    return print_node(e.root(), names).text;
}

// ------------------------------------------------- simplifying builders

Expr operator+(const Expr& a, const Expr& b) {
    Complex x, y;
    if (is_const(a, &x) && is_const(b, &y)) return Expr::constant(x + y);
    if (is_value(a, 0)) return b;
    if (is_value(b, 0)) return a;
    if (b.root().op == Op::Neg) return Expr(make_node(Op::Sub, a.node(), b.root().lhs));
    return Expr(make_node(Op::Add, a.node(), b.node()));
}

Expr operator-(const Expr& a, const Expr& b) {
    Complex x, y;
    if (is_const(a, &x) && is_const(b, &y)) return Expr::constant(x - y);
    if (is_value(b, 0)) return a;
    if (is_value(a, 0)) return -b;
    if (b.root().op == Op::Neg) return Expr(make_node(Op::Add, a.node(), b.root().lhs));
    return Expr(make_node(Op::Sub, a.node(), b.node()));
}

Expr operator-(const Expr& a) {
    Complex x;
    if (is_const(a, &x)) return Expr::constant(-x);
    if (a.root().op == Op::Neg) return Expr(a.root().lhs);
    return Expr(make_node(Op::Neg, a.node()));
}

Expr operator*(const Expr& a, const Expr& b) {
    Complex x, y;
    if (is_const(a, &x) && is_const(b, &y)) return Expr::constant(x * y);
    if (is_value(a, 0) || is_value(b, 0)) return Expr::constant(0.0);
    if (is_value(a, 1)) return b;
    if (is_value(b, 1)) return a;
    if (is_value(a, -1)) return -b;
    if (is_value(b, -1)) return -a;
    if (a.root().op == Op::Neg) return -(Expr(a.root().lhs) * b);
    if (b.root().op == Op::Neg) return -(a * Expr(b.root().lhs));
    return Expr(make_node(Op::Mul, a.node(), b.node()));
}

Expr operator/(const Expr& a, const Expr& b) {
    Complex x, y;
    if (is_const(a, &x) && is_const(b, &y) && y != Complex(0.0, 0.0)) return Expr::constant(x / y);
    if (is_value(a, 0)) return Expr::constant(0.0);
    if (is_value(b, 1)) return a;
    if (a.root().op == Op::Neg) return -(Expr(a.root().lhs) / b);
    if (b.root().op == Op::Neg) return -(a / Expr(b.root().lhs));
    return Expr(make_node(Op::Div, a.node(), b.node()));
}

Expr pow(const Expr& a, int n) {
    Complex x;
    if (n == 0) return Expr::constant(1.0);
    if (n == 1) return a;
    if (is_const(a, &x)) return Expr::constant(ipow(x, n));
    if (a.root().op == Op::Pow) return pow(Expr(a.root().lhs), a.root().exponent * n);
    return Expr(make_pow(a.node(), n));
}

namespace {
Expr unary(Op op, const Expr& a, Complex (*f)(const Complex&)) {
    Complex x;
    if (is_const(a, &x)) return Expr::constant(f(x));
    return Expr(make_node(op, a.node()));
}
}  // namespace

Expr exp(const Expr& a) { return unary(Op::Exp, a, [](const Complex& c) { return std::exp(c); }); }
Expr sin(const Expr& a) { return unary(Op::Sin, a, [](const Complex& c) { return std::sin(c); }); }
Expr cos(const Expr& a) { return unary(Op::Cos, a, [](const Complex& c) { return std::cos(c); }); }
Expr log(const Expr& a) { return unary(Op::Log, a, [](const Complex& c) { return std::log(c); }); }

// ------------------------------------------------------ differentiation

Expr derivative(const Expr& e, int var) {
    const Node& n = e.root();
    auto sub = [](const NodePtr& p) { return Expr(p); };
    switch (n.op) {
        case Op::Const: return Expr::constant(0.0);
        case Op::Var: return Expr::constant(n.var == var ? 1.0 : 0.0);
        case Op::Neg: return -derivative(sub(n.lhs), var);
        case Op::Add: return derivative(sub(n.lhs), var) + derivative(sub(n.rhs), var);
        case Op::Sub: return derivative(sub(n.lhs), var) - derivative(sub(n.rhs), var);
        case Op::Mul: {
            Expr a = sub(n.lhs), b = sub(n.rhs);
            return derivative(a, var) * b + a * derivative(b, var);
        }
        case Op::Div: {
            Expr a = sub(n.lhs), b = sub(n.rhs);
            Expr da = derivative(a, var), db = derivative(b, var);
            if (is_value(db, 0)) return da / b;
            if (is_value(da, 0)) return -(a * db) / pow(b, 2);
            return (da * b - a * db) / pow(b, 2);
        }
        case Op::Pow: {
            Expr a = sub(n.lhs);
            return Expr::constant(static_cast<double>(n.exponent)) * pow(a, n.exponent - 1) * derivative(a, var);
        }
        case Op::Exp: return e * derivative(sub(n.lhs), var);
        case Op::Sin: return cos(sub(n.lhs)) * derivative(sub(n.lhs), var);
        case Op::Cos: return -(sin(sub(n.lhs)) * derivative(sub(n.lhs), var));
        case Op::Log: return derivative(sub(n.lhs), var) / sub(n.lhs);
    }
    return Expr::constant(0.0);
}

Expr substitute(const Expr& e, int var, const Expr& replacement) {
    const Node& n = e.root();
    auto rec = [&](const NodePtr& p) { return substitute(Expr(p), var, replacement); };
    switch (n.op) {
        case Op::Const: return e;
        case Op::Var: return n.var == var ? replacement : e;
        case Op::Neg: return -rec(n.lhs);
        case Op::Add: return rec(n.lhs) + rec(n.rhs);
        case Op::Sub: return rec(n.lhs) - rec(n.rhs);
        case Op::Mul: return rec(n.lhs) * rec(n.rhs);
        case Op::Div: return rec(n.lhs) / rec(n.rhs);
        case Op::Pow: return pow(rec(n.lhs), n.exponent);
        case Op::Exp: return exp(rec(n.lhs));
        case Op::Sin: return sin(rec(n.lhs));
        case Op::Cos: return cos(rec(n.lhs));
        case Op::Log: return log(rec(n.lhs));
    }
    return e;
}

}  // namespace holoflow
