#include "attracta/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "attracta/errors.hpp"

namespace attracta {

struct Expression::Node {
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
    Op op = Op::Const;
    double value = 0.0;
    std::size_t index = 0;
    double (*fn1)(double) = nullptr;
    double (*fn2)(double, double) = nullptr;
    std::vector<Node> kids;

    double eval(std::span<const double> v) const {
        switch (op) {
            case Op::Const:
                return value;
            case Op::Var:
                return v[index];
            case Op::Neg:
                return -kids[0].eval(v);
            case Op::Add:
                return kids[0].eval(v) + kids[1].eval(v);
            case Op::Sub:
                return kids[0].eval(v) - kids[1].eval(v);
            case Op::Mul:
                return kids[0].eval(v) * kids[1].eval(v);
            case Op::Div:
                return kids[0].eval(v) / kids[1].eval(v);
            case Op::Pow:
                return std::pow(kids[0].eval(v), kids[1].eval(v));
            case Op::Call:
                return fn1 ? fn1(kids[0].eval(v)) : fn2(kids[0].eval(v), kids[1].eval(v));
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using Op = Node::Op;

double f_sin(double x) { return std::sin(x); }
double f_cos(double x) { return std::cos(x); }
double f_tan(double x) { return std::tan(x); }
double f_exp(double x) { return std::exp(x); }
double f_log(double x) { return std::log(x); }
double f_sqrt(double x) { return std::sqrt(x); }
double f_abs(double x) { return std::abs(x); }
double f_tanh(double x) { return std::tanh(x); }
double f_min(double a, double b) { return std::min(a, b); }
double f_max(double a, double b) { return std::max(a, b); }
double f_pow(double a, double b) { return std::pow(a, b); }

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars, std::vector<bool>& used)
        : s_(text), vars_(vars), used_(used) {}

    Node parse() {
        Node n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return n;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidConfig("expression \"" + s_ + "\": " + why + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    static Node binary(Op op, Node a, Node b) {
        Node n;
        n.op = op;
        n.kids.push_back(std::move(a));
        n.kids.push_back(std::move(b));
        return n;
    }

    Node expr() {
        Node n = term();
        for (;;) {
            if (eat('+')) n = binary(Op::Add, std::move(n), term());
            else if (eat('-')) n = binary(Op::Sub, std::move(n), term());
            else return n;
        }
    }

    Node term() {
        Node n = unary();
        for (;;) {
            if (eat('*')) n = binary(Op::Mul, std::move(n), unary());
            else if (eat('/')) n = binary(Op::Div, std::move(n), unary());
            else return n;
        }
    }

    Node unary() {
        if (eat('-')) {
            Node n;
            n.op = Op::Neg;
            n.kids.push_back(unary());
            return n;
        }
        if (eat('+')) return unary();
        return power();
    }

    // Right-associative; binds tighter than unary minus on its left.
    Node power() {
        Node base = primary();
        if (eat('^')) return binary(Op::Pow, std::move(base), unary());
        return base;
    }

    Node primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (eat('(')) {
            Node n = expr();
            if (!eat(')')) fail("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            Node n;
            n.value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = s_.substr(start, pos_ - start);
            if (eat('(')) return call(name);
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                if (vars_[i] == name) {
                    used_[i] = true;
                    Node n;
                    n.op = Op::Var;
                    n.index = i;
                    return n;
                }
            }
            Node n;
            if (name == "pi") n.value = std::numbers::pi;
            else if (name == "e") n.value = std::numbers::e;
            else fail("unknown name '" + name + "'");
            return n;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    Node call(const std::string& name) {
        static const std::pair<const char*, double (*)(double)> unary_fns[] = {
            {"sin", f_sin}, {"cos", f_cos},   {"tan", f_tan}, {"exp", f_exp},
            {"log", f_log}, {"sqrt", f_sqrt}, {"abs", f_abs}, {"tanh", f_tanh}};
        static const std::pair<const char*, double (*)(double, double)> binary_fns[] = {
            {"min", f_min}, {"max", f_max}, {"pow", f_pow}};
        Node n;
        n.op = Op::Call;
        for (const auto& [fname, fn] : unary_fns) {
            if (name == fname) n.fn1 = fn;
        }
        for (const auto& [fname, fn] : binary_fns) {
            if (name == fname) n.fn2 = fn;
        }
        if (!n.fn1 && !n.fn2) fail("unknown function '" + name + "'");
        n.kids.push_back(expr());
        if (n.fn2) {
            if (!eat(',')) fail("expected ',' in call to " + name);
            n.kids.push_back(expr());
        }
        if (!eat(')')) fail("expected ')' after arguments of " + name);
        return n;
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    std::vector<bool>& used_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& text, const std::vector<std::string>& variables) {
    Expression e;
    e.text_ = text;
    e.used_.assign(variables.size(), false);
    Parser p(text, variables, e.used_);
    e.root_ = std::make_shared<const Node>(p.parse());
    return e;
}

double Expression::eval(std::span<const double> values) const { return root_->eval(values); }

bool Expression::uses(std::size_t index) const { return index < used_.size() && used_[index]; }

}  // namespace attracta
