#pragma once

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sspolicy {

class ExpressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Small arithmetic expression over a single variable `x`.
///
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numeric
/// literals, named parameters, the constants `pi` and `e`, and the functions
/// exp, log, sqrt, abs, pow(a,b), min(a,b), max(a,b).
class Expression {
public:
    Expression() = default;
    Expression(const std::string& text, const std::map<std::string, double>& params = {}) : text_(text) {
        Parser p{text, params};
        root_ = p.parse();
    }

    double operator()(double x) const { return root_ ? root_->eval(x) : 0.0; }
    const std::string& text() const { return text_; }
    bool empty() const { return !root_; }

private:
    struct Node {
        enum class Op { num, var, add, sub, mul, div, pow, neg, exp, log, sqrt, abs, min, max };
        Op op = Op::num;
        double value = 0.0;
        std::shared_ptr<const Node> l, r;

        double eval(double x) const {
            switch (op) {
            case Op::num: return value;
            case Op::var: return x;
            case Op::add: return l->eval(x) + r->eval(x);
            case Op::sub: return l->eval(x) - r->eval(x);
            case Op::mul: return l->eval(x) * r->eval(x);
            case Op::div: return l->eval(x) / r->eval(x);
            case Op::pow: return std::pow(l->eval(x), r->eval(x));
            case Op::neg: return -l->eval(x);
            case Op::exp: return std::exp(l->eval(x));
            case Op::log: return std::log(l->eval(x));
            case Op::sqrt: return std::sqrt(l->eval(x));
            case Op::abs: return std::abs(l->eval(x));
            case Op::min: return std::min(l->eval(x), r->eval(x));
            case Op::max: return std::max(l->eval(x), r->eval(x));
            }
            return 0.0;
        }
    };
    using NodePtr = std::shared_ptr<const Node>;

    static NodePtr make(Node::Op op, NodePtr l = nullptr, NodePtr r = nullptr, double v = 0.0) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->l = std::move(l);
        n->r = std::move(r);
        n->value = v;
        // fold constants
        if (op != Node::Op::num && op != Node::Op::var && n->l && n->l->op == Node::Op::num &&
            (!n->r || n->r->op == Node::Op::num)) {
            double c = n->eval(0.0);
            auto k = std::make_shared<Node>();
            k->value = c;
            return k;
        }
        return n;
    }

    struct Parser {
        const std::string& s;
        const std::map<std::string, double>& params;
        size_t pos = 0;

        [[noreturn]] void fail(const std::string& what) const {
            throw ExpressionError("expression error at offset " + std::to_string(pos) + ": " + what + " in '" + s + "'");
        }
        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        void expect(char c) {
            if (!eat(c)) fail(std::string("expected '") + c + "'");
        }

        NodePtr parse() {
            auto n = expr();
            skip();
            if (pos != s.size()) fail("unexpected trailing input");
            return n;
        }
        NodePtr expr() {
            auto n = term();
            for (;;) {
                if (eat('+')) n = make(Node::Op::add, n, term());
                else if (eat('-')) n = make(Node::Op::sub, n, term());
                else return n;
            }
        }
        NodePtr term() {
            auto n = unary();
            for (;;) {
                if (eat('*')) n = make(Node::Op::mul, n, unary());
                else if (eat('/')) n = make(Node::Op::div, n, unary());
                else return n;
            }
        }
        NodePtr unary() {
            if (eat('-')) return make(Node::Op::neg, unary());
            if (eat('+')) return unary();
            return power();
        }
        NodePtr power() {
            auto base = primary();
            if (eat('^')) return make(Node::Op::pow, base, unary());
            return base;
        }
        NodePtr primary() {
            skip();
            if (pos >= s.size()) fail("unexpected end of input");
            char c = s[pos];
            if (eat('(')) {
                auto n = expr();
                expect(')');
                return n;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                size_t used = 0;
                double v = 0;
                try {
                    v = std::stod(s.substr(pos), &used);
                } catch (const std::exception&) {
                    fail("bad number");
                }
                pos += used;
                return make(Node::Op::num, nullptr, nullptr, v);
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                std::string id = s.substr(start, pos - start);
                skip();
                if (pos < s.size() && s[pos] == '(') return call(id);
                if (id == "x") return make(Node::Op::var);
                if (auto it = params.find(id); it != params.end()) return make(Node::Op::num, nullptr, nullptr, it->second);
                if (id == "pi") return make(Node::Op::num, nullptr, nullptr, M_PI);
                if (id == "e") return make(Node::Op::num, nullptr, nullptr, M_E);
                fail("unknown identifier '" + id + "'");
            }
            fail(std::string("unexpected character '") + c + "'");
        }
        NodePtr call(const std::string& id) {
            expect('(');
            auto a = expr();
            NodePtr b;
            if (eat(',')) b = expr();
            expect(')');
            static const std::map<std::string, std::pair<Node::Op, int>> fns = {
                {"exp", {Node::Op::exp, 1}}, {"log", {Node::Op::log, 1}}, {"sqrt", {Node::Op::sqrt, 1}},
                {"abs", {Node::Op::abs, 1}}, {"pow", {Node::Op::pow, 2}}, {"min", {Node::Op::min, 2}},
                {"max", {Node::Op::max, 2}}};
            auto it = fns.find(id);
            if (it == fns.end()) fail("unknown function '" + id + "'");
            if ((it->second.second == 2) != static_cast<bool>(b)) fail("wrong number of arguments to '" + id + "'");
            return make(it->second.first, a, b);
        }
    };

    std::string text_;
    NodePtr root_;
};

}  // namespace sspolicy
