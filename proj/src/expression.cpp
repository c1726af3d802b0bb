#include "nle/expression.hpp"

#include "nle/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace nle {

struct expression::node {
    enum class op { constant, variable, add, sub, mul, div, pow, neg, abs, sin, cos, exp, log1p, sign };

    op kind = op::constant;
    double value = 0;
    std::size_t index = 0;
    std::shared_ptr<const node> lhs;
    std::shared_ptr<const node> rhs;

    double eval(std::span<const double> v) const {
        switch (kind) {
        case op::constant: return value;
        case op::variable: return v[index];
        case op::add: return lhs->eval(v) + rhs->eval(v);
        case op::sub: return lhs->eval(v) - rhs->eval(v);
        case op::mul: return lhs->eval(v) * rhs->eval(v);
        case op::div: return lhs->eval(v) / rhs->eval(v);
        case op::pow: return std::pow(lhs->eval(v), rhs->eval(v));
        case op::neg: return -lhs->eval(v);
        case op::abs: return std::abs(lhs->eval(v));
        case op::sin: return std::sin(lhs->eval(v));
        case op::cos: return std::cos(lhs->eval(v));
        case op::exp: return std::exp(lhs->eval(v));
        case op::log1p: return std::log1p(lhs->eval(v));
        case op::sign: {
            const double a = lhs->eval(v);
            return static_cast<double>((a > 0) - (a < 0));
        }
        }
        return 0;
    }
};

namespace {

using node_ptr = std::shared_ptr<const expression::node>;
using op = expression::node::op;

node_ptr make(const op kind, node_ptr lhs = nullptr, node_ptr rhs = nullptr) {
    auto n = std::make_shared<expression::node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class parser {
public:
    parser(std::string_view text, const std::vector<std::string>& vars)
        : _text{text}
        , _vars{vars} {}

    node_ptr parse() {
        node_ptr root = expr();
        skip();
        if (_pos != _text.size())
            fail("unexpected '" + std::string{_text.substr(_pos, 1)} + "'");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw config_error{"expression '" + std::string{_text} + "' at column " + std::to_string(_pos + 1) + ": " +
                           what};
    }

    void skip() {
        while (_pos < _text.size() && std::isspace(static_cast<unsigned char>(_text[_pos])))
            ++_pos;
    }

    bool accept(const char c) {
        skip();
        if (_pos < _text.size() && _text[_pos] == c) {
            ++_pos;
            return true;
        }
        return false;
    }

    void expect(const char c) {
        if (!accept(c))
            fail(std::string{"expected '"} + c + "'");
    }

    node_ptr expr() {
        node_ptr lhs = term();
        while (true) {
            if (accept('+'))
                lhs = make(op::add, lhs, term());
            else if (accept('-'))
                lhs = make(op::sub, lhs, term());
            else
                return lhs;
        }
    }

    node_ptr term() {
        node_ptr lhs = unary();
        while (true) {
            if (accept('*'))
                lhs = make(op::mul, lhs, unary());
            else if (accept('/'))
                lhs = make(op::div, lhs, unary());
            else
                return lhs;
        }
    }

    node_ptr unary() {
        if (accept('-'))
            return make(op::neg, unary());
        if (accept('+'))
            return unary();
        return power();
    }

    node_ptr power() {
        node_ptr base = primary();
        if (accept('^'))
            return make(op::pow, base, unary());
        return base;
    }

    node_ptr primary() {
        skip();
        if (_pos >= _text.size())
            fail("unexpected end of input");
        if (accept('(')) {
            node_ptr inner = expr();
            expect(')');
            return inner;
        }
        const char c = _text[_pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        // U+03BE GREEK SMALL LETTER XI
        if (_text.substr(_pos).starts_with("\xCE\xBE")) {
            _pos += 2;
            return variable("xi");
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = _pos;
            while (_pos < _text.size() &&
                   (std::isalnum(static_cast<unsigned char>(_text[_pos])) || _text[_pos] == '_'))
                ++_pos;
            const std::string name{_text.substr(start, _pos - start)};
            skip();
            if (_pos < _text.size() && _text[_pos] == '(')
                return call(name);
            return variable(name);
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    node_ptr number() {
        const char* first = _text.data() + _pos;
        const char* last = _text.data() + _text.size();
        double v = 0;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{})
            fail("malformed number");
        _pos += static_cast<std::size_t>(ptr - first);
        auto n = std::make_shared<expression::node>();
        n->kind = op::constant;
        n->value = v;
        return n;
    }

    node_ptr variable(const std::string& name) {
        for (std::size_t i = 0; i < _vars.size(); ++i)
            if (_vars[i] == name) {
                auto n = std::make_shared<expression::node>();
                n->kind = op::variable;
                n->index = i;
                return n;
            }
        if (name == "pi") {
            auto n = std::make_shared<expression::node>();
            n->value = 3.14159265358979323846;
            return n;
        }
        fail("unknown variable '" + name + "'");
    }

    node_ptr call(const std::string& name) {
        expect('(');
        node_ptr first = expr();
        if (name == "pow") {
            expect(',');
            node_ptr second = expr();
            expect(')');
            return make(op::pow, first, second);
        }
        expect(')');
        if (name == "abs")
            return make(op::abs, first);
        if (name == "sin")
            return make(op::sin, first);
        if (name == "cos")
            return make(op::cos, first);
        if (name == "exp")
            return make(op::exp, first);
        if (name == "log1p")
            return make(op::log1p, first);
        if (name == "sign")
            return make(op::sign, first);
        fail("unknown function '" + name + "'");
    }

    std::string_view _text;
    const std::vector<std::string>& _vars;
    std::size_t _pos = 0;
};

}

expression::expression(std::string text, std::shared_ptr<const node> root, const std::size_t arity)
    : _text{std::move(text)}
    , _root{std::move(root)}
    , _arity{arity} {}

expression expression::parse(const std::string_view text, std::vector<std::string> variables) {
    parser p{text, variables};
    node_ptr root = p.parse();
    return expression{std::string{text}, std::move(root), variables.size()};
}

double expression::operator()(std::span<const double> values) const {
    if (values.size() != _arity)
        throw shape_error{"expression: expected " + std::to_string(_arity) + " variables"};
    return _root->eval(values);
}

}
