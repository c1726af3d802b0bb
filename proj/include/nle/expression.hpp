#ifndef NLE_EXPRESSION_HPP
#define NLE_EXPRESSION_HPP

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nle {

/// Small arithmetic language for user-supplied kernels and weights.
///
///   expr    = term { ("+" | "-") term } ;
///   term    = unary { ("*" | "/") unary } ;
///   unary   = ("+" | "-") unary | power ;
///   power   = primary [ "^" unary ] ;
///   primary = number | variable | call | "(" expr ")" ;
///   call    = ("abs" | "sin" | "cos" | "exp" | "log1p" | "sign") "(" expr ")"
///           | "pow" "(" expr "," expr ")" ;
///
/// Variables are bound by position to the names given at parse time
/// ("xi" may also be written as the Greek letter).
class expression {
public:
    struct node;

    static expression parse(std::string_view text, std::vector<std::string> variables);

    double operator()(std::span<const double> values) const;
    const std::string& text() const noexcept { return _text; }

private:
    expression(std::string text, std::shared_ptr<const node> root, std::size_t arity);

    std::string _text;
    std::shared_ptr<const node> _root;
    std::size_t _arity = 0;
};

}

#endif
