#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace attracta {

/// Small arithmetic language for config files: numbers, named variables,
/// + - * / ^, parentheses, and the functions sin cos tan exp log sqrt abs
/// tanh min max pow. The constants pi and e are predefined.
class Expression {
public:
    /// `variables` fixes the names and their order in eval()'s argument.
    /// Throws InvalidConfig on syntax errors or unknown names.
    static Expression parse(const std::string& text, const std::vector<std::string>& variables);

    double eval(std::span<const double> values) const;
    /// True if variable `index` occurs in the expression.
    bool uses(std::size_t index) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::vector<bool> used_;
    std::string text_;
};

}  // namespace attracta
