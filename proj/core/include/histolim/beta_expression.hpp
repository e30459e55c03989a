#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace histolim {

/// Nonnegative expressions in the level m: numbers, "inf", m, +, *, ^ and
/// parentheses. Examples: "1", "m", "m^2", "2*m+1", "2^m".
class BetaExpression {
 public:
  static BetaExpression parse(std::string_view text);

  double operator()(int m) const;
  /// Polynomial growth degree in m; +infinity for exponential growth.
  double growth_degree() const;
  const std::string& text() const noexcept { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace histolim
