#include "histolim/beta_expression.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "histolim/error.hpp"

namespace histolim {

struct BetaExpression::Node {
  enum class Op { kNumber, kLevel, kAdd, kMul, kPow } op;
  double value = 0.0;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = BetaExpression::Node;
using NodePtr = std::shared_ptr<const Node>;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("beta expression '" + std::string(text_) + "': " + what + " at offset " +
                              std::to_string(pos_),
                          "bad_expression");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
    return std::make_shared<const Node>(Node{op, 0.0, std::move(a), std::move(b)});
  }

  NodePtr sum() {
    NodePtr n = product();
    while (accept('+')) n = binary(Node::Op::kAdd, n, product());
    return n;
  }

  NodePtr product() {
    NodePtr n = power();
    while (accept('*')) n = binary(Node::Op::kMul, n, power());
    return n;
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return binary(Node::Op::kPow, base, power());
    return base;
  }

  NodePtr atom() {
    skip();
    if (accept('(')) {
      NodePtr n = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    if (pos_ >= text_.size()) fail("unexpected end");
    if (text_[pos_] == 'm') {
      ++pos_;
      return std::make_shared<const Node>(Node{Node::Op::kLevel, 0.0, nullptr, nullptr});
    }
    if (text_.substr(pos_, 3) == "inf") {
      pos_ += 3;
      return std::make_shared<const Node>(
          Node{Node::Op::kNumber, std::numeric_limits<double>::infinity(), nullptr, nullptr});
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
                                   text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a number, 'm' or '('");
    const std::string token(text_.substr(start, pos_ - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      fail("malformed number '" + token + "'");
    }
    if (used != token.size()) fail("malformed number '" + token + "'");
    return std::make_shared<const Node>(Node{Node::Op::kNumber, v, nullptr, nullptr});
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, double m) {
  switch (n.op) {
    case Node::Op::kNumber:
      return n.value;
    case Node::Op::kLevel:
      return m;
    case Node::Op::kAdd:
      return eval(*n.lhs, m) + eval(*n.rhs, m);
    case Node::Op::kMul:
      return eval(*n.lhs, m) * eval(*n.rhs, m);
    case Node::Op::kPow:
      return std::pow(eval(*n.lhs, m), eval(*n.rhs, m));
  }
  return 0.0;
}

double degree(const Node& n) {
  switch (n.op) {
    case Node::Op::kNumber:
      return 0.0;
    case Node::Op::kLevel:
      return 1.0;
    case Node::Op::kAdd:
      return std::max(degree(*n.lhs), degree(*n.rhs));
    case Node::Op::kMul: {
      // A zero factor kills the product.
      if ((degree(*n.lhs) == 0.0 && eval(*n.lhs, 1.0) == 0.0) ||
          (degree(*n.rhs) == 0.0 && eval(*n.rhs, 1.0) == 0.0)) {
        return 0.0;
      }
      return degree(*n.lhs) + degree(*n.rhs);
    }
    case Node::Op::kPow: {
      const double db = degree(*n.rhs);
      if (db == 0.0) return degree(*n.lhs) * eval(*n.rhs, 1.0);
      if (degree(*n.lhs) > 0.0) return std::numeric_limits<double>::infinity();
      const double base = eval(*n.lhs, 1.0);
      if (base > 1.0) return std::numeric_limits<double>::infinity();
      return 0.0;  // bounded: base <= 1 raised to a growing power
    }
  }
  return 0.0;
}

}  // namespace

BetaExpression BetaExpression::parse(std::string_view text) {
  BetaExpression e;
  e.text_ = std::string(text);
  e.root_ = Parser(text).parse();
  return e;
}

double BetaExpression::operator()(int m) const { return eval(*root_, static_cast<double>(m)); }

double BetaExpression::growth_degree() const { return degree(*root_); }

}  // namespace histolim
