#pragma once

// Scalar expression language used for the input section and other fields.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | variable | 'pi' | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | sqrt | abs
//   variable:= x1 x2 ... | y | z1 z2 ...

#include "holo/numcore.hpp"
#include "holo/taylor.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace holo {

class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column, std::vector<std::string> expected);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

/// Raised on unbound variables and on guarded domain violations; carries the
/// offending subexpression.
class EvalError : public Error {
 public:
  EvalError(const std::string& message, std::string subexpression)
      : Error(message + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

class Expr {
 public:
  enum class Kind { Number, Variable, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };

  struct Node {
    Kind kind;
    double number = 0.0;
    std::string name;  // variable or function name
    std::vector<std::shared_ptr<const Node>> kids;
  };

  Expr() = default;
  static Expr parse(std::string_view source);
  static Expr number(double v);
  static Expr variable(const std::string& name);

  Kind kind() const { return root_->kind; }
  const Node& root() const { return *root_; }
  bool valid() const { return root_ != nullptr; }

  /// Minimal-parenthesis rendering; parse(to_string()) reproduces the tree.
  std::string to_string() const;
  std::set<std::string> free_variables() const;

  double eval(const std::map<std::string, double>& point) const;
  Dual eval_dual(const std::map<std::string, double>& point,
                 const std::vector<std::string>& active) const;

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

/// An expression compiled against a fixed ordered list of variable names.
/// Evaluation takes one slot per variable and works for double, Dual and
/// Taylor scalars.
class BoundExpr {
 public:
  BoundExpr() = default;
  BoundExpr(const Expr& e, const std::vector<std::string>& variables);

  template <typename T>
  T eval(std::span<const T> slots) const;

  const Expr& expr() const { return expr_; }
  /// True if the expression does not reference any slot.
  bool is_constant() const { return constant_; }
  /// Slot indices the expression actually reads.
  const std::vector<int>& used_slots() const { return used_; }

 private:
  enum class Op : std::uint8_t {
    Const, Slot, Neg, Add, Sub, Mul, Div, PowInt, PowConst, Pow, Sin, Cos, Exp, Sqrt, Abs
  };
  struct Instr {
    Op op;
    int slot = 0;       // Slot index or integer exponent
    double value = 0.0; // Const value or real exponent
    int text = -1;      // index into texts_ for diagnostics
  };
  void compile(const Expr::Node& n, const std::vector<std::string>& variables);

  Expr expr_;
  std::vector<Instr> code_;
  std::vector<std::string> texts_;
  std::vector<int> used_;
  bool constant_ = true;
};

/// Canonical variable order x1..xm, y, z1..zk.
std::vector<std::string> jet_variable_names(int m, int k);

}  // namespace holo
