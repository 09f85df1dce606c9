#include "holo/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

namespace holo {

ParseError::ParseError(const std::string& message, int line, int column,
                       std::vector<std::string> expected)
    : Error([&] {
        std::string s = "parse error at " + std::to_string(line) + ":" + std::to_string(column) +
                        ": " + message;
        if (!expected.empty()) {
          s += " (expected ";
          for (std::size_t i = 0; i < expected.size(); ++i) s += (i ? ", " : "") + expected[i];
          s += ")";
        }
        return s;
      }()),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

const std::set<std::string> kFunctions = {"sin", "cos", "exp", "sqrt", "abs"};

bool indexed_name(std::string_view s, char prefix) {
  if (s.size() < 2 || s[0] != prefix || s[1] == '0') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_variable_name(std::string_view s) {
  return s == "y" || indexed_name(s, 'x') || indexed_name(s, 'z');
}

NodePtr make(Expr::Kind k, std::vector<NodePtr> kids = {}, std::string name = {}, double num = 0.0) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->kids = std::move(kids);
  n->name = std::move(name);
  n->number = num;
  return n;
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) { advance(); }

  NodePtr parse_all() {
    NodePtr e = parse_expr();
    if (tok_.kind != Tok::End) fail("unexpected '" + tok_.text + "'", {"operator", "end of input"});
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) {
    throw ParseError(msg, tok_.line, tok_.column, std::move(expected));
  }

  static std::vector<std::string> operand_start() { return {"number", "identifier", "'('", "'-'"}; }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
    tok_ = Token{Tok::End, "end of input", 0.0, line_, col_};
    if (pos_ >= src_.size()) return;
    const char c = src_[pos_];
    const std::size_t start = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t p = pos_;
      while (p < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[p])) || src_[p] == '.')) ++p;
      if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
        std::size_t q = p + 1;
        if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
        if (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) {
          while (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) ++q;
          p = q;
        }
      }
      std::string text(src_.substr(start, p - start));
      double v = 0.0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        tok_.text = text;
        fail("malformed number '" + text + "'", {"number"});
      }
      tok_ = Token{Tok::Number, text, v, line_, col_};
      col_ += int(p - pos_);
      pos_ = p;
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t p = pos_;
      while (p < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[p])) || src_[p] == '_')) ++p;
      tok_ = Token{Tok::Ident, std::string(src_.substr(start, p - start)), 0.0, line_, col_};
      col_ += int(p - pos_);
      pos_ = p;
      return;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      default:
        tok_.text = std::string(1, c);
        fail("unexpected character '" + std::string(1, c) + "'", operand_start());
    }
    tok_ = Token{k, std::string(1, c), 0.0, line_, col_};
    ++pos_;
    ++col_;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const Expr::Kind k = tok_.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub;
      advance();
      lhs = make(k, {lhs, parse_term()});
    }
    return lhs;
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const Expr::Kind k = tok_.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div;
      advance();
      lhs = make(k, {lhs, parse_unary()});
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return make(Expr::Kind::Neg, {parse_unary()});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (tok_.kind == Tok::Caret) {
      advance();
      return make(Expr::Kind::Pow, {base, parse_unary()});
    }
    return base;
  }

  NodePtr parse_primary() {
    if (tok_.kind == Tok::Number) {
      const double v = tok_.number;
      advance();
      return make(Expr::Kind::Number, {}, {}, v);
    }
    if (tok_.kind == Tok::LParen) {
      advance();
      NodePtr e = parse_expr();
      if (tok_.kind != Tok::RParen) fail("unbalanced parenthesis", {"')'"});
      advance();
      return e;
    }
    if (tok_.kind == Tok::Ident) {
      const std::string name = tok_.text;
      if (kFunctions.count(name)) {
        advance();
        if (tok_.kind != Tok::LParen) fail("function '" + name + "' needs an argument", {"'('"});
        advance();
        NodePtr arg = parse_expr();
        if (tok_.kind != Tok::RParen) fail("unbalanced parenthesis", {"')'"});
        advance();
        return make(Expr::Kind::Call, {arg}, name);
      }
      if (name == "pi") {
        advance();
        return make(Expr::Kind::Pi);
      }
      if (is_variable_name(name)) {
        advance();
        return make(Expr::Kind::Variable, {}, name);
      }
      fail("unknown identifier '" + name + "'", {"x<i>", "y", "z<i>", "pi", "sin", "cos", "exp", "sqrt", "abs"});
    }
    if (tok_.kind == Tok::End) fail("unexpected end of input", operand_start());
    fail("unexpected '" + tok_.text + "'", operand_start());
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

int precedence(const Expr::Node& n) {
  switch (n.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Pow: return 4;
    default: return 5;
  }
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void render(const Expr::Node& n, std::string& out) {
  auto child = [&](const Expr::Node& c, bool parens) {
    if (parens) out += '(';
    render(c, out);
    if (parens) out += ')';
  };
  const int p = precedence(n);
  switch (n.kind) {
    case Expr::Kind::Number: out += format_number(n.number); break;
    case Expr::Kind::Variable: out += n.name; break;
    case Expr::Kind::Pi: out += "pi"; break;
    case Expr::Kind::Neg:
      out += '-';
      child(*n.kids[0], precedence(*n.kids[0]) < p);
      break;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      static const char ops[] = {'+', '-', '*', '/'};
      child(*n.kids[0], precedence(*n.kids[0]) < p);
      out += ' ';
      out += ops[int(n.kind) - int(Expr::Kind::Add)];
      out += ' ';
      child(*n.kids[1], precedence(*n.kids[1]) <= p);
      break;
    }
    case Expr::Kind::Pow:
      child(*n.kids[0], precedence(*n.kids[0]) <= p);
      out += '^';
      child(*n.kids[1], precedence(*n.kids[1]) < 3);
      break;
    case Expr::Kind::Call:
      out += n.name;
      out += '(';
      render(*n.kids[0], out);
      out += ')';
      break;
  }
}

bool same(const Expr::Node& a, const Expr::Node& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size()) return false;
  if (a.kind == Expr::Kind::Number && a.number != b.number) return false;
  if (a.name != b.name) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!same(*a.kids[i], *b.kids[i])) return false;
  return true;
}

void collect(const Expr::Node& n, std::set<std::string>& out) {
  if (n.kind == Expr::Kind::Variable) out.insert(n.name);
  for (const auto& k : n.kids) collect(*k, out);
}

std::string node_text(const Expr::Node& n) {
  std::string s;
  render(n, s);
  return s;
}

}  // namespace

Expr Expr::parse(std::string_view source) { return Expr(Parser(source).parse_all()); }

Expr Expr::number(double v) { return Expr(make(Kind::Number, {}, {}, v)); }

Expr Expr::variable(const std::string& name) {
  if (!is_variable_name(name)) throw Error("not a variable name: " + name);
  return Expr(make(Kind::Variable, {}, name));
}

std::string Expr::to_string() const { return node_text(*root_); }

std::set<std::string> Expr::free_variables() const {
  std::set<std::string> out;
  collect(*root_, out);
  return out;
}

bool operator==(const Expr& a, const Expr& b) {
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return same(*a.root_, *b.root_);
}

double Expr::eval(const std::map<std::string, double>& point) const {
  std::vector<std::string> names;
  std::vector<double> values;
  for (const auto& v : free_variables()) {
    auto it = point.find(v);
    if (it == point.end()) throw EvalError("unbound variable '" + v + "'", to_string());
    names.push_back(v);
    values.push_back(it->second);
  }
  return BoundExpr(*this, names).eval<double>(values);
}

Dual Expr::eval_dual(const std::map<std::string, double>& point,
                     const std::vector<std::string>& active) const {
  std::vector<std::string> names;
  std::vector<Dual> values;
  for (const auto& v : free_variables()) {
    auto it = point.find(v);
    if (it == point.end()) throw EvalError("unbound variable '" + v + "'", to_string());
    names.push_back(v);
    auto a = std::find(active.begin(), active.end(), v);
    if (a == active.end()) {
      values.emplace_back(it->second);
    } else {
      values.push_back(Dual::variable(it->second, std::size_t(a - active.begin()), active.size()));
    }
  }
  Dual r = BoundExpr(*this, names).eval<Dual>(values);
  // Always report one partial per active variable.
  std::vector<double> p(active.size());
  for (std::size_t i = 0; i < active.size(); ++i) p[i] = r.partial(i);
  return Dual(r.value(), std::move(p));
}

std::vector<std::string> jet_variable_names(int m, int k) {
  std::vector<std::string> v;
  for (int i = 1; i <= m; ++i) v.push_back("x" + std::to_string(i));
  v.push_back("y");
  for (int i = 1; i <= k; ++i) v.push_back("z" + std::to_string(i));
  return v;
}

BoundExpr::BoundExpr(const Expr& e, const std::vector<std::string>& variables) : expr_(e) {
  compile(e.root(), variables);
  std::sort(used_.begin(), used_.end());
  used_.erase(std::unique(used_.begin(), used_.end()), used_.end());
  constant_ = used_.empty();
}

void BoundExpr::compile(const Expr::Node& n, const std::vector<std::string>& variables) {
  auto emit = [&](Op op, int slot = 0, double value = 0.0) {
    texts_.push_back(node_text(n));
    code_.push_back(Instr{op, slot, value, int(texts_.size()) - 1});
  };
  switch (n.kind) {
    case Expr::Kind::Number: emit(Op::Const, 0, n.number); return;
    case Expr::Kind::Pi: emit(Op::Const, 0, std::numbers::pi); return;
    case Expr::Kind::Variable: {
      auto it = std::find(variables.begin(), variables.end(), n.name);
      if (it == variables.end()) throw EvalError("unbound variable '" + n.name + "'", n.name);
      const int slot = int(it - variables.begin());
      used_.push_back(slot);
      emit(Op::Slot, slot);
      return;
    }
    case Expr::Kind::Neg:
      compile(*n.kids[0], variables);
      emit(Op::Neg);
      return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
    case Expr::Kind::Mul:
    case Expr::Kind::Div: {
      compile(*n.kids[0], variables);
      compile(*n.kids[1], variables);
      static const Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
      emit(ops[int(n.kind) - int(Expr::Kind::Add)]);
      return;
    }
    case Expr::Kind::Pow: {
      compile(*n.kids[0], variables);
      std::set<std::string> exponent_vars;
      collect(*n.kids[1], exponent_vars);
      if (exponent_vars.empty()) {
        const double p = BoundExpr(Expr::parse(node_text(*n.kids[1])), {}).eval<double>({});
        if (p == std::floor(p) && std::abs(p) <= 1024) {
          emit(Op::PowInt, int(p));
        } else {
          emit(Op::PowConst, 0, p);
        }
        return;
      }
      compile(*n.kids[1], variables);
      emit(Op::Pow);
      return;
    }
    case Expr::Kind::Call: {
      compile(*n.kids[0], variables);
      static const std::map<std::string, Op> fns = {
          {"sin", Op::Sin}, {"cos", Op::Cos}, {"exp", Op::Exp}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};
      emit(fns.at(n.name));
      return;
    }
  }
}

namespace {

double ipow_double(double x, int p) { return std::pow(x, double(p)); }
Dual ipow_dual(const Dual& x, int p) {
  if (p == 0) return Dual(1.0);
  return pow(x, double(p));
}

template <typename T>
T integer_power(const T& x, int p) {
  if constexpr (std::is_same_v<T, double>) {
    return ipow_double(x, p);
  } else if constexpr (std::is_same_v<T, Dual>) {
    return ipow_dual(x, p);
  } else {
    return ipow(x, p);
  }
}

template <typename T>
T real_power(const T& x, double p) {
  if constexpr (std::is_same_v<T, double>) {
    return std::pow(x, p);
  } else {
    return pow(x, p);
  }
}

}  // namespace

template <typename T>
T BoundExpr::eval(std::span<const T> slots) const {
  using std::abs, std::cos, std::exp, std::log, std::sin, std::sqrt;
  constexpr bool plain = std::is_same_v<T, double>;
  std::vector<T> st;
  st.reserve(code_.size());
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: st.emplace_back(in.value); break;
      case Op::Slot:
        if (std::size_t(in.slot) >= slots.size())
          throw EvalError("unbound variable slot " + std::to_string(in.slot), texts_[std::size_t(in.text)]);
        st.push_back(slots[std::size_t(in.slot)]);
        break;
      case Op::Neg: st.back() = -st.back(); break;
      case Op::Add: {
        T r = st.back();
        st.pop_back();
        st.back() = st.back() + r;
        break;
      }
      case Op::Sub: {
        T r = st.back();
        st.pop_back();
        st.back() = st.back() - r;
        break;
      }
      case Op::Mul: {
        T r = st.back();
        st.pop_back();
        st.back() = st.back() * r;
        break;
      }
      case Op::Div: {
        T r = st.back();
        st.pop_back();
        if (value_of(r) == 0.0) throw EvalError("division by zero", texts_[std::size_t(in.text)]);
        st.back() = st.back() / r;
        break;
      }
      case Op::PowInt:
        if (in.slot < 0 && value_of(st.back()) == 0.0)
          throw EvalError("negative power of zero", texts_[std::size_t(in.text)]);
        st.back() = integer_power(st.back(), in.slot);
        break;
      case Op::PowConst: {
        const double b = value_of(st.back());
        if (b < 0.0 || (b == 0.0 && (!plain || in.value < 0.0)))
          throw EvalError("non-integer power of a non-positive base", texts_[std::size_t(in.text)]);
        st.back() = real_power(st.back(), in.value);
        break;
      }
      case Op::Pow: {
        T e = st.back();
        st.pop_back();
        if (value_of(st.back()) <= 0.0)
          throw EvalError("variable power of a non-positive base", texts_[std::size_t(in.text)]);
        st.back() = exp(e * log(st.back()));
        break;
      }
      case Op::Sin: st.back() = sin(st.back()); break;
      case Op::Cos: st.back() = cos(st.back()); break;
      case Op::Exp: st.back() = exp(st.back()); break;
      case Op::Sqrt: {
        const double v = value_of(st.back());
        if (v < 0.0 || (v == 0.0 && !plain))
          throw EvalError("square root of a non-positive value", texts_[std::size_t(in.text)]);
        st.back() = sqrt(st.back());
        break;
      }
      case Op::Abs: st.back() = abs(st.back()); break;
    }
  }
  return st.back();
}

template double BoundExpr::eval<double>(std::span<const double>) const;
template Dual BoundExpr::eval<Dual>(std::span<const Dual>) const;
template Taylor BoundExpr::eval<Taylor>(std::span<const Taylor>) const;

}  // namespace holo
