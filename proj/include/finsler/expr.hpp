#pragma once

// Expression trees over the coordinate symbols x1..x4, y1..y4 and the
// rotation-invariant shorthands u = |y|, r = |x|, v = <x,y>, s = v/u.
// Shorthands are expanded to coordinate expressions at evaluation time, so
// derivatives of phi(r, s) with respect to y come out through the chain rule.

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/jet.hpp"

namespace finsler {

enum class ExprKind { constant, symbol, add, sub, mul, div, sqrt, pow, neg };

enum class SymbolKind { x, y, u, r, s, v };

struct Symbol {
  SymbolKind kind = SymbolKind::x;
  int index = 0;  // 0-based, only for x and y

  std::string name() const;
  static Symbol parse(const std::string& name);
  friend bool operator==(const Symbol&, const Symbol&) = default;
};

class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value);
  static Expr symbol(Symbol sym);
  static Expr symbol(const std::string& name) { return symbol(Symbol::parse(name)); }
  static Expr sqrt(Expr a);
  static Expr pow(Expr a, double exponent);

  ExprKind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  const Symbol& sym() const { return node_->sym; }
  const std::vector<Expr>& args() const { return node_->args; }

  /// Highest x/y coordinate index referenced (0-based), or -1.
  int max_coordinate_index() const;
  bool uses(SymbolKind kind) const;
  /// True iff the tree references no y-dependent symbol (y, u, s, v).
  bool depends_only_on_x() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  struct Node {
    ExprKind kind = ExprKind::constant;
    double value = 0.0;
    Symbol sym;
    std::vector<Expr> args;
  };
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Expr make(ExprKind kind, std::vector<Expr> args, double value = 0.0);

  std::shared_ptr<const Node> node_;
};

/// Nested operator objects: numbers are constants, strings are symbols,
/// {"op": "add"|"sub"|"mul"|"div"|"neg"|"sqrt", "args": [...]} and
/// {"op": "pow", "args": [base], "exponent": p}.
Expr parse_expr(const nlohmann::json& doc);
nlohmann::json to_json(const Expr& e);

/// Evaluation context: coordinate values plus lazily computed shorthands.
template <class T>
class ExprContext {
 public:
  ExprContext(std::span<const T> x, std::span<const T> y) : x_(x), y_(y) {}

  const T& x(int k) const { return x_[static_cast<std::size_t>(k)]; }
  const T& y(int k) const { return y_[static_cast<std::size_t>(k)]; }
  int dim() const { return static_cast<int>(x_.size()); }

  const T& u() {
    if (!u_) {
      using std::sqrt;
      u_ = sqrt(dot(y_, y_));
    }
    return *u_;
  }
  const T& r() {
    if (!r_) {
      using std::sqrt;
      r_ = sqrt(dot(x_, x_));
    }
    return *r_;
  }
  const T& v() {
    if (!v_) v_ = dot(x_, y_);
    return *v_;
  }
  const T& s() {
    if (!s_) s_ = v() / u();
    return *s_;
  }
  const T& r2() {
    if (!r2_) r2_ = dot(x_, x_);
    return *r2_;
  }
  const T& u2() {
    if (!u2_) u2_ = dot(y_, y_);
    return *u2_;
  }

 private:
  static T dot(std::span<const T> a, std::span<const T> b) {
    T acc = a[0] * b[0];
    for (std::size_t k = 1; k < a.size(); ++k) acc = acc + a[k] * b[k];
    return acc;
  }

  std::span<const T> x_;
  std::span<const T> y_;
  std::optional<T> u_, r_, v_, s_, r2_, u2_;
};

namespace detail {

inline double lift_constant(double c, const double&) { return c; }
inline Jet lift_constant(double c, const Jet& like) { return Jet::constant(like.config(), c); }

}  // namespace detail

template <class T>
T evaluate(const Expr& e, ExprContext<T>& ctx) {
  using std::pow;
  using std::sqrt;
  switch (e.kind()) {
    case ExprKind::constant:
      return detail::lift_constant(e.value(), ctx.x(0));
    case ExprKind::symbol: {
      const Symbol& s = e.sym();
      switch (s.kind) {
        case SymbolKind::x: return ctx.x(s.index);
        case SymbolKind::y: return ctx.y(s.index);
        case SymbolKind::u: return ctx.u();
        case SymbolKind::r: return ctx.r();
        case SymbolKind::s: return ctx.s();
        case SymbolKind::v: return ctx.v();
      }
      break;
    }
    case ExprKind::add: {
      T acc = evaluate(e.args()[0], ctx);
      for (std::size_t k = 1; k < e.args().size(); ++k) acc = acc + evaluate(e.args()[k], ctx);
      return acc;
    }
    case ExprKind::mul: {
      T acc = evaluate(e.args()[0], ctx);
      for (std::size_t k = 1; k < e.args().size(); ++k) acc = acc * evaluate(e.args()[k], ctx);
      return acc;
    }
    case ExprKind::sub: return evaluate(e.args()[0], ctx) - evaluate(e.args()[1], ctx);
    case ExprKind::div: return evaluate(e.args()[0], ctx) / evaluate(e.args()[1], ctx);
    case ExprKind::neg: return -evaluate(e.args()[0], ctx);
    case ExprKind::sqrt: return sqrt(evaluate(e.args()[0], ctx));
    case ExprKind::pow: return pow(evaluate(e.args()[0], ctx), e.value());
  }
  throw std::logic_error("unreachable expression kind");
}

/// Scalar evaluation with checks mirroring the jet path (zero divisor, negative sqrt).
double evaluate_scalar(const Expr& e, std::span<const double> x, std::span<const double> y);

}  // namespace finsler
