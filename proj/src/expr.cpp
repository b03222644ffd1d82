#include "finsler/expr.hpp"

#include <algorithm>
#include <stdexcept>

#include "finsler/errors.hpp"

namespace finsler {

std::string Symbol::name() const {
  switch (kind) {
    case SymbolKind::x: return "x" + std::to_string(index + 1);
    case SymbolKind::y: return "y" + std::to_string(index + 1);
    case SymbolKind::u: return "u";
    case SymbolKind::r: return "r";
    case SymbolKind::s: return "s";
    case SymbolKind::v: return "v";
  }
  return "?";
}

Symbol Symbol::parse(const std::string& name) {
  if (name == "u") return {SymbolKind::u, 0};
  if (name == "r") return {SymbolKind::r, 0};
  if (name == "s") return {SymbolKind::s, 0};
  if (name == "v") return {SymbolKind::v, 0};
  if (name.size() == 2 && (name[0] == 'x' || name[0] == 'y') && name[1] >= '1' &&
      name[1] <= '0' + kMaxDim) {
    return {name[0] == 'x' ? SymbolKind::x : SymbolKind::y, name[1] - '1'};
  }
  throw ConfigError("unknown expression symbol '" + name + "'");
}

Expr Expr::make(ExprKind kind, std::vector<Expr> args, double value) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->value = value;
  node->args = std::move(args);
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr Expr::constant(double value) { return make(ExprKind::constant, {}, value); }

Expr Expr::symbol(Symbol sym) {
  auto node = std::make_shared<Node>();
  node->kind = ExprKind::symbol;
  node->sym = sym;
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr Expr::sqrt(Expr a) { return make(ExprKind::sqrt, {std::move(a)}); }
Expr Expr::pow(Expr a, double exponent) { return make(ExprKind::pow, {std::move(a)}, exponent); }

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(ExprKind::add, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(ExprKind::sub, {a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(ExprKind::mul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(ExprKind::div, {a, b}); }
Expr operator-(const Expr& a) { return Expr::make(ExprKind::neg, {a}); }

int Expr::max_coordinate_index() const {
  int m = -1;
  if (kind() == ExprKind::symbol && (sym().kind == SymbolKind::x || sym().kind == SymbolKind::y))
    m = sym().index;
  for (const auto& a : args()) m = std::max(m, a.max_coordinate_index());
  return m;
}

bool Expr::uses(SymbolKind k) const {
  if (kind() == ExprKind::symbol && sym().kind == k) return true;
  for (const auto& a : args())
    if (a.uses(k)) return true;
  return false;
}

bool Expr::depends_only_on_x() const {
  return !uses(SymbolKind::y) && !uses(SymbolKind::u) && !uses(SymbolKind::s) &&
         !uses(SymbolKind::v);
}

namespace {

struct OpName {
  const char* name;
  ExprKind kind;
  int arity;  // -1: variadic (>= 2)
};

constexpr OpName kOps[] = {
    {"add", ExprKind::add, -1}, {"sub", ExprKind::sub, 2},   {"mul", ExprKind::mul, -1},
    {"div", ExprKind::div, 2},  {"sqrt", ExprKind::sqrt, 1}, {"pow", ExprKind::pow, 1},
    {"neg", ExprKind::neg, 1},
};

}  // namespace

Expr parse_expr(const nlohmann::json& doc) {
  if (doc.is_number()) return Expr::constant(doc.get<double>());
  if (doc.is_string()) return Expr::symbol(doc.get<std::string>());
  if (!doc.is_object() || !doc.contains("op"))
    throw ConfigError("expression must be a number, a symbol name or an {\"op\": ...} object");
  const auto op = doc.at("op").get<std::string>();
  const auto it = std::find_if(std::begin(kOps), std::end(kOps),
                               [&](const OpName& o) { return op == o.name; });
  if (it == std::end(kOps)) throw ConfigError("unknown expression operator '" + op + "'");
  if (!doc.contains("args") || !doc.at("args").is_array())
    throw ConfigError("operator '" + op + "' needs an \"args\" array");
  std::vector<Expr> args;
  for (const auto& a : doc.at("args")) args.push_back(parse_expr(a));
  const int n = static_cast<int>(args.size());
  if (it->arity == -1 ? n < 2 : n != it->arity)
    throw ConfigError("operator '" + op + "' got " + std::to_string(n) + " arguments");
  switch (it->kind) {
    case ExprKind::add:
    case ExprKind::mul: {
      Expr acc = args[0];
      for (int k = 1; k < n; ++k) acc = it->kind == ExprKind::add ? acc + args[k] : acc * args[k];
      return acc;
    }
    case ExprKind::sub: return args[0] - args[1];
    case ExprKind::div: return args[0] / args[1];
    case ExprKind::neg: return -args[0];
    case ExprKind::sqrt: return Expr::sqrt(args[0]);
    case ExprKind::pow:
      if (!doc.contains("exponent") || !doc.at("exponent").is_number())
        throw ConfigError("pow needs a numeric \"exponent\"");
      return Expr::pow(args[0], doc.at("exponent").get<double>());
    default: break;
  }
  throw ConfigError("unsupported operator '" + op + "'");
}

nlohmann::json to_json(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant: return e.value();
    case ExprKind::symbol: return e.sym().name();
    default: break;
  }
  const char* name = "";
  for (const auto& o : kOps)
    if (o.kind == e.kind()) name = o.name;
  nlohmann::json args = nlohmann::json::array();
  for (const auto& a : e.args()) args.push_back(to_json(a));
  nlohmann::json out = {{"op", name}, {"args", args}};
  if (e.kind() == ExprKind::pow) out["exponent"] = e.value();
  return out;
}

double evaluate_scalar(const Expr& e, std::span<const double> x, std::span<const double> y) {
  ExprContext<double> ctx(x, y);
  const double v = evaluate(e, ctx);
  if (!std::isfinite(v)) throw DomainError("expression is not finite at the evaluation point");
  return v;
}

}  // namespace finsler
