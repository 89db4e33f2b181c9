#include "rmap/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>

#include "rmap/dual.hpp"
#include "rmap/error.hpp"

namespace rmap::expr {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kE = 2.71828182845904523536;

// ---------------------------------------------------------------- lexing --

struct Token {
  enum class Kind { Number, Ident, Op, LParen, RParen, End };
  Kind kind;
  double number = 0.0;
  std::string ident;
  char op = 0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok_.offset = pos_;
    if (pos_ >= text_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.data() + pos_;
      char* end = nullptr;
      double value = std::strtod(begin, &end);
      if (end == begin)
        fail_at(ErrorKind::Parse, "malformed number at offset " + std::to_string(pos_), pos_);
      tok_.kind = Token::Kind::Number;
      tok_.number = value;
      pos_ += static_cast<std::size_t>(end - begin);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      tok_.kind = Token::Kind::Ident;
      tok_.ident = std::string(text_.substr(start, pos_ - start));
      return;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        tok_.kind = Token::Kind::Op;
        tok_.op = c;
        ++pos_;
        return;
      case '(':
        tok_.kind = Token::Kind::LParen;
        ++pos_;
        return;
      case ')':
        tok_.kind = Token::Kind::RParen;
        ++pos_;
        return;
      default:
        fail_at(ErrorKind::Parse,
                std::string("unexpected character '") + c + "' at offset " + std::to_string(pos_),
                pos_);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  Token tok_;
};

// --------------------------------------------------------------- parsing --

std::optional<Func> function_named(const std::string& name) {
  if (name == "sin") return Func::Sin;
  if (name == "cos") return Func::Cos;
  if (name == "tan") return Func::Tan;
  if (name == "exp") return Func::Exp;
  if (name == "log") return Func::Log;
  if (name == "sqrt") return Func::Sqrt;
  return std::nullopt;
}

NodePtr make_number(double value, char named, std::size_t offset) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->number = value;
  n->named = named;
  n->offset = offset;
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& coords)
      : lex_(text), coords_(coords) {}

  NodePtr parse() {
    NodePtr root = sum();
    const Token& t = lex_.peek();
    if (t.kind != Token::Kind::End)
      fail_at(ErrorKind::Parse, "unexpected trailing input at offset " + std::to_string(t.offset),
              t.offset);
    return root;
  }

 private:
  NodePtr sum() {
    NodePtr lhs = product();
    while (lex_.peek().kind == Token::Kind::Op &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      Token t = lex_.take();
      NodePtr rhs = product();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Bin;
      n->op = t.op == '+' ? BinOp::Add : BinOp::Sub;
      n->a = lhs;
      n->b = rhs;
      n->offset = t.offset;
      lhs = n;
    }
    return lhs;
  }

  NodePtr product() {
    NodePtr lhs = factor();
    while (lex_.peek().kind == Token::Kind::Op &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      Token t = lex_.take();
      NodePtr rhs = factor();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Bin;
      n->op = t.op == '*' ? BinOp::Mul : BinOp::Div;
      n->a = lhs;
      n->b = rhs;
      n->offset = t.offset;
      lhs = n;
    }
    return lhs;
  }

  // Unary minus sits below ^ so that -x^2 is -(x^2).
  NodePtr factor() {
    if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '-') {
      Token t = lex_.take();
      NodePtr inner = factor();
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Neg;
      n->a = inner;
      n->offset = t.offset;
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (lex_.peek().kind == Token::Kind::Op && lex_.peek().op == '^') {
      Token t = lex_.take();
      // The exponent is parsed one level up (factor) so chains like 2^3^2
      // associate to the right and a leading minus is accepted.
      NodePtr exp_tree = factor();
      return make_pow(base, exp_tree, t.offset);
    }
    return base;
  }

  NodePtr atom() {
    Token t = lex_.take();
    switch (t.kind) {
      case Token::Kind::Number:
        return make_number(t.number, 0, t.offset);
      case Token::Kind::LParen: {
        NodePtr inner = sum();
        const Token& close = lex_.peek();
        if (close.kind != Token::Kind::RParen)
          fail_at(ErrorKind::Parse, "expected ')' at offset " + std::to_string(close.offset),
                  close.offset);
        lex_.take();
        return inner;
      }
      case Token::Kind::Ident: {
        if (lex_.peek().kind == Token::Kind::LParen) {
          auto fn = function_named(t.ident);
          if (!fn)
            fail_at(ErrorKind::UnknownIdentifier,
                    "unknown function '" + t.ident + "' at offset " + std::to_string(t.offset),
                    t.offset);
          lex_.take();
          NodePtr arg = sum();
          const Token& close = lex_.peek();
          if (close.kind != Token::Kind::RParen)
            fail_at(ErrorKind::Parse, "expected ')' at offset " + std::to_string(close.offset),
                    close.offset);
          lex_.take();
          auto n = std::make_shared<Node>();
          n->kind = Node::Kind::Call;
          n->fn = *fn;
          n->a = arg;
          n->offset = t.offset;
          return n;
        }
        if (t.ident == "pi") return make_number(kPi, 'p', t.offset);
        if (t.ident == "e") return make_number(kE, 'e', t.offset);
        for (std::size_t i = 0; i < coords_.size(); ++i) {
          if (coords_[i] == t.ident) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Coord;
            n->coord = static_cast<int>(i);
            n->offset = t.offset;
            return n;
          }
        }
        fail_at(ErrorKind::UnknownIdentifier,
                "unknown identifier '" + t.ident + "' at offset " + std::to_string(t.offset),
                t.offset);
      }
      default:
        fail_at(ErrorKind::Parse,
                "unexpected token at offset " + std::to_string(t.offset), t.offset);
    }
  }

  // ^ is restricted to exponents that fold to integer constants, except that
  // a positive constant base (e^w, 2^x) is lowered to exp(exponent*log(base)).
  NodePtr make_pow(NodePtr base, NodePtr exp_tree, std::size_t offset) {
    if (auto k = fold_integer(exp_tree)) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Pow;
      n->exponent = *k;
      n->a = base;
      n->offset = offset;
      return n;
    }
    if (base->kind == Node::Kind::Number && base->number > 0.0) {
      NodePtr scaled;
      if (base->named == 'e') {
        scaled = exp_tree;  // e^x is exactly exp(x)
      } else {
        auto mul = std::make_shared<Node>();
        mul->kind = Node::Kind::Bin;
        mul->op = BinOp::Mul;
        mul->a = make_number(std::log(base->number), 0, base->offset);
        mul->b = exp_tree;
        mul->offset = offset;
        scaled = mul;
      }
      auto call = std::make_shared<Node>();
      call->kind = Node::Kind::Call;
      call->fn = Func::Exp;
      call->a = scaled;
      call->offset = offset;
      return call;
    }
    fail_at(ErrorKind::Parse,
            "exponent at offset " + std::to_string(exp_tree->offset) +
                " must be an integer constant (or the base a positive constant); "
                "write general powers with exp/log",
            exp_tree->offset);
  }

  // Returns the exponent when the subtree is constant and integral.
  std::optional<int> fold_integer(const NodePtr& n) {
    if (!is_constant(n)) return std::nullopt;
    double v = eval_constant(n);
    double r = std::round(v);
    if (std::abs(v - r) > 1e-12 || std::abs(r) > 1e9) return std::nullopt;
    return static_cast<int>(r);
  }

  static bool is_constant(const NodePtr& n) {
    switch (n->kind) {
      case Node::Kind::Number: return true;
      case Node::Kind::Coord: return false;
      case Node::Kind::Neg: return is_constant(n->a);
      case Node::Kind::Pow: return is_constant(n->a);
      case Node::Kind::Bin: return is_constant(n->a) && is_constant(n->b);
      case Node::Kind::Call: return is_constant(n->a);
    }
    return false;
  }

  static double eval_constant(const NodePtr& n);

  Lexer lex_;
  const std::vector<std::string>& coords_;
};

// ------------------------------------------------------------- printing --

int precedence(const Node& n) {
  switch (n.kind) {
    case Node::Kind::Bin:
      return (n.op == BinOp::Add || n.op == BinOp::Sub) ? 1 : 2;
    case Node::Kind::Neg:
      return 3;
    case Node::Kind::Pow:
      return 4;
    default:
      return 5;
  }
}

std::string format_number(double v, char named) {
  if (named == 'p') return "pi";
  if (named == 'e') return "e";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void print_rec(const NodePtr& n, std::string& out) {
  auto child = [&](const NodePtr& c, int min_prec) {
    if (precedence(*c) < min_prec) {
      out += '(';
      print_rec(c, out);
      out += ')';
    } else {
      print_rec(c, out);
    }
  };
  switch (n->kind) {
    case Node::Kind::Number:
      if (n->number < 0) {
        out += '(' + format_number(n->number, n->named) + ')';
      } else {
        out += format_number(n->number, n->named);
      }
      break;
    case Node::Kind::Coord:
      out += "#" + std::to_string(n->coord);
      break;
    case Node::Kind::Neg:
      out += '-';
      child(n->a, 3);
      break;
    case Node::Kind::Bin: {
      char sym = n->op == BinOp::Add   ? '+'
                 : n->op == BinOp::Sub ? '-'
                 : n->op == BinOp::Mul ? '*'
                                       : '/';
      int prec = precedence(*n);
      child(n->a, prec);
      out += sym;
      // - and / are left-associative: parenthesize an equal-precedence rhs.
      child(n->b, n->op == BinOp::Sub || n->op == BinOp::Div ? prec + 1 : prec);
      break;
    }
    case Node::Kind::Call: {
      static const char* names[] = {"sin", "cos", "tan", "exp", "log", "sqrt"};
      out += names[static_cast<int>(n->fn)];
      out += '(';
      print_rec(n->a, out);
      out += ')';
      break;
    }
    case Node::Kind::Pow:
      child(n->a, 5);
      out += '^';
      if (n->exponent < 0) {
        out += '(' + std::to_string(n->exponent) + ')';
      } else {
        out += std::to_string(n->exponent);
      }
      break;
  }
}

// Printer used by evaluation errors; coordinate names are not carried by the
// tree, so a caller-provided name table substitutes them.
thread_local const std::vector<std::string>* g_print_coords = nullptr;

struct PrintCoordsGuard {
  explicit PrintCoordsGuard(const std::vector<std::string>* coords) : saved(g_print_coords) {
    g_print_coords = coords;
  }
  ~PrintCoordsGuard() { g_print_coords = saved; }
  const std::vector<std::string>* saved;
};

std::string print_with_coords(const NodePtr& n, const std::vector<std::string>* coords) {
  std::string raw;
  print_rec(n, raw);
  if (!coords) return raw;
  // Replace #k placeholders with coordinate names.
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '#') {
      std::size_t j = i + 1;
      int idx = 0;
      while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) {
        idx = idx * 10 + (raw[j] - '0');
        ++j;
      }
      out += (*coords)[static_cast<std::size_t>(idx)];
      i = j - 1;
    } else {
      out += raw[i];
    }
  }
  return out;
}

// ------------------------------------------------------------ evaluation --

[[noreturn]] void domain_error(const NodePtr& n, const std::string& what) {
  fail_at(ErrorKind::Domain,
          what + " in '" + print_with_coords(n, g_print_coords) + "' at offset " +
              std::to_string(n->offset),
          static_cast<std::ptrdiff_t>(n->offset));
}

template <class T>
T eval_node(const NodePtr& n, const std::vector<T>& vars) {
  switch (n->kind) {
    case Node::Kind::Number:
      return T(n->number);
    case Node::Kind::Coord:
      return vars[static_cast<std::size_t>(n->coord)];
    case Node::Kind::Neg:
      return -eval_node(n->a, vars);
    case Node::Kind::Bin: {
      T a = eval_node(n->a, vars);
      T b = eval_node(n->b, vars);
      switch (n->op) {
        case BinOp::Add: return a + b;
        case BinOp::Sub: return a - b;
        case BinOp::Mul: return a * b;
        case BinOp::Div:
          if (primal(b) == 0.0) domain_error(n, "division by zero");
          return a / b;
      }
      break;
    }
    case Node::Kind::Call: {
      T a = eval_node(n->a, vars);
      switch (n->fn) {
        case Func::Sin: return sin(a);
        case Func::Cos: return cos(a);
        case Func::Tan: return tan(a);
        case Func::Exp: return exp(a);
        case Func::Log:
          if (primal(a) <= 0.0) domain_error(n, "log of non-positive value");
          return log(a);
        case Func::Sqrt:
          if (primal(a) < 0.0) domain_error(n, "sqrt of negative value");
          return sqrt(a);
      }
      break;
    }
    case Node::Kind::Pow: {
      T a = eval_node(n->a, vars);
      if (n->exponent < 0 && primal(a) == 0.0)
        domain_error(n, "zero base with negative exponent");
      return pow_int(a, n->exponent);
    }
  }
  domain_error(n, "unreachable node kind");
}

double Parser::eval_constant(const NodePtr& n) {
  std::vector<double> none;
  return eval_node<double>(n, none);
}

template <class T>
T eval_checked(const NodePtr& root, const std::vector<T>& vars) {
  T r = eval_node(root, vars);
  if (!all_finite(r))
    fail_at(ErrorKind::Domain,
            "non-finite result evaluating '" + print_with_coords(root, g_print_coords) + "'",
            static_cast<std::ptrdiff_t>(root->offset));
  return r;
}

}  // namespace

// ------------------------------------------------------------ ScalarField --

ScalarField ScalarField::parse(std::string_view text, const std::vector<std::string>& coords) {
  Parser parser(text, coords);
  ScalarField f;
  f.root_ = parser.parse();
  f.coords_ = std::make_shared<const std::vector<std::string>>(coords);
  f.dim_ = static_cast<int>(coords.size());
  return f;
}

ScalarField ScalarField::constant(double value, int dim) {
  ScalarField f;
  if (value < 0) {
    auto neg = std::make_shared<Node>();
    neg->kind = Node::Kind::Neg;
    neg->a = make_number(-value, 0, 0);
    f.root_ = neg;
  } else {
    f.root_ = make_number(value, 0, 0);
  }
  f.dim_ = dim;
  return f;
}

double ScalarField::eval(const Eigen::VectorXd& p) const {
  if (p.size() != dim_)
    fail(ErrorKind::DimensionMismatch,
         "expression over " + std::to_string(dim_) + " coords evaluated at a point of dim " +
             std::to_string(p.size()));
  std::vector<double> vars(p.data(), p.data() + p.size());
  PrintCoordsGuard guard(coords_.get());
  return eval_checked(root_, vars);
}

Jet1 ScalarField::jet1(const Eigen::VectorXd& p) const {
  if (p.size() != dim_)
    fail(ErrorKind::DimensionMismatch, "jet1 point has wrong dimension");
  Jet1 out;
  out.grad.resize(dim_);
  PrintCoordsGuard guard(coords_.get());
  using D = Dual<double>;
  std::vector<D> vars(static_cast<std::size_t>(dim_));
  for (int dir = 0; dir < dim_; ++dir) {
    for (int k = 0; k < dim_; ++k) vars[static_cast<std::size_t>(k)] = D(p[k], k == dir ? 1.0 : 0.0);
    D r = eval_checked(root_, vars);
    out.value = r.v;
    out.grad[dir] = r.d;
  }
  if (dim_ == 0) out.value = eval_checked(root_, std::vector<double>{});
  return out;
}

Jet2 ScalarField::jet2(const Eigen::VectorXd& p) const {
  if (p.size() != dim_)
    fail(ErrorKind::DimensionMismatch, "jet2 point has wrong dimension");
  Jet2 out;
  out.grad.resize(dim_);
  out.hess.resize(dim_, dim_);
  PrintCoordsGuard guard(coords_.get());
  using D2 = Dual<Dual<double>>;
  std::vector<D2> vars(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      for (int k = 0; k < dim_; ++k) {
        D2 x;
        x.v = Dual<double>(p[k], k == j ? 1.0 : 0.0);
        x.d = Dual<double>(k == i ? 1.0 : 0.0, 0.0);
        vars[static_cast<std::size_t>(k)] = x;
      }
      D2 r = eval_checked(root_, vars);
      out.value = r.v.v;
      out.grad[j] = r.v.d;
      if (j == i) out.grad[i] = r.v.d;
      out.hess(i, j) = r.d.d;
      out.hess(j, i) = r.d.d;
    }
  }
  if (dim_ == 0) out.value = eval_checked(root_, std::vector<double>{});
  return out;
}

std::string ScalarField::to_string() const { return print_with_coords(root_, coords_.get()); }

bool ScalarField::is_literal_zero() const {
  return root_ && root_->kind == Node::Kind::Number && root_->number == 0.0;
}

std::string print_node(const NodePtr& node) { return print_with_coords(node, nullptr); }

}  // namespace rmap::expr
