#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rmap::expr {

enum class BinOp { Add, Sub, Mul, Div };
enum class Func { Sin, Cos, Tan, Exp, Log, Sqrt };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// Immutable AST node.  Trees are shared freely; nothing mutates them after
// parsing.
struct Node {
  enum class Kind { Number, Coord, Neg, Bin, Call, Pow };

  Kind kind;
  double number = 0.0;    // Kind::Number
  char named = 0;         // 'p' for pi, 'e' for e, 0 for a literal
  int coord = -1;         // Kind::Coord, index into the coordinate list
  BinOp op = BinOp::Add;  // Kind::Bin
  Func fn = Func::Sin;    // Kind::Call
  int exponent = 0;       // Kind::Pow
  NodePtr a, b;
  std::size_t offset = 0;  // byte offset of this node in the source text
};

// First- and second-order jets of a scalar function at a point.
struct Jet1 {
  double value = 0.0;
  Eigen::VectorXd grad;
};

struct Jet2 {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;  // symmetric by construction
};

// A scalar function of chart coordinates, parsed from text.
//
// Grammar (see docs/expr_grammar.ebnf): + - * / ^ with the usual precedence,
// ^ binding tightest and right-associative, then unary minus, then * /, then
// + -.  Functions sin cos tan exp log sqrt, constants pi and e.  Exponents
// must fold to integer constants at parse time; the one extension is a
// positive constant base (e.g. e^w), which is rewritten to exp() internally.
class ScalarField {
 public:
  ScalarField() = default;

  // Throws Error{Parse, UnknownIdentifier} with a byte offset on bad input.
  static ScalarField parse(std::string_view text,
                           const std::vector<std::string>& coords);
  static ScalarField constant(double value, int dim);

  bool valid() const { return root_ != nullptr; }
  int dim() const { return dim_; }

  // Evaluation throws Error{Domain} naming the offending subexpression when
  // the point leaves the function's domain or the result is non-finite.
  double eval(const Eigen::VectorXd& p) const;
  Jet1 jet1(const Eigen::VectorXd& p) const;
  Jet2 jet2(const Eigen::VectorXd& p) const;

  // Prints a form that reparses to an expression with identical values.
  std::string to_string() const;

  // True when the tree is the literal 0 (used to skip zero rows cheaply).
  bool is_literal_zero() const;

 private:
  NodePtr root_;
  std::shared_ptr<const std::vector<std::string>> coords_;
  int dim_ = 0;
};

std::string print_node(const NodePtr& node);

}  // namespace rmap::expr
