#include "qstate/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "qstate/partitions.hpp"

namespace qstate {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

struct Function {
  const char* name;
  std::size_t arity;
};

constexpr Function kFunctions[] = {
    {"sin", 1}, {"cos", 1}, {"exp", 1}, {"sqrt", 1}, {"abs", 1}, {"cap_bump", 4},
};

const Function* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprNode::Kind::kNumber;
  n->number = v;
  return n;
}

NodePtr make_node(ExprNode::Kind kind, std::vector<NodePtr> args, std::string name = {}) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->args = std::move(args);
  n->name = std::move(name);
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    skip_space();
    if (pos_ == src_.size()) fail("empty expression");
    NodePtr e = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(msg, pos_); }

  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(msg, line, column);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_node(ExprNode::Kind::kAdd, {lhs, term()});
      else if (accept('-')) lhs = make_node(ExprNode::Kind::kSub, {lhs, term()});
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make_node(ExprNode::Kind::kMul, {lhs, unary()});
      else if (accept('/')) lhs = make_node(ExprNode::Kind::kDiv, {lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(ExprNode::Kind::kNegate, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_node(ExprNode::Kind::kPow, {base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ == src_.size()) fail("expected an operand");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      }
    }
    double v = 0.0;
    const auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || end != src_.data() + pos_)
      fail_at("malformed number '" + std::string(src_.substr(start, pos_ - start)) + "'",
              start);
    return make_number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    if (name.size() == 1 && name[0] >= 'x' && name[0] <= 'z') {
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::kVariable;
      n->variable = name[0] - 'x';
      return n;
    }
    if (name == "pi") return make_number(std::numbers::pi);
    const Function* f = find_function(name);
    if (!f) fail_at("unknown identifier '" + name + "'", start);
    expect('(');
    std::vector<NodePtr> args;
    if (!accept(')')) {
      do {
        args.push_back(expr());
      } while (accept(','));
      expect(')');
    }
    if (args.size() != f->arity)
      fail_at(name + " takes " + std::to_string(f->arity) + " argument" +
                  (f->arity == 1 ? "" : "s") + ", got " + std::to_string(args.size()),
              start);
    return make_node(ExprNode::Kind::kCall, std::move(args), name);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double eval(const ExprNode& n, const Vec3& p) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::kNumber: return n.number;
    case K::kVariable: return n.variable == 0 ? p.x : n.variable == 1 ? p.y : p.z;
    case K::kNegate: return -eval(*n.args[0], p);
    case K::kAdd: return eval(*n.args[0], p) + eval(*n.args[1], p);
    case K::kSub: return eval(*n.args[0], p) - eval(*n.args[1], p);
    case K::kMul: return eval(*n.args[0], p) * eval(*n.args[1], p);
    case K::kDiv: return eval(*n.args[0], p) / eval(*n.args[1], p);
    case K::kPow: return std::pow(eval(*n.args[0], p), eval(*n.args[1], p));
    case K::kCall: break;
  }
  const double a = eval(*n.args[0], p);
  if (n.name == "sin") return std::sin(a);
  if (n.name == "cos") return std::cos(a);
  if (n.name == "exp") return std::exp(a);
  if (n.name == "sqrt") return std::sqrt(a);
  if (n.name == "abs") return std::abs(a);
  const Vec3 c{a, eval(*n.args[1], p), eval(*n.args[2], p)};
  const double r = eval(*n.args[3], p);
  if (!(r > 0.0) || norm(c) == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return cap_bump(p, c, r);
}

void print(const ExprNode& n, std::string& out) {
  using K = ExprNode::Kind;
  switch (n.kind) {
    case K::kNumber: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    }
    case K::kVariable:
      out += static_cast<char>('x' + n.variable);
      return;
    case K::kNegate:
      out += "(-";
      print(*n.args[0], out);
      out += ')';
      return;
    case K::kCall:
      out += n.name;
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], out);
      }
      out += ')';
      return;
    default: break;
  }
  const char* op = n.kind == K::kAdd   ? " + "
                   : n.kind == K::kSub ? " - "
                   : n.kind == K::kMul ? " * "
                   : n.kind == K::kDiv ? " / "
                                       : " ^ ";
  out += '(';
  print(*n.args[0], out);
  out += op;
  print(*n.args[1], out);
  out += ')';
}

}  // namespace

ParseError::ParseError(const std::string& message, int line, int column)
    : ArgumentError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      message_(message),
      line_(line),
      column_(column) {}

bool operator==(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case ExprNode::Kind::kNumber: return a.number == b.number;
    case ExprNode::Kind::kVariable: return a.variable == b.variable;
    case ExprNode::Kind::kCall:
      if (a.name != b.name) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!(*a.args[i] == *b.args[i])) return false;
  return true;
}

FieldExpression::FieldExpression(std::string source, std::shared_ptr<const ExprNode> root)
    : source_(std::move(source)), root_(std::move(root)) {
  if (!root_) throw ArgumentError("expression has no tree");
}

double FieldExpression::evaluate(const Vec3& p) const { return eval(*root_, p); }

std::string FieldExpression::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

FieldExpression parse_expression(std::string_view source) {
  return FieldExpression(std::string(source), Parser(source).parse());
}

ScalarField sample_expression(const MeshPtr& mesh, const FieldExpression& expr) {
  return sample_field(mesh, [&](const Vec3& p) { return expr.evaluate(p); });
}

}  // namespace qstate
