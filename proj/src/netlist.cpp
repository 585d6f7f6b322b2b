#include "slh/netlist.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "slh/text.hpp"

namespace slh {

namespace {

std::string located(SourceLocation w, const std::string& message) {
  return std::to_string(w.line) + ":" + std::to_string(w.column) + ": " + message;
}

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Number, Plus, Minus, Concat, Series, LParen, RParen, Comma, Equals, Newline, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  bool imaginary = false;  // number written with a trailing 'i'
  SourceLocation where;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
    default: return "'" + t.text + "'";
  }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  int depth = 0;  // newlines inside parentheses continue the statement
  auto advance = [&](std::size_t n) {
    i += n;
    col += static_cast<int>(n);
  };
  while (i < src.size()) {
    const char c = src[i];
    const SourceLocation here{line, col};
    if (c == '\n') {
      if (depth == 0) out.push_back({Tok::Newline, "\n", 0.0, false, here});
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), 0.0, false, here});
      advance(j - i);
      continue;
    }
    if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1]))) {
      std::size_t j = i;
      while (j < src.size() && digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k >= src.size() || !digit(src[k]))
          throw NetlistError({line, col + static_cast<int>(j - i)}, "malformed exponent in number");
        while (k < src.size() && digit(src[k])) ++k;
        j = k;
      }
      Token t{Tok::Number, std::string(src.substr(i, j - i)), 0.0, false, here};
      t.number = std::strtod(t.text.c_str(), nullptr);
      if (j < src.size() && src[j] == 'i' && !(j + 1 < src.size() && ident_char(src[j + 1]))) {
        t.imaginary = true;
        t.text += 'i';
        ++j;
      }
      if (j < src.size() && ident_char(src[j]))
        throw NetlistError({line, col + static_cast<int>(j - i)}, "unexpected character after number");
      out.push_back(std::move(t));
      advance(j - i);
      continue;
    }
    auto two = [&](std::string_view s) { return src.substr(i, 2) == s; };
    if (two("++")) {
      out.push_back({Tok::Concat, "++", 0.0, false, here});
      advance(2);
      continue;
    }
    if (two("<|")) {
      out.push_back({Tok::Series, "<|", 0.0, false, here});
      advance(2);
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '(': k = Tok::LParen; ++depth; break;
      case ')': k = Tok::RParen; depth = depth > 0 ? depth - 1 : 0; break;
      case ',': k = Tok::Comma; break;
      case '=': k = Tok::Equals; break;
      default: {
        const unsigned char u = static_cast<unsigned char>(c);
        std::string shown = u >= 0x80 ? "non-ASCII byte" : std::string("character '") + c + "'";
        throw NetlistError(here, "unexpected " + shown);
      }
    }
    out.push_back({k, std::string(1, c), 0.0, false, here});
    advance(1);
  }
  out.push_back({Tok::End, "", 0.0, false, {line, col}});
  return out;
}

// ---------------------------------------------------------------------------
// Parser

enum class Symbol { Mode, Param, Component };

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  NetlistAst run() {
    bool have_network = false;
    while (peek().kind != Tok::End) {
      if (accept(Tok::Newline)) continue;
      const Token& kw = expect(Tok::Ident, "a statement keyword");
      if (kw.text == "mode") {
        const Token& name = declare(Symbol::Mode);
        ast_.modes.push_back({name.text, name.where});
      } else if (kw.text == "param") {
        const Token& name = declare(Symbol::Param);
        expect(Tok::Equals, "'='");
        const SourceLocation at = peek().where;
        const Complex v = literal();
        ast_.params.push_back({name.text, v, format_complex_literal(v), at});
      } else if (kw.text == "comp") {
        const Token& name = declare(Symbol::Component);
        expect(Tok::Equals, "'='");
        ast_.components.push_back(primitive(name));
      } else if (kw.text == "network") {
        if (have_network) throw NetlistError(kw.where, "network is defined more than once");
        have_network = true;
        ast_.network_where = kw.where;
        expect(Tok::Equals, "'='");
        ast_.network = expr();
      } else {
        throw NetlistError(kw.where, "unknown statement '" + kw.text + "' (expected mode, param, comp or network)");
      }
      end_of_statement();
    }
    if (!have_network) throw NetlistError(peek().where, "missing 'network = ...' statement");
    return std::move(ast_);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  const Token& expect(Tok k, const std::string& what) {
    if (peek().kind != k) throw NetlistError(peek().where, "expected " + what + ", found " + describe(peek()));
    return next();
  }
  void end_of_statement() {
    if (peek().kind != Tok::Newline && peek().kind != Tok::End)
      throw NetlistError(peek().where, "expected end of line, found " + describe(peek()));
  }

  const Token& declare(Symbol kind) {
    const Token& name = expect(Tok::Ident, "an identifier");
    static const std::set<std::string> reserved{"mode", "param", "comp", "network"};
    if (reserved.count(name.text) || primitive_from_name(name.text))
      throw NetlistError(name.where, "'" + name.text + "' is a reserved word");
    if (symbols_.count(name.text)) throw NetlistError(name.where, "'" + name.text + "' is already declared");
    symbols_[name.text] = kind;
    return name;
  }

  // [sign] number[i] [(+|-) number i]
  Complex literal() {
    double sign = 1.0;
    if (accept(Tok::Minus)) sign = -1.0;
    else accept(Tok::Plus);
    const Token& first = expect(Tok::Number, "a number");
    Complex v = first.imaginary ? Complex(0.0, sign * first.number) : Complex(sign * first.number, 0.0);
    if (!first.imaginary && (peek().kind == Tok::Plus || peek().kind == Tok::Minus) &&
        toks_[pos_ + 1].kind == Tok::Number && toks_[pos_ + 1].imaginary) {
      const double s2 = next().kind == Tok::Minus ? -1.0 : 1.0;
      v += Complex(0.0, s2 * next().number);
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NetlistError(first.where, "number out of range");
    return v;
  }

  ComponentDecl primitive(const Token& name) {
    const Token& kind_tok = expect(Tok::Ident, "a primitive kind");
    const auto kind = primitive_from_name(kind_tok.text);
    if (!kind)
      throw NetlistError(kind_tok.where, "unknown primitive '" + kind_tok.text +
                                             "' (expected mirror, loss_mirror, drive, phase, passthrough or beamsplitter)");
    ComponentDecl c{name.text, *kind, {}, name.where};
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      do {
        c.args.push_back(argument(*kind, c.args.size()));
      } while (accept(Tok::Comma));
    }
    const Token& close = expect(Tok::RParen, "')' or ','");
    if (c.args.size() != primitive_arity(*kind))
      throw NetlistError(close.where, std::string(primitive_name(*kind)) + " takes " +
                                          std::to_string(primitive_arity(*kind)) + " argument(s), got " +
                                          std::to_string(c.args.size()));
    return c;
  }

  Argument argument(PrimitiveKind kind, std::size_t index) {
    const bool wants_mode = (kind == PrimitiveKind::Mirror || kind == PrimitiveKind::LossMirror) && index == 0;
    Argument a;
    a.where = peek().where;
    if (peek().kind == Tok::Ident) {
      const Token& id = next();
      const auto it = symbols_.find(id.text);
      if (it == symbols_.end()) throw NetlistError(id.where, "unknown identifier '" + id.text + "'");
      if (wants_mode && it->second != Symbol::Mode)
        throw NetlistError(id.where, "'" + id.text + "' is not a mode");
      if (!wants_mode && it->second != Symbol::Param)
        throw NetlistError(id.where, "'" + id.text + "' is not a parameter");
      a.kind = Argument::Kind::Identifier;
      a.text = id.text;
      return a;
    }
    if (wants_mode) throw NetlistError(a.where, "expected a mode name, found " + describe(peek()));
    a.kind = Argument::Kind::Literal;
    a.value = literal();
    a.text = format_complex_literal(a.value);
    return a;
  }

  NetworkExpr expr() { return chain(Tok::Concat, NetworkExpr::Kind::Concat, [this] { return term(); }); }
  NetworkExpr term() { return chain(Tok::Series, NetworkExpr::Kind::Series, [this] { return factor(); }); }

  template <class Sub>
  NetworkExpr chain(Tok op, NetworkExpr::Kind kind, Sub sub) {
    const SourceLocation start = peek().where;
    NetworkExpr first = sub();
    if (peek().kind != op) return first;
    NetworkExpr node;
    node.kind = kind;
    node.where = start;
    node.operands.push_back(std::move(first));
    while (peek().kind == op) {
      node.operator_locations.push_back(next().where);
      node.operands.push_back(sub());
    }
    return node;
  }

  NetworkExpr factor() {
    if (peek().kind == Tok::LParen) {
      next();
      NetworkExpr inner = expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    const Token& id = expect(Tok::Ident, "a component name or '('");
    if (primitive_from_name(id.text)) {
      --pos_;
      NetworkExpr e;
      e.kind = NetworkExpr::Kind::Inline;
      e.where = id.where;
      e.primitive = primitive(Token{Tok::Ident, "", 0.0, false, id.where});
      return e;
    }
    const auto it = symbols_.find(id.text);
    if (it == symbols_.end()) throw NetlistError(id.where, "unknown identifier '" + id.text + "'");
    if (it->second != Symbol::Component) throw NetlistError(id.where, "'" + id.text + "' is not a component");
    NetworkExpr e;
    e.kind = NetworkExpr::Kind::Ref;
    e.name = id.text;
    e.where = id.where;
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, Symbol> symbols_;
  NetlistAst ast_;
};

// ---------------------------------------------------------------------------
// Printer

void print_primitive(std::ostream& os, const ComponentDecl& c) {
  os << primitive_name(c.kind) << '(';
  for (std::size_t k = 0; k < c.args.size(); ++k) {
    if (k) os << ", ";
    os << c.args[k].text;
  }
  os << ')';
}

void print_expr(std::ostream& os, const NetworkExpr& e, bool nested) {
  if (e.kind == NetworkExpr::Kind::Ref) {
    os << e.name;
    return;
  }
  if (e.kind == NetworkExpr::Kind::Inline) {
    print_primitive(os, *e.primitive);
    return;
  }
  // Brackets never create nodes, so bracketing every nested chain is safe.
  const bool bracket = nested;
  if (bracket) os << '(';
  const char* op = e.kind == NetworkExpr::Kind::Series ? " <| " : " ++ ";
  for (std::size_t k = 0; k < e.operands.size(); ++k) {
    if (k) os << op;
    print_expr(os, e.operands[k], true);
  }
  if (bracket) os << ')';
}

// ---------------------------------------------------------------------------
// Compiler

double real_value(const Argument& a, const std::map<std::string, Complex>& values) {
  const Complex v = a.kind == Argument::Kind::Literal ? a.value : values.at(a.text);
  if (v.imag() != 0.0)
    throw NetlistError(a.where, "'" + a.text + "' is complex; only drive amplitudes may be complex");
  return v.real();
}

SlhTriple instantiate(const ComponentDecl& c, const ModeRegistry& reg, const std::map<std::string, Complex>& values) {
  auto rate = [&](const Argument& a) {
    const double r = real_value(a, values);
    if (!(r >= 0.0)) throw NetlistError(a.where, "rate must be non-negative");
    return r;
  };
  switch (c.kind) {
    case PrimitiveKind::Mirror:
      return mirror(reg, reg.mode(c.args[0].text), rate(c.args[1]), real_value(c.args[2], values));
    case PrimitiveKind::LossMirror:
      return loss_mirror(reg, reg.mode(c.args[0].text), rate(c.args[1]));
    case PrimitiveKind::Drive: {
      const Argument& a = c.args[0];
      return coherent_drive(reg, a.kind == Argument::Kind::Literal ? a.value : values.at(a.text));
    }
    case PrimitiveKind::Phase:
      return phase_shifter(reg, real_value(c.args[0], values));
    case PrimitiveKind::Passthrough: {
      const double n = real_value(c.args[0], values);
      if (!(n >= 1.0) || n != std::floor(n) || n > 4096.0)
        throw NetlistError(c.args[0].where, "passthrough needs a positive integer port count");
      return passthrough(reg, static_cast<std::size_t>(n));
    }
    case PrimitiveKind::Beamsplitter: {
      const double eta = real_value(c.args[0], values);
      if (!(eta >= 0.0 && eta <= 1.0)) throw NetlistError(c.args[0].where, "beamsplitter eta must lie in [0, 1]");
      return beamsplitter(reg, eta);
    }
  }
  throw NetlistError(c.where, "unhandled primitive");
}

SlhTriple fold(const NetworkExpr& e, const std::map<std::string, SlhTriple>& comps, const ModeRegistry& reg,
               const std::map<std::string, Complex>& values) {
  switch (e.kind) {
    case NetworkExpr::Kind::Ref:
      return comps.at(e.name);
    case NetworkExpr::Kind::Inline:
      return instantiate(*e.primitive, reg, values);
    case NetworkExpr::Kind::Concat: {
      SlhTriple acc = fold(e.operands.front(), comps, reg, values);
      for (std::size_t k = 1; k < e.operands.size(); ++k) acc = concat(acc, fold(e.operands[k], comps, reg, values));
      return acc;
    }
    case NetworkExpr::Kind::Series: {
      // x1 <| x2 <| ... <| xn = x1 <| (x2 <| (... <| xn))
      SlhTriple acc = fold(e.operands.back(), comps, reg, values);
      for (std::size_t k = e.operands.size() - 1; k-- > 0;) {
        SlhTriple down = fold(e.operands[k], comps, reg, values);
        if (down.n_ports() != acc.n_ports())
          throw NetlistError(e.operator_locations[k], "series product needs equal port counts (downstream has " +
                                                          std::to_string(down.n_ports()) + ", upstream has " +
                                                          std::to_string(acc.n_ports()) + ")");
        acc = series(down, acc);
      }
      return acc;
    }
  }
  throw NetlistError(e.where, "unhandled expression");
}

}  // namespace

NetlistError::NetlistError(SourceLocation w, const std::string& msg)
    : InputError(located(w, msg)), where(w), message(msg) {}

std::string_view primitive_name(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Mirror: return "mirror";
    case PrimitiveKind::LossMirror: return "loss_mirror";
    case PrimitiveKind::Drive: return "drive";
    case PrimitiveKind::Phase: return "phase";
    case PrimitiveKind::Passthrough: return "passthrough";
    case PrimitiveKind::Beamsplitter: return "beamsplitter";
  }
  return "?";
}

std::optional<PrimitiveKind> primitive_from_name(std::string_view name) {
  for (auto k : {PrimitiveKind::Mirror, PrimitiveKind::LossMirror, PrimitiveKind::Drive, PrimitiveKind::Phase,
                 PrimitiveKind::Passthrough, PrimitiveKind::Beamsplitter})
    if (primitive_name(k) == name) return k;
  return std::nullopt;
}

std::size_t primitive_arity(PrimitiveKind kind) {
  switch (kind) {
    case PrimitiveKind::Mirror: return 3;
    case PrimitiveKind::LossMirror: return 2;
    default: return 1;
  }
}

const ParamDecl* NetlistAst::find_param(std::string_view name) const {
  for (const auto& p : params)
    if (p.name == name) return &p;
  return nullptr;
}

const ComponentDecl* NetlistAst::find_component(std::string_view name) const {
  for (const auto& c : components)
    if (c.name == name) return &c;
  return nullptr;
}

NetlistAst parse_netlist(std::string_view text) { return Parser(lex(text)).run(); }

std::string print_netlist(const NetlistAst& ast) {
  std::ostringstream os;
  for (const auto& m : ast.modes) os << "mode " << m.name << '\n';
  for (const auto& p : ast.params) os << "param " << p.name << " = " << format_complex_literal(p.value) << '\n';
  for (const auto& c : ast.components) {
    os << "comp " << c.name << " = ";
    print_primitive(os, c);
    os << '\n';
  }
  os << "network = ";
  print_expr(os, ast.network, false);
  os << '\n';
  return os.str();
}

std::map<std::string, Complex> resolve_params(const NetlistAst& ast, const Overrides& overrides,
                                              const CompileOptions& options) {
  std::map<std::string, Complex> values;
  for (const auto& p : ast.params) values[p.name] = p.value;
  std::set<std::string> set_by_override;
  for (const auto& [key, value] : overrides) {
    std::string target = key;
    Complex v = value;
    if (!ast.find_param(key) && key.starts_with("lambda_") && key.ends_with("_nm") && key.size() > 10) {
      const std::string omega = "omega_" + key.substr(7, key.size() - 10);
      if (ast.find_param(omega)) {
        if (value.imag() != 0.0) throw InputError("override '" + key + "' must be real");
        target = omega;
        v = wavelength_nm_to_omega(value.real(), options.n_eff);
      }
    }
    if (!ast.find_param(target)) throw InputError("override '" + key + "' does not name a declared parameter");
    if (!set_by_override.insert(target).second)
      throw InputError("parameter '" + target + "' is overridden more than once");
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw InputError("override '" + key + "' is not finite");
    values[target] = v;
  }
  return values;
}

SlhTriple compile_netlist(const NetlistAst& ast, const Overrides& overrides, const CompileOptions& options) {
  const auto values = resolve_params(ast, overrides, options);
  std::vector<std::string> names;
  for (const auto& m : ast.modes) names.push_back(m.name);
  const ModeRegistry reg(names);

  std::map<std::string, SlhTriple> comps;
  for (const auto& c : ast.components) comps.emplace(c.name, instantiate(c, reg, values));
  SlhTriple g = fold(ast.network, comps, reg, values);
  const auto violations = validate(g);
  if (!violations.empty()) throw NetlistError(ast.network_where, "network is invalid: " + violations.front().message);
  return g;
}

}  // namespace slh
