#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slh/ccd.hpp"
#include "slh/error.hpp"
#include "slh/slh.hpp"

namespace slh {

struct SourceLocation {
  int line = 1;
  int column = 1;
  bool operator==(const SourceLocation&) const = default;
};

// Positioned diagnostic from parsing or compiling a netlist.
class NetlistError : public InputError {
 public:
  NetlistError(SourceLocation where, const std::string& message);
  SourceLocation where;
  std::string message;
};

enum class PrimitiveKind { Mirror, LossMirror, Drive, Phase, Passthrough, Beamsplitter };

std::string_view primitive_name(PrimitiveKind kind);
std::optional<PrimitiveKind> primitive_from_name(std::string_view name);
std::size_t primitive_arity(PrimitiveKind kind);

// A primitive argument: a numeric literal or a reference to a mode or param.
struct Argument {
  enum class Kind { Literal, Identifier };
  Kind kind = Kind::Literal;
  Complex value{};
  std::string text;  // literal spelling or identifier name
  SourceLocation where;
  bool operator==(const Argument& o) const { return kind == o.kind && value == o.value && text == o.text; }
};

struct ModeDecl {
  std::string name;
  SourceLocation where;
  bool operator==(const ModeDecl& o) const { return name == o.name; }
};

struct ParamDecl {
  std::string name;
  Complex value{};
  std::string text;
  SourceLocation where;
  bool operator==(const ParamDecl& o) const { return name == o.name && value == o.value; }
};

struct ComponentDecl {
  std::string name;
  PrimitiveKind kind = PrimitiveKind::Passthrough;
  std::vector<Argument> args;
  SourceLocation where;
  bool operator==(const ComponentDecl& o) const {
    return name == o.name && kind == o.kind && args == o.args;
  }
};

// Network expression. Series and Concat nodes are n-ary as written:
// "x <| y <| z" is one Series node with three operands. Inline nodes hold a
// primitive written directly in the expression, e.g. "network = phase(0)".
struct NetworkExpr {
  enum class Kind { Ref, Inline, Series, Concat };
  Kind kind = Kind::Ref;
  std::string name;                       // Ref only
  std::optional<ComponentDecl> primitive;  // Inline only
  std::vector<NetworkExpr> operands;  // Series/Concat
  std::vector<SourceLocation> operator_locations;
  SourceLocation where;
  bool operator==(const NetworkExpr& o) const {
    return kind == o.kind && name == o.name && primitive == o.primitive && operands == o.operands;
  }
};

struct NetlistAst {
  std::vector<ModeDecl> modes;
  std::vector<ParamDecl> params;
  std::vector<ComponentDecl> components;
  NetworkExpr network;
  SourceLocation network_where;
  bool operator==(const NetlistAst& o) const {
    return modes == o.modes && params == o.params && components == o.components && network == o.network;
  }

  const ParamDecl* find_param(std::string_view name) const;
  const ComponentDecl* find_component(std::string_view name) const;
};

// Throws NetlistError on lexical errors, unknown identifiers, arity
// mismatches, redeclarations and a missing or repeated network statement.
NetlistAst parse_netlist(std::string_view text);

// Canonical source text; parse_netlist(print_netlist(ast)) == ast.
std::string print_netlist(const NetlistAst& ast);

// Parameter overrides by name. Values are real except for parameters that
// feed a drive amplitude.
using Overrides = std::map<std::string, Complex>;

struct CompileOptions {
  // Used to translate "lambda_X_nm" overrides into a declared "omega_X".
  double n_eff = kDefaultEffectiveIndex;
};

// Effective parameter values after overrides (order-independent). Unknown
// override names are an InputError.
std::map<std::string, Complex> resolve_params(const NetlistAst& ast, const Overrides& overrides,
                                              const CompileOptions& options = {});

// Instantiates every component and folds the network expression. Series
// port-count mismatches are reported at the offending "<|". The result is
// checked with validate().
SlhTriple compile_netlist(const NetlistAst& ast, const Overrides& overrides = {},
                          const CompileOptions& options = {});

}  // namespace slh
