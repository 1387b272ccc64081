#pragma once

#include <array>
#include <string>
#include <vector>

#include "kobex/cpoint.hpp"

namespace kobex {

// Small expression language used by the text formats.
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'i' | 'pi' | name | name '(' expr ')' | '(' expr ')' | '|' expr '|'
// Functions: Re, Im, conj, abs, exp, log, sqrt. Names are the declared variables.
class Expr {
public:
    static constexpr int kMaxVars = kMaxDim;
    static constexpr int kMaxDeriv = 2 * kMaxVars;

    // Value plus derivatives with respect to (Re x0, Im x0, Re x1, ...).
    struct Jet {
        cplx value;
        std::array<cplx, kMaxDeriv> d;
        bool smooth;
    };

    Expr() = default;
    static Expr parse(const std::string& text, const std::vector<std::string>& vars);
    static Expr constant(double c);

    cplx eval(const cplx* x) const;
    double eval_real(const cplx* x) const { return eval(x).real(); }
    Jet eval_jet(const cplx* x) const;

    int arity() const { return nvars_; }
    const std::string& text() const { return text_; }
    bool empty() const { return code_.empty(); }

    enum class Op : unsigned char {
        Const, Var, Add, Sub, Mul, Div, Neg, Pow, PowC, Abs, Re, Im, Conj, Exp, Log, Sqrt
    };
    struct Instr {
        Op op;
        int var = 0;
        cplx c = 0.0;
    };

private:
    std::vector<Instr> code_;
    std::string text_;
    int nvars_ = 0;
    int depth_ = 0;
    friend class ExprParser;
};

// Parses a number-only expression ("0.3+0.1i", "sqrt(2)/2").
cplx parse_complex(const std::string& text);

}  // namespace kobex
