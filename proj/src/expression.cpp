#include "kobex/expression.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "kobex/error.hpp"

namespace kobex {

namespace {

constexpr int kMaxStack = 64;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_zero(cplx z) { return z.real() == 0.0 && z.imag() == 0.0; }

bool is_small_int(cplx p, int& n) {
    if (p.imag() != 0.0) return false;
    double r = p.real();
    if (r != std::floor(r) || std::fabs(r) > 64) return false;
    n = static_cast<int>(r);
    return true;
}

cplx ipow(cplx u, int n) {
    bool inv = n < 0;
    unsigned m = static_cast<unsigned>(inv ? -n : n);
    cplx r = 1.0, b = u;
    while (m) {
        if (m & 1u) r *= b;
        b *= b;
        m >>= 1u;
    }
    return inv ? 1.0 / r : r;
}

cplx cpow_const(cplx u, cplx p) {
    int n;
    if (is_small_int(p, n)) return ipow(u, n);
    if (p.imag() == 0.0 && u.imag() == 0.0 && u.real() >= 0.0) return std::pow(u.real(), p.real());
    return std::pow(u, p);
}

// Division that keeps a real sign for x/0 so exp(-1/0) evaluates to 0.
cplx safe_div(cplx a, cplx b) {
    if (is_zero(b)) {
        if (is_zero(a)) return {kNaN, 0.0};
        if (a.imag() == 0.0) return {std::copysign(kInf, a.real()), 0.0};
        return {kInf, kInf};
    }
    return a / b;
}

}  // namespace

class ExprParser {
public:
    ExprParser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

    Expr run() {
        Expr e;
        e.text_ = s_;
        e.nvars_ = static_cast<int>(vars_.size());
        if (e.nvars_ > Expr::kMaxVars) throw ConfigError("expression: too many variables");
        code_ = &e.code_;
        expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        if (code_->empty()) fail("empty expression");
        int depth = 0, maxd = 0;
        for (const auto& in : *code_) {
            switch (in.op) {
                case Expr::Op::Const:
                case Expr::Op::Var: ++depth; break;
                case Expr::Op::Add:
                case Expr::Op::Sub:
                case Expr::Op::Mul:
                case Expr::Op::Div:
                case Expr::Op::Pow: --depth; break;
                default: break;
            }
            maxd = std::max(maxd, depth);
        }
        if (maxd > kMaxStack) fail("expression too deeply nested");
        e.depth_ = maxd;
        return e;
    }

private:
    const std::string& s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
    std::vector<Expr::Instr>* code_ = nullptr;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("expression '" + s_ + "': " + msg + " at column " + std::to_string(pos_ + 1));
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    void emit_const(cplx c) { code_->push_back({Expr::Op::Const, 0, c}); }

    // Folds trailing constant operands.
    void emit_binary(Expr::Op op) {
        auto& c = *code_;
        std::size_t n = c.size();
        if (n >= 2 && c[n - 1].op == Expr::Op::Const && c[n - 2].op == Expr::Op::Const) {
            cplx a = c[n - 2].c, b = c[n - 1].c, r;
            switch (op) {
                case Expr::Op::Add: r = a + b; break;
                case Expr::Op::Sub: r = a - b; break;
                case Expr::Op::Mul: r = a * b; break;
                case Expr::Op::Div: r = safe_div(a, b); break;
                default: r = cpow_const(a, b); break;
            }
            c.pop_back();
            c.back().c = r;
            return;
        }
        if (op == Expr::Op::Pow && n >= 1 && c[n - 1].op == Expr::Op::Const) {
            cplx p = c[n - 1].c;
            c.back() = {Expr::Op::PowC, 0, p};
            return;
        }
        c.push_back({op, 0, 0.0});
    }

    void emit_unary(Expr::Op op) {
        auto& c = *code_;
        if (!c.empty() && c.back().op == Expr::Op::Const) {
            cplx a = c.back().c, r;
            switch (op) {
                case Expr::Op::Neg: r = -a; break;
                case Expr::Op::Abs: r = std::abs(a); break;
                case Expr::Op::Re: r = a.real(); break;
                case Expr::Op::Im: r = a.imag(); break;
                case Expr::Op::Conj: r = std::conj(a); break;
                case Expr::Op::Exp: r = std::exp(a); break;
                case Expr::Op::Log: r = std::log(a); break;
                default: r = cpow_const(a, 0.5); break;
            }
            c.back().c = r;
            return;
        }
        c.push_back({op, 0, 0.0});
    }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                emit_binary(Expr::Op::Add);
            } else if (accept('-')) {
                term();
                emit_binary(Expr::Op::Sub);
            } else {
                return;
            }
        }
    }
    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                emit_binary(Expr::Op::Mul);
            } else if (accept('/')) {
                unary();
                emit_binary(Expr::Op::Div);
            } else {
                return;
            }
        }
    }
    void unary() {
        if (accept('-')) {
            unary();
            emit_unary(Expr::Op::Neg);
            return;
        }
        if (accept('+')) {
            unary();
            return;
        }
        power();
    }
    void power() {
        atom();
        if (accept('^')) {
            unary();
            emit_binary(Expr::Op::Pow);
        }
    }
    void atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        char ch = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            bool imag = pos_ < s_.size() && s_[pos_] == 'i' &&
                        (pos_ + 1 >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[pos_ + 1])));
            if (imag) ++pos_;
            emit_const(imag ? cplx(0.0, v) : cplx(v, 0.0));
            return;
        }
        if (accept('(')) {
            expr();
            expect(')');
            return;
        }
        if (accept('|')) {
            expr();
            expect('|');
            emit_unary(Expr::Op::Abs);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t b = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            std::string name = s_.substr(b, pos_ - b);
            for (std::size_t k = 0; k < vars_.size(); ++k) {
                if (vars_[k] == name) {
                    code_->push_back({Expr::Op::Var, static_cast<int>(k), 0.0});
                    return;
                }
            }
            if (name == "i") return emit_const(cplx(0.0, 1.0));
            if (name == "pi") return emit_const(M_PI);
            Expr::Op op;
            if (name == "Re") op = Expr::Op::Re;
            else if (name == "Im") op = Expr::Op::Im;
            else if (name == "conj") op = Expr::Op::Conj;
            else if (name == "abs") op = Expr::Op::Abs;
            else if (name == "exp") op = Expr::Op::Exp;
            else if (name == "log") op = Expr::Op::Log;
            else if (name == "sqrt") op = Expr::Op::Sqrt;
            else fail("unknown name '" + name + "'");
            expect('(');
            expr();
            expect(')');
            emit_unary(op);
            return;
        }
        fail("unexpected '" + std::string(1, ch) + "'");
    }
};

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
    return ExprParser(text, vars).run();
}

Expr Expr::constant(double c) {
    Expr e;
    e.code_.push_back({Op::Const, 0, c});
    e.text_ = std::to_string(c);
    e.depth_ = 1;
    return e;
}

cplx Expr::eval(const cplx* x) const {
    std::array<cplx, kMaxStack> st;
    int sp = 0;
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::Const: st[sp++] = in.c; break;
            case Op::Var: st[sp++] = x[in.var]; break;
            case Op::Add: --sp; st[sp - 1] += st[sp]; break;
            case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
            case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
            case Op::Div: --sp; st[sp - 1] = safe_div(st[sp - 1], st[sp]); break;
            case Op::Pow:
                --sp;
                st[sp - 1] = is_zero(st[sp - 1]) ? cpow_const(st[sp - 1], st[sp]) : std::pow(st[sp - 1], st[sp]);
                break;
            case Op::PowC: st[sp - 1] = cpow_const(st[sp - 1], in.c); break;
            case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
            case Op::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
            case Op::Re: st[sp - 1] = st[sp - 1].real(); break;
            case Op::Im: st[sp - 1] = st[sp - 1].imag(); break;
            case Op::Conj: st[sp - 1] = std::conj(st[sp - 1]); break;
            case Op::Exp: {
                cplx u = st[sp - 1];
                st[sp - 1] = (u.real() == -kInf) ? cplx(0.0) : std::exp(u);
                break;
            }
            case Op::Log: st[sp - 1] = std::log(st[sp - 1]); break;
            case Op::Sqrt: st[sp - 1] = cpow_const(st[sp - 1], 0.5); break;
        }
    }
    return st[0];
}

Expr::Jet Expr::eval_jet(const cplx* x) const {
    const int nd = 2 * nvars_;
    std::array<Jet, kMaxStack> st;
    int sp = 0;
    auto finite_d = [nd](const Jet& j) {
        for (int k = 0; k < nd; ++k)
            if (!std::isfinite(j.d[k].real()) || !std::isfinite(j.d[k].imag())) return false;
        return true;
    };
    auto fill = [nd](Jet& j, cplx v) {
        for (int k = 0; k < nd; ++k) j.d[k] = v;
    };
    for (const auto& in : code_) {
        switch (in.op) {
            case Op::Const: {
                Jet& j = st[sp++];
                j.value = in.c;
                fill(j, 0.0);
                j.smooth = true;
                break;
            }
            case Op::Var: {
                Jet& j = st[sp++];
                j.value = x[in.var];
                fill(j, 0.0);
                j.d[2 * in.var] = 1.0;
                j.d[2 * in.var + 1] = cplx(0.0, 1.0);
                j.smooth = true;
                break;
            }
            case Op::Add:
            case Op::Sub: {
                --sp;
                Jet& a = st[sp - 1];
                const Jet& b = st[sp];
                double sg = in.op == Op::Add ? 1.0 : -1.0;
                a.value += sg * b.value;
                for (int k = 0; k < nd; ++k) a.d[k] += sg * b.d[k];
                a.smooth = a.smooth && b.smooth;
                break;
            }
            case Op::Mul: {
                --sp;
                Jet& a = st[sp - 1];
                const Jet& b = st[sp];
                for (int k = 0; k < nd; ++k) a.d[k] = a.d[k] * b.value + a.value * b.d[k];
                a.value *= b.value;
                a.smooth = a.smooth && b.smooth;
                break;
            }
            case Op::Div: {
                --sp;
                Jet& a = st[sp - 1];
                const Jet& b = st[sp];
                if (is_zero(b.value)) {
                    a.value = safe_div(a.value, b.value);
                    fill(a, kNaN);
                    a.smooth = false;
                    break;
                }
                cplx b2 = b.value * b.value;
                for (int k = 0; k < nd; ++k) a.d[k] = (a.d[k] * b.value - a.value * b.d[k]) / b2;
                a.value /= b.value;
                a.smooth = a.smooth && b.smooth;
                break;
            }
            case Op::Pow: {
                --sp;
                Jet& a = st[sp - 1];
                const Jet& b = st[sp];
                if (is_zero(a.value)) {
                    a.value = cpow_const(a.value, b.value);
                    fill(a, kNaN);
                    a.smooth = false;
                    break;
                }
                cplx la = std::log(a.value);
                cplx v = std::exp(b.value * la);
                for (int k = 0; k < nd; ++k) a.d[k] = v * (b.d[k] * la + b.value * a.d[k] / a.value);
                a.value = v;
                a.smooth = a.smooth && b.smooth;
                break;
            }
            case Op::PowC:
            case Op::Sqrt: {
                Jet& a = st[sp - 1];
                cplx p = in.op == Op::Sqrt ? cplx(0.5) : in.c;
                if (is_zero(a.value)) {
                    if (is_zero(p)) {
                        a.value = 1.0;
                        fill(a, 0.0);
                        a.smooth = true;
                    } else if (p == cplx(1.0)) {
                        // unchanged
                    } else if (p.imag() == 0.0 && p.real() > 1.0) {
                        // A Lipschitz kink raised to a power > 1 is differentiable with zero slope.
                        a.smooth = finite_d(a);
                        a.value = 0.0;
                        fill(a, a.smooth ? cplx(0.0) : cplx(kNaN));
                    } else {
                        a.value = cpow_const(a.value, p);
                        fill(a, kNaN);
                        a.smooth = false;
                    }
                    break;
                }
                cplx v = cpow_const(a.value, p);
                cplx dv = p * cpow_const(a.value, p - 1.0);
                for (int k = 0; k < nd; ++k) a.d[k] *= dv;
                a.value = v;
                break;
            }
            case Op::Neg: {
                Jet& a = st[sp - 1];
                a.value = -a.value;
                for (int k = 0; k < nd; ++k) a.d[k] = -a.d[k];
                break;
            }
            case Op::Abs: {
                Jet& a = st[sp - 1];
                double r = std::abs(a.value);
                if (r == 0.0) {
                    fill(a, 0.0);
                    a.smooth = false;
                } else {
                    for (int k = 0; k < nd; ++k) a.d[k] = (std::conj(a.value) * a.d[k]).real() / r;
                }
                a.value = r;
                break;
            }
            case Op::Re: {
                Jet& a = st[sp - 1];
                a.value = a.value.real();
                for (int k = 0; k < nd; ++k) a.d[k] = a.d[k].real();
                break;
            }
            case Op::Im: {
                Jet& a = st[sp - 1];
                a.value = a.value.imag();
                for (int k = 0; k < nd; ++k) a.d[k] = a.d[k].imag();
                break;
            }
            case Op::Conj: {
                Jet& a = st[sp - 1];
                a.value = std::conj(a.value);
                for (int k = 0; k < nd; ++k) a.d[k] = std::conj(a.d[k]);
                break;
            }
            case Op::Exp: {
                Jet& a = st[sp - 1];
                cplx v = (a.value.real() == -kInf) ? cplx(0.0) : std::exp(a.value);
                if (is_zero(v)) {
                    // Flat approach to zero (exp(-1/x^2) at x = 0).
                    fill(a, 0.0);
                    a.smooth = true;
                } else {
                    for (int k = 0; k < nd; ++k) a.d[k] *= v;
                }
                a.value = v;
                break;
            }
            case Op::Log: {
                Jet& a = st[sp - 1];
                if (is_zero(a.value)) {
                    a.value = cplx(-kInf, 0.0);
                    fill(a, kNaN);
                    a.smooth = false;
                    break;
                }
                for (int k = 0; k < nd; ++k) a.d[k] /= a.value;
                a.value = std::log(a.value);
                break;
            }
        }
    }
    Jet out = st[0];
    if (!finite_d(out)) out.smooth = false;
    return out;
}

cplx parse_complex(const std::string& text) {
    static const std::vector<std::string> none;
    return Expr::parse(text, none).eval(nullptr);
}

}  // namespace kobex
