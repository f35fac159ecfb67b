#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gradpoly/errors.hpp"

namespace gradpoly {

struct EvalReport {
    double value = 0.0;
    long op_count = 0;
};

struct GradReport {
    Eigen::VectorXd gradient;
    long op_count = 0;
};

/// Scalar expression as a DAG of elementary operations, built by the
/// parser with common-subexpression sharing. Variables are x1..xl;
/// integer powers are lowered to square-and-multiply chains at parse
/// time, so the runtime op set stays {+, -, *, /, neg, exp, log, sin,
/// cos, sqrt}.
class ExprGraph {
public:
    enum class Op : std::uint8_t {
        constant,
        variable,
        neg,
        fn_exp,
        fn_log,
        fn_sin,
        fn_cos,
        fn_sqrt,
        add,
        sub,
        mul,
        divide
    };

    struct Node {
        Op op;
        double value = 0.0; // constants
        int var = -1;       // variables, 0-based
        int a = -1, b = -1; // operands
    };

    static ExprGraph parse(std::string_view text) {
        Parser p(text);
        return p.run();
    }

    int arity() const { return arity_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const std::vector<Node>& nodes() const { return nodes_; }
    int root() const { return root_; }

    /// Forward sweep; op_count is the number of arithmetic/elementary
    /// operations executed.
    EvalReport eval(const Eigen::VectorXd& x) const {
        std::vector<double> val(nodes_.size());
        EvalReport r;
        r.op_count = forward(x, val);
        r.value = val[static_cast<std::size_t>(root_)];
        return r;
    }

    /// One forward sweep plus one reverse adjoint sweep; op_count is the
    /// total operation count of computing the gradient from scratch.
    GradReport grad_reverse(const Eigen::VectorXd& x) const {
        std::vector<double> val(nodes_.size());
        long ops = forward(x, val);

        std::vector<double> adj(nodes_.size(), 0.0);
        std::vector<char> seen(nodes_.size(), 0);
        seen[static_cast<std::size_t>(root_)] = 1;
        adj[static_cast<std::size_t>(root_)] = 1.0;

        // first contribution to an adjoint is an assignment; later ones
        // accumulate and cost one addition/subtraction each
        auto contribute = [&](int target, double v, bool negate) {
            auto t = static_cast<std::size_t>(target);
            if (!seen[t]) {
                seen[t] = 1;
                adj[t] = negate ? -v : v;
                if (negate) ++ops;
            } else {
                adj[t] += negate ? -v : v;
                ++ops;
            }
        };

        for (int id = root_; id >= 0; --id) {
            const auto i = static_cast<std::size_t>(id);
            if (!seen[i]) continue; // not an ancestor-path of the root
            const Node& nd = nodes_[i];
            const double w = adj[i];
            const bool at_root = id == root_; // root adjoint is the literal 1
            switch (nd.op) {
                case Op::constant:
                case Op::variable:
                    break;
                case Op::neg:
                    contribute(nd.a, w, true);
                    break;
                case Op::fn_exp:
                    ops += at_root ? 0 : 1;
                    contribute(nd.a, at_root ? val[i] : w * val[i], false);
                    break;
                case Op::fn_log:
                    ++ops;
                    contribute(nd.a, w / val[static_cast<std::size_t>(nd.a)], false);
                    break;
                case Op::fn_sin:
                    ++ops; // cos
                    ops += at_root ? 0 : 1;
                    contribute(nd.a,
                               at_root ? std::cos(val[static_cast<std::size_t>(nd.a)])
                                       : w * std::cos(val[static_cast<std::size_t>(nd.a)]),
                               false);
                    break;
                case Op::fn_cos:
                    ++ops; // sin
                    ops += at_root ? 0 : 1;
                    contribute(nd.a,
                               at_root ? std::sin(val[static_cast<std::size_t>(nd.a)])
                                       : w * std::sin(val[static_cast<std::size_t>(nd.a)]),
                               true);
                    break;
                case Op::fn_sqrt:
                    ops += 2; // 0.5*w then divide
                    contribute(nd.a, 0.5 * w / val[i], false);
                    break;
                case Op::add:
                    contribute(nd.a, w, false);
                    contribute(nd.b, w, false);
                    break;
                case Op::sub:
                    contribute(nd.a, w, false);
                    contribute(nd.b, w, true);
                    break;
                case Op::mul: {
                    ops += at_root ? 0 : 2;
                    const double ta = at_root ? val[static_cast<std::size_t>(nd.b)]
                                              : w * val[static_cast<std::size_t>(nd.b)];
                    const double tb = at_root ? val[static_cast<std::size_t>(nd.a)]
                                              : w * val[static_cast<std::size_t>(nd.a)];
                    contribute(nd.a, ta, false);
                    contribute(nd.b, tb, false);
                    break;
                }
                case Op::divide: {
                    ops += 2; // w/b then t*value
                    const double t = w / val[static_cast<std::size_t>(nd.b)];
                    contribute(nd.a, t, false);
                    contribute(nd.b, t * val[i], true);
                    break;
                }
            }
        }

        GradReport r;
        r.op_count = ops;
        r.gradient = Eigen::VectorXd::Zero(arity_);
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i].op == Op::variable && seen[i]) r.gradient[nodes_[i].var] = adj[i];
        return r;
    }

private:
    long forward(const Eigen::VectorXd& x, std::vector<double>& val) const {
        if (x.size() != arity_) throw parameter_error("ExprGraph: expected " +
                                                      std::to_string(arity_) + " inputs");
        long ops = 0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& nd = nodes_[i];
            const int id = static_cast<int>(i);
            switch (nd.op) {
                case Op::constant: val[i] = nd.value; break;
                case Op::variable: val[i] = x[nd.var]; break;
                case Op::neg: val[i] = -val[static_cast<std::size_t>(nd.a)]; ++ops; break;
                case Op::fn_exp: val[i] = std::exp(val[static_cast<std::size_t>(nd.a)]); ++ops; break;
                case Op::fn_log: {
                    const double a = val[static_cast<std::size_t>(nd.a)];
                    if (!(a > 0.0)) throw eval_error("log of non-positive value", id);
                    val[i] = std::log(a);
                    ++ops;
                    break;
                }
                case Op::fn_sin: val[i] = std::sin(val[static_cast<std::size_t>(nd.a)]); ++ops; break;
                case Op::fn_cos: val[i] = std::cos(val[static_cast<std::size_t>(nd.a)]); ++ops; break;
                case Op::fn_sqrt: {
                    const double a = val[static_cast<std::size_t>(nd.a)];
                    if (a < 0.0) throw eval_error("sqrt of negative value", id);
                    val[i] = std::sqrt(a);
                    ++ops;
                    break;
                }
                case Op::add:
                    val[i] = val[static_cast<std::size_t>(nd.a)] + val[static_cast<std::size_t>(nd.b)];
                    ++ops;
                    break;
                case Op::sub:
                    val[i] = val[static_cast<std::size_t>(nd.a)] - val[static_cast<std::size_t>(nd.b)];
                    ++ops;
                    break;
                case Op::mul:
                    val[i] = val[static_cast<std::size_t>(nd.a)] * val[static_cast<std::size_t>(nd.b)];
                    ++ops;
                    break;
                case Op::divide: {
                    const double b = val[static_cast<std::size_t>(nd.b)];
                    if (b == 0.0) throw eval_error("division by zero", id);
                    val[i] = val[static_cast<std::size_t>(nd.a)] / b;
                    ++ops;
                    break;
                }
            }
        }
        return ops;
    }

    // ------------------------------------------------------------------
    // Builder with hash-consing
    // ------------------------------------------------------------------
    struct NodeKey {
        Op op;
        std::uint64_t payload; // constant bits or variable index
        int a, b;
        bool operator<(const NodeKey& o) const {
            if (op != o.op) return op < o.op;
            if (payload != o.payload) return payload < o.payload;
            if (a != o.a) return a < o.a;
            return b < o.b;
        }
    };

    int make(Op op, double value, int var, int a, int b) {
        std::uint64_t payload = 0;
        if (op == Op::constant) std::memcpy(&payload, &value, sizeof value);
        if (op == Op::variable) payload = static_cast<std::uint64_t>(var);
        const NodeKey key{op, payload, a, b};
        const auto it = cse_.find(key);
        if (it != cse_.end()) return it->second;
        nodes_.push_back(Node{op, value, var, a, b});
        const int id = static_cast<int>(nodes_.size()) - 1;
        cse_.emplace(key, id);
        return id;
    }

    int make_const(double v) { return make(Op::constant, v, -1, -1, -1); }
    int make_var(int k) { return make(Op::variable, 0.0, k, -1, -1); }
    int make_unary(Op op, int a) { return make(op, 0.0, -1, a, -1); }
    int make_binary(Op op, int a, int b) { return make(op, 0.0, -1, a, b); }

    int make_int_pow(int base, long k) {
        if (k == 0) return make_const(1.0);
        if (k < 0) return make_binary(Op::divide, make_const(1.0), make_int_pow(base, -k));
        if (k == 1) return base;
        const int half = make_int_pow(base, k / 2);
        const int sq = make_binary(Op::mul, half, half);
        return (k % 2) ? make_binary(Op::mul, sq, base) : sq;
    }

    /// Drop nodes unreachable from the root (x^0 lowering can orphan its
    /// base subgraph) and renumber.
    void prune() {
        std::vector<char> live(nodes_.size(), 0);
        std::vector<int> stack{root_};
        while (!stack.empty()) {
            const int id = stack.back();
            stack.pop_back();
            auto i = static_cast<std::size_t>(id);
            if (live[i]) continue;
            live[i] = 1;
            if (nodes_[i].a >= 0) stack.push_back(nodes_[i].a);
            if (nodes_[i].b >= 0) stack.push_back(nodes_[i].b);
        }
        std::vector<int> remap(nodes_.size(), -1);
        std::vector<Node> keep;
        keep.reserve(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!live[i]) continue;
            Node nd = nodes_[i];
            if (nd.a >= 0) nd.a = remap[static_cast<std::size_t>(nd.a)];
            if (nd.b >= 0) nd.b = remap[static_cast<std::size_t>(nd.b)];
            remap[i] = static_cast<int>(keep.size());
            keep.push_back(nd);
        }
        root_ = remap[static_cast<std::size_t>(root_)];
        nodes_ = std::move(keep);
        cse_.clear();
    }

    class Parser {
    public:
        explicit Parser(std::string_view text) : text_(text) {}

        ExprGraph run() {
            g_.nodes_.clear();
            const int root = parse_expr();
            skip_ws();
            if (pos_ != text_.size()) fail("unexpected trailing input");
            g_.root_ = root;
            g_.prune();
            g_.cse_.clear();
            return std::move(g_);
        }

    private:
        [[noreturn]] void fail(const std::string& msg) const {
            throw parse_error(msg + " at offset " + std::to_string(pos_), pos_);
        }

        void skip_ws() {
            while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }

        bool eat(char c) {
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        char peek() {
            skip_ws();
            return pos_ < text_.size() ? text_[pos_] : '\0';
        }

        int parse_expr() {
            int lhs = parse_term();
            for (;;) {
                if (eat('+'))
                    lhs = g_.make_binary(Op::add, lhs, parse_term());
                else if (eat('-'))
                    lhs = g_.make_binary(Op::sub, lhs, parse_term());
                else
                    return lhs;
            }
        }

        int parse_term() {
            int lhs = parse_unary();
            for (;;) {
                if (eat('*'))
                    lhs = g_.make_binary(Op::mul, lhs, parse_unary());
                else if (eat('/'))
                    lhs = g_.make_binary(Op::divide, lhs, parse_unary());
                else
                    return lhs;
            }
        }

        int parse_unary() {
            if (eat('-')) return g_.make_unary(Op::neg, parse_unary());
            return parse_power();
        }

        int parse_power() {
            int base = parse_atom();
            while (eat('^')) base = g_.make_int_pow(base, parse_int_exponent());
            return base;
        }

        long parse_int_exponent() {
            skip_ws();
            const std::size_t start = pos_;
            bool negative = false;
            if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
                negative = text_[pos_] == '-';
                ++pos_;
            }
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                fail("exponent must be an integer literal");
            long v = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                v = v * 10 + (text_[pos_] - '0');
                if (v > 1000000) {
                    pos_ = start;
                    fail("exponent too large");
                }
                ++pos_;
            }
            return negative ? -v : v;
        }

        int parse_atom() {
            skip_ws();
            if (pos_ >= text_.size()) fail("unexpected end of expression");
            const char c = text_[pos_];
            if (c == '(') {
                ++pos_;
                const int e = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
            fail(std::string("unexpected character '") + c + "'");
        }

        int parse_number() {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            if (pos_ < text_.size() && text_[pos_] == '.') {
                ++pos_;
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t e = pos_ + 1;
                if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
                if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
                    pos_ = e;
                    while (pos_ < text_.size() &&
                           std::isdigit(static_cast<unsigned char>(text_[pos_])))
                        ++pos_;
                }
            }
            const std::string tok(text_.substr(start, pos_ - start));
            if (tok == ".") {
                pos_ = start;
                fail("malformed number");
            }
            return g_.make_const(std::stod(tok));
        }

        int parse_ident() {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '_'))
                ++pos_;
            const std::string name(text_.substr(start, pos_ - start));

            if (peek() == '(') {
                Op op;
                if (name == "exp") op = Op::fn_exp;
                else if (name == "log") op = Op::fn_log;
                else if (name == "sin") op = Op::fn_sin;
                else if (name == "cos") op = Op::fn_cos;
                else if (name == "sqrt") op = Op::fn_sqrt;
                else {
                    pos_ = start;
                    fail("unknown function '" + name + "'");
                }
                eat('(');
                const int a = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return g_.make_unary(op, a);
            }

            // variables are x1, x2, ...
            if (name.size() >= 2 && name[0] == 'x') {
                bool digits = true;
                for (std::size_t i = 1; i < name.size(); ++i)
                    if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
                if (digits && name[1] != '0') {
                    const int k = std::stoi(name.substr(1));
                    g_.arity_ = std::max(g_.arity_, k);
                    return g_.make_var(k - 1);
                }
            }
            pos_ = start;
            fail("unknown identifier '" + name + "'");
        }

        std::string_view text_;
        std::size_t pos_ = 0;
        ExprGraph g_;
    };

    std::vector<Node> nodes_;
    std::map<NodeKey, int> cse_;
    int arity_ = 0;
    int root_ = -1;
};

} // namespace gradpoly
