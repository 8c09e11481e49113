#include "alphamine/dsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace alphamine {

namespace {

// --- lexer ------------------------------------------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, LParen, RParen, Comma, Less, Greater, End };

struct Token {
    Tok kind = Tok::End;
    std::size_t pos = 0;  // 1-based character position
    double number = 0.0;
    std::string text{};
};

const char* tok_label(Tok t) {
    switch (t) {
        case Tok::Number: return "number";
        case Tok::Ident: return "identifier";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Star: return "'*'";
        case Tok::Slash: return "'/'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Comma: return "','";
        case Tok::Less: return "'<'";
        case Tok::Greater: return "'>'";
        case Tok::End: return "end of input";
    }
    return "?";
}

std::vector<Token> lex(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const char c = text[i];
        const std::size_t pos = i + 1;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        if (c == '+') { out.push_back({Tok::Plus, pos}); ++i; continue; }
        if (c == '-') { out.push_back({Tok::Minus, pos}); ++i; continue; }
        if (c == '*') { out.push_back({Tok::Star, pos}); ++i; continue; }
        if (c == '/') { out.push_back({Tok::Slash, pos}); ++i; continue; }
        if (c == '(') { out.push_back({Tok::LParen, pos}); ++i; continue; }
        if (c == ')') { out.push_back({Tok::RParen, pos}); ++i; continue; }
        if (c == ',') { out.push_back({Tok::Comma, pos}); ++i; continue; }
        if (c == '<') { out.push_back({Tok::Less, pos}); ++i; continue; }
        if (c == '>') { out.push_back({Tok::Greater, pos}); ++i; continue; }
        if ((c >= '0' && c <= '9') || c == '.') {
            double v = 0.0;
            const char* first = text.data() + i;
            const char* last = text.data() + n;
            auto res = std::from_chars(first, last, v);
            if (res.ec != std::errc{})
                throw ParseError("lexical error: bad number", pos);
            Token t{Tok::Number, pos, v};
            t.text.assign(first, res.ptr);
            out.push_back(std::move(t));
            i += static_cast<std::size_t>(res.ptr - first);
            continue;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t j = i;
            while (j < n && ((text[j] >= 'a' && text[j] <= 'z') || (text[j] >= 'A' && text[j] <= 'Z') ||
                             (text[j] >= '0' && text[j] <= '9') || text[j] == '_'))
                ++j;
            Token t{Tok::Ident, pos};
            t.text.assign(text.substr(i, j - i));
            std::transform(t.text.begin(), t.text.end(), t.text.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            out.push_back(std::move(t));
            i = j;
            continue;
        }
        throw ParseError(std::string("lexical error: unexpected character '") + c + "'", pos);
    }
    out.push_back({Tok::End, n + 1});
    return out;
}

// --- op metadata --------------------------------------------------------------

struct FuncInfo {
    Op op;
    int expr_args;   // expression arguments before any trailing window
    bool has_window;
};

const std::map<std::string, Column>& column_table() {
    static const std::map<std::string, Column> t = {
        {"open", Column::Open},   {"high", Column::High}, {"low", Column::Low},
        {"close", Column::Close}, {"volume", Column::Volume},
    };
    return t;
}

const std::map<std::string, FuncInfo>& func_table() {
    static const std::map<std::string, FuncInfo> t = {
        {"abs", {Op::Abs, 1, false}},       {"log1p", {Op::Log1p, 1, false}},
        {"sign", {Op::Sign, 1, false}},     {"tanh", {Op::Tanh, 1, false}},
        {"sqrt", {Op::Sqrt, 1, false}},     {"neg", {Op::Neg, 1, false}},
        {"ts_mean", {Op::TsMean, 1, true}}, {"ts_std", {Op::TsStd, 1, true}},
        {"ts_sum", {Op::TsSum, 1, true}},   {"ts_min", {Op::TsMin, 1, true}},
        {"ts_max", {Op::TsMax, 1, true}},   {"ts_rank", {Op::TsRank, 1, true}},
        {"ts_corr", {Op::TsCorr, 2, true}}, {"delay", {Op::Delay, 1, true}},
        {"delta", {Op::Delta, 1, true}},    {"cs_rank", {Op::CsRank, 1, false}},
        {"cs_zscore", {Op::CsZscore, 1, false}},
    };
    return t;
}

bool is_ts_op(Op op) {
    switch (op) {
        case Op::TsMean: case Op::TsStd: case Op::TsSum: case Op::TsMin:
        case Op::TsMax: case Op::TsRank: case Op::TsCorr: case Op::Delay:
        case Op::Delta:
            return true;
        default:
            return false;
    }
}

bool is_logical_step(Op op) {
    return is_ts_op(op) || op == Op::CsRank || op == Op::CsZscore || op == Op::Gate;
}

bool is_comparison(Op op) { return op == Op::Less || op == Op::Greater; }

// --- parser -------------------------------------------------------------------

class Parser {
public:
    Parser(std::vector<Token> toks, const ParseOptions& opts)
        : toks_(std::move(toks)), opts_(opts) {}

    Expr parse() {
        Expr e = additive();
        expect(Tok::End, "end of input");
        return e;
    }

private:
    const Token& peek() const { return toks_[idx_]; }
    Token take() { return toks_[idx_++]; }

    void expect(Tok kind, const char* what) {
        if (peek().kind != kind)
            throw ParseError(std::string("syntax error: expected ") + what + ", found " +
                                 tok_label(peek().kind),
                             peek().pos);
        ++idx_;
    }

    Expr additive() {
        Expr lhs = term();
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            const Op op = take().kind == Tok::Plus ? Op::Add : Op::Sub;
            Expr rhs = term();
            Expr node;
            node.op = op;
            node.children = {std::move(lhs), std::move(rhs)};
            lhs = std::move(node);
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = unary();
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            const Op op = take().kind == Tok::Star ? Op::Mul : Op::Div;
            Expr rhs = unary();
            Expr node;
            node.op = op;
            node.children = {std::move(lhs), std::move(rhs)};
            lhs = std::move(node);
        }
        return lhs;
    }

    Expr unary() {
        if (peek().kind == Tok::Minus) {
            ++idx_;
            Expr node;
            node.op = Op::Neg;
            node.children = {unary()};
            return node;
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        if (t.kind == Tok::Number) {
            Expr node;
            node.op = Op::Constant;
            node.constant = take().number;
            return node;
        }
        if (t.kind == Tok::LParen) {
            ++idx_;
            Expr inner = additive();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (t.kind == Tok::Ident) {
            Token id = take();
            auto col = column_table().find(id.text);
            if (col != column_table().end() && peek().kind != Tok::LParen) {
                Expr node;
                node.op = Op::ColumnRef;
                node.column = col->second;
                return node;
            }
            auto fn = func_table().find(id.text);
            if (id.text == "gate") return gate_call(id.pos);
            if (fn == func_table().end())
                throw ParseError("unknown identifier '" + id.text + "'", id.pos);
            return call(fn->second, id.pos);
        }
        throw ParseError(std::string("syntax error: expected number, column, function or '(', found ") +
                             tok_label(t.kind),
                         t.pos);
    }

    Expr call(const FuncInfo& info, std::size_t pos) {
        expect(Tok::LParen, "'('");
        Expr node;
        node.op = info.op;
        for (int a = 0; a < info.expr_args; ++a) {
            if (a > 0) expect(Tok::Comma, "','");
            node.children.push_back(additive());
        }
        if (info.has_window) {
            expect(Tok::Comma, "','");
            node.window = window_arg();
        }
        expect(Tok::RParen, "')'");
        (void)pos;
        return node;
    }

    Expr gate_call(std::size_t pos) {
        expect(Tok::LParen, "'('");
        Expr cond = additive();
        if (peek().kind != Tok::Less && peek().kind != Tok::Greater)
            throw ParseError("syntax error: expected '<' or '>' in gate condition, found " +
                                 std::string(tok_label(peek().kind)),
                             peek().pos);
        Expr cmp;
        cmp.op = take().kind == Tok::Less ? Op::Less : Op::Greater;
        cmp.children = {std::move(cond), additive()};
        expect(Tok::Comma, "','");
        Expr then_arm = additive();
        expect(Tok::Comma, "','");
        Expr else_arm = additive();
        expect(Tok::RParen, "')'");
        Expr node;
        node.op = Op::Gate;
        node.children = {std::move(cmp), std::move(then_arm), std::move(else_arm)};
        (void)pos;
        return node;
    }

    int window_arg() {
        const Token& t = peek();
        if (t.kind != Tok::Number)
            throw ParseError(std::string("syntax error: expected integer window, found ") +
                                 tok_label(t.kind),
                             t.pos);
        const Token tok = take();
        const double v = tok.number;
        if (v != std::floor(v) || v > 1e9)
            throw ParseError("window/lag must be an integer", tok.pos);
        long w = static_cast<long>(v);
        if (w < kMinWindow || w > kMaxWindow) {
            if (opts_.clamp_windows)
                w = std::clamp<long>(w, kMinWindow, kMaxWindow);
            else
                throw ParseError("window/lag " + std::to_string(w) + " out of [" +
                                     std::to_string(kMinWindow) + ", " + std::to_string(kMaxWindow) + "]",
                                 tok.pos);
        }
        return static_cast<int>(w);
    }

    std::vector<Token> toks_;
    ParseOptions opts_;
    std::size_t idx_ = 0;
};

// --- printer ------------------------------------------------------------------

int precedence(Op op) {
    switch (op) {
        case Op::Less: case Op::Greater: return 0;
        case Op::Add: case Op::Sub: return 1;
        case Op::Mul: case Op::Div: return 2;
        case Op::Neg: return 3;
        default: return 4;
    }
}

const char* binary_symbol(Op op) {
    switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Less: return "<";
        case Op::Greater: return ">";
        default: return "?";
    }
}

void print_rec(const Expr& e, std::string& out);

void print_child(const Expr& child, int parent_prec, bool is_right, std::string& out) {
    const int cp = precedence(child.op);
    const bool parens = cp < parent_prec || (is_right && cp == parent_prec);
    if (parens) out += '(';
    print_rec(child, out);
    if (parens) out += ')';
}

void print_rec(const Expr& e, std::string& out) {
    switch (e.op) {
        case Op::Constant:
            out += format_double(e.constant);
            return;
        case Op::ColumnRef:
            out += column_name(e.column);
            return;
        case Op::Add: case Op::Sub: case Op::Mul: case Op::Div:
        case Op::Less: case Op::Greater: {
            const int p = precedence(e.op);
            print_child(e.children[0], p, false, out);
            out += ' ';
            out += binary_symbol(e.op);
            out += ' ';
            print_child(e.children[1], p, true, out);
            return;
        }
        case Op::Neg:
            out += '-';
            print_child(e.children[0], precedence(Op::Neg), false, out);
            return;
        case Op::Gate:
            out += "gate(";
            print_rec(e.children[0], out);
            out += ", ";
            print_rec(e.children[1], out);
            out += ", ";
            print_rec(e.children[2], out);
            out += ')';
            return;
        default: {
            out += op_name(e.op);
            out += '(';
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += ", ";
                print_rec(e.children[i], out);
            }
            if (is_ts_op(e.op)) {
                out += ", ";
                out += std::to_string(e.window);
            }
            out += ')';
            return;
        }
    }
}

// --- walking helpers ------------------------------------------------------------

void collect_nodes(Expr& e, std::vector<Expr*>& out) {
    out.push_back(&e);
    for (Expr& c : e.children) collect_nodes(c, out);
}

void collect_nodes_const(const Expr& e, std::vector<const Expr*>& out) {
    out.push_back(&e);
    for (const Expr& c : e.children) collect_nodes_const(c, out);
}

}  // namespace

bool Expr::operator==(const Expr& other) const {
    if (op != other.op || window != other.window) return false;
    if (op == Op::Constant && constant != other.constant) return false;
    if (op == Op::ColumnRef && column != other.column) return false;
    if (children.size() != other.children.size()) return false;
    for (std::size_t i = 0; i < children.size(); ++i)
        if (!(children[i] == other.children[i])) return false;
    return true;
}

const char* column_name(Column c) {
    switch (c) {
        case Column::Open: return "open";
        case Column::High: return "high";
        case Column::Low: return "low";
        case Column::Close: return "close";
        case Column::Volume: return "volume";
    }
    return "?";
}

const char* op_name(Op op) {
    switch (op) {
        case Op::Abs: return "abs";
        case Op::Log1p: return "log1p";
        case Op::Sign: return "sign";
        case Op::Tanh: return "tanh";
        case Op::Sqrt: return "sqrt";
        case Op::Neg: return "neg";
        case Op::TsMean: return "ts_mean";
        case Op::TsStd: return "ts_std";
        case Op::TsSum: return "ts_sum";
        case Op::TsMin: return "ts_min";
        case Op::TsMax: return "ts_max";
        case Op::TsRank: return "ts_rank";
        case Op::TsCorr: return "ts_corr";
        case Op::Delay: return "delay";
        case Op::Delta: return "delta";
        case Op::CsRank: return "cs_rank";
        case Op::CsZscore: return "cs_zscore";
        case Op::Gate: return "gate";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::Div: return "div";
        case Op::Less: return "less";
        case Op::Greater: return "greater";
        case Op::Constant: return "const";
        case Op::ColumnRef: return "column";
    }
    return "?";
}

Expr parse_expr(std::string_view text, const ParseOptions& opts) {
    Parser p(lex(text), opts);
    return p.parse();
}

std::string print_expr(const Expr& expr) {
    std::string out;
    print_rec(expr, out);
    return out;
}

ComplexityReport complexity(const Expr& expr) {
    ComplexityReport rep;
    std::vector<const Expr*> nodes;
    collect_nodes_const(expr, nodes);
    rep.node_count = static_cast<int>(nodes.size());
    for (const Expr* n : nodes) {
        if (is_logical_step(n->op)) ++rep.logical_steps;
        for (const Expr& c : n->children) {
            const bool same = n->op == c.op;
            if (!same) continue;
            switch (n->op) {
                case Op::CsRank:
                    rep.redundancy_flags.push_back("cs_rank(cs_rank(x))");
                    break;
                case Op::CsZscore:
                    rep.redundancy_flags.push_back("cs_zscore(cs_zscore(x))");
                    break;
                case Op::Abs:
                    rep.redundancy_flags.push_back("abs(abs(x))");
                    break;
                case Op::Sign:
                    rep.redundancy_flags.push_back("sign(sign(x))");
                    break;
                case Op::TsRank:
                    if (n->window == c.window)
                        rep.redundancy_flags.push_back("ts_rank(ts_rank(x, w), w)");
                    break;
                default:
                    break;
            }
        }
    }
    struct DepthFn {
        int operator()(const Expr& e) const {
            int d = 0;
            for (const Expr& c : e.children) d = std::max(d, (*this)(c));
            return d + 1;
        }
    };
    rep.depth = DepthFn{}(expr);
    return rep;
}

std::vector<std::string> validate(const Expr& expr, const ComplexityCaps& caps) {
    std::vector<std::string> out;
    const ComplexityReport rep = complexity(expr);
    if (rep.logical_steps > caps.max_logical_steps)
        out.push_back("logical steps " + std::to_string(rep.logical_steps) + " > " +
                      std::to_string(caps.max_logical_steps));
    if (rep.node_count > caps.max_node_count)
        out.push_back("node count " + std::to_string(rep.node_count) + " > " +
                      std::to_string(caps.max_node_count));
    if (rep.depth > caps.max_depth)
        out.push_back("depth " + std::to_string(rep.depth) + " > " + std::to_string(caps.max_depth));
    for (const std::string& f : rep.redundancy_flags)
        out.push_back("redundant stacking: " + f);

    std::vector<const Expr*> nodes;
    collect_nodes_const(expr, nodes);
    for (const Expr* n : nodes) {
        if (is_ts_op(n->op) && (n->window < kMinWindow || n->window > kMaxWindow))
            out.push_back("window/lag " + std::to_string(n->window) + " out of [" +
                          std::to_string(kMinWindow) + ", " + std::to_string(kMaxWindow) + "]");
        if (n->op == Op::Constant) {
            if (!std::isfinite(n->constant))
                out.push_back("non-finite constant");
            else if (n->constant < 0.0)
                out.push_back("negative constant literal (use neg)");
        }
        if (n->op == Op::Gate && !is_comparison(n->children[0].op))
            out.push_back("gate condition must be a comparison");
        for (std::size_t ci = 0; ci < n->children.size(); ++ci) {
            const bool cond_slot = n->op == Op::Gate && ci == 0;
            if (!cond_slot && is_comparison(n->children[ci].op))
                out.push_back("comparison outside gate condition");
        }
    }
    if (is_comparison(expr.op)) out.push_back("comparison outside gate condition");
    return out;
}

// --- seeded tree operations -----------------------------------------------------

namespace {

Expr leaf_expr(Rng& rng) {
    Expr e;
    if (rng.uniform() < 0.8) {
        e.op = Op::ColumnRef;
        static const Column cols[] = {Column::Open, Column::High, Column::Low, Column::Close,
                                      Column::Volume};
        e.column = cols[rng.uniform_int(5)];
    } else {
        e.op = Op::Constant;
        static const double consts[] = {0.5, 1.0, 2.0, 10.0, 1e-9};
        e.constant = consts[rng.uniform_int(5)];
    }
    return e;
}

int pick_window(Rng& rng) {
    static const int windows[] = {2, 3, 5, 10, 20, 60};
    return windows[rng.uniform_int(6)];
}

Expr gen_expr(Rng& rng, int depth_left, int& steps_left) {
    if (depth_left <= 1) return leaf_expr(rng);
    const double r = rng.uniform();
    if (r < 0.30) return leaf_expr(rng);
    if (r < 0.45) {
        // Ratio pattern common in factor formulas.
        Expr num;
        num.op = Op::Sub;
        num.children = {leaf_expr(rng), leaf_expr(rng)};
        Expr den;
        den.op = Op::Add;
        Expr eps;
        eps.op = Op::Constant;
        eps.constant = 1e-9;
        den.children = {leaf_expr(rng), eps};
        Expr div;
        div.op = Op::Div;
        div.children = {std::move(num), std::move(den)};
        return div;
    }
    if (r < 0.62) {
        Expr e;
        static const Op arith[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
        e.op = arith[rng.uniform_int(4)];
        e.children = {gen_expr(rng, depth_left - 1, steps_left),
                      gen_expr(rng, depth_left - 1, steps_left)};
        return e;
    }
    if (r < 0.74) {
        Expr e;
        static const Op un[] = {Op::Abs, Op::Log1p, Op::Sign, Op::Tanh, Op::Sqrt, Op::Neg};
        e.op = un[rng.uniform_int(6)];
        e.children = {gen_expr(rng, depth_left - 1, steps_left)};
        return e;
    }
    if (steps_left <= 0) return leaf_expr(rng);
    --steps_left;
    const double s = rng.uniform();
    if (s < 0.55) {
        Expr e;
        static const Op ts[] = {Op::TsMean, Op::TsStd, Op::TsSum, Op::TsMin, Op::TsMax, Op::TsRank};
        e.op = ts[rng.uniform_int(6)];
        e.window = pick_window(rng);
        e.children = {gen_expr(rng, depth_left - 1, steps_left)};
        return e;
    }
    if (s < 0.65) {
        Expr e;
        e.op = Op::TsCorr;
        e.window = pick_window(rng);
        e.children = {gen_expr(rng, depth_left - 1, steps_left),
                      gen_expr(rng, depth_left - 1, steps_left)};
        return e;
    }
    if (s < 0.78) {
        Expr e;
        e.op = rng.uniform() < 0.5 ? Op::Delay : Op::Delta;
        e.window = 1 + static_cast<int>(rng.uniform_int(10));
        e.children = {gen_expr(rng, depth_left - 1, steps_left)};
        return e;
    }
    if (s < 0.93) {
        Expr e;
        e.op = rng.uniform() < 0.5 ? Op::CsRank : Op::CsZscore;
        e.children = {gen_expr(rng, depth_left - 1, steps_left)};
        return e;
    }
    Expr cmp;
    cmp.op = rng.uniform() < 0.5 ? Op::Less : Op::Greater;
    cmp.children = {gen_expr(rng, 2, steps_left), gen_expr(rng, 2, steps_left)};
    Expr e;
    e.op = Op::Gate;
    e.children = {std::move(cmp), gen_expr(rng, depth_left - 1, steps_left),
                  gen_expr(rng, depth_left - 1, steps_left)};
    return e;
}

struct EditSlot {
    std::size_t node;  // preorder index
    enum Kind { SwapOp, WindowUp, WindowDown, SwapColumn } kind;
    Op new_op = Op::Constant;
    Column new_column = Column::Open;
};

std::vector<Op> op_alternatives(Op op) {
    static const std::vector<Op> arith = {Op::Add, Op::Sub, Op::Mul, Op::Div};
    static const std::vector<Op> un = {Op::Abs, Op::Log1p, Op::Sign, Op::Tanh, Op::Sqrt, Op::Neg};
    static const std::vector<Op> ts1 = {Op::TsMean, Op::TsStd, Op::TsSum,
                                        Op::TsMin,  Op::TsMax, Op::TsRank};
    static const std::vector<Op> lag = {Op::Delay, Op::Delta};
    static const std::vector<Op> cs = {Op::CsRank, Op::CsZscore};
    static const std::vector<Op> cmp = {Op::Less, Op::Greater};
    const std::vector<Op>* group = nullptr;
    for (const auto* g : {&arith, &un, &ts1, &lag, &cs, &cmp}) {
        if (std::find(g->begin(), g->end(), op) != g->end()) {
            group = g;
            break;
        }
    }
    std::vector<Op> out;
    if (!group) return out;
    for (Op o : *group)
        if (o != op) out.push_back(o);
    return out;
}

int perturb_window(int w, bool up) {
    const double scaled = up ? w * 1.25 : w * 0.75;
    int cand = static_cast<int>(std::lround(scaled));
    cand = std::clamp(cand, kMinWindow, kMaxWindow);
    if (cand == w) cand = up ? std::min(kMaxWindow, w + 1) : std::max(kMinWindow, w - 1);
    return cand;
}

}  // namespace

Expr sample_expr(Rng& rng, const ComplexityCaps& caps) {
    for (int attempt = 0; attempt < 24; ++attempt) {
        int steps = 1 + static_cast<int>(rng.uniform_int(3));
        Expr e = gen_expr(rng, 6, steps);
        if (validate(e, caps).empty()) return e;
    }
    Expr fallback;
    fallback.op = Op::ColumnRef;
    fallback.column = Column::Close;
    return fallback;
}

Expr mutate_expr(const Expr& expr, Rng& rng) {
    Expr copy = expr;
    std::vector<Expr*> nodes;
    collect_nodes(copy, nodes);

    std::vector<EditSlot> slots;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Expr& n = *nodes[i];
        for (Op alt : op_alternatives(n.op)) slots.push_back({i, EditSlot::SwapOp, alt, {}});
        if (is_ts_op(n.op)) {
            if (n.window < kMaxWindow) slots.push_back({i, EditSlot::WindowUp, {}, {}});
            if (n.window > kMinWindow) slots.push_back({i, EditSlot::WindowDown, {}, {}});
        }
        if (n.op == Op::ColumnRef) {
            for (Column c : {Column::Open, Column::High, Column::Low, Column::Close, Column::Volume})
                if (c != n.column) slots.push_back({i, EditSlot::SwapColumn, {}, c});
        }
    }
    if (slots.empty()) return copy;
    const EditSlot& slot = slots[rng.uniform_int(slots.size())];
    Expr& target = *nodes[slot.node];
    switch (slot.kind) {
        case EditSlot::SwapOp: target.op = slot.new_op; break;
        case EditSlot::WindowUp: target.window = perturb_window(target.window, true); break;
        case EditSlot::WindowDown: target.window = perturb_window(target.window, false); break;
        case EditSlot::SwapColumn: target.column = slot.new_column; break;
    }
    return copy;
}

Expr crossover_expr(const Expr& base, const Expr& donor, Rng& rng, const ComplexityCaps& caps) {
    std::vector<const Expr*> donor_nodes;
    collect_nodes_const(donor, donor_nodes);
    std::vector<const Expr*> subtrees;
    for (const Expr* n : donor_nodes)
        if (!is_comparison(n->op)) subtrees.push_back(n);

    Expr last = base;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Expr copy = base;
        std::vector<Expr*> sites_all;
        collect_nodes(copy, sites_all);
        std::vector<Expr*> sites;
        for (Expr* n : sites_all)
            if (!is_comparison(n->op)) sites.push_back(n);
        if (sites.empty() || subtrees.empty()) return copy;
        Expr* site = sites[rng.uniform_int(sites.size())];
        const Expr* graft = subtrees[rng.uniform_int(subtrees.size())];
        *site = *graft;
        last = std::move(copy);
        if (validate(last, caps).empty()) return last;
    }
    return last;
}

}  // namespace alphamine
