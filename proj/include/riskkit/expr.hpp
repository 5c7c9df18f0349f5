#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskkit {

// Restricted arithmetic expressions for deterministic nodes:
// +, -, *, /, comparisons (yielding 0/1), and the functions
// min, max, median, abs, sqrt, exp, log. Identifiers refer to parent nodes.
class Expression {
public:
    static Expression parse(const std::string& text) {
        Parser p(text);
        Expression e;
        e.root_ = p.parse_comparison();
        p.skip_ws();
        if (!p.at_end()) throw std::invalid_argument("expression: trailing input at '" +
                                                     std::string(p.rest()) + "'");
        e.collect_names(e.root_.get());
        return e;
    }

    const std::vector<std::string>& variables() const { return names_; }

    // Resolve identifiers against an ordered name list (e.g. node parents).
    void bind(const std::vector<std::string>& order) {
        bind_node(root_.get(), order);
    }

    double eval(std::span<const double> values) const { return eval_node(root_.get(), values); }

private:
    struct Node {
        enum Kind { number, variable, binary, call } kind;
        double value = 0;
        std::string name;
        int index = -1;
        char op = 0;          // one of + - * / < > l g e n  (l = <=, g = >=, e = ==, n = !=)
        std::vector<std::unique_ptr<Node>> args;
    };

    std::unique_ptr<Node> root_;
    std::vector<std::string> names_;

    void collect_names(const Node* n) {
        if (n->kind == Node::variable) {
            if (std::find(names_.begin(), names_.end(), n->name) == names_.end())
                names_.push_back(n->name);
        }
        for (const auto& a : n->args) collect_names(a.get());
    }

    void bind_node(Node* n, const std::vector<std::string>& order) {
        if (n->kind == Node::variable) {
            auto it = std::find(order.begin(), order.end(), n->name);
            if (it == order.end())
                throw std::invalid_argument("expression references unknown name: " + n->name);
            n->index = static_cast<int>(it - order.begin());
        }
        for (auto& a : n->args) bind_node(a.get(), order);
    }

    static double eval_node(const Node* n, std::span<const double> v) {
        switch (n->kind) {
            case Node::number: return n->value;
            case Node::variable:
                if (n->index < 0) throw std::logic_error("expression evaluated before bind()");
                return v[static_cast<size_t>(n->index)];
            case Node::binary: {
                double a = eval_node(n->args[0].get(), v);
                double b = eval_node(n->args[1].get(), v);
                switch (n->op) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    case '/': return a / b;
                    case '<': return a < b ? 1.0 : 0.0;
                    case '>': return a > b ? 1.0 : 0.0;
                    case 'l': return a <= b ? 1.0 : 0.0;
                    case 'g': return a >= b ? 1.0 : 0.0;
                    case 'e': return a == b ? 1.0 : 0.0;
                    case 'n': return a != b ? 1.0 : 0.0;
                }
                return 0;
            }
            case Node::call: {
                std::vector<double> a;
                a.reserve(n->args.size());
                for (const auto& arg : n->args) a.push_back(eval_node(arg.get(), v));
                if (n->name == "abs") return std::abs(a[0]);
                if (n->name == "sqrt") return std::sqrt(a[0]);
                if (n->name == "exp") return std::exp(a[0]);
                if (n->name == "log") return std::log(a[0]);
                if (n->name == "min") return *std::min_element(a.begin(), a.end());
                if (n->name == "max") return *std::max_element(a.begin(), a.end());
                if (n->name == "median") {
                    std::sort(a.begin(), a.end());
                    size_t m = a.size() / 2;
                    return a.size() % 2 ? a[m] : 0.5 * (a[m - 1] + a[m]);
                }
                return 0;
            }
        }
        return 0;
    }

    class Parser {
    public:
        explicit Parser(const std::string& s) : s_(s) {}

        std::unique_ptr<Node> parse_comparison() {
            auto lhs = parse_additive();
            skip_ws();
            char op = 0;
            if (match("<=")) op = 'l';
            else if (match(">=")) op = 'g';
            else if (match("==")) op = 'e';
            else if (match("!=")) op = 'n';
            else if (match("<")) op = '<';
            else if (match(">")) op = '>';
            if (!op) return lhs;
            auto node = std::make_unique<Node>();
            node->kind = Node::binary;
            node->op = op;
            node->args.push_back(std::move(lhs));
            node->args.push_back(parse_additive());
            return node;
        }

        void skip_ws() {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        bool at_end() const { return pos_ >= s_.size(); }
        std::string_view rest() const { return std::string_view(s_).substr(pos_); }

    private:
        const std::string& s_;
        size_t pos_ = 0;

        bool match(std::string_view tok) {
            skip_ws();
            if (s_.compare(pos_, tok.size(), tok) == 0) {
                pos_ += tok.size();
                return true;
            }
            return false;
        }

        std::unique_ptr<Node> parse_additive() {
            auto lhs = parse_multiplicative();
            while (true) {
                skip_ws();
                char op = 0;
                if (match("+")) op = '+';
                else if (match("-")) op = '-';
                else break;
                auto node = std::make_unique<Node>();
                node->kind = Node::binary;
                node->op = op;
                node->args.push_back(std::move(lhs));
                node->args.push_back(parse_multiplicative());
                lhs = std::move(node);
            }
            return lhs;
        }

        std::unique_ptr<Node> parse_multiplicative() {
            auto lhs = parse_unary();
            while (true) {
                skip_ws();
                char op = 0;
                if (match("*")) op = '*';
                else if (match("/")) op = '/';
                else break;
                auto node = std::make_unique<Node>();
                node->kind = Node::binary;
                node->op = op;
                node->args.push_back(std::move(lhs));
                node->args.push_back(parse_unary());
                lhs = std::move(node);
            }
            return lhs;
        }

        std::unique_ptr<Node> parse_unary() {
            skip_ws();
            if (match("-")) {
                auto node = std::make_unique<Node>();
                node->kind = Node::binary;
                node->op = '-';
                auto zero = std::make_unique<Node>();
                zero->kind = Node::number;
                zero->value = 0.0;
                node->args.push_back(std::move(zero));
                node->args.push_back(parse_unary());
                return node;
            }
            return parse_primary();
        }

        std::unique_ptr<Node> parse_primary() {
            skip_ws();
            if (at_end()) throw std::invalid_argument("expression: unexpected end of input");
            char c = s_[pos_];
            if (c == '(') {
                ++pos_;
                auto inner = parse_comparison();
                if (!match(")")) throw std::invalid_argument("expression: missing ')'");
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                size_t end;
                double v = std::stod(s_.substr(pos_), &end);
                pos_ += end;
                auto node = std::make_unique<Node>();
                node->kind = Node::number;
                node->value = v;
                return node;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t start = pos_;
                while (pos_ < s_.size() &&
                       (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                    ++pos_;
                std::string name = s_.substr(start, pos_ - start);
                skip_ws();
                if (pos_ < s_.size() && s_[pos_] == '(') {
                    static const std::vector<std::string> fns = {"abs",  "sqrt",   "exp", "log",
                                                                 "min",  "max",    "median"};
                    if (std::find(fns.begin(), fns.end(), name) == fns.end())
                        throw std::invalid_argument("expression: unknown function " + name);
                    ++pos_;
                    auto node = std::make_unique<Node>();
                    node->kind = Node::call;
                    node->name = name;
                    if (!match(")")) {
                        node->args.push_back(parse_comparison());
                        while (match(",")) node->args.push_back(parse_comparison());
                        if (!match(")")) throw std::invalid_argument("expression: missing ')'");
                    }
                    bool unary = name == "abs" || name == "sqrt" || name == "exp" || name == "log";
                    if (unary && node->args.size() != 1)
                        throw std::invalid_argument("expression: " + name + " takes one argument");
                    if (!unary && node->args.empty())
                        throw std::invalid_argument("expression: " + name + " needs arguments");
                    return node;
                }
                auto node = std::make_unique<Node>();
                node->kind = Node::variable;
                node->name = std::move(name);
                return node;
            }
            throw std::invalid_argument(std::string("expression: unexpected character '") + c +
                                        "'");
        }
    };
};

}  // namespace riskkit
