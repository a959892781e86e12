#include "cor/api_ast.hpp"

#include "cor/text.hpp"

#include <algorithm>

namespace cor::ast {

bool operator==(const CallValue& a, const CallValue& b) {
    if (a.call == b.call) return true;
    if (!a.call || !b.call) return false;
    return *a.call == *b.call;
}

bool operator==(const ListValue& a, const ListValue& b) {
    return a.items == b.items;
}

const AstValue* ApiCallAst::find_keyword(std::string_view name) const noexcept {
    for (const auto& kw : keyword) {
        if (kw.name == name) return &kw.value;
    }
    return nullptr;
}

namespace {

constexpr int kMaxDepth = 64;

bool is_ident_start(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) noexcept {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}

// Recursive-descent parser over one candidate start position. Every method
// returns false on failure; `furthest` records how far any attempt got.
class CallParser {
public:
    explicit CallParser(std::string_view src) : src_(src) {}

    bool parse_call_at(std::size_t start, ApiCallAst& out) {
        pos_ = start;
        return call(out, 0);
    }

    [[nodiscard]] std::size_t furthest() const noexcept { return furthest_; }

private:
    bool fail() {
        furthest_ = std::max(furthest_, pos_);
        return false;
    }

    [[nodiscard]] bool at_end() const noexcept { return pos_ >= src_.size(); }
    [[nodiscard]] char peek() const noexcept { return at_end() ? '\0' : src_[pos_]; }

    void skip_ws() {
        while (!at_end() && text::is_space(src_[pos_])) ++pos_;
    }

    bool identifier(std::string& out) {
        if (at_end() || !is_ident_start(src_[pos_])) return fail();
        const std::size_t start = pos_;
        while (!at_end() && is_ident_char(src_[pos_])) ++pos_;
        out.assign(src_.substr(start, pos_ - start));
        return true;
    }

    bool dotted_name(std::vector<std::string>& segments) {
        std::string seg;
        if (!identifier(seg)) return false;
        segments.push_back(std::move(seg));
        while (peek() == '.' && pos_ + 1 < src_.size() && is_ident_start(src_[pos_ + 1])) {
            ++pos_;
            if (!identifier(seg)) return false;
            segments.push_back(std::move(seg));
        }
        return true;
    }

    bool call(ApiCallAst& out, int depth) {
        if (depth > kMaxDepth) return fail();
        out = ApiCallAst{};
        if (!dotted_name(out.callee)) return false;
        return call_args(out, depth);
    }

    // Expects '(' at pos_.
    bool call_args(ApiCallAst& out, int depth) {
        if (peek() != '(') return fail();
        ++pos_;
        skip_ws();
        if (peek() == ')') {
            ++pos_;
            return true;
        }
        while (true) {
            skip_ws();
            if (peek() == ')') {  // trailing comma
                ++pos_;
                return true;
            }
            const std::size_t arg_start = pos_;
            std::string name;
            bool is_keyword = false;
            if (is_ident_start(peek())) {
                identifier(name);
                skip_ws();
                if (peek() == '=' && (pos_ + 1 >= src_.size() || src_[pos_ + 1] != '=')) {
                    ++pos_;
                    is_keyword = true;
                } else {
                    pos_ = arg_start;
                }
            }
            skip_ws();
            AstValue v;
            if (!value(v, depth + 1)) return false;
            if (is_keyword) {
                if (out.find_keyword(name) != nullptr) return fail();
                out.keyword.push_back(KeywordArg{std::move(name), std::move(v)});
            } else {
                out.positional.push_back(std::move(v));
            }
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            if (peek() == ')') {
                ++pos_;
                return true;
            }
            return fail();
        }
    }

    bool value(AstValue& out, int depth) {
        if (depth > kMaxDepth) return fail();
        const char c = peek();
        if (c == '\'' || c == '"') return string_lit(out);
        if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.') return number(out);
        if (c == '[') return list(out, depth);
        if (is_ident_start(c)) {
            std::vector<std::string> segments;
            if (!dotted_name(segments)) return false;
            if (peek() == '(') {
                auto nested = std::make_shared<ApiCallAst>();
                nested->callee = std::move(segments);
                if (!call_args(*nested, depth)) return false;
                out.node = CallValue{std::move(nested)};
                return true;
            }
            if (segments.size() == 1) {
                const auto& s = segments.front();
                if (s == "True" || s == "true") {
                    out.node = BoolLit{true};
                    return true;
                }
                if (s == "False" || s == "false") {
                    out.node = BoolLit{false};
                    return true;
                }
            }
            out.node = Identifier{std::move(segments)};
            return true;
        }
        return fail();
    }

    bool string_lit(AstValue& out) {
        const char quote = src_[pos_++];
        std::string s;
        while (!at_end()) {
            const char c = src_[pos_++];
            if (c == quote) {
                out.node = StringLit{std::move(s)};
                return true;
            }
            if (c == '\n') break;
            if (c == '\\') {
                if (at_end()) break;
                const char e = src_[pos_++];
                switch (e) {
                    case 'n': s.push_back('\n'); break;
                    case 't': s.push_back('\t'); break;
                    case 'r': s.push_back('\r'); break;
                    default: s.push_back(e); break;
                }
                continue;
            }
            s.push_back(c);
        }
        return fail();
    }

    bool number(AstValue& out) {
        const std::size_t start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        std::size_t digits = 0;
        while (!at_end() && src_[pos_] >= '0' && src_[pos_] <= '9') {
            ++pos_;
            ++digits;
        }
        if (peek() == '.') {
            ++pos_;
            while (!at_end() && src_[pos_] >= '0' && src_[pos_] <= '9') {
                ++pos_;
                ++digits;
            }
        }
        if (digits == 0) return fail();
        if (peek() == 'e' || peek() == 'E') {
            const std::size_t mark = pos_;
            ++pos_;
            if (peek() == '-' || peek() == '+') ++pos_;
            std::size_t exp_digits = 0;
            while (!at_end() && src_[pos_] >= '0' && src_[pos_] <= '9') {
                ++pos_;
                ++exp_digits;
            }
            if (exp_digits == 0) pos_ = mark;
        }
        if (!at_end() && is_ident_char(src_[pos_])) return fail();
        out.node = NumberLit{std::string(src_.substr(start, pos_ - start))};
        return true;
    }

    bool list(AstValue& out, int depth) {
        ++pos_;  // '['
        ListValue items;
        skip_ws();
        while (peek() != ']') {
            AstValue v;
            if (!value(v, depth + 1)) return false;
            items.items.push_back(std::move(v));
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                skip_ws();
                continue;
            }
            if (peek() != ']') return fail();
        }
        ++pos_;
        out.node = std::move(items);
        return true;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t furthest_ = 0;
};

std::string quote_single(std::string_view s) {
    std::string out = "'";
    for (const char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out.push_back(c);
        }
    }
    out.push_back('\'');
    return out;
}

// Value nodes that are calls, recursively through lists.
void collect_calls(const AstValue& v, std::vector<const ApiCallAst*>& out);

void collect_calls(const ApiCallAst& call, std::vector<const ApiCallAst*>& out) {
    out.push_back(&call);
    for (const auto& p : call.positional) collect_calls(p, out);
    for (const auto& kw : call.keyword) collect_calls(kw.value, out);
}

void collect_calls(const AstValue& v, std::vector<const ApiCallAst*>& out) {
    if (const auto* c = std::get_if<CallValue>(&v.node)) {
        if (c->call) collect_calls(*c->call, out);
    } else if (const auto* l = std::get_if<ListValue>(&v.node)) {
        for (const auto& item : l->items) collect_calls(item, out);
    }
}

bool arguments_satisfied(const ApiCallAst& node, const std::map<std::string, std::string>& required) {
    for (const auto& [name, want] : required) {
        const AstValue* got = nullptr;
        if (!name.empty() && name.front() == '#') {
            std::size_t index = 0;
            try {
                index = std::stoul(name.substr(1));
            } catch (const std::exception&) {
                return false;
            }
            if (index < node.positional.size()) got = &node.positional[index];
        } else {
            got = node.find_keyword(name);
        }
        if (got == nullptr || normalized_text(*got) != want) return false;
    }
    return true;
}

}  // namespace

std::optional<ApiCallAst> try_parse_call(std::string_view snippet) {
    try {
        return parse_call(snippet);
    } catch (const AstParseError&) {
        return std::nullopt;
    }
}

ApiCallAst parse_call(std::string_view snippet) {
    CallParser parser(snippet);
    for (std::size_t i = 0; i < snippet.size(); ++i) {
        if (!is_ident_start(snippet[i])) continue;
        if (i > 0 && (is_ident_char(snippet[i - 1]) || snippet[i - 1] == '.')) continue;
        ApiCallAst call;
        if (parser.parse_call_at(i, call)) return call;
    }
    throw AstParseError("no parseable API call in snippet", std::max(parser.furthest(), snippet.size()));
}

std::string dotted(const std::vector<std::string>& segments) {
    return text::join(segments, ".");
}

std::string render(const AstValue& value) {
    return std::visit(
        [](const auto& node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, StringLit>) {
                return quote_single(node.value);
            } else if constexpr (std::is_same_v<T, NumberLit>) {
                return node.text;
            } else if constexpr (std::is_same_v<T, BoolLit>) {
                return node.value ? "True" : "False";
            } else if constexpr (std::is_same_v<T, Identifier>) {
                return dotted(node.segments);
            } else if constexpr (std::is_same_v<T, CallValue>) {
                return node.call ? render(*node.call) : std::string{};
            } else {
                std::string out = "[";
                for (std::size_t i = 0; i < node.items.size(); ++i) {
                    if (i > 0) out += ", ";
                    out += render(node.items[i]);
                }
                out += "]";
                return out;
            }
        },
        value.node);
}

std::string render(const ApiCallAst& call) {
    std::string out = dotted(call.callee);
    out += "(";
    bool first = true;
    for (const auto& p : call.positional) {
        if (!first) out += ", ";
        out += render(p);
        first = false;
    }
    for (const auto& kw : call.keyword) {
        if (!first) out += ", ";
        out += kw.name;
        out += "=";
        out += render(kw.value);
        first = false;
    }
    out += ")";
    return out;
}

std::string normalized_text(const AstValue& value) {
    if (const auto* s = std::get_if<StringLit>(&value.node)) {
        return std::string(text::trim(s->value));
    }
    return std::string(text::trim(render(value)));
}

std::map<std::string, std::string> required_arguments(const ApiCallAst& reference) {
    std::map<std::string, std::string> required;
    for (std::size_t i = 0; i < reference.positional.size(); ++i) {
        required.emplace("#" + std::to_string(i), normalized_text(reference.positional[i]));
    }
    for (const auto& kw : reference.keyword) {
        required.emplace(kw.name, normalized_text(kw.value));
    }
    return required;
}

CalleeMatch match_callee(const std::vector<std::string>& generated,
                         const std::vector<std::string>& reference) noexcept {
    if (generated == reference) return CalleeMatch::exact;
    const auto& shorter = generated.size() < reference.size() ? generated : reference;
    const auto& longer = generated.size() < reference.size() ? reference : generated;
    if (shorter.size() < 2 || shorter.size() == longer.size()) return CalleeMatch::none;
    return std::equal(shorter.rbegin(), shorter.rend(), longer.rbegin()) ? CalleeMatch::lenient
                                                                          : CalleeMatch::none;
}

SubtreeMatch subtree_match(const ApiCallAst& generated,
                           const std::vector<std::string>& reference_callee,
                           const std::map<std::string, std::string>& required) {
    std::vector<const ApiCallAst*> nodes;
    collect_calls(generated, nodes);
    SubtreeMatch result;
    for (const ApiCallAst* node : nodes) {
        const CalleeMatch cm = match_callee(node->callee, reference_callee);
        if (cm == CalleeMatch::none || !arguments_satisfied(*node, required)) continue;
        if (cm == CalleeMatch::exact) return SubtreeMatch{true, false};
        result = SubtreeMatch{true, true};
    }
    return result;
}

SubtreeMatch subtree_match(const ApiCallAst& generated, const corpus::ApiRef& reference) {
    const ApiCallAst ref_call = parse_call(reference.api_call);
    return subtree_match(generated, ref_call.callee, reference.api_arguments);
}

AstVerdict score_api_answer(std::string_view answer, const corpus::ApiRef& reference) {
    AstVerdict verdict;
    const auto generated = try_parse_call(answer);
    if (!generated) return verdict;
    verdict.parsed = true;
    const SubtreeMatch m = subtree_match(*generated, reference);
    verdict.matched = m.matched;
    verdict.lenient_callee = m.lenient_callee;
    return verdict;
}

double ast_accuracy(std::span<const std::string> answers, std::span<const corpus::ApiRef> references) {
    if (answers.size() != references.size()) {
        throw InvalidArgument("ast_accuracy: answers and references differ in length");
    }
    if (answers.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        if (score_api_answer(answers[i], references[i]).matched) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(answers.size());
}

}  // namespace cor::ast
