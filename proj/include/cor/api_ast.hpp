#pragma once

#include "cor/corpus.hpp"
#include "cor/error.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

// Parsing of API invocation strings and the sub-tree match used for
// AST accuracy on API-call tasks.
namespace cor::ast {

struct ApiCallAst;
struct AstValue;

struct StringLit {
    std::string value;  // escapes decoded, quotes removed
    friend bool operator==(const StringLit&, const StringLit&) = default;
};

struct NumberLit {
    std::string text;  // as written
    friend bool operator==(const NumberLit&, const NumberLit&) = default;
};

struct BoolLit {
    bool value = false;
    friend bool operator==(const BoolLit&, const BoolLit&) = default;
};

struct Identifier {
    std::vector<std::string> segments;
    friend bool operator==(const Identifier&, const Identifier&) = default;
};

struct CallValue {
    std::shared_ptr<const ApiCallAst> call;
    friend bool operator==(const CallValue& a, const CallValue& b);
};

struct ListValue {
    std::vector<AstValue> items;
    friend bool operator==(const ListValue& a, const ListValue& b);
};

struct AstValue {
    std::variant<StringLit, NumberLit, BoolLit, Identifier, CallValue, ListValue> node;
    friend bool operator==(const AstValue& a, const AstValue& b) { return a.node == b.node; }
};

struct KeywordArg {
    std::string name;
    AstValue value;
    friend bool operator==(const KeywordArg&, const KeywordArg&) = default;
};

struct ApiCallAst {
    std::vector<std::string> callee;  // dotted name segments, non-empty
    std::vector<AstValue> positional;
    std::vector<KeywordArg> keyword;  // in source order, names unique

    [[nodiscard]] const AstValue* find_keyword(std::string_view name) const noexcept;

    friend bool operator==(const ApiCallAst&, const ApiCallAst&) = default;
};

class AstParseError : public Error {
public:
    AstParseError(const std::string& message, std::size_t position)
        : Error(message), position_(position) {}
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Finds the first parseable `dotted_name(args)` in `snippet`, skipping prose.
// Throws AstParseError carrying the furthest scan position reached.
[[nodiscard]] ApiCallAst parse_call(std::string_view snippet);
[[nodiscard]] std::optional<ApiCallAst> try_parse_call(std::string_view snippet);

// Canonical source form: single-quoted strings, ", " separators, True/False.
[[nodiscard]] std::string render(const ApiCallAst& call);
[[nodiscard]] std::string render(const AstValue& value);

// Comparison text of an argument value: string contents without quotes
// (trimmed), every other value in canonical form.
[[nodiscard]] std::string normalized_text(const AstValue& value);

[[nodiscard]] std::string dotted(const std::vector<std::string>& segments);

// Arguments of a reference call that a generated call must reproduce.
[[nodiscard]] std::map<std::string, std::string> required_arguments(const ApiCallAst& reference);

enum class CalleeMatch { none, exact, lenient };

// Exact dotted-name equality, or `lenient` when one name is a proper suffix of
// the other and the shorter one still has at least two segments
// (hub.load vs torch.hub.load).
[[nodiscard]] CalleeMatch match_callee(const std::vector<std::string>& generated,
                                       const std::vector<std::string>& reference) noexcept;

struct SubtreeMatch {
    bool matched = false;
    bool lenient_callee = false;
    explicit operator bool() const noexcept { return matched; }
};

[[nodiscard]] SubtreeMatch subtree_match(const ApiCallAst& generated,
                                         const std::vector<std::string>& reference_callee,
                                         const std::map<std::string, std::string>& required);

// Throws AstParseError if reference.api_call does not parse.
[[nodiscard]] SubtreeMatch subtree_match(const ApiCallAst& generated, const corpus::ApiRef& reference);

struct AstVerdict {
    bool parsed = false;
    bool matched = false;
    bool lenient_callee = false;
};

[[nodiscard]] AstVerdict score_api_answer(std::string_view answer, const corpus::ApiRef& reference);

// Fraction of answers that parse and sub-tree match their reference.
// `answers` and `references` are parallel; returns 0 for empty input.
[[nodiscard]] double ast_accuracy(std::span<const std::string> answers,
                                  std::span<const corpus::ApiRef> references);

}  // namespace cor::ast
