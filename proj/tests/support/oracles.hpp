#pragma once

// Reference implementations used to check the library from the outside.
// Nothing here calls into the code under test except where noted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// BM25, scored one document at a time straight from the definition.

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        const bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Bm25Hit {
    std::size_t ordinal;
    double score;
};

// Documents are the already-joined "title body" strings.
inline std::vector<Bm25Hit> bm25_rank(const std::vector<std::string>& docs, const std::string& query, double k1,
                                      double b) {
    std::vector<std::vector<std::string>> toks;
    for (const auto& d : docs) toks.push_back(words(d));
    const double n = static_cast<double>(docs.size());
    double total = 0;
    for (const auto& t : toks) total += static_cast<double>(t.size());
    const double avg = total / n;
    const auto q = words(query);

    std::vector<Bm25Hit> hits;
    for (std::size_t d = 0; d < toks.size(); ++d) {
        double score = 0.0;
        for (const auto& term : q) {
            double df = 0;
            for (const auto& t : toks) {
                if (std::find(t.begin(), t.end(), term) != t.end()) df += 1;
            }
            const double tf = static_cast<double>(std::count(toks[d].begin(), toks[d].end(), term));
            if (tf == 0) continue;
            const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
            const double len_ratio = avg > 0 ? static_cast<double>(toks[d].size()) / avg : 1.0;
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * len_ratio));
        }
        hits.push_back({d, score});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Bm25Hit& x, const Bm25Hit& y) { return x.score > y.score; });
    return hits;
}

// ---------------------------------------------------------------------------
// Call trees for the API matcher: an independent model, renderer and
// brute-force sub-tree search.

struct Call;

struct Value {
    enum Kind { str, num, boolean, ident, call, list } kind = str;
    std::string text;  // str: contents; num: digits; boolean: as written; ident: dotted
    std::shared_ptr<Call> nested;
    std::vector<Value> items;
};

struct Call {
    std::vector<std::string> callee;
    std::vector<Value> positional;
    std::vector<std::pair<std::string, Value>> keyword;
};

inline std::string join_dots(const std::vector<std::string>& segs) {
    std::string out;
    for (std::size_t i = 0; i < segs.size(); ++i) out += (i ? "." : "") + segs[i];
    return out;
}

std::string source(const Call& c, std::mt19937_64& style);

// Source text with random cosmetic variation (quote style, spacing).
inline std::string source(const Value& v, std::mt19937_64& style) {
    switch (v.kind) {
        case Value::str: return style() % 2 ? "'" + v.text + "'" : "\"" + v.text + "\"";
        case Value::num:
        case Value::boolean:
        case Value::ident: return v.text;
        case Value::call: return source(*v.nested, style);
        case Value::list: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.items.size(); ++i) out += (i ? (style() % 2 ? "," : ", ") : "") + source(v.items[i], style);
            return out + "]";
        }
    }
    return {};
}

inline std::string source(const Call& c, std::mt19937_64& style) {
    std::string out = join_dots(c.callee) + "(";
    bool first = true;
    const auto sep = [&] { return first ? std::string() : (style() % 2 ? std::string(",") : std::string(", ")); };
    for (const auto& p : c.positional) {
        out += sep() + source(p, style);
        first = false;
    }
    for (const auto& [name, value] : c.keyword) {
        out += sep() + name + (style() % 3 == 0 ? " = " : "=") + source(value, style);
        first = false;
    }
    return out + ")";
}

std::string canonical(const Call& c);

// Comparison text: string contents bare, everything else canonical.
inline std::string canonical(const Value& v) {
    switch (v.kind) {
        case Value::str: return "'" + v.text + "'";
        case Value::num: return v.text;
        case Value::boolean: return (v.text == "True" || v.text == "true") ? "True" : "False";
        case Value::ident: return v.text;
        case Value::call: return canonical(*v.nested);
        case Value::list: {
            std::string out = "[";
            for (std::size_t i = 0; i < v.items.size(); ++i) out += (i ? ", " : "") + canonical(v.items[i]);
            return out + "]";
        }
    }
    return {};
}

inline std::string canonical(const Call& c) {
    std::string out = join_dots(c.callee) + "(";
    bool first = true;
    for (const auto& p : c.positional) {
        out += (first ? "" : ", ") + canonical(p);
        first = false;
    }
    for (const auto& [name, value] : c.keyword) {
        out += (first ? "" : ", ") + name + "=" + canonical(value);
        first = false;
    }
    return out + ")";
}

inline std::string compare_text(const Value& v) {
    return v.kind == Value::str ? v.text : canonical(v);
}

inline std::map<std::string, std::string> required(const Call& ref) {
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < ref.positional.size(); ++i) out["#" + std::to_string(i)] = compare_text(ref.positional[i]);
    for (const auto& [name, value] : ref.keyword) out[name] = compare_text(value);
    return out;
}

// 0 none, 1 exact, 2 lenient (proper suffix, shorter side has two or more segments)
inline int callee_relation(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a == b) return 1;
    const auto& s = a.size() < b.size() ? a : b;
    const auto& l = a.size() < b.size() ? b : a;
    if (s.size() < 2 || s.size() == l.size()) return 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[s.size() - 1 - i] != l[l.size() - 1 - i]) return 0;
    }
    return 2;
}

inline void all_calls(const Call& c, std::vector<const Call*>& out);

inline void all_calls(const Value& v, std::vector<const Call*>& out) {
    if (v.kind == Value::call) all_calls(*v.nested, out);
    if (v.kind == Value::list) {
        for (const auto& item : v.items) all_calls(item, out);
    }
}

inline void all_calls(const Call& c, std::vector<const Call*>& out) {
    out.push_back(&c);
    for (const auto& p : c.positional) all_calls(p, out);
    for (const auto& kv : c.keyword) all_calls(kv.second, out);
}

struct TreeMatch {
    bool matched = false;
    bool lenient = false;
};

inline TreeMatch brute_force_match(const Call& generated, const Call& reference) {
    const auto req = required(reference);
    std::vector<const Call*> nodes;
    all_calls(generated, nodes);
    TreeMatch best;
    for (const Call* node : nodes) {
        const int rel = callee_relation(node->callee, reference.callee);
        if (rel == 0) continue;
        bool ok = true;
        for (const auto& [name, want] : req) {
            const Value* got = nullptr;
            if (name[0] == '#') {
                const std::size_t idx = std::stoul(name.substr(1));
                if (idx < node->positional.size()) got = &node->positional[idx];
            } else {
                for (const auto& kv : node->keyword) {
                    if (kv.first == name) got = &kv.second;
                }
            }
            if (got == nullptr || compare_text(*got) != want) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        if (rel == 1) return {true, false};
        best = {true, true};
    }
    return best;
}

class TreeGen {
public:
    explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }

    std::vector<std::string> callee() {
        static const std::vector<std::vector<std::string>> names{
            {"torch", "hub", "load"}, {"hub", "load"},     {"load"},          {"pipeline"},
            {"transformers", "pipeline"}, {"tf", "keras", "layers", "Dense"}, {"keras", "layers", "Dense"},
            {"layers", "Dense"},    {"hub", "KerasLayer"}, {"tensorflow_hub", "hub", "KerasLayer"}};
        return names[pick(names.size())];
    }

    Value leaf() {
        static const std::vector<std::string> strings{"pytorch/vision", "resnet18", "text-classification",
                                                      "relu", "gpt2", "a b", "x"};
        Value v;
        switch (pick(4)) {
            case 0: v.kind = Value::str; v.text = strings[pick(strings.size())]; break;
            case 1: v.kind = Value::num; v.text = std::to_string(pick(5)) + (pick(3) == 0 ? ".5" : ""); break;
            case 2: {
                static const char* bools[]{"True", "False", "true", "false"};
                v.kind = Value::boolean;
                v.text = bools[pick(4)];
                break;
            }
            default: v.kind = Value::ident; v.text = pick(2) ? "torch.float16" : "None";
        }
        return v;
    }

    Value value(int depth) {
        const std::size_t choice = depth > 0 ? pick(6) : 0;
        if (choice == 4) {
            Value v;
            v.kind = Value::call;
            v.nested = std::make_shared<Call>(call(depth - 1));
            return v;
        }
        if (choice == 5) {
            Value v;
            v.kind = Value::list;
            const std::size_t n = pick(3);
            for (std::size_t i = 0; i < n; ++i) v.items.push_back(value(depth - 1));
            return v;
        }
        return leaf();
    }

    Call call(int depth) {
        static const std::vector<std::string> kw_names{"model", "repo_or_dir", "pretrained", "units", "task",
                                                       "activation", "dtype"};
        Call c;
        c.callee = callee();
        const std::size_t npos = pick(3);
        for (std::size_t i = 0; i < npos; ++i) c.positional.push_back(value(depth));
        const std::size_t nkw = pick(3);
        for (std::size_t i = 0; i < nkw; ++i) {
            const std::string name = kw_names[pick(kw_names.size())];
            const bool dup = std::any_of(c.keyword.begin(), c.keyword.end(), [&](const auto& kv) { return kv.first == name; });
            if (!dup) c.keyword.emplace_back(name, value(depth));
        }
        return c;
    }

    // A generated tree that often contains (a perturbation of) the reference.
    Call around(const Call& reference, int depth) {
        Call base = reference;
        switch (pick(5)) {
            case 0: break;
            case 1: base.callee = callee(); break;
            case 2:
                if (!base.keyword.empty()) base.keyword.erase(base.keyword.begin() + static_cast<std::ptrdiff_t>(pick(base.keyword.size())));
                break;
            case 3: base.keyword.emplace_back("extra_arg", leaf()); break;
            default:
                if (!base.positional.empty()) base.positional[pick(base.positional.size())] = leaf();
        }
        if (depth <= 0 || pick(2) == 0) return base;
        Call outer = call(depth - 1);
        Value wrapped;
        wrapped.kind = Value::call;
        wrapped.nested = std::make_shared<Call>(std::move(base));
        if (pick(3) == 0) {
            Value list;
            list.kind = Value::list;
            list.items.push_back(leaf());
            list.items.push_back(std::move(wrapped));
            outer.positional.push_back(std::move(list));
        } else {
            outer.positional.insert(outer.positional.begin() + static_cast<std::ptrdiff_t>(pick(outer.positional.size() + 1)),
                                    std::move(wrapped));
        }
        return outer;
    }

private:
    std::mt19937_64 rng_;
};

}  // namespace oracle
