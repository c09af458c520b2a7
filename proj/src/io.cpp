#include "hortonlab/io.hpp"

#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hortonlab {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

namespace {

double parse_number(std::string_view s, const char* what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument(std::string(what) + ": malformed number '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string tree_to_json(const Tree& t) {
    std::string out = "{\"root_stem_length\":";
    out += t.root_stem_length ? format_double(*t.root_stem_length) : "null";
    out += ",\"embedded\":";
    out += t.embedded ? "true" : "false";
    out += ",\"tree\":";
    if (t.is_empty()) {
        out += "null}";
        return out;
    }
    const bool lengths = t.has_lengths();
    // (node, next child slot to emit)
    std::vector<std::pair<int, int>> stack{{t.stem(), 0}};
    auto open = [&](int v) {
        out += "{\"length\":";
        out += lengths ? format_double(t.length[v]) : "null";
        out += ",\"children\":[";
    };
    open(t.stem());
    while (!stack.empty()) {
        auto& [v, slot] = stack.back();
        const int c = slot < 2 ? t.child[v][slot] : kNone;
        if (c == kNone) {
            out += "]}";
            stack.pop_back();
            continue;
        }
        if (slot == 1) out += ',';
        ++slot;
        open(c);
        stack.push_back({c, 0});
    }
    out += '}';
    return out;
}

Tree tree_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("tree JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("tree")) throw std::invalid_argument("tree JSON: missing \"tree\"");
    const auto& root = j["tree"];
    bool lengths = false;
    if (!root.is_null()) {
        if (!root.is_object()) throw std::invalid_argument("tree JSON: node must be an object");
        lengths = root.contains("length") && !root["length"].is_null();
    }
    Tree t = Tree::empty(lengths);
    if (j.contains("embedded")) t.embedded = j["embedded"].get<bool>();
    if (j.contains("root_stem_length") && !j["root_stem_length"].is_null())
        t.root_stem_length = j["root_stem_length"].get<double>();
    if (root.is_null()) return t;
    std::vector<std::pair<const nlohmann::json*, int>> stack{{&root, 0}};
    while (!stack.empty()) {
        auto [node, par] = stack.back();
        stack.pop_back();
        if (!node->is_object()) throw std::invalid_argument("tree JSON: node must be an object");
        const bool has = node->contains("length") && !(*node)["length"].is_null();
        if (has != lengths) throw std::invalid_argument("tree JSON: lengths on some nodes only");
        const double len = lengths ? (*node)["length"].get<double>() : 0.0;
        const int v = t.add_node(par, len);
        if (!node->contains("children")) continue;
        const auto& kids = (*node)["children"];
        if (!kids.is_array() || kids.size() > 2) throw std::invalid_argument("tree JSON: children must be an array of at most 2");
        for (std::size_t i = kids.size(); i-- > 0;) stack.push_back({&kids[i], v});
    }
    return t;
}

std::string tree_to_newick(const Tree& t) {
    if (t.is_empty()) return ";";
    const bool lengths = t.has_lengths();
    std::string out = "(";
    std::vector<std::pair<int, int>> stack{{t.stem(), 0}};
    while (!stack.empty()) {
        auto& [v, slot] = stack.back();
        if (slot == 0 && t.child_count(v) > 0) out += '(';
        const int c = slot < 2 ? t.child[v][slot] : kNone;
        if (c == kNone) {
            if (t.child_count(v) > 0) out += ')';
            if (lengths) {
                out += ':';
                out += format_double(t.length[v]);
            }
            stack.pop_back();
            continue;
        }
        if (slot == 1) out += ',';
        ++slot;
        stack.push_back({c, 0});
    }
    out += ')';
    if (t.root_stem_length) {
        out += ':';
        out += format_double(*t.root_stem_length);
    }
    out += ';';
    return out;
}

Tree tree_from_newick(std::string_view text, bool embedded) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    if (text.empty() || text.back() != ';') throw std::invalid_argument("Newick: missing ';'");
    const bool lengths = text.find(':') != std::string_view::npos;
    Tree t = Tree::empty(lengths);
    t.embedded = embedded;
    if (text == ";") return t;
    if (text.front() != '(') throw std::invalid_argument("Newick: expected '('");

    std::size_t pos = 1;
    auto is_delim = [](char c) { return c == '(' || c == ')' || c == ',' || c == ':' || c == ';'; };
    auto skip_label = [&] {
        while (pos < text.size() && !is_delim(text[pos])) ++pos;
    };
    auto read_length = [&]() -> std::optional<double> {
        if (pos >= text.size() || text[pos] != ':') return std::nullopt;
        const std::size_t start = ++pos;
        while (pos < text.size() && !is_delim(text[pos])) ++pos;
        return parse_number(text.substr(start, pos - start), "Newick");
    };
    auto add = [&](int par) {
        if (t.child_count(par) == 2) throw std::invalid_argument("Newick: more than two children");
        return t.add_node(par);
    };

    int cur = 0;
    bool want_child = true;
    while (pos < text.size()) {
        const char c = text[pos];
        if (want_child) {
            if (c == '(') {
                cur = add(cur);
                ++pos;
            } else {
                const int v = add(cur);
                skip_label();
                if (auto len = read_length()) t.length[v] = *len;
                want_child = false;
            }
            continue;
        }
        if (c == ',') {
            ++pos;
            want_child = true;
        } else if (c == ')') {
            ++pos;
            const int closed = cur;
            skip_label();
            auto len = read_length();
            if (closed == 0) {
                if (len) t.root_stem_length = *len;
                if (pos + 1 != text.size() || text[pos] != ';') throw std::invalid_argument("Newick: trailing text");
                if (t.child_count(0) != 1) throw std::invalid_argument("Newick: root must have exactly one child");
                return t;
            }
            if (len) t.length[closed] = *len;
            cur = t.parent[closed];
        } else {
            throw std::invalid_argument(std::string("Newick: unexpected '") + c + "'");
        }
    }
    throw std::invalid_argument("Newick: unbalanced parentheses");
}

void write_jsonl(std::ostream& out, const std::vector<Tree>& trees) {
    for (const auto& t : trees) out << tree_to_json(t) << '\n';
}

std::vector<Tree> read_jsonl(std::istream& in) {
    std::vector<Tree> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(tree_from_json(line));
    }
    return out;
}

namespace {

std::vector<std::pair<double, double>> read_two_columns(std::istream& in, const char* what) {
    std::vector<std::pair<double, double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument(std::string(what) + ": expected two columns");
        if (first) {
            first = false;
            const auto head = std::string_view(line).substr(0, comma);
            double dummy;
            if (std::from_chars(head.data(), head.data() + head.size(), dummy).ec != std::errc{}) continue;
        }
        rows.emplace_back(parse_number(std::string_view(line).substr(0, comma), what),
                          parse_number(std::string_view(line).substr(comma + 1), what));
    }
    return rows;
}

}  // namespace

void write_series_csv(std::ostream& out, const TimeSeries& s) {
    out << "k,value\n";
    for (std::size_t k = 0; k < s.values.size(); ++k) out << k << ',' << format_double(s.values[k]) << '\n';
}

TimeSeries read_series_csv(std::istream& in) {
    TimeSeries s;
    for (const auto& [k, v] : read_two_columns(in, "series CSV")) {
        if (k != static_cast<double>(s.values.size())) throw std::invalid_argument("series CSV: index column must count from 0");
        s.values.push_back(v);
    }
    if (s.values.empty()) throw std::invalid_argument("series CSV: no rows");
    return s;
}

void write_excursion_csv(std::ostream& out, const Excursion& e) {
    out << "t,value\n";
    for (std::size_t i = 0; i < e.times.size(); ++i) out << format_double(e.times[i]) << ',' << format_double(e.values[i]) << '\n';
}

Excursion read_excursion_csv(std::istream& in) {
    Excursion e;
    for (const auto& [t, v] : read_two_columns(in, "excursion CSV")) {
        e.times.push_back(t);
        e.values.push_back(v);
    }
    return e;
}

ParamMap ParamMap::parse(std::istream& in) {
    ParamMap p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("params line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw std::invalid_argument("params line " + std::to_string(lineno) + ": empty key");
        p.values_[key] = trim(line.substr(eq + 1));
    }
    return p;
}

ParamMap ParamMap::parse_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
}

std::optional<std::string> ParamMap::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

double ParamMap::number(const std::string& key) const {
    auto v = get(key);
    if (!v) throw std::invalid_argument("missing parameter '" + key + "'");
    return parse_number(*v, key.c_str());
}

double ParamMap::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::vector<double> ParamMap::numbers(const std::string& key) const {
    auto v = get(key);
    if (!v) throw std::invalid_argument("missing parameter '" + key + "'");
    std::vector<double> out;
    std::string_view s = *v;
    while (!s.empty()) {
        const auto comma = s.find(',');
        out.push_back(parse_number(s.substr(0, comma), key.c_str()));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace hortonlab
