#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hortonlab/series.hpp"
#include "hortonlab/tree.hpp"

namespace hortonlab {

// {"root_stem_length": null|x, "embedded": bool, "tree": NODE|null} where NODE
// is {"length": x|null, "children": [NODE, ...]} for the vertex below the
// root. Numbers round-trip exactly.
std::string tree_to_json(const Tree& tree);
Tree tree_from_json(std::string_view text);

// "(" stem ")" [":" root_stem_length] ";" with unlabeled leaves; the empty
// tree is ";".
std::string tree_to_newick(const Tree& tree);
Tree tree_from_newick(std::string_view text, bool embedded = false);

void write_jsonl(std::ostream& out, const std::vector<Tree>& trees);
std::vector<Tree> read_jsonl(std::istream& in);

// "k,value" rows.
void write_series_csv(std::ostream& out, const TimeSeries& s);
TimeSeries read_series_csv(std::istream& in);
// "t,value" rows.
void write_excursion_csv(std::ostream& out, const Excursion& e);
Excursion read_excursion_csv(std::istream& in);

std::string format_double(double x);

// Flat "key = value" document; '#' starts a comment.
class ParamMap {
public:
    static ParamMap parse(std::istream& in);
    static ParamMap parse_text(std::string_view text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    double number(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::vector<double> numbers(const std::string& key) const;  // comma separated
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace hortonlab
