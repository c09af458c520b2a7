#pragma once

#include <string_view>

#include "hortonlab/io.hpp"
#include "hortonlab/samplers.hpp"
#include "hortonlab/tree.hpp"

namespace testing {

inline hortonlab::Tree nw(std::string_view text) { return hortonlab::tree_from_newick(text, true); }

// Embedded critical Galton-Watson tree with Exp(1) edges, size-capped.
inline hortonlab::Tree random_tree(hortonlab::Rng& rng, std::size_t cap = 4000) {
    for (;;) {
        try {
            auto t = hortonlab::sample_exp_gw(0.0, 0.5, rng, cap);
            t.embedded = true;
            return t;
        } catch (const hortonlab::CapError&) {
        }
    }
}

}  // namespace testing
