#pragma once

#include "hortonlab/tree.hpp"

namespace hortonlab {

struct PruneResult {
    Tree pruned;
    int removed_leaf_count = 0;
    int merged_edge_count = 0;
};

// Removes every non-root vertex with exactly one child, summing the merged
// edge lengths. The root keeps its single child.
Tree series_reduce(const Tree& raw, int* merged = nullptr);

// Horton pruning: drop all leaves with their parental edges, then series-reduce.
PruneResult prune(const Tree& tree);

Tree prune_iter(const Tree& tree, int m);

int order_by_pruning(const Tree& tree);

}  // namespace hortonlab
