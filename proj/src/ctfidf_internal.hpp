#pragma once

#include <span>
#include <string>
#include <vector>

#include "prospect/topics.hpp"

namespace prospect::detail {

/// Raw term counts per cluster label, the input every c-TF-IDF weighting
/// (including the merged-group recomputation) starts from.
struct ClassCounts {
  Vocabulary vocabulary;
  std::vector<SparseRow> per_cluster;  // sorted by term index
  std::vector<double> term_totals;     // f(t)
  double total_tokens = 0.0;
};

ClassCounts count_classes(std::span<const std::string> documents, const ClusterAssignment& labels);

/// One c-TF-IDF row per group of original clusters; A is recomputed from the
/// group count.
std::vector<SparseRow> weigh_groups(const ClassCounts& counts,
                                    const std::vector<std::vector<std::size_t>>& groups);

}  // namespace prospect::detail
