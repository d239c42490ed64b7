#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "prospect/error.hpp"
#include "prospect/topics.hpp"

namespace prospect {

std::size_t ClusterAssignment::cluster_count() const {
  int max_label = kNoise;
  for (int l : labels) max_label = std::max(max_label, l);
  return static_cast<std::size_t>(max_label + 1);
}

std::size_t ClusterAssignment::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

namespace {

// Distances below this are treated as equal to it so that lambda = 1/d stays
// finite for duplicate points.
constexpr double kMinDistance = 1e-12;

struct Edge {
  std::size_t a;
  std::size_t b;
  double weight;
};

struct MergeNode {
  std::size_t left;
  std::size_t right;
  double distance;
  std::size_t size;
};

// Row-major copy in double precision.
class Points {
 public:
  explicit Points(const EmbeddingMatrix& x) : n_(x.rows()), dim_(x.dim()), data_(x.data().begin(), x.data().end()) {}

  std::size_t size() const { return n_; }

  double distance(std::size_t i, std::size_t j) const {
    const double* a = data_.data() + i * dim_;
    const double* b = data_.data() + j * dim_;
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return std::sqrt(s);
  }

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> data_;
};

std::vector<double> core_distances(const Points& pts, std::size_t min_samples) {
  const std::size_t n = pts.size();
  std::vector<double> core(n);
  std::vector<double> buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) buf[j] = (i == j) ? 0.0 : pts.distance(i, j);
    auto kth = buf.begin() + static_cast<std::ptrdiff_t>(min_samples - 1);
    std::nth_element(buf.begin(), kth, buf.end());
    core[i] = *kth;
  }
  return core;
}

// Prim's algorithm on the dense mutual-reachability graph; O(n^2) time, O(n) memory.
std::vector<Edge> mutual_reachability_mst(const Points& pts, const std::vector<double>& core) {
  const std::size_t n = pts.size();
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    double next_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = std::max({core[current], core[j], pts.distance(current, j)});
      if (d < best[j]) {
        best[j] = d;
        from[j] = current;
      }
      if (next == n || best[j] < next_d) {
        next_d = best[j];
        next = j;
      }
    }
    edges.push_back({from[next], next, next_d});
    in_tree[next] = 1;
    current = next;
  }
  return edges;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void attach(std::size_t child, std::size_t root) { parent_[child] = root; }

 private:
  std::vector<std::size_t> parent_;
};

// Single-linkage dendrogram; node ids >= n are merges, the last one is the root.
std::vector<MergeNode> single_linkage(std::vector<Edge> edges, std::size_t n) {
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& x, const Edge& y) { return x.weight < y.weight; });
  std::vector<MergeNode> nodes;
  nodes.reserve(n - 1);
  UnionFind uf(2 * n - 1);
  auto size_of = [&](std::size_t id) { return id < n ? std::size_t{1} : nodes[id - n].size; };
  for (const auto& e : edges) {
    const std::size_t ra = uf.find(e.a);
    const std::size_t rb = uf.find(e.b);
    const std::size_t id = n + nodes.size();
    nodes.push_back({ra, rb, e.weight, size_of(ra) + size_of(rb)});
    uf.attach(ra, id);
    uf.attach(rb, id);
  }
  return nodes;
}

struct CondensedEntry {
  std::size_t parent;  // condensed cluster id
  std::size_t child;   // point index, or condensed cluster id when is_cluster
  bool is_cluster;
  double lambda;
  std::size_t child_size;
};

struct CondensedTree {
  std::vector<CondensedEntry> entries;
  std::vector<double> birth;                 // per condensed cluster
  std::vector<std::size_t> cluster_parent;   // root points to itself
};

double lambda_of(double distance) { return 1.0 / std::max(distance, kMinDistance); }

CondensedTree condense(const std::vector<MergeNode>& nodes, std::size_t n, std::size_t min_cluster_size) {
  CondensedTree tree;
  tree.birth.push_back(0.0);
  tree.cluster_parent.push_back(0);

  auto size_of = [&](std::size_t id) { return id < n ? std::size_t{1} : nodes[id - n].size; };
  auto leaves_under = [&](std::size_t id, auto&& emit) {
    std::vector<std::size_t> stack{id};
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      if (cur < n) {
        emit(cur);
      } else {
        stack.push_back(nodes[cur - n].right);
        stack.push_back(nodes[cur - n].left);
      }
    }
  };

  // (dendrogram node, condensed cluster it belongs to)
  std::vector<std::pair<std::size_t, std::size_t>> work{{n + nodes.size() - 1, 0}};
  std::size_t head = 0;
  while (head < work.size()) {
    // Only merge nodes are queued: a continuing child always has
    // min_cluster_size >= 2 points.
    const auto [node, label] = work[head++];
    const auto& m = nodes[node - n];
    const double lam = lambda_of(m.distance);
    const std::size_t ls = size_of(m.left);
    const std::size_t rs = size_of(m.right);
    const bool big_left = ls >= min_cluster_size;
    const bool big_right = rs >= min_cluster_size;
    auto fall_out = [&](std::size_t sub) {
      leaves_under(sub, [&](std::size_t p) { tree.entries.push_back({label, p, false, lam, 1}); });
    };
    if (big_left && big_right) {
      for (auto [child, size] : {std::pair{m.left, ls}, std::pair{m.right, rs}}) {
        const std::size_t id = tree.birth.size();
        tree.birth.push_back(lam);
        tree.cluster_parent.push_back(label);
        tree.entries.push_back({label, id, true, lam, size});
        work.emplace_back(child, id);
      }
    } else if (!big_left && !big_right) {
      fall_out(m.left);
      fall_out(m.right);
    } else if (big_left) {
      fall_out(m.right);
      work.emplace_back(m.left, label);
    } else {
      fall_out(m.left);
      work.emplace_back(m.right, label);
    }
  }
  return tree;
}

}  // namespace

ClusterAssignment cluster_density(const EmbeddingMatrix& x, std::size_t min_cluster_size,
                                  std::size_t min_samples) {
  if (x.rows() == 0) throw ContractError("cluster_density needs at least one point");
  if (min_cluster_size < 2) throw ContractError("min_cluster_size must be at least 2");
  if (min_samples < 1 || min_samples > min_cluster_size) {
    throw ContractError("min_samples must lie in [1, min_cluster_size]");
  }
  const std::size_t n = x.rows();
  ClusterAssignment out{std::vector<int>(n, ClusterAssignment::kNoise)};
  if (n < min_cluster_size) return out;

  const Points pts(x);
  const auto core = core_distances(pts, min_samples);
  const auto mst = mutual_reachability_mst(pts, core);

  double widest = 0.0;
  for (const auto& e : mst) widest = std::max(widest, e.weight);
  if (widest <= kMinDistance) {
    // Every point coincides: one cluster, no hierarchy to select from.
    std::fill(out.labels.begin(), out.labels.end(), 0);
    return out;
  }

  const auto nodes = single_linkage(mst, n);
  const auto tree = condense(nodes, n, min_cluster_size);
  const std::size_t n_clusters = tree.birth.size();

  std::vector<double> stability(n_clusters, 0.0);
  std::vector<std::vector<std::size_t>> children(n_clusters);
  for (const auto& e : tree.entries) {
    stability[e.parent] += (e.lambda - tree.birth[e.parent]) * static_cast<double>(e.child_size);
    if (e.is_cluster) children[e.parent].push_back(e.child);
  }

  // Excess of mass; children always carry larger ids than their parent.
  std::vector<char> selected(n_clusters, 0);
  for (std::size_t c = n_clusters; c-- > 1;) {
    if (children[c].empty()) {
      selected[c] = 1;
      continue;
    }
    double subtree = 0.0;
    for (auto ch : children[c]) subtree += stability[ch];
    if (subtree > stability[c]) {
      stability[c] = subtree;
    } else {
      selected[c] = 1;
      std::vector<std::size_t> stack(children[c]);
      while (!stack.empty()) {
        const auto d = stack.back();
        stack.pop_back();
        selected[d] = 0;
        stack.insert(stack.end(), children[d].begin(), children[d].end());
      }
    }
  }

  // A point belongs to the selected cluster it (or an ancestor of the
  // cluster it fell out of) maps to.
  std::vector<long> raw(n, -1);
  for (const auto& e : tree.entries) {
    if (e.is_cluster) continue;
    std::size_t c = e.parent;
    while (true) {
      if (selected[c]) {
        raw[e.child] = static_cast<long>(c);
        break;
      }
      if (c == 0) break;
      c = tree.cluster_parent[c];
    }
  }

  std::map<long, int> dense;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] < 0) continue;
    auto [it, inserted] = dense.emplace(raw[i], static_cast<int>(dense.size()));
    out.labels[i] = it->second;
  }
  return out;
}

}  // namespace prospect
