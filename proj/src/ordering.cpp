#include <algorithm>
#include <functional>
#include <queue>
#include <stdexcept>
#include <utility>

#include "pflow/linear_solver.hpp"

namespace pflow {

std::vector<Index> minimum_degree_order(const CscMatrix& a) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("minimum_degree_order: matrix is not square");
    const std::size_t n = a.n_cols;

    std::vector<std::vector<Index>> adj(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (Index p = a.col_ptr[j]; p < a.col_ptr[j + 1]; ++p) {
            const Index i = a.row_idx[p];
            if (static_cast<std::size_t>(i) == j) continue;
            adj[j].push_back(i);
            adj[i].push_back(static_cast<Index>(j));
        }
    }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }

    using Entry = std::pair<std::size_t, Index>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    for (std::size_t i = 0; i < n; ++i) heap.emplace(adj[i].size(), static_cast<Index>(i));

    std::vector<char> eliminated(n, 0);
    std::vector<Index> order;
    order.reserve(n);
    std::vector<Index> merged;
    while (!heap.empty()) {
        const auto [deg, v] = heap.top();
        heap.pop();
        if (eliminated[v] || deg != adj[v].size()) continue;
        eliminated[v] = 1;
        order.push_back(v);

        // Neighbours of v become a clique in the elimination graph.
        const std::vector<Index> clique = std::move(adj[v]);
        adj[v].clear();
        for (Index u : clique) {
            merged.clear();
            std::set_union(adj[u].begin(), adj[u].end(), clique.begin(), clique.end(), std::back_inserter(merged));
            std::erase_if(merged, [&](Index w) { return w == u || w == v; });
            adj[u].swap(merged);
            heap.emplace(adj[u].size(), u);
        }
    }
    return order;
}

}  // namespace pflow
