#include <algorithm>
#include <cmath>
#include <limits>

#include "mfsc/errors.hpp"
#include "mfsc/metrics.hpp"

namespace mfsc {

namespace {

// Spanning-tree primal simplex for the uncapacitated transportation problem.
class NetworkSimplex {
public:
    NetworkSimplex(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost)
        : n_(static_cast<int>(supply.size())), m_(static_cast<int>(demand.size())) {
        const int nodes = n_ + m_;
        root_ = nodes;
        real_arcs_ = static_cast<long>(n_) * m_;
        const long arcs = real_arcs_ + nodes;
        src_.resize(arcs);
        tgt_.resize(arcs);
        cost_.resize(arcs);
        flow_.assign(arcs, 0.0);
        in_tree_.assign(arcs, 0);
        double max_cost = 0.0;
        for (long k = 0; k < real_arcs_; ++k) {
            src_[k] = static_cast<int>(k / m_);
            tgt_[k] = n_ + static_cast<int>(k % m_);
            cost_[k] = cost[k];
            max_cost = std::max(max_cost, std::abs(cost[k]));
        }
        const double art = (max_cost + 1.0) * (nodes + 1);
        eps_ = 1e-13 * (max_cost + 1.0);

        parent_.assign(nodes + 1, -1);
        pred_.assign(nodes + 1, -1);
        dir_.assign(nodes + 1, 0);
        depth_.assign(nodes + 1, 0);
        pi_.assign(nodes + 1, 0.0);
        first_child_.assign(nodes + 1, -1);
        next_sib_.assign(nodes + 1, -1);
        prev_sib_.assign(nodes + 1, -1);
        for (int u = 0; u < nodes; ++u) {
            const long e = real_arcs_ + u;
            in_tree_[e] = 1;
            parent_[u] = root_;
            pred_[u] = e;
            depth_[u] = 1;
            attach(u, root_);
            if (u < n_) {  // supply: u -> root
                src_[e] = u;
                tgt_[e] = root_;
                cost_[e] = 0.0;
                flow_[e] = supply[u];
                dir_[u] = 1;
                pi_[u] = 0.0;
            } else {  // demand: root -> u
                src_[e] = root_;
                tgt_[e] = u;
                cost_[e] = art;
                flow_[e] = demand[u - n_];
                dir_[u] = -1;
                pi_[u] = art;
            }
        }
        block_ = std::max<long>(10, static_cast<long>(std::sqrt(static_cast<double>(arcs))));
    }

    double solve() {
        while (true) {
            const long in = find_entering();
            if (in < 0) break;
            pivot(in);
        }
        double total = 0.0;
        for (long k = 0; k < real_arcs_; ++k) total += flow_[k] * cost_[k];
        return total;
    }

private:
    double reduced(long k) const { return cost_[k] + pi_[src_[k]] - pi_[tgt_[k]]; }

    // Block search: scan blocks of arcs cyclically and take the most negative
    // reduced cost of the first block that has one.
    long find_entering() {
        const long arcs = static_cast<long>(cost_.size());
        long best = -1;
        double best_rc = -eps_;
        long scanned = 0, in_block = 0;
        for (long k = next_; scanned < arcs; ++scanned) {
            if (!in_tree_[k]) {
                const double rc = reduced(k);
                if (rc < best_rc) {
                    best_rc = rc;
                    best = k;
                }
            }
            if (++k == arcs) k = 0;
            if (++in_block == block_) {
                in_block = 0;
                if (best >= 0) {
                    next_ = k;
                    return best;
                }
            }
        }
        next_ = 0;
        return best;
    }

    void attach(int u, int p) {
        prev_sib_[u] = -1;
        next_sib_[u] = first_child_[p];
        if (first_child_[p] >= 0) prev_sib_[first_child_[p]] = u;
        first_child_[p] = u;
    }

    void detach(int u) {
        const int p = parent_[u];
        if (prev_sib_[u] >= 0)
            next_sib_[prev_sib_[u]] = next_sib_[u];
        else
            first_child_[p] = next_sib_[u];
        if (next_sib_[u] >= 0) prev_sib_[next_sib_[u]] = prev_sib_[u];
        prev_sib_[u] = next_sib_[u] = -1;
    }

    void pivot(long in) {
        const int first = src_[in], second = tgt_[in];
        // Join node of the cycle.
        int a = first, b = second;
        while (a != b) {
            if (depth_[a] >= depth_[b])
                a = parent_[a];
            else
                b = parent_[b];
        }
        const int join = a;

        // Leaving arc: flow pushed along in (first -> second), back from second
        // to join and from join down to first. Ties favour the second path,
        // which keeps the tree strongly feasible.
        double delta = std::numeric_limits<double>::infinity();
        int u_out = -1;
        bool on_first = false;
        for (int u = first; u != join; u = parent_[u])
            if (dir_[u] == 1) {
                const double d = std::max(0.0, flow_[pred_[u]]);
                if (d < delta) {
                    delta = d;
                    u_out = u;
                    on_first = true;
                }
            }
        for (int u = second; u != join; u = parent_[u])
            if (dir_[u] == -1) {
                const double d = std::max(0.0, flow_[pred_[u]]);
                if (d <= delta) {
                    delta = d;
                    u_out = u;
                    on_first = false;
                }
            }
        if (u_out < 0) throw Error("transportation problem is unbounded");

        if (delta > 0.0) {
            flow_[in] += delta;
            for (int u = first; u != join; u = parent_[u]) flow_[pred_[u]] -= dir_[u] * delta;
            for (int u = second; u != join; u = parent_[u]) flow_[pred_[u]] += dir_[u] * delta;
        }

        const long out = pred_[u_out];
        in_tree_[out] = 0;
        in_tree_[in] = 1;

        // Re-hang the cut subtree (rooted at u_out) from the entering arc.
        const int w0 = on_first ? first : second;
        const int attach_to = on_first ? second : first;
        int w = w0;
        int new_parent = attach_to;
        long new_pred = in;
        int new_dir = (src_[in] == w0) ? 1 : -1;
        while (true) {
            const int old_parent = parent_[w];
            const long old_pred = pred_[w];
            const int old_dir = dir_[w];
            detach(w);
            parent_[w] = new_parent;
            pred_[w] = new_pred;
            dir_[w] = new_dir;
            attach(w, new_parent);
            if (w == u_out) break;
            new_parent = w;
            new_pred = old_pred;
            new_dir = -old_dir;
            w = old_parent;
        }

        // Potentials and depths of the moved subtree.
        const long e = pred_[w0];
        const double pi_w0 = dir_[w0] == 1 ? pi_[parent_[w0]] - cost_[e] : pi_[parent_[w0]] + cost_[e];
        const double sigma = pi_w0 - pi_[w0];
        stack_.clear();
        stack_.push_back(w0);
        while (!stack_.empty()) {
            const int u = stack_.back();
            stack_.pop_back();
            pi_[u] += sigma;
            depth_[u] = depth_[parent_[u]] + 1;
            for (int c = first_child_[u]; c >= 0; c = next_sib_[c]) stack_.push_back(c);
        }
    }

    int n_, m_, root_;
    long real_arcs_;
    std::vector<int> src_, tgt_;
    std::vector<double> cost_, flow_;
    std::vector<char> in_tree_;
    std::vector<int> parent_, dir_, depth_, first_child_, next_sib_, prev_sib_;
    std::vector<long> pred_;
    std::vector<double> pi_;
    std::vector<int> stack_;
    long block_ = 10;
    long next_ = 0;
    double eps_ = 0.0;
};

}  // namespace

double transport_cost(std::span<const double> supply, std::span<const double> demand, std::span<const double> cost) {
    if (supply.empty() || demand.empty()) throw PreconditionFailed("empty transportation problem");
    if (cost.size() != supply.size() * demand.size()) throw PreconditionFailed("cost matrix has the wrong size");
    double s = 0.0, d = 0.0;
    for (double v : supply) {
        if (!(v >= 0.0)) throw PreconditionFailed("negative supply");
        s += v;
    }
    for (double v : demand) {
        if (!(v >= 0.0)) throw PreconditionFailed("negative demand");
        d += v;
    }
    if (std::abs(s - d) > 1e-12 * std::max(1.0, s)) throw PreconditionFailed("supply and demand totals differ");
    NetworkSimplex ns(supply, demand, cost);
    return ns.solve();
}

}  // namespace mfsc
