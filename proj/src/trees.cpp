#include "qpw/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace qpw {

namespace {

// Modes reachable by a subtree of order k: sums of at most k support modes.
std::vector<Mode> momentum_ball(int d, int radius) {
    std::vector<Mode> out;
    Mode nu(d, 0);
    const auto rec = [&](auto&& self, int coord, int budget) -> void {
        if (coord == d) {
            out.push_back(nu);
            return;
        }
        for (int v = -budget; v <= budget; ++v) {
            nu[coord] = v;
            self(self, coord + 1, budget - std::abs(v));
        }
        nu[coord] = 0;
    };
    rec(rec, 0, radius);
    return out;
}

struct Enumerator {
    int d;
    std::vector<Mode> support;
    int max_mode = 1;
    std::map<std::pair<int, Mode>, std::vector<TreeNode>> nonzero_memo;
    std::map<int, std::vector<TreeNode>> v0_memo;

    // Subtrees with nonzero root momentum nu and order k.
    const std::vector<TreeNode>& nonzero(int k, const Mode& nu) {
        auto key = std::make_pair(k, nu);
        auto it = nonzero_memo.find(key);
        if (it != nonzero_memo.end()) return it->second;
        std::vector<TreeNode> out;
        if (l1_norm(nu) <= k * max_mode) {
            if (k == 1) {
                for (const Mode& s : support)
                    if (s == nu) {
                        TreeNode leaf;
                        leaf.kind = TreeNode::Kind::black;
                        leaf.mode = nu;
                        leaf.momentum = nu;
                        out.push_back(leaf);
                    }
            }
            if (k >= 2) build_vertices(k, nu, out);
        }
        return nonzero_memo.emplace(key, std::move(out)).first->second;
    }

    // Zero-momentum subtrees rooted at a V_0 vertex, order k.
    const std::vector<TreeNode>& v0(int k) {
        auto it = v0_memo.find(k);
        if (it != v0_memo.end()) return it->second;
        std::vector<TreeNode> out;
        const Mode zero(d, 0);
        // children with opposite nonzero momenta
        for (int k1 = 1; k1 <= k - 2; ++k1) {
            int k2 = k - 1 - k1;
            if (k2 < 1) continue;
            for (const Mode& mu : momentum_ball(d, std::min(k1, k2) * max_mode)) {
                if (is_zero(mu)) continue;
                const auto& left = nonzero(k1, mu);
                const auto& right = nonzero(k2, negate(mu));
                for (const TreeNode& a : left)
                    for (const TreeNode& b : right)
                        out.push_back(make_vertex(a, b, zero));
            }
        }
        // both children zero-momentum V_0 subtrees
        for (int k1 = 3; k1 <= k - 4; ++k1) {
            int k2 = k - 1 - k1;
            const auto& left = v0(k1);
            const auto& right = v0(k2);
            for (const TreeNode& a : left)
                for (const TreeNode& b : right)
                    out.push_back(make_vertex(a, b, zero));
        }
        return v0_memo.emplace(k, std::move(out)).first->second;
    }

    static TreeNode make_vertex(const TreeNode& a, const TreeNode& b,
                                const Mode& momentum) {
        TreeNode v;
        v.kind = TreeNode::Kind::vertex;
        v.momentum = momentum;
        v.children = {a, b};
        return v;
    }

    void build_vertices(int k, const Mode& nu, std::vector<TreeNode>& out) {
        TreeNode white;
        white.kind = TreeNode::Kind::white;
        white.momentum = Mode(d, 0);
        for (int k1 = 0; k1 <= k - 1; ++k1) {
            int k2 = k - 1 - k1;
            // child 1 options at order k1, child 2 at order k2; momenta sum
            // to nu.  Zero-momentum children are whites (order 0) or V_0
            // subtrees (order >= 3).
            for (const Mode& mu1 : momentum_ball(d, k1 * max_mode)) {
                Mode mu2 = sub(nu, mu1);
                if (l1_norm(mu2) > k2 * max_mode) continue;
                std::vector<const TreeNode*> left, right;
                std::vector<TreeNode> ltmp, rtmp;
                collect(k1, mu1, white, left, ltmp);
                collect(k2, mu2, white, right, rtmp);
                for (const TreeNode* a : left)
                    for (const TreeNode* b : right)
                        out.push_back(make_vertex(*a, *b, nu));
            }
        }
    }

    void collect(int k, const Mode& mu, const TreeNode& white,
                 std::vector<const TreeNode*>& refs,
                 std::vector<TreeNode>& storage) {
        if (is_zero(mu)) {
            if (k == 0) {
                storage.push_back(white);
                refs.push_back(&storage.back());
            } else if (k >= 3) {
                for (const TreeNode& n : v0(k)) refs.push_back(&n);
            }
        } else if (k >= 1) {
            for (const TreeNode& n : nonzero(k, mu)) refs.push_back(&n);
        }
    }
};

int count_order(const TreeNode& n) {
    int c = 0;
    if (n.kind == TreeNode::Kind::vertex || n.kind == TreeNode::Kind::black)
        c = 1;
    for (const TreeNode& ch : n.children) c += count_order(ch);
    return c;
}

}  // namespace

std::vector<Tree> enumerate_trees(int k, const Mode& nu,
                                  const std::vector<Mode>& f_support,
                                  int k_cap) {
    if (k > k_cap)
        throw ScopeError("enumerate_trees: order beyond configured cap");
    if (k < 1) throw std::domain_error("enumerate_trees: k >= 1");
    Enumerator en;
    en.d = static_cast<int>(nu.size());
    for (const Mode& m : f_support)
        if (!is_zero(m)) en.support.push_back(m);
    en.max_mode = 1;
    for (const Mode& m : en.support)
        en.max_mode = std::max(en.max_mode, l1_norm(m));

    const std::vector<TreeNode>& roots =
        is_zero(nu) ? en.v0(k) : en.nonzero(k, nu);
    std::vector<Tree> out;
    out.reserve(roots.size());
    for (const TreeNode& r : roots) {
        Tree t;
        t.root = r;
        t.d = en.d;
        t.order = count_order(r);
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

struct NodeFactor {
    Complex factor;      // constant node factor
    bool has_line;       // nonzero-momentum line attached
    double x;            // omega.nu for that line
};

void collect_factors(const TreeNode& n, const TreeValueInputs& in,
                     Complex& constant, std::vector<double>& line_x) {
    switch (n.kind) {
        case TreeNode::Kind::white:
            constant *= in.c0;
            break;
        case TreeNode::Kind::black: {
            Complex fv = in.f->at(n.mode);
            if (fv == Complex(0.0))
                throw std::domain_error(
                    "tree_value: missing forcing coefficient for black mode");
            constant *= fv;
            break;
        }
        case TreeNode::Kind::vertex:
            constant *= is_zero(n.momentum)
                            ? Complex(-1.0 / (2.0 * in.c0))
                            : Complex(in.vertex_factor);
            break;
    }
    if (!is_zero(n.momentum)) line_x.push_back(in.omega->dot(n.momentum));
    for (const TreeNode& ch : n.children)
        collect_factors(ch, in, constant, line_x);
}

Complex propagator(double x, double eps) {
    return eps / (Complex(0.0, x) * (1.0 + Complex(0.0, eps * x)));
}

}  // namespace

Complex tree_value(const Tree& theta, double eps, const TreeValueInputs& in) {
    Complex constant = 1.0;
    std::vector<double> xs;
    collect_factors(theta.root, in, constant, xs);
    Complex v = constant;
    for (double x : xs) v *= propagator(x, eps);
    return v;
}

std::vector<Complex> tree_value_poly(const Tree& theta, int m,
                                     const TreeValueInputs& in) {
    Complex constant = 1.0;
    std::vector<double> xs;
    collect_factors(theta.root, in, constant, xs);
    std::vector<Complex> poly(m + 1, Complex(0.0));
    poly[0] = constant;
    for (double x : xs) {
        // eps-expansion of eps/(ix(1+i eps x)): coefficient of eps^j is
        // (-ix)^{j-1}/(ix), j >= 1
        std::vector<Complex> line(m + 1, Complex(0.0));
        Complex c = 1.0 / Complex(0.0, x);
        for (int j = 1; j <= m; ++j) {
            line[j] = c;
            c *= Complex(0.0, -x);
        }
        std::vector<Complex> next(m + 1, Complex(0.0));
        for (int a = 0; a <= m; ++a) {
            if (poly[a] == Complex(0.0)) continue;
            for (int b = 1; a + b <= m; ++b)
                next[a + b] += poly[a] * line[b];
        }
        poly = std::move(next);
    }
    return poly;
}

namespace {

int count_nonzero_lines(const TreeNode& n) {
    int c = is_zero(n.momentum) ? 0 : 1;
    for (const TreeNode& ch : n.children) c += count_nonzero_lines(ch);
    return c;
}

}  // namespace

std::map<Mode, Complex> taylor_sum_trees_batch(
    int k_max, const std::vector<Mode>& nus, int m, const TreeValueInputs& in,
    const std::vector<Mode>& f_support) {
    if (m < 1) throw std::domain_error("taylor_sum_trees: m >= 1");
    // nested zero-momentum vertex families push contributions of eps^m up
    // to tree order 2m-1, so anything below that cannot cover the
    // coefficient (this subsumes the m <= k_max precondition)
    const int required = 2 * m - 1;
    if (k_max < required)
        throw IncompleteCoverError(
            "taylor_sum_trees: k_max below the closure order 2m-1 for the "
            "requested eps power");
    Enumerator en;
    en.d = static_cast<int>(nus.at(0).size());
    for (const Mode& s : f_support)
        if (!is_zero(s)) en.support.push_back(s);
    en.max_mode = 1;
    for (const Mode& s : en.support)
        en.max_mode = std::max(en.max_mode, l1_norm(s));

    std::map<Mode, Complex> out;
    Tree scratch;
    scratch.d = en.d;
    for (const Mode& nu : nus) {
        Complex total = 0.0;
        for (int k = 1; k <= required; ++k) {
            const std::vector<TreeNode>& roots =
                is_zero(nu) ? en.v0(k) : en.nonzero(k, nu);
            for (const TreeNode& r : roots) {
                if (count_nonzero_lines(r) > m) continue;
                scratch.root = r;
                total += tree_value_poly(scratch, m, in)[m];
            }
        }
        out[nu] = total;
    }
    return out;
}

Complex taylor_sum_trees(int k_max, const Mode& nu, int m,
                         const TreeValueInputs& in,
                         const std::vector<Mode>& f_support) {
    return taylor_sum_trees_batch(k_max, {nu}, m, in, f_support).at(nu);
}

namespace {

void flatten_rec(const TreeNode& n, int parent, FlatTree& out) {
    int idx = static_cast<int>(out.nodes.size());
    out.nodes.push_back(&n);
    out.parent.push_back(parent);
    for (const TreeNode& ch : n.children) flatten_rec(ch, idx, out);
}

}  // namespace

FlatTree flatten(const Tree& theta) {
    FlatTree out;
    out.d = theta.d;
    flatten_rec(theta.root, -1, out);
    return out;
}

ScaleAssignment assign_scales(const Tree& theta, const FrequencyVector& omega,
                              const std::vector<double>& alphas, int n_cap) {
    if (alphas.size() < 2)
        throw std::domain_error("assign_scales: need alpha_0, alpha_1");
    if (n_cap < 0) n_cap = static_cast<int>(alphas.size()) - 2;
    FlatTree ft = flatten(theta);
    ScaleAssignment out;
    out.line_scale.reserve(ft.nodes.size());
    for (const TreeNode* n : ft.nodes) {
        if (is_zero(n->momentum)) {
            out.line_scale.push_back(-1);
            continue;
        }
        double u = std::abs(omega.dot(n->momentum));
        int scale = n_cap;
        for (int nn = 0; nn <= n_cap; ++nn) {
            size_t idx = static_cast<size_t>(nn) + 1;
            double threshold =
                (idx < alphas.size() ? alphas[idx] : alphas.back()) / 8.0;
            if (u > threshold) {
                scale = nn;
                break;
            }
        }
        out.line_scale.push_back(scale);
    }
    return out;
}

ScaleCount count_scale_lines(const Tree& theta, const ScaleAssignment& scales,
                             int p) {
    FlatTree ft = flatten(theta);
    ScaleCount c;
    for (size_t i = 0; i < ft.nodes.size(); ++i) {
        if (scales.line_scale[i] == p) ++c.N_p;
        if (ft.nodes[i]->kind == TreeNode::Kind::black)
            c.M += l1_norm(ft.nodes[i]->mode);
    }
    return c;
}

std::vector<Cluster> find_clusters(const Tree& theta,
                                   const ScaleAssignment& scales) {
    FlatTree ft = flatten(theta);
    const int n = static_cast<int>(ft.nodes.size());
    std::vector<int> distinct = scales.line_scale;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());

    std::vector<Cluster> out;
    for (int level : distinct) {
        // components of the forest restricted to lines with scale <= level
        std::vector<int> uf(n);
        for (int i = 0; i < n; ++i) uf[i] = i;
        const auto find = [&](int a) {
            while (uf[a] != a) a = uf[a] = uf[uf[a]];
            return a;
        };
        for (int i = 0; i < n; ++i)
            if (ft.parent[i] != -1 && scales.line_scale[i] <= level)
                uf[find(i)] = find(ft.parent[i]);
        std::map<int, std::vector<int>> groups;
        for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);
        for (auto& [root, nodes] : groups) {
            if (nodes.size() < 2) continue;
            // internal lines and their max scale
            std::vector<char> inside(n, 0);
            for (int i : nodes) inside[i] = 1;
            int maxsc = std::numeric_limits<int>::min();
            std::vector<int> internal;
            for (int i : nodes)
                if (ft.parent[i] != -1 && inside[ft.parent[i]] &&
                    scales.line_scale[i] <= level) {
                    internal.push_back(i);
                    maxsc = std::max(maxsc, scales.line_scale[i]);
                }
            if (internal.empty() || maxsc != level) continue;
            Cluster cl;
            cl.nodes = nodes;
            cl.internal_lines = internal;
            cl.scale = level;
            // entering lines: nodes outside whose parent is inside
            for (int i = 0; i < n; ++i)
                if (!inside[i] && ft.parent[i] != -1 && inside[ft.parent[i]])
                    ++cl.entering;
            // exit line: line of the top node of the cluster
            int top = nodes.front();
            for (int i : nodes)
                if (ft.parent[i] == -1 || !inside[ft.parent[i]]) top = i;
            cl.exit_momentum = ft.nodes[top]->momentum;
            Mode black_sum(ft.d, 0);
            for (int i : nodes)
                if (ft.nodes[i]->kind == TreeNode::Kind::black) {
                    black_sum = add(black_sum, ft.nodes[i]->mode);
                    cl.M += l1_norm(ft.nodes[i]->mode);
                }
            cl.self_energy = (cl.entering == 1) && is_zero(black_sum);
            out.push_back(std::move(cl));
        }
    }
    return out;
}

std::vector<Cluster> find_self_energy_clusters(const Tree& theta,
                                               const ScaleAssignment& scales) {
    std::vector<Cluster> all = find_clusters(theta, scales);
    std::vector<Cluster> out;
    for (auto& c : all)
        if (c.self_energy) out.push_back(std::move(c));
    return out;
}

Complex cluster_value(const Tree& theta, const Cluster& cluster, double eps,
                      const TreeValueInputs& in) {
    FlatTree ft = flatten(theta);
    Complex v = 1.0;
    for (int i : cluster.nodes) {
        const TreeNode* n = ft.nodes[i];
        switch (n->kind) {
            case TreeNode::Kind::white:
                v *= in.c0;
                break;
            case TreeNode::Kind::black:
                v *= in.f->at(n->mode);
                break;
            case TreeNode::Kind::vertex:
                v *= is_zero(n->momentum) ? Complex(-1.0 / (2.0 * in.c0))
                                          : Complex(in.vertex_factor);
                break;
        }
    }
    for (int i : cluster.internal_lines) {
        const TreeNode* n = ft.nodes[i];
        if (!is_zero(n->momentum))
            v *= propagator(in.omega->dot(n->momentum), eps);
    }
    return v;
}

namespace {

void serialize_rec(const TreeNode& n, std::ostringstream& os) {
    switch (n.kind) {
        case TreeNode::Kind::white:
            os << "W";
            break;
        case TreeNode::Kind::black: {
            os << "B(";
            for (size_t i = 0; i < n.mode.size(); ++i) {
                if (i) os << ",";
                os << n.mode[i];
            }
            os << ")";
            break;
        }
        case TreeNode::Kind::vertex:
            os << "V(";
            for (size_t i = 0; i < n.children.size(); ++i) {
                if (i) os << " ";
                serialize_rec(n.children[i], os);
            }
            os << ")";
            break;
    }
}

}  // namespace

std::string serialize_tree(const Tree& theta) {
    std::ostringstream os;
    serialize_rec(theta.root, os);
    return os.str();
}

}  // namespace qpw
