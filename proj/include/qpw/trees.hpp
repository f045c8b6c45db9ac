#pragma once

#include <map>
#include <string>
#include <vector>

#include "qpw/freq.hpp"
#include "qpw/trig.hpp"

namespace qpw {

// Rooted decorated plane trees of the diagrammatic expansion for g(x)=x^2,
// with propagators and node factors in the eps-on-lines convention: every
// line with nonzero momentum carries eps/(i x (1 + i eps x)), x = omega.nu,
// zero-momentum lines carry 1; vertices contribute -1 (nonzero exit
// momentum) or -1/(2 c0) (zero exit momentum), white endpoints c0, black
// endpoints f_nu.

struct TreeNode {
    enum class Kind { vertex, white, black };
    Kind kind = Kind::white;
    Mode mode;                       // endpoint mode (black only)
    Mode momentum;                   // momentum of the exit line
    std::vector<TreeNode> children;  // ordered (plane tree)
};

struct Tree {
    TreeNode root;
    int order = 0;  // |V| + |E_B|
    int d = 1;
};

// Default enumeration cap.  Order 2m-1 covers every tree contributing to
// the eps^m coefficient, so m <= 4 needs 7.
inline constexpr int kDefaultTreeOrderCap = 7;

// All inequivalent decorated trees of order k and total (root-line)
// momentum nu, black modes drawn from f_support.  Zero-momentum vertices
// never have white children: their two subtrees either carry opposite
// nonzero momenta or are both zero-momentum-vertex subtrees.  Throws
// ScopeError for k > k_cap.
std::vector<Tree> enumerate_trees(int k, const Mode& nu,
                                  const std::vector<Mode>& f_support,
                                  int k_cap = kDefaultTreeOrderCap);

struct TreeValueInputs {
    const FrequencyVector* omega = nullptr;
    const TrigSeries* f = nullptr;
    double c0 = 0.0;
    // Test hook: factor attached to vertices with nonzero exit momentum.
    double vertex_factor = -1.0;
};

Complex tree_value(const Tree& theta, double eps,
                   const TreeValueInputs& in);

// eps-polynomial of Val(theta) truncated at degree m (index = power).
std::vector<Complex> tree_value_poly(const Tree& theta, int m,
                                     const TreeValueInputs& in);

// Total eps^m coefficient at momentum nu over all trees of order <= k_max.
// Requires k_max >= 2m-1 (IncompleteCoverError otherwise); must reproduce
// x^(m)_nu of the series recursion.
Complex taylor_sum_trees(int k_max, const Mode& nu, int m,
                         const TreeValueInputs& in,
                         const std::vector<Mode>& f_support);

// Same sum for several momenta with one shared enumeration.
std::map<Mode, Complex> taylor_sum_trees_batch(
    int k_max, const std::vector<Mode>& nus, int m, const TreeValueInputs& in,
    const std::vector<Mode>& f_support);

// Flattened view: one entry per node in preorder; every node owns the line
// leaving it toward its parent (the root line exits the tree).
struct FlatTree {
    std::vector<const TreeNode*> nodes;
    std::vector<int> parent;  // -1 for the root node
    int d = 1;
};

FlatTree flatten(const Tree& theta);

struct ScaleAssignment {
    // scale of the line leaving node i (flat preorder index); -1 for
    // zero-momentum lines.
    std::vector<int> line_scale;
};

// Sharp deterministic scales: n_l = min{ n >= 0 : |omega.nu_l| >
// alpha_{n+1}/8 }, capped at n_cap; alphas[n] = alpha_n(omega).
ScaleAssignment assign_scales(const Tree& theta, const FrequencyVector& omega,
                              const std::vector<double>& alphas,
                              int n_cap = -1);

struct ScaleCount {
    int N_p = 0;  // lines on scale exactly p
    int M = 0;    // sum over black endpoints of |nu_v|_1
};

ScaleCount count_scale_lines(const Tree& theta, const ScaleAssignment& scales,
                             int p);

struct Cluster {
    std::vector<int> nodes;           // flat indices
    std::vector<int> internal_lines;  // flat indices of owning nodes
    int scale = 0;                    // n_T
    int entering = 0;                 // count of external entering lines
    Mode exit_momentum;
    bool self_energy = false;
    int M = 0;  // sum of |nu_v|_1 over black endpoints inside
};

// All maximal clusters (connected same-or-lower-scale subgraphs with at
// least one internal line), every scale including -1.
std::vector<Cluster> find_clusters(const Tree& theta,
                                   const ScaleAssignment& scales);

std::vector<Cluster> find_self_energy_clusters(const Tree& theta,
                                               const ScaleAssignment& scales);

// Self-energy value of a cluster: product of internal-line propagators and
// node factors of the cluster's own nodes (external lines excluded).
Complex cluster_value(const Tree& theta, const Cluster& cluster, double eps,
                      const TreeValueInputs& in);

// Canonical nested-list text form: W, B(n1[,n2]), V(child child).
std::string serialize_tree(const Tree& theta);

}  // namespace qpw
