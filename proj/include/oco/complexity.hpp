#ifndef OCO_COMPLEXITY_HPP
#define OCO_COMPLEXITY_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oco/vec.hpp"

namespace oco::cplx {

// A finite real-valued function class as an |H| x |X| value table.
// Rows are deduplicated on construction; entries must lie in [-1, 1].
struct FiniteClass {
    std::vector<std::vector<double>> values;  // values[f][x]
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;

    std::size_t num_functions() const { return values.size(); }
    std::size_t num_points() const { return values.empty() ? 0 : values.front().size(); }
    bool is_binary() const;

    static FiniteClass from_table(std::vector<std::vector<double>> table);
    // all 2^m sign patterns on m points
    static FiniteClass full_binary(int m);
};

// Enumeration caps; exceeding one throws CapacityError naming the cap.
// Exact searches never degrade to approximations.
struct Caps {
    int stat_rad_max_n = 22;
    int stat_fat_max_points = 12;
    int ldim_max_functions = 64;
    int ldim_max_points = 12;
    int seq_fat_max_depth = 4;
    int seq_fat_max_points = 6;
    int seq_fat_max_functions = 64;
    int seq_rad_max_n = 3;
    int seq_rad_max_points = 6;
};

// Complete binary tree of instance indices, stored level-order: 2^depth - 1
// nodes; the node on the sign path eps_1..eps_{t-1} at level t is reached in
// O(t).
struct BinaryTree {
    int depth = 0;
    std::vector<int> nodes;  // level-order

    int node_at(const std::vector<int>& eps_prefix) const;
    static std::size_t index_at(const std::vector<int>& eps_prefix);
};

// Same shape, real-valued entries (the witness levels).
struct WitnessTree {
    int depth = 0;
    std::vector<double> nodes;

    double node_at(const std::vector<int>& eps_prefix) const;
};

struct TreeShatterCertificate {
    BinaryTree tree;
    WitnessTree witness;
};

struct SampleShatterCertificate {
    std::vector<int> points;
    std::vector<double> witness;
};

// Exact worst-case statistical Rademacher complexity on a fixed sample:
// the expectation runs over all 2^n sign vectors.
double stat_rademacher(const FiniteClass& F, const std::vector<int>& sample,
                       const Caps& caps = {});

struct FatResult {
    int value = 0;
    bool saturated = false;  // value hit the depth cap; true value may exceed it
    std::optional<SampleShatterCertificate> sample_certificate;
    std::optional<TreeShatterCertificate> tree_certificate;
};

// Largest sample size alpha-shattered with the alpha/2 margin convention;
// witnesses are drawn from the table's values and pairwise midpoints.
FatResult stat_fat(const FiniteClass& F, double alpha, const Caps& caps = {});

// Littlestone dimension of a binary class by memoized recursion:
// ldim(V) = max over x splitting V into two nonempty label classes of
// 1 + min(ldim(V+), ldim(V-)).
int littlestone_dim(const FiniteClass& F, const Caps& caps = {});

// Largest depth of an alpha-shattered instance tree (alpha/2 margins),
// computed by the same recursion with a witness choice per node; returns the
// shattering certificate when the dimension is positive.
FatResult seq_fat(const FiniteClass& F, double alpha, const Caps& caps = {});

// Restriction of seq_fat to a subset of rows (version-space queries).
FatResult seq_fat_masked(const FiniteClass& F, std::uint64_t row_mask, double alpha,
                         const Caps& caps = {});

// Reusable exact calculator: memoization persists across queries, so
// version-space learners can probe many row subsets of the same class
// cheaply. Witness choices inducing identical margin splits are deduplicated
// up front.
class SeqFatCalculator {
  public:
    SeqFatCalculator(const FiniteClass& F, double alpha, const Caps& caps = {});
    ~SeqFatCalculator();
    SeqFatCalculator(SeqFatCalculator&&) noexcept;
    SeqFatCalculator& operator=(SeqFatCalculator&&) noexcept;

    // exact dimension of the masked subclass (no depth capping)
    int fat(std::uint64_t row_mask);
    FatResult result(std::uint64_t row_mask);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Exact sequential Rademacher complexity by enumerating all instance trees of
// depth n.
double seq_rademacher(const FiniteClass& F, int n, const Caps& caps = {});

}  // namespace oco::cplx

#endif
