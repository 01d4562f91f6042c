#include "oco/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "oco/errors.hpp"

namespace oco::cplx {

namespace {

using Mask = std::uint64_t;

int popcount(Mask m) { return __builtin_popcountll(m); }

Mask full_mask(std::size_t n) {
    return n >= 64 ? ~0ULL : ((1ULL << n) - 1ULL);
}

// Witness candidates: all table values plus midpoints of distinct pairs.
// Shattering with any real witness implies shattering with one of these
// (thresholds only interact with finitely many values); the property tests
// spot-check this against a fine grid.
std::vector<double> witness_candidates(const FiniteClass& F) {
    std::set<double> vals;
    for (const auto& row : F.values)
        for (double v : row) vals.insert(v);
    std::vector<double> sorted(vals.begin(), vals.end());
    std::set<double> cand(vals.begin(), vals.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        for (std::size_t j = i + 1; j < sorted.size(); ++j)
            cand.insert(0.5 * (sorted[i] + sorted[j]));
    return {cand.begin(), cand.end()};
}

struct Split {
    Mask above = 0;  // f(x) >= s + alpha/2
    Mask below = 0;  // f(x) <= s - alpha/2
};

Split split_at(const FiniteClass& F, Mask mask, int x, double s, double alpha) {
    Split sp;
    double half = 0.5 * alpha;
    for (std::size_t f = 0; f < F.num_functions(); ++f) {
        if (!(mask >> f & 1ULL)) continue;
        double v = F.values[f][x];
        if (v >= s + half) sp.above |= 1ULL << f;
        if (v <= s - half) sp.below |= 1ULL << f;
    }
    return sp;
}

}  // namespace

bool FiniteClass::is_binary() const {
    for (const auto& row : values)
        for (double v : row)
            if (v != 1.0 && v != -1.0) return false;
    return true;
}

FiniteClass FiniteClass::from_table(std::vector<std::vector<double>> table) {
    if (table.empty() || table.front().empty())
        throw std::invalid_argument("FiniteClass: table must be non-empty");
    std::size_t cols = table.front().size();
    for (const auto& row : table) {
        if (row.size() != cols) throw std::invalid_argument("FiniteClass: ragged table");
        for (double v : row)
            if (!(v >= -1.0 && v <= 1.0))
                throw std::invalid_argument("FiniteClass: entries must lie in [-1,1]");
    }
    // dedupe rows, preserving first occurrence order
    std::vector<std::vector<double>> rows;
    for (auto& row : table) {
        bool dup = false;
        for (const auto& r : rows)
            if (r == row) {
                dup = true;
                break;
            }
        if (!dup) rows.push_back(std::move(row));
    }
    FiniteClass F;
    F.values = std::move(rows);
    for (std::size_t i = 0; i < F.values.size(); ++i)
        F.row_labels.push_back("h" + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) F.col_labels.push_back("x" + std::to_string(j));
    return F;
}

FiniteClass FiniteClass::full_binary(int m) {
    if (m < 1 || m > 16) throw std::invalid_argument("full_binary: m must lie in [1,16]");
    std::vector<std::vector<double>> table;
    for (int pat = 0; pat < (1 << m); ++pat) {
        std::vector<double> row(m);
        for (int j = 0; j < m; ++j) row[j] = (pat >> j & 1) ? 1.0 : -1.0;
        table.push_back(std::move(row));
    }
    return from_table(std::move(table));
}

std::size_t BinaryTree::index_at(const std::vector<int>& eps_prefix) {
    // root at 0; child: 2i+1 for -1, 2i+2 for +1
    std::size_t idx = 0;
    for (int e : eps_prefix) idx = 2 * idx + (e > 0 ? 2 : 1);
    return idx;
}

int BinaryTree::node_at(const std::vector<int>& eps_prefix) const {
    std::size_t idx = index_at(eps_prefix);
    if (idx >= nodes.size()) throw std::out_of_range("BinaryTree: path too deep");
    return nodes[idx];
}

double WitnessTree::node_at(const std::vector<int>& eps_prefix) const {
    std::size_t idx = BinaryTree::index_at(eps_prefix);
    if (idx >= nodes.size()) throw std::out_of_range("WitnessTree: path too deep");
    return nodes[idx];
}

double stat_rademacher(const FiniteClass& F, const std::vector<int>& sample, const Caps& caps) {
    const int n = static_cast<int>(sample.size());
    if (n < 1) throw std::invalid_argument("stat_rademacher: empty sample");
    if (n > caps.stat_rad_max_n)
        throw CapacityError("stat_rademacher: sample size exceeds cap stat_rad_max_n=" +
                            std::to_string(caps.stat_rad_max_n));
    for (int x : sample)
        if (x < 0 || x >= static_cast<int>(F.num_points()))
            throw std::invalid_argument("stat_rademacher: sample index out of range");

    const std::size_t m = F.num_functions();
    double total = 0.0;
    for (std::uint64_t eps = 0; eps < (1ULL << n); ++eps) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < m; ++f) {
            double s = 0.0;
            for (int t = 0; t < n; ++t) {
                double sign = (eps >> t & 1ULL) ? 1.0 : -1.0;
                s += sign * F.values[f][sample[t]];
            }
            best = std::max(best, s);
        }
        total += best / n;
    }
    return total / static_cast<double>(1ULL << n);
}

namespace {

// Statistical fat shattering: every sign pattern must be realized on the SAME
// sample with the SAME witnesses, so the two restrictions at each point must
// jointly shatter one common suffix. The recursion therefore carries a list
// of masks, all of which must survive every later split.
struct StatFatSolver {
    const FiniteClass& F;
    double alpha;
    std::vector<std::pair<int, double>> choices;  // (point, witness) candidates
    std::map<std::vector<Mask>, int> memo;
    std::map<std::vector<Mask>, std::pair<int, double>> best_choice;

    int solve(std::vector<Mask> masks) {
        std::sort(masks.begin(), masks.end());
        masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
        auto it = memo.find(masks);
        if (it != memo.end()) return it->second;
        int best = 0;
        std::pair<int, double> pick{-1, 0.0};
        // depth is capped by log2 of the smallest surviving class
        int least = 64;
        for (Mask m : masks) least = std::min(least, popcount(m));
        if (least >= 2) {
            for (const auto& [x, s] : choices) {
                std::vector<Mask> next;
                next.reserve(2 * masks.size());
                bool ok = true;
                for (Mask m : masks) {
                    Split sp = split_at(F, m, x, s, alpha);
                    if (!sp.above || !sp.below) {
                        ok = false;
                        break;
                    }
                    next.push_back(sp.above);
                    next.push_back(sp.below);
                }
                if (!ok) continue;
                int sub = 1 + solve(std::move(next));
                if (sub > best) {
                    best = sub;
                    pick = {x, s};
                }
            }
        }
        memo[masks] = best;
        best_choice[masks] = pick;
        return best;
    }

    void reconstruct(std::vector<Mask> masks, std::vector<int>& pts, std::vector<double>& wit) {
        std::sort(masks.begin(), masks.end());
        masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
        auto it = best_choice.find(masks);
        if (it == best_choice.end() || it->second.first < 0) return;
        auto [x, s] = it->second;
        pts.push_back(x);
        wit.push_back(s);
        std::vector<Mask> next;
        for (Mask m : masks) {
            Split sp = split_at(F, m, x, s, alpha);
            next.push_back(sp.above);
            next.push_back(sp.below);
        }
        reconstruct(std::move(next), pts, wit);
    }
};

}  // namespace

FatResult stat_fat(const FiniteClass& F, double alpha, const Caps& caps) {
    if (alpha <= 0.0) throw std::invalid_argument("stat_fat: alpha must be positive");
    if (static_cast<int>(F.num_points()) > caps.stat_fat_max_points)
        throw CapacityError("stat_fat: instance space exceeds cap stat_fat_max_points=" +
                            std::to_string(caps.stat_fat_max_points));
    if (F.num_functions() > 64)
        throw CapacityError("stat_fat: more than 64 functions");

    StatFatSolver solver{F, alpha, {}, {}, {}};
    auto wits = witness_candidates(F);
    Mask full = full_mask(F.num_functions());
    std::set<std::tuple<int, Mask, Mask>> seen;
    for (int x = 0; x < static_cast<int>(F.num_points()); ++x) {
        for (double s : wits) {
            Split sp = split_at(F, full, x, s, alpha);
            if (!sp.above || !sp.below) continue;
            if (seen.emplace(x, sp.above, sp.below).second) solver.choices.emplace_back(x, s);
        }
    }

    int v = solver.solve({full});
    FatResult res;
    res.value = v;
    res.saturated = false;
    if (v > 0) {
        SampleShatterCertificate cert;
        solver.reconstruct({full_mask(F.num_functions())}, cert.points, cert.witness);
        res.sample_certificate = std::move(cert);
    }
    return res;
}

namespace {

struct LdimSolver {
    const FiniteClass& F;
    std::unordered_map<Mask, int> memo;

    int solve(Mask mask) {
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        int best = 0;
        if (popcount(mask) >= 2) {
            for (int x = 0; x < static_cast<int>(F.num_points()); ++x) {
                Mask plus = 0, minus = 0;
                for (std::size_t f = 0; f < F.num_functions(); ++f) {
                    if (!(mask >> f & 1ULL)) continue;
                    if (F.values[f][x] > 0.0)
                        plus |= 1ULL << f;
                    else
                        minus |= 1ULL << f;
                }
                if (!plus || !minus) continue;
                best = std::max(best, 1 + std::min(solve(plus), solve(minus)));
            }
        }
        memo[mask] = best;
        return best;
    }
};

}  // namespace

int littlestone_dim(const FiniteClass& F, const Caps& caps) {
    if (!F.is_binary())
        throw std::invalid_argument("littlestone_dim: class must be {-1,+1}-valued");
    if (static_cast<int>(F.num_functions()) > caps.ldim_max_functions)
        throw CapacityError("littlestone_dim: class exceeds cap ldim_max_functions=" +
                            std::to_string(caps.ldim_max_functions));
    if (static_cast<int>(F.num_points()) > caps.ldim_max_points)
        throw CapacityError("littlestone_dim: instance space exceeds cap ldim_max_points=" +
                            std::to_string(caps.ldim_max_points));
    LdimSolver solver{F, {}};
    return solver.solve(full_mask(F.num_functions()));
}

// Sequential fat shattering decomposes over independent subtrees:
// fat(V) = max over (x, s) with both margin classes nonempty of
//          1 + min(fat(V_above), fat(V_below)).
struct SeqFatCalculator::Impl {
    FiniteClass F;
    double alpha;
    Caps caps;
    // deduplicated candidate splits on the full class; a split on a subclass
    // is the full split intersected with the subclass mask
    struct Choice {
        int x;
        double s;
        Mask above_full;
        Mask below_full;
    };
    std::vector<Choice> choices;
    std::unordered_map<Mask, int> memo;
    std::unordered_map<Mask, std::pair<int, double>> best_choice;

    Impl(const FiniteClass& F_, double alpha_, const Caps& caps_)
        : F(F_), alpha(alpha_), caps(caps_) {
        Mask full = full_mask(F.num_functions());
        auto wits = witness_candidates(F);
        std::set<std::tuple<int, Mask, Mask>> seen;
        for (int x = 0; x < static_cast<int>(F.num_points()); ++x) {
            for (double s : wits) {
                Split sp = split_at(F, full, x, s, alpha);
                if (!sp.above || !sp.below) continue;
                if (seen.emplace(x, sp.above, sp.below).second)
                    choices.push_back({x, s, sp.above, sp.below});
            }
        }
    }

    int solve(Mask mask) {
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        int best = 0;
        std::pair<int, double> pick{-1, 0.0};
        if (popcount(mask) >= 2) {
            for (const auto& c : choices) {
                Mask above = c.above_full & mask;
                Mask below = c.below_full & mask;
                if (!above || !below) continue;
                int sub = 1 + std::min(solve(above), solve(below));
                if (sub > best) {
                    best = sub;
                    pick = {c.x, c.s};
                }
            }
        }
        memo[mask] = best;
        best_choice[mask] = pick;
        return best;
    }

    Split split_for(Mask mask, int x, double s) const {
        return split_at(F, mask, x, s, alpha);
    }

    void fill_certificate(Mask mask, int depth, const std::vector<int>& prefix,
                          BinaryTree& tree, WitnessTree& wit) {
        if (depth == 0) return;
        auto [x, s] = best_choice.at(mask);
        std::size_t idx = BinaryTree::index_at(prefix);
        tree.nodes[idx] = x;
        wit.nodes[idx] = s;
        Split sp = split_for(mask, x, s);
        auto down = prefix;
        down.push_back(-1);
        fill_certificate(sp.below, depth - 1, down, tree, wit);
        down.back() = +1;
        fill_certificate(sp.above, depth - 1, down, tree, wit);
    }
};

SeqFatCalculator::SeqFatCalculator(const FiniteClass& F, double alpha, const Caps& caps) {
    if (alpha <= 0.0) throw std::invalid_argument("seq_fat: alpha must be positive");
    if (static_cast<int>(F.num_points()) > caps.seq_fat_max_points)
        throw CapacityError("seq_fat: instance space exceeds cap seq_fat_max_points=" +
                            std::to_string(caps.seq_fat_max_points));
    if (static_cast<int>(F.num_functions()) > caps.seq_fat_max_functions)
        throw CapacityError("seq_fat: class exceeds cap seq_fat_max_functions=" +
                            std::to_string(caps.seq_fat_max_functions));
    impl_ = std::make_unique<Impl>(F, alpha, caps);
}

SeqFatCalculator::~SeqFatCalculator() = default;
SeqFatCalculator::SeqFatCalculator(SeqFatCalculator&&) noexcept = default;
SeqFatCalculator& SeqFatCalculator::operator=(SeqFatCalculator&&) noexcept = default;

int SeqFatCalculator::fat(std::uint64_t row_mask) { return impl_->solve(row_mask); }

FatResult SeqFatCalculator::result(std::uint64_t row_mask) {
    int exact = impl_->solve(row_mask);
    FatResult res;
    res.saturated = exact > impl_->caps.seq_fat_max_depth;
    res.value = std::min(exact, impl_->caps.seq_fat_max_depth);
    if (res.value > 0) {
        TreeShatterCertificate cert;
        cert.tree.depth = res.value;
        cert.tree.nodes.assign((1U << res.value) - 1, -1);
        cert.witness.depth = res.value;
        cert.witness.nodes.assign((1U << res.value) - 1, 0.0);
        impl_->fill_certificate(row_mask, res.value, {}, cert.tree, cert.witness);
        res.tree_certificate = std::move(cert);
    }
    return res;
}

FatResult seq_fat_masked(const FiniteClass& F, std::uint64_t row_mask, double alpha,
                         const Caps& caps) {
    SeqFatCalculator calc(F, alpha, caps);
    return calc.result(row_mask);
}

FatResult seq_fat(const FiniteClass& F, double alpha, const Caps& caps) {
    return seq_fat_masked(F, full_mask(F.num_functions()), alpha, caps);
}

double seq_rademacher(const FiniteClass& F, int n, const Caps& caps) {
    if (n < 1) throw std::invalid_argument("seq_rademacher: n must be >= 1");
    if (n > caps.seq_rad_max_n)
        throw CapacityError("seq_rademacher: depth exceeds cap seq_rad_max_n=" +
                            std::to_string(caps.seq_rad_max_n));
    if (static_cast<int>(F.num_points()) > caps.seq_rad_max_points)
        throw CapacityError("seq_rademacher: instance space exceeds cap seq_rad_max_points=" +
                            std::to_string(caps.seq_rad_max_points));

    const int num_nodes = (1 << n) - 1;
    const int X = static_cast<int>(F.num_points());
    std::vector<int> assign(num_nodes, 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        // expectation over the 2^n sign paths of the per-path supremum
        double total = 0.0;
        for (int eps = 0; eps < (1 << n); ++eps) {
            double sup = -std::numeric_limits<double>::infinity();
            for (std::size_t f = 0; f < F.num_functions(); ++f) {
                double s = 0.0;
                std::size_t idx = 0;
                for (int t = 0; t < n; ++t) {
                    int e = (eps >> t & 1) ? 1 : -1;
                    s += e * F.values[f][assign[idx]];
                    idx = 2 * idx + (e > 0 ? 2 : 1);
                }
                sup = std::max(sup, s / n);
            }
            total += sup;
        }
        best = std::max(best, total / (1 << n));

        int pos = 0;
        while (pos < num_nodes && assign[pos] == X - 1) assign[pos++] = 0;
        if (pos == num_nodes) break;
        ++assign[pos];
    }
    return best;
}

}  // namespace oco::cplx
