#include "oco/complexity.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "oco/errors.hpp"
#include "oco/rng.hpp"

using namespace oco;
using cplx::Caps;
using cplx::FiniteClass;

namespace {

// Independent oracle: explicit enumeration of all instance trees of a given
// depth with a witness grid, checking the shattering condition directly.
bool tree_shattered_at_depth(const FiniteClass& F, double alpha, int depth,
                             const std::vector<double>& witness_grid) {
    const int X = static_cast<int>(F.num_points());
    const int nodes = (1 << depth) - 1;
    std::vector<int> tree(nodes, 0);
    std::vector<int> wit(nodes, 0);
    const int W = static_cast<int>(witness_grid.size());

    auto shattered = [&]() {
        for (int eps = 0; eps < (1 << depth); ++eps) {
            bool found = false;
            for (std::size_t f = 0; f < F.num_functions() && !found; ++f) {
                bool ok = true;
                std::size_t idx = 0;
                for (int t = 0; t < depth && ok; ++t) {
                    int e = (eps >> t & 1) ? 1 : -1;
                    double v = F.values[f][tree[idx]];
                    double s = witness_grid[wit[idx]];
                    if (e * (v - s) < alpha / 2.0 - 1e-12) ok = false;
                    idx = 2 * idx + (e > 0 ? 2 : 1);
                }
                found = ok;
            }
            if (!found) return false;
        }
        return true;
    };

    // enumerate trees and witness assignments jointly
    while (true) {
        if (shattered()) return true;
        int pos = 0;
        while (pos < nodes) {
            if (wit[pos] + 1 < W) {
                ++wit[pos];
                break;
            }
            wit[pos] = 0;
            if (tree[pos] + 1 < X) {
                ++tree[pos];
                break;
            }
            tree[pos] = 0;
            ++pos;
        }
        if (pos == nodes) return false;
    }
}

int oracle_seq_fat(const FiniteClass& F, double alpha, int max_depth,
                   const std::vector<double>& witness_grid) {
    int best = 0;
    for (int d = 1; d <= max_depth; ++d) {
        if (tree_shattered_at_depth(F, alpha, d, witness_grid)) best = d;
    }
    return best;
}

FiniteClass random_binary_class(Rng& rng, int points, int max_functions) {
    std::vector<std::vector<double>> table;
    int count = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_functions - 1));
    for (int f = 0; f < count; ++f) {
        std::vector<double> row(points);
        for (int x = 0; x < points; ++x) row[x] = (rng() & 1u) ? 1.0 : -1.0;
        table.push_back(std::move(row));
    }
    return FiniteClass::from_table(std::move(table));
}

FiniteClass random_real_class(Rng& rng, int points, int max_functions) {
    std::vector<std::vector<double>> table;
    int count = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_functions - 1));
    for (int f = 0; f < count; ++f) {
        std::vector<double> row(points);
        for (int x = 0; x < points; ++x)
            row[x] = std::round((2.0 * uniform01(rng) - 1.0) * 4.0) / 4.0;
        table.push_back(std::move(row));
    }
    return FiniteClass::from_table(std::move(table));
}

}  // namespace

TEST(FiniteClass, DedupesRowsAndValidates) {
    auto F = FiniteClass::from_table({{1.0, -1.0}, {1.0, -1.0}, {-1.0, 1.0}});
    EXPECT_EQ(F.num_functions(), 2u);
    EXPECT_THROW(FiniteClass::from_table({{2.0}}), std::invalid_argument);
    EXPECT_THROW(FiniteClass::from_table({}), std::invalid_argument);
}

TEST(StatRademacher, Examples) {
    auto single = FiniteClass::from_table({{0.7, -0.3}});
    EXPECT_NEAR(cplx::stat_rademacher(single, {0, 1}), 0.0, 1e-12);

    auto pm = FiniteClass::from_table({{1.0}, {-1.0}});
    EXPECT_NEAR(cplx::stat_rademacher(pm, {0}), 1.0, 1e-12);
    // with two points: E|e1 + e2| / 2 = 0.5
    EXPECT_NEAR(cplx::stat_rademacher(pm, {0, 0}), 0.5, 1e-12);
}

TEST(StatRademacher, ScalingProperty) {
    Rng rng(3);
    auto F = random_real_class(rng, 3, 6);
    double c = 0.5;
    std::vector<std::vector<double>> scaled = F.values;
    for (auto& row : scaled)
        for (auto& v : row) v *= c;
    auto Fc = FiniteClass::from_table(scaled);
    std::vector<int> sample = {0, 1, 2, 1};
    EXPECT_NEAR(cplx::stat_rademacher(Fc, sample),
                c * cplx::stat_rademacher(F, sample), 1e-12);
}

TEST(StatRademacher, CapEnforced) {
    auto pm = FiniteClass::from_table({{1.0}, {-1.0}});
    std::vector<int> big(23, 0);
    EXPECT_THROW(cplx::stat_rademacher(pm, big), CapacityError);
}

TEST(StatFat, Examples) {
    auto single = FiniteClass::from_table({{0.3, 0.5}});
    EXPECT_EQ(cplx::stat_fat(single, 0.5).value, 0);

    auto pm = FiniteClass::from_table({{1.0}, {-1.0}});
    EXPECT_EQ(cplx::stat_fat(pm, 2.0).value, 1);

    auto full3 = FiniteClass::full_binary(3);
    EXPECT_EQ(cplx::stat_fat(full3, 2.0).value, 3);
}

TEST(StatFat, CertificateIsValid) {
    auto full3 = FiniteClass::full_binary(3);
    auto res = cplx::stat_fat(full3, 2.0);
    ASSERT_TRUE(res.sample_certificate.has_value());
    const auto& cert = *res.sample_certificate;
    ASSERT_EQ(cert.points.size(), static_cast<std::size_t>(res.value));
    // every sign pattern on the certified sample is realized with margins
    for (int eps = 0; eps < (1 << res.value); ++eps) {
        bool found = false;
        for (const auto& row : full3.values) {
            bool ok = true;
            for (int t = 0; t < res.value; ++t) {
                int e = (eps >> t & 1) ? 1 : -1;
                if (e * (row[cert.points[t]] - cert.witness[t]) < 1.0 - 1e-12) ok = false;
            }
            if (ok) found = true;
        }
        EXPECT_TRUE(found);
    }
}

TEST(LittlestoneDim, Examples) {
    auto two_constants = FiniteClass::from_table({{1.0, 1.0}, {-1.0, -1.0}});
    EXPECT_EQ(cplx::littlestone_dim(two_constants), 1);

    auto full3 = FiniteClass::full_binary(3);
    EXPECT_EQ(cplx::littlestone_dim(full3), 3);

    auto single = FiniteClass::from_table({{1.0, -1.0}});
    EXPECT_EQ(cplx::littlestone_dim(single), 0);
}

TEST(LittlestoneDim, AgreesWithExplicitTreeSearch) {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        auto F = random_binary_class(rng, 3, 8);
        int ld = cplx::littlestone_dim(F);
        int oracle = oracle_seq_fat(F, 2.0, 4, {0.0});
        EXPECT_EQ(ld, oracle);
    }
}

TEST(LittlestoneDim, BoundedByLogClassSize) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto F = random_binary_class(rng, 4, 12);
        double cap = std::log2(static_cast<double>(F.num_functions()));
        EXPECT_LE(cplx::littlestone_dim(F), cap + 1e-9);
    }
}

TEST(SeqFat, BinaryEquivalenceWithLittlestone) {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        auto F = random_binary_class(rng, 4, 12);
        int ld = cplx::littlestone_dim(F);
        for (double alpha : {0.5, 1.0, 2.0}) {
            auto sf = cplx::seq_fat(F, alpha);
            EXPECT_FALSE(sf.saturated);
            EXPECT_EQ(sf.value, ld) << "alpha=" << alpha;
        }
    }
}

TEST(SeqFat, AgainstExhaustiveTreeEnumeration) {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        auto F = random_real_class(rng, 2, 5);
        // fine witness grid as the spot-check oracle
        std::vector<double> grid;
        for (double s = -1.0; s <= 1.0 + 1e-12; s += 0.125) grid.push_back(s);
        double alpha = 0.5;
        int oracle = oracle_seq_fat(F, alpha, 2, grid);
        int got = std::min(cplx::seq_fat(F, alpha).value, 2);
        EXPECT_EQ(got, oracle);
    }
}

TEST(SeqFat, DominatesStatFat) {
    Rng rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        auto F = random_real_class(rng, 4, 10);
        for (double alpha : {0.5, 1.0}) {
            auto seq = cplx::seq_fat(F, alpha);
            auto stat = cplx::stat_fat(F, alpha);
            if (!seq.saturated) EXPECT_GE(seq.value, stat.value);
        }
    }
}

TEST(SeqFat, MonotoneInAlphaAndClassInclusion) {
    Rng rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        auto F = random_real_class(rng, 4, 10);
        int prev_seq = 100, prev_stat = 100;
        for (double alpha : {0.25, 0.5, 1.0, 2.0}) {
            int v = cplx::seq_fat(F, alpha).value;
            EXPECT_LE(v, prev_seq);
            prev_seq = v;
            int s = cplx::stat_fat(F, alpha).value;
            EXPECT_LE(s, prev_stat);
            prev_stat = s;
        }
        // class inclusion: dropping rows cannot increase the dimension
        if (F.num_functions() > 2) {
            std::vector<std::vector<double>> sub(F.values.begin(), F.values.end() - 1);
            auto G = FiniteClass::from_table(sub);
            EXPECT_LE(cplx::seq_fat(G, 0.5).value, cplx::seq_fat(F, 0.5).value);
            EXPECT_LE(cplx::stat_fat(G, 0.5).value, cplx::stat_fat(F, 0.5).value);
        }
    }
}

TEST(SeqFat, CertificateShattersAndCapsEnforced) {
    auto full3 = FiniteClass::full_binary(3);
    auto res = cplx::seq_fat(full3, 2.0);
    EXPECT_EQ(res.value, 3);
    ASSERT_TRUE(res.tree_certificate.has_value());
    const auto& cert = *res.tree_certificate;
    for (int eps = 0; eps < (1 << res.value); ++eps) {
        bool found = false;
        for (const auto& row : full3.values) {
            bool ok = true;
            std::vector<int> prefix;
            for (int t = 0; t < res.value && ok; ++t) {
                int e = (eps >> t & 1) ? 1 : -1;
                double v = row[cert.tree.node_at(prefix)];
                double s = cert.witness.node_at(prefix);
                if (e * (v - s) < 1.0 - 1e-12) ok = false;
                prefix.push_back(e);
            }
            if (ok) found = true;
        }
        EXPECT_TRUE(found);
    }

    Caps tight;
    tight.seq_fat_max_points = 2;
    EXPECT_THROW(cplx::seq_fat(full3, 2.0, tight), CapacityError);

    // the depth cap saturates instead of failing
    Caps shallow;
    shallow.seq_fat_max_depth = 2;
    auto sat = cplx::seq_fat(full3, 2.0, shallow);
    EXPECT_EQ(sat.value, 2);
    EXPECT_TRUE(sat.saturated);
}

TEST(SeqRademacher, Examples) {
    auto pm = FiniteClass::from_table({{1.0}, {-1.0}});
    // depth-1 trees are single points
    EXPECT_NEAR(cplx::seq_rademacher(pm, 1), 1.0, 1e-12);
    EXPECT_NEAR(cplx::seq_rademacher(pm, 2), 0.5, 1e-12);

    auto single = FiniteClass::from_table({{0.4, -0.2}});
    EXPECT_NEAR(cplx::seq_rademacher(single, 2), 0.0, 1e-12);
}

TEST(SeqRademacher, DominatesStatRademacherAtMatchedDepth) {
    // constant trees embed every sample, so the tree supremum dominates the
    // worst-case sample value
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        auto F = random_real_class(rng, 3, 6);
        double seq1 = cplx::seq_rademacher(F, 1);
        double seq2 = cplx::seq_rademacher(F, 2);
        for (int a = 0; a < 3; ++a) {
            EXPECT_GE(seq1, cplx::stat_rademacher(F, {a}) - 1e-12);
            for (int b = 0; b < 3; ++b)
                EXPECT_GE(seq2, cplx::stat_rademacher(F, {a, b}) - 1e-12);
        }
    }
}

TEST(SeqRademacher, CapEnforced) {
    auto pm = FiniteClass::from_table({{1.0}, {-1.0}});
    EXPECT_THROW(cplx::seq_rademacher(pm, 5), CapacityError);
}
