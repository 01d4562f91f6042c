#ifndef OCO_ADVERSARY_HPP
#define OCO_ADVERSARY_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "oco/complexity.hpp"
#include "oco/losses.hpp"
#include "oco/rng.hpp"

namespace oco::adv {

// n i.i.d. center-finding instances: x = 0, mask uniform over {0,1}^d;
// the biased variant adds the geometric pull toward the all-ones corner.
std::vector<loss::LossInstance> hidden_coordinate_stream(int d, int n, bool bias,
                                                         std::uint64_t seed);

// Supervised lower-bound stream built on a shattering certificate: labels are
// uniform signs, instances walk the certified tree along the block-majority
// sign path. sign(0) := +1 in block majorities.
struct BlockAdversaryPlan {
    cplx::TreeShatterCertificate cert;
    double alpha = 0.0;
    int depth = 0;       // certified tree depth
    int block_size = 0;  // k; horizon n = k * depth
    int n = 0;

    static BlockAdversaryPlan make(const cplx::FiniteClass& F, double alpha, int n,
                                   const cplx::Caps& caps = {});
};

// Re-check the plan's shattering margins; throws on an invalid certificate.
void validate_plan(const cplx::FiniteClass& F, const BlockAdversaryPlan& plan);

std::vector<std::pair<int, double>> block_sign_stream(const BlockAdversaryPlan& plan,
                                                      std::uint64_t seed);

// Linear instances x_t = eps_t * u_t(eps_{1:t-1}) for a tree of dual vectors.
// The tree is a callback so constant-per-level trees of any depth need no
// materialization.
using PointTreeFn = std::function<Point(int level, const std::vector<int>& eps_prefix)>;

PointTreeFn constant_level_tree(std::vector<Point> level_points);
PointTreeFn orthonormal_level_tree(int n);  // level t maps to basis vector e_t in R^n

std::vector<loss::LossInstance> linear_tree_stream(const PointTreeFn& tree, int n,
                                                   std::uint64_t seed);

// Stateful first-order oracle that commits the pieces of a max-of-linear
// objective only as queries arrive. Query t selects the remaining piece with
// the largest |<h,-x_i>+s_i|, fixes its sign (>= 0 maps to +1), and answers
// for the partial objective; all previous answers stay consistent with every
// later extension, so no first-order method can distinguish the final
// instance from what it was shown.
class ResistingOracle {
  public:
    ResistingOracle(int m, std::vector<std::pair<Point, double>> pieces);

    loss::LossEval query(const Point& h);  // ProtocolError after m queries
    bool finalized() const { return static_cast<int>(queries_.size()) >= m_; }

    // The committed instance; only valid once all m queries were made.
    loss::MaxOfSignedLinear finalized_instance() const;

    // min over the radius-R Euclidean ball of the final objective
    // (orthonormal default bank: exactly -1/sqrt(m)).
    double optimum_on_l2_ball(double radius) const;

    const std::vector<Point>& queries() const { return queries_; }
    const std::vector<loss::LossEval>& answers() const { return answers_; }
    const std::vector<int>& committed_signs() const { return signs_; }

    std::string transcript_json(std::uint64_t seed = 0) const;

    static std::vector<std::pair<Point, double>> orthonormal_pieces(int m);

  private:
    int m_;
    std::vector<std::pair<Point, double>> pieces_;
    std::vector<int> remaining_;
    std::vector<int> order_;  // i(1), i(2), ...
    std::vector<int> signs_;
    std::vector<Point> queries_;
    std::vector<loss::LossEval> answers_;
};

}  // namespace oco::adv

#endif
