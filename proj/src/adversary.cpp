#include "oco/adversary.hpp"

#include <cmath>
#include <sstream>

#include "oco/errors.hpp"

namespace oco::adv {

using cplx::FiniteClass;
using loss::LossInstance;

std::vector<LossInstance> hidden_coordinate_stream(int d, int n, bool bias,
                                                   std::uint64_t seed) {
    if (d < 1 || n < 1)
        throw std::invalid_argument("hidden_coordinate_stream: d and n must be >= 1");
    Rng rng(seed);
    std::vector<LossInstance> out;
    out.reserve(n);
    for (int t = 0; t < n; ++t) {
        std::vector<std::uint8_t> mask(d);
        for (int i = 0; i < d; ++i) mask[i] = static_cast<std::uint8_t>(rng() & 1u);
        if (bias) {
            out.emplace_back(loss::HiddenCoordBiased{zeros(d), std::move(mask), 0.01});
        } else {
            out.emplace_back(loss::HiddenCoord{zeros(d), std::move(mask)});
        }
    }
    return out;
}

BlockAdversaryPlan BlockAdversaryPlan::make(const FiniteClass& F, double alpha, int n,
                                            const cplx::Caps& caps) {
    cplx::FatResult fat = cplx::seq_fat(F, alpha, caps);
    if (fat.value < 1 || !fat.tree_certificate)
        throw std::invalid_argument("BlockAdversaryPlan: class has no shattered tree at alpha");
    BlockAdversaryPlan plan;
    plan.cert = *fat.tree_certificate;
    plan.alpha = alpha;
    plan.depth = fat.value;
    if (n % plan.depth != 0)
        throw std::invalid_argument("BlockAdversaryPlan: n must be divisible by the depth");
    plan.block_size = n / plan.depth;
    plan.n = n;
    return plan;
}

void validate_plan(const FiniteClass& F, const BlockAdversaryPlan& plan) {
    const int d = plan.depth;
    if (plan.cert.tree.depth != d || plan.cert.witness.depth != d)
        throw std::invalid_argument("validate_plan: certificate depth mismatch");
    if (plan.n != plan.block_size * d)
        throw std::invalid_argument("validate_plan: n != block_size * depth");
    // every sign path needs a class member beating the witness margins
    for (int eps = 0; eps < (1 << d); ++eps) {
        bool found = false;
        for (std::size_t f = 0; f < F.num_functions() && !found; ++f) {
            bool ok = true;
            std::vector<int> prefix;
            for (int t = 0; t < d && ok; ++t) {
                int e = (eps >> t & 1) ? 1 : -1;
                int x = plan.cert.tree.node_at(prefix);
                double s = plan.cert.witness.node_at(prefix);
                if (e * (F.values[f][x] - s) < plan.alpha / 2.0 - 1e-12) ok = false;
                prefix.push_back(e);
            }
            found = ok;
        }
        if (!found)
            throw std::invalid_argument("validate_plan: certificate is not alpha-shattered");
    }
}

std::vector<std::pair<int, double>> block_sign_stream(const BlockAdversaryPlan& plan,
                                                      std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> labels(plan.n);
    for (int t = 0; t < plan.n; ++t) labels[t] = rademacher(rng);

    std::vector<std::pair<int, double>> stream(plan.n);
    std::vector<int> prefix;  // block majority signs of earlier blocks
    for (int j = 0; j < plan.depth; ++j) {
        int x = plan.cert.tree.node_at(prefix);
        int sum = 0;
        for (int t = j * plan.block_size; t < (j + 1) * plan.block_size; ++t) {
            stream[t] = {x, static_cast<double>(labels[t])};
            sum += labels[t];
        }
        prefix.push_back(sum >= 0 ? 1 : -1);  // sign(0) := +1
    }
    return stream;
}

PointTreeFn constant_level_tree(std::vector<Point> level_points) {
    return [pts = std::move(level_points)](int level, const std::vector<int>&) -> Point {
        if (level < 0 || level >= static_cast<int>(pts.size()))
            throw std::invalid_argument("constant_level_tree: level out of range");
        return pts[level];
    };
}

PointTreeFn orthonormal_level_tree(int n) {
    return [n](int level, const std::vector<int>&) -> Point {
        if (level < 0 || level >= n)
            throw std::invalid_argument("orthonormal_level_tree: level out of range");
        return basis(n, level);
    };
}

std::vector<LossInstance> linear_tree_stream(const PointTreeFn& tree, int n,
                                             std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("linear_tree_stream: n must be >= 1");
    Rng rng(seed);
    std::vector<LossInstance> out;
    out.reserve(n);
    std::vector<int> prefix;
    for (int t = 0; t < n; ++t) {
        int e = rademacher(rng);
        Point x = tree(t, prefix);
        scale(x, static_cast<double>(e));
        out.emplace_back(loss::Linear{std::move(x)});
        prefix.push_back(e);
    }
    return out;
}

ResistingOracle::ResistingOracle(int m, std::vector<std::pair<Point, double>> pieces)
    : m_(m), pieces_(std::move(pieces)) {
    if (m_ < 1) throw std::invalid_argument("ResistingOracle: m must be >= 1");
    if (static_cast<int>(pieces_.size()) < m_)
        throw std::invalid_argument("ResistingOracle: need at least m pieces");
    remaining_.resize(pieces_.size());
    for (std::size_t i = 0; i < pieces_.size(); ++i) remaining_[i] = static_cast<int>(i);
}

loss::LossEval ResistingOracle::query(const Point& h) {
    if (finalized()) throw ProtocolError("ResistingOracle: query after finalization");

    // pick the remaining piece with the largest |<h,-x_i>+s_i|, lowest index
    // on ties, and commit its sign (>= 0 maps to +1)
    std::size_t pick_pos = 0;
    double best = -1.0;
    double best_val = 0.0;
    for (std::size_t k = 0; k < remaining_.size(); ++k) {
        int i = remaining_[k];
        double v = pieces_[i].second - dot(h, pieces_[i].first);
        if (std::abs(v) > best) {
            best = std::abs(v);
            best_val = v;
            pick_pos = k;
        }
    }
    int picked = remaining_[pick_pos];
    remaining_.erase(remaining_.begin() + static_cast<std::ptrdiff_t>(pick_pos));
    order_.push_back(picked);
    signs_.push_back(best_val >= 0.0 ? 1 : -1);

    loss::MaxOfSignedLinear partial;
    for (std::size_t j = 0; j < order_.size(); ++j) {
        partial.pieces.push_back(
            {signs_[j], pieces_[order_[j]].first, pieces_[order_[j]].second});
    }
    loss::LossEval ans = loss::eval(LossInstance{partial}, h);
    queries_.push_back(h);
    answers_.push_back(ans);
    return ans;
}

loss::MaxOfSignedLinear ResistingOracle::finalized_instance() const {
    if (!finalized())
        throw ProtocolError("ResistingOracle: instance not finalized yet");
    loss::MaxOfSignedLinear z;
    for (std::size_t j = 0; j < order_.size(); ++j)
        z.pieces.push_back({signs_[j], pieces_[order_[j]].first, pieces_[order_[j]].second});
    return z;
}

double ResistingOracle::optimum_on_l2_ball(double radius) const {
    loss::MaxOfSignedLinear z = finalized_instance();
    // minimize max_j eps_j (s_j - <h, x_j>) over ||h|| <= radius by projected
    // subgradient with the best-iterate rule; exact for the orthonormal bank
    // where the optimum is the sign combination of the pieces
    const std::size_t d = z.pieces.front().x.size();
    Point h = zeros(d);
    // analytic candidate: equalizing direction sum eps_j x_j, rescaled
    Point dir = zeros(d);
    for (const auto& pc : z.pieces) axpy(static_cast<double>(pc.sign), pc.x, dir);
    double nd = norm2(dir);
    double best = loss::eval(LossInstance{z}, h).value;
    if (nd > 0.0) {
        Point cand = dir;
        scale(cand, radius / nd);
        best = std::min(best, loss::eval(LossInstance{z}, cand).value);
    }
    for (int t = 1; t <= 2000; ++t) {
        loss::LossEval e = loss::eval(LossInstance{z}, h);
        axpy(-radius / std::sqrt(static_cast<double>(t)), e.subgrad, h);
        double n2 = norm2(h);
        if (n2 > radius) scale(h, radius / n2);
        best = std::min(best, loss::eval(LossInstance{z}, h).value);
    }
    return best;
}

std::vector<std::pair<Point, double>> ResistingOracle::orthonormal_pieces(int m) {
    std::vector<std::pair<Point, double>> pieces;
    pieces.reserve(m);
    for (int i = 0; i < m; ++i) pieces.emplace_back(basis(m, i), 0.0);
    return pieces;
}

std::string ResistingOracle::transcript_json(std::uint64_t seed) const {
    std::ostringstream os;
    os.precision(17);
    auto point = [&](const Point& p) {
        os << "[";
        for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
        os << "]";
    };
    os << "{\"seed\":" << seed << ",\"pieces\":[";
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        os << (i ? "," : "") << "{\"x\":";
        point(pieces_[i].first);
        os << ",\"s\":" << pieces_[i].second << "}";
    }
    os << "],\"signs\":[";
    for (std::size_t i = 0; i < signs_.size(); ++i) os << (i ? "," : "") << signs_[i];
    os << "],\"order\":[";
    for (std::size_t i = 0; i < order_.size(); ++i) os << (i ? "," : "") << order_[i];
    os << "],\"queries\":[";
    for (std::size_t i = 0; i < queries_.size(); ++i) {
        if (i) os << ",";
        point(queries_[i]);
    }
    os << "],\"answers\":[";
    for (std::size_t i = 0; i < answers_.size(); ++i) {
        os << (i ? "," : "") << "{\"value\":" << answers_[i].value << ",\"subgrad\":";
        point(answers_[i].subgrad);
        os << "}";
    }
    os << "]}";
    return os.str();
}

}  // namespace oco::adv
