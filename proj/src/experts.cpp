#include "oco/experts.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "oco/errors.hpp"

namespace oco::experts {

using cplx::Caps;
using cplx::FiniteClass;

namespace {

// number of grid levels: largest k with (2k+1) alpha <= 4, plus one
int grid_size(double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("grid_levels: alpha must be positive");
    int K = static_cast<int>(std::floor((4.0 / alpha - 1.0) / 2.0 + 1e-12)) + 1;
    return std::max(K, 1);
}

double level_at(double alpha, int k) { return -1.0 + (2 * k + 1) * alpha / 2.0; }

}  // namespace

std::vector<double> grid_levels(double alpha) {
    int K = grid_size(alpha);
    std::vector<double> levels(K);
    for (int k = 0; k < K; ++k) levels[k] = level_at(alpha, k);
    return levels;
}

double discretize(double a, double alpha) {
    int K = grid_size(alpha);
    // nearest level index; exact ties round toward the smaller level
    double pos = (a + 1.0) / alpha - 0.5;  // solves a = level_at(k) at pos = k
    int k = static_cast<int>(std::lround(pos));
    if (2.0 * std::abs(pos - std::floor(pos) - 0.5) < 1e-12) k = static_cast<int>(std::floor(pos));
    k = std::clamp(k, 0, K - 1);
    return level_at(alpha, k);
}

EwaResult ewa_run(const std::vector<double>& priors,
                  const std::vector<std::vector<double>>& losses, std::optional<double> eta) {
    const std::size_t K = priors.size();
    if (K == 0) throw std::invalid_argument("ewa_run: no experts");
    double psum = 0.0;
    for (double p : priors) {
        if (p <= 0.0) throw std::invalid_argument("ewa_run: priors must be positive");
        psum += p;
    }
    if (psum > 1.0 + 1e-9) throw std::invalid_argument("ewa_run: priors must sum to at most 1");
    const std::size_t n = losses.size();
    if (n == 0) throw std::invalid_argument("ewa_run: no rounds");
    double eta_v = eta.value_or(1.0 / std::sqrt(static_cast<double>(n)));

    std::vector<double> logw(K);
    for (std::size_t i = 0; i < K; ++i) logw[i] = std::log(priors[i]);

    EwaResult res;
    res.expected_loss.resize(n);
    res.weights.assign(n, std::vector<double>(K));
    res.cumulative_expert_loss.assign(K, 0.0);

    for (std::size_t t = 0; t < n; ++t) {
        if (losses[t].size() != K)
            throw std::invalid_argument("ewa_run: loss row size mismatch");
        double m = *std::max_element(logw.begin(), logw.end());
        double z = 0.0;
        for (std::size_t i = 0; i < K; ++i) z += std::exp(logw[i] - m);
        double el = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            double f = losses[t][i];
            if (f < -1e-12 || f > 1.0 + 1e-12)
                throw std::invalid_argument("ewa_run: losses must lie in [0,1]");
            double w = std::exp(logw[i] - m) / z;
            res.weights[t][i] = w;
            el += w * f;
            res.cumulative_expert_loss[i] += f;
            logw[i] -= eta_v * f;
        }
        res.expected_loss[t] = el;
        res.cumulative_expected_loss += el;
    }
    return res;
}

double ewa_bound(double expert_cum_loss, int n, double prior) {
    double sq = std::sqrt(static_cast<double>(n));
    return expert_cum_loss + sq / 8.0 + sq * std::log(1.0 / prior);
}

namespace {

// Shared machinery for the version-space learner and the generated experts:
// discretized value table, masked-level restrictions and a persistent exact
// dimension calculator.
struct SoaEngine {
    const FiniteClass& F;
    double alpha;
    cplx::SeqFatCalculator calc;
    std::vector<std::vector<double>> disc;  // disc[f][x]

    SoaEngine(const FiniteClass& F_, double alpha_, const Caps& caps)
        : F(F_), alpha(alpha_), calc(F_, alpha_, caps) {
        disc.assign(F.num_functions(), std::vector<double>(F.num_points()));
        for (std::size_t f = 0; f < F.num_functions(); ++f)
            for (std::size_t x = 0; x < F.num_points(); ++x)
                disc[f][x] = discretize(F.values[f][x], alpha);
    }

    std::uint64_t full_mask() const {
        return F.num_functions() >= 64 ? ~0ULL : ((1ULL << F.num_functions()) - 1ULL);
    }

    std::uint64_t restrict(std::uint64_t mask, int x, double level) const {
        std::uint64_t out = 0;
        for (std::size_t f = 0; f < F.num_functions(); ++f) {
            if (!(mask >> f & 1ULL)) continue;
            if (disc[f][x] == level) out |= 1ULL << f;
        }
        return out;
    }

    // mean of the grid levels whose restriction attains the maximal
    // dimension; only levels hosting a surviving function can attain it
    double prediction(std::uint64_t mask, int x) {
        int best = -1;
        double sum = 0.0;
        int count = 0;
        std::set<double> levels;
        for (std::size_t f = 0; f < F.num_functions(); ++f)
            if (mask >> f & 1ULL) levels.insert(disc[f][x]);
        for (double r : levels) {
            std::uint64_t sub = restrict(mask, x, r);
            int v = calc.fat(sub);
            if (v > best) {
                best = v;
                sum = r;
                count = 1;
            } else if (v == best) {
                sum += r;
                ++count;
            }
        }
        return sum / std::max(count, 1);
    }
};

}  // namespace

FatSoaResult fat_soa_run(const FiniteClass& F, double alpha,
                         const std::vector<std::pair<int, double>>& stream, const Caps& caps) {
    if (stream.empty()) throw std::invalid_argument("fat_soa_run: empty stream");
    SoaEngine engine(F, alpha, caps);
    std::uint64_t mask = engine.full_mask();

    FatSoaResult res;
    for (const auto& [x, y] : stream) {
        if (x < 0 || x >= static_cast<int>(F.num_points()))
            throw std::invalid_argument("fat_soa_run: instance index out of range");
        double pred = engine.prediction(mask, x);
        res.predictions.push_back(pred);
        if (std::abs(pred - y) > alpha) {
            ++res.large_error_count;
            int before = engine.calc.fat(mask);
            std::uint64_t next = engine.restrict(mask, x, discretize(y, alpha));
            if (next == 0)
                throw ProtocolError("fat_soa_run: version space emptied; stream not realizable");
            res.fat_before_update.push_back(before);
            res.fat_after_update.push_back(engine.calc.fat(next));
            mask = next;
        }
    }
    return res;
}

std::size_t expert_count(int n, int fat, int grid_sz) {
    // sum_{L=0..fat} C(n,L) (grid_sz-1)^L, saturating
    long double total = 0.0L;
    for (int L = 0; L <= fat; ++L) {
        long double c = 1.0L;
        for (int j = 0; j < L; ++j) c = c * (n - j) / (j + 1);
        total += c * std::pow(static_cast<long double>(grid_sz - 1), L);
        if (total > 1e18L) return static_cast<std::size_t>(1e18);
    }
    return static_cast<std::size_t>(total + 0.5L);
}

ExpertSet generate_experts(const FiniteClass& F, double alpha, int n, std::size_t cap,
                           const Caps& caps) {
    if (n < 1) throw std::invalid_argument("generate_experts: n must be >= 1");
    int fat = cplx::seq_fat(F, alpha, caps).value;
    std::size_t count = expert_count(n, fat, grid_size(alpha));
    if (count > cap)
        throw CapacityError("generate_experts: expert count " + std::to_string(count) +
                            " exceeds cap " + std::to_string(cap));

    ExpertSet set;
    set.alpha = alpha;
    set.horizon = n;
    const int nlabels = grid_size(alpha) - 1;

    for (int L = 0; L <= fat; ++L) {
        if (L == 0) {
            set.experts.push_back(GeneratedExpert{});
            continue;
        }
        if (L > n || nlabels == 0) continue;
        std::vector<int> pos(L);
        for (int i = 0; i < L; ++i) pos[i] = i;
        while (true) {
            std::vector<int> choice(L, 0);
            while (true) {
                GeneratedExpert e;
                e.force_rounds = pos;
                e.label_choice = choice;
                set.experts.push_back(std::move(e));
                int k = 0;
                while (k < L && choice[k] == nlabels - 1) choice[k++] = 0;
                if (k == L) break;
                ++choice[k];
            }
            int k = L - 1;
            while (k >= 0 && pos[k] == n - L + k) --k;
            if (k < 0) break;
            ++pos[k];
            for (int j = k + 1; j < L; ++j) pos[j] = pos[j - 1] + 1;
        }
    }
    set.priors.assign(set.experts.size(), 1.0 / static_cast<double>(set.experts.size()));
    return set;
}

std::vector<std::vector<double>> simulate_experts(const FiniteClass& F, const ExpertSet& E,
                                                  const std::vector<int>& xs, const Caps& caps) {
    SoaEngine engine(F, E.alpha, caps);
    const int K = grid_size(E.alpha);

    std::vector<std::vector<double>> preds(E.experts.size(),
                                           std::vector<double>(xs.size(), 0.0));
    for (std::size_t ei = 0; ei < E.experts.size(); ++ei) {
        const auto& ex = E.experts[ei];
        std::uint64_t mask = engine.full_mask();
        std::size_t next_force = 0;
        for (std::size_t t = 0; t < xs.size(); ++t) {
            int x = xs[t];
            double unforced = engine.prediction(mask, x);
            bool forced = next_force < ex.force_rounds.size() &&
                          ex.force_rounds[next_force] == static_cast<int>(t);
            if (!forced) {
                preds[ei][t] = unforced;
                continue;
            }
            // forced: play the k-th grid level distinct from the learner's
            // own discretized prediction, then shrink the version space to
            // it; a forcing that would empty the version space freezes the
            // state instead (only consistent forcings carry a guarantee)
            double own = discretize(unforced, E.alpha);
            int own_idx = static_cast<int>(std::lround((own + 1.0) / E.alpha - 0.5));
            int k = ex.label_choice[next_force];
            int pick = k >= own_idx ? k + 1 : k;
            pick = std::min(pick, K - 1);
            double y = level_at(E.alpha, pick);
            preds[ei][t] = y;
            std::uint64_t next = engine.restrict(mask, x, y);
            if (next != 0) mask = next;
            ++next_force;
        }
    }
    return preds;
}

double agnostic_bound_at(double alpha, int fat_alpha, int n) {
    double nn = static_cast<double>(n);
    double main = std::sqrt(fat_alpha * std::log(2.0 * nn / alpha) / nn);
    double tail = (3.0 + 2.0 * std::log(std::max(std::log(1.0 / alpha), 1e-12))) / std::sqrt(nn);
    return alpha + main + tail;
}

AgnosticResult agnostic_supervised_run(const FiniteClass& F,
                                       const std::vector<std::pair<int, double>>& stream,
                                       std::size_t cap, int max_grid_index, const Caps& caps) {
    if (stream.empty()) throw std::invalid_argument("agnostic_supervised_run: empty stream");
    const int n = static_cast<int>(stream.size());
    std::vector<int> xs(stream.size());
    for (std::size_t t = 0; t < stream.size(); ++t) xs[t] = stream[t].first;

    const double pi2 = 9.869604401089358;  // pi^2
    std::vector<std::vector<double>> all_preds;
    std::vector<double> priors;
    AgnosticResult res;
    res.best_grid_bound = std::numeric_limits<double>::infinity();

    for (int i = 1; i <= max_grid_index; ++i) {
        double alpha = std::pow(2.0, -i);
        int fat = cplx::seq_fat(F, alpha, caps).value;
        std::size_t count = expert_count(n, fat, grid_size(alpha));
        if (count > cap) {
            res.skipped_scales.push_back(i);
            continue;
        }
        ExpertSet set = generate_experts(F, alpha, n, cap, caps);
        auto preds = simulate_experts(F, set, xs, caps);
        double scale_prior = 6.0 / (pi2 * i * i) / static_cast<double>(set.experts.size());
        for (auto& p : preds) {
            all_preds.push_back(std::move(p));
            priors.push_back(scale_prior);
        }
        double b = agnostic_bound_at(alpha, fat, n);
        if (b < res.best_grid_bound) {
            res.best_grid_bound = b;
            res.best_alpha = alpha;
        }
    }
    if (all_preds.empty())
        throw CapacityError("agnostic_supervised_run: every grid scale exceeded the expert cap");

    // absolute losses |pred - y| lie in [0,2]; EWA runs on losses/2
    std::vector<std::vector<double>> losses(stream.size(),
                                            std::vector<double>(all_preds.size()));
    for (std::size_t t = 0; t < stream.size(); ++t)
        for (std::size_t e = 0; e < all_preds.size(); ++e)
            losses[t][e] = 0.5 * std::abs(all_preds[e][t] - stream[t].second);

    res.ewa = ewa_run(priors, losses);

    // comparator: best class member in hindsight under the unscaled loss
    double best_class = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < F.num_functions(); ++f) {
        double s = 0.0;
        for (const auto& [x, y] : stream) s += std::abs(F.values[f][x] - y);
        best_class = std::min(best_class, s);
    }
    res.expected_regret =
        (2.0 * res.ewa.cumulative_expected_loss - best_class) / static_cast<double>(n);
    return res;
}

}  // namespace oco::experts
