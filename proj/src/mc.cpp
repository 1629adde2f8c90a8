#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "stratshrink/errors.hpp"
#include "stratshrink/losses.hpp"
#include "stratshrink/risk.hpp"

namespace stratshrink {

namespace {

constexpr std::uint64_t kBlock = 4096;

struct Welford {
    double n = 0.0, mean = 0.0, m2 = 0.0;
    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.n == 0.0) return;
        const double tot = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / tot;
        m2 += o.m2 + d * d * n * o.n / tot;
        n = tot;
    }
    RiskEstimate finish(std::uint64_t seed) const {
        RiskEstimate r;
        r.mean = mean;
        r.reps = static_cast<std::uint64_t>(n);
        r.seed = seed;
        r.std_error = n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0;
        return r;
    }
};

void check_rule_fits(const EstimatorRule& rule, const HierarchySpec& spec, LossKind loss) {
    const int D = spec.depth();
    switch (rule.tag) {
        case RuleTag::BasicML:
        case RuleTag::BasicFlatGB:
        case RuleTag::BasicShrinkGB:
        case RuleTag::XOnlyML:
        case RuleTag::XOnlyCZ:
        case RuleTag::BetaBayes:
        case RuleTag::BlythK:
        case RuleTag::HalfSum:
            if (D != 1) throw ShapeError(rule.name() + " needs a one-level hierarchy");
            break;
        case RuleTag::MultiML:
        case RuleTag::MultiFlatGB:
        case RuleTag::MultiShrinkGB:
            if (D != 2) throw ShapeError(rule.name() + " needs a two-level hierarchy");
            break;
        case RuleTag::EntropyStick:
            if (rule.a.size() != spec.width(1)) throw ShapeError("need one a_i per group");
            [[fallthrough]];
        case RuleTag::EntropyJeffreys:
            if (D != 2) throw ShapeError(rule.name() + " needs a two-level hierarchy");
            break;
        case RuleTag::GeneralGB:
            if (rule.prior.node.size() != static_cast<std::size_t>(D) + 1) throw ShapeError("prior depth mismatch");
            if (rule.dprime < 0 || rule.dprime > D) throw ShapeError("D' out of range");
            break;
    }
    if (loss != LossKind::SSE && !rule.always_positive())
        throw DomainError(rule.name() + " can return zero estimates; its entropy risk is not well defined");
}

// One per worker: scratch buffers plus the Blyth ratio cache.
class Evaluator {
public:
    Evaluator(const EstimatorRule& rule, const HierarchySpec& spec) : rule_(rule), spec_(spec) {}

    void estimate(const ObservationSet& obs, std::vector<double>& out) {
        switch (rule_.tag) {
            case RuleTag::BasicML:
            case RuleTag::BasicFlatGB:
            case RuleTag::BasicShrinkGB:
            case RuleTag::XOnlyML:
            case RuleTag::XOnlyCZ:
            case RuleTag::BetaBayes:
            case RuleTag::HalfSum:
                basic_.x = obs.counts(1);
                basic_.y = obs.count(0, 0);
                out = estimate_basic(basic_, rule_);
                return;
            case RuleTag::BlythK: blyth(obs, out); return;
            case RuleTag::MultiML:
            case RuleTag::MultiFlatGB:
            case RuleTag::MultiShrinkGB:
                fill_multi(obs, false);
                flatten_into(estimate_multi(multi_, rule_), out);
                return;
            case RuleTag::EntropyStick:
                fill_multi(obs, rule_.with_z);
                flatten_into(estimate_entropy(multi_, rule_.alpha, rule_.a, rule_.with_z), out);
                return;
            case RuleTag::EntropyJeffreys:
                fill_multi(obs, rule_.with_z);
                flatten_into(estimate_entropy_jeffreys(multi_, rule_.with_z), out);
                return;
            case RuleTag::GeneralGB:
                general(obs, out);
                return;
        }
    }

private:
    void fill_multi(const ObservationSet& obs, bool with_z) {
        const auto n2 = static_cast<std::size_t>(spec_.n(2));
        const std::size_t m = spec_.width(1);
        multi_.x.resize(m);
        multi_.y.resize(m);
        const auto& leaves = obs.counts(2);
        for (std::size_t i = 0; i < m; ++i) {
            multi_.x[i].assign(leaves.begin() + static_cast<std::ptrdiff_t>(i * n2),
                               leaves.begin() + static_cast<std::ptrdiff_t>((i + 1) * n2));
            multi_.y[i] = obs.count(1, i);
        }
        if (with_z)
            multi_.z = obs.count(0, 0);
        else
            multi_.z.reset();
    }

    static void flatten_into(const RaggedEstimate& r, std::vector<double>& out) {
        out.clear();
        for (const auto& g : r) out.insert(out.end(), g.begin(), g.end());
    }

    void blyth(const ObservationSet& obs, std::vector<double>& out) {
        const auto& x = obs.counts(1);
        std::int64_t xs = 0;
        for (auto v : x) xs += v;
        const long w = static_cast<long>(xs + obs.count(0, 0));
        out.assign(x.size(), 0.0);
        if (w == 0) return;
        auto it = blyth_cache_.find(w);
        const double ratio = it != blyth_cache_.end() ? it->second : (blyth_cache_[w] = blyth_ratio(rule_.k, w));
        const double den = static_cast<double>(xs) + static_cast<double>(x.size()) - 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = x[i] == 0 ? 0.0 : ratio * static_cast<double>(x[i]) / den;
    }

    void general(const ObservationSet& obs, std::vector<double>& out) {
        // counts shallower than the rule's D' are invisible to it
        if (obs.start_depth() == rule_.dprime) {
            out = estimate_general(obs, rule_.prior);
        } else {
            out = estimate_general(obs.restrict_to(rule_.dprime), rule_.prior);
        }
    }

    const EstimatorRule& rule_;
    const HierarchySpec& spec_;
    BasicObs basic_;
    MultiObs multi_;
    std::map<long, double> blyth_cache_;
};

double loss_value(LossKind loss, const std::vector<double>& est, const ParamTree& tree) {
    switch (loss) {
        case LossKind::SSE: return sse_loss(est, tree.leaves());
        case LossKind::Entropy: return entropy_loss(est, tree.leaves());
        case LossKind::BalancedEntropy: return balanced_entropy_loss(est, tree);
    }
    return 0.0;
}

std::vector<Welford> run(const ParamTree& tree, const std::vector<const EstimatorRule*>& rules, LossKind loss,
                         std::uint64_t reps, std::uint64_t seed, const McOptions& opt) {
    if (reps < 2) throw DomainError("need at least 2 replications");
    const auto& spec = tree.spec();
    int start = spec.depth();
    for (const auto* r : rules) {
        check_rule_fits(*r, spec, loss);
        start = std::min(start, r->start_depth(spec));
    }
    const std::uint64_t nblocks = (reps + kBlock - 1) / kBlock;
    const std::size_t nacc = rules.size() == 1 ? 1 : 3;
    std::vector<std::vector<Welford>> blocks(nblocks, std::vector<Welford>(nacc));

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        ObservationSet obs(spec, start);
        std::vector<Evaluator> evals;
        for (const auto* r : rules) evals.emplace_back(*r, spec);
        std::vector<double> est;
        double losses[2] = {0.0, 0.0};
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (failure) return;
            }
            const std::uint64_t end = std::min(reps, (b + 1) * kBlock);
            auto& acc = blocks[b];
            for (std::uint64_t rep = b * kBlock; rep < end; ++rep) {
                Rng rng(seed, rep);
                sample_into(tree, rng, obs);
                try {
                    for (std::size_t i = 0; i < evals.size(); ++i) {
                        evals[i].estimate(obs, est);
                        losses[i] = loss_value(loss, est, tree);
                    }
                } catch (const DomainError& e) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure)
                        failure = std::make_exception_ptr(
                            DomainError(std::string(e.what()) + " (replication " + std::to_string(rep) + ")"));
                    return;
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    return;
                }
                acc[0].add(losses[0]);
                if (nacc == 3) {
                    acc[1].add(losses[1]);
                    acc[2].add(losses[0] - losses[1]);
                }
            }
        }
    };

    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, nblocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    // merge in block order so the result does not depend on the thread count
    std::vector<Welford> total(nacc);
    for (const auto& blk : blocks)
        for (std::size_t i = 0; i < nacc; ++i) total[i].merge(blk[i]);
    return total;
}

}  // namespace

RiskEstimate mc_risk(const ParamTree& tree, const EstimatorRule& rule, LossKind loss, std::uint64_t reps,
                     std::uint64_t seed, const McOptions& opt) {
    return run(tree, {&rule}, loss, reps, seed, opt)[0].finish(seed);
}

PairedRisk mc_risk_pair(const ParamTree& tree, const EstimatorRule& a, const EstimatorRule& b, LossKind loss,
                        std::uint64_t reps, std::uint64_t seed, const McOptions& opt) {
    auto acc = run(tree, {&a, &b}, loss, reps, seed, opt);
    return {acc[0].finish(seed), acc[1].finish(seed), acc[2].finish(seed)};
}

RiskEstimate mc_risk_diff(const ParamTree& tree, const EstimatorRule& a, const EstimatorRule& b, LossKind loss,
                          std::uint64_t reps, std::uint64_t seed, const McOptions& opt) {
    return mc_risk_pair(tree, a, b, loss, reps, seed, opt).diff;
}

}  // namespace stratshrink
