#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fgp/engine.hpp"
#include "fgp/error.hpp"
#include "fgp/generators.hpp"
#include "fgp/market.hpp"
#include "fgp/rank.hpp"

namespace fgp {

/// Multiplicative generation from a function of the sorted weight vector.
/// Index i is handed the derivative of the rank it held on the previous day;
/// symmetric families give the same result as the unranked engine.
inline DecompositionSeries ranked_multiplicative_decomposition(const MarketPath& path, const FamilySchedule& schedule,
                                                               bool dlret_on = false) {
    return detail::multiplicative_impl<true>(path, schedule, dlret_on);
}

/// Weights of the ranked multiplicative strategy over (day - 1, day].
/// Balanced families use mu_i theta_i / sum_j mu_j theta_j, so stocks whose
/// rank carries no derivative get an exact zero.
inline WeightVector ranked_portfolio_weights(const FamilySchedule& schedule, const MarketPath& path, std::size_t day) {
    if (day < 1 || day >= path.num_days())
        throw Error(ErrorKind::InvalidArgument, "portfolio weights need 1 <= day < num_days");
    const std::size_t prev = day - 1;
    const auto& fam = schedule.for_epoch(path.epoch_of(prev).k);
    if (!fam.flags().balanced) return detail::multiplicative_weights_at<true>(schedule, path, day);

    WeightVector mu = path.weights_at(prev);
    std::vector<double> theta(mu.size());
    detail::Evaluator<true> eval;
    eval(fam, mu, theta);
    double total = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) total += mu[i] * theta[i];
    WeightVector pi(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) pi[i] = mu[i] * theta[i] / total;
    return pi;
}

/// Capitalization weights inside the m largest stocks of `day`, zero below rank m.
inline WeightVector top_m_weights(const MarketPath& path, std::size_t day, std::size_t m) {
    if (m < 1) throw Error(ErrorKind::BadParameter, "top_m needs m >= 1");
    const WeightVector mu = path.weights_at(day);
    std::vector<std::size_t> order;
    rank_order_into(mu, order);
    const std::size_t top = std::min(m, mu.size());
    double s = 0.0;
    for (std::size_t l = 0; l < top; ++l) s += mu[order[l]];
    WeightVector w(mu.size(), 0.0);
    for (std::size_t l = 0; l < top; ++l) w[order[l]] = mu[order[l]] / s;
    return w;
}

/// Throws FamilyNotOpenMarketAdmissible unless every epoch's family is
/// balanced and ignores sorted coordinates beyond rank m.
inline void require_open_market_admissible(const MarketPath& path, const FamilySchedule& schedule, std::size_t m) {
    if (m < 1) throw Error(ErrorKind::BadParameter, "top_m needs m >= 1");
    for (const Epoch& ep : path.epochs()) {
        const auto& fam = schedule.for_epoch(ep.k);
        if (!fam.flags().balanced)
            throw Error(ErrorKind::FamilyNotOpenMarketAdmissible,
                        "family '" + fam.spec() + "' is not balanced");
        if (ep.n > m && fam.support(ep.n) > m)
            throw Error(ErrorKind::FamilyNotOpenMarketAdmissible,
                        "family '" + fam.spec() + "' uses ranks beyond " + std::to_string(m) + " in epoch " +
                            std::to_string(ep.k));
    }
}

/// Log wealth of the ranked strategy relative to the top-m open market
/// portfolio. Each column is the difference between the strategy's term and
/// the corresponding term of top_m_sum(m); c_tm cancels, and log_v = log_u.
inline DecompositionSeries open_market_decomposition(const MarketPath& path, const FamilySchedule& schedule,
                                                     std::size_t m, bool dlret_on = false) {
    require_open_market_admissible(path, schedule, m);
    DecompositionSeries s = ranked_multiplicative_decomposition(path, schedule, dlret_on);
    const DecompositionSeries b = ranked_multiplicative_decomposition(path, family::top_m_sum(m), dlret_on);
    for (std::size_t t = 0; t < s.size(); ++t) {
        s.log_g[t] -= b.log_g[t];
        s.eg[t] -= b.eg[t];
        s.c_tm[t] = 0.0;
        s.c_g[t] -= b.c_g[t];
        s.dlret[t] -= b.dlret[t];
        s.log_v[t] = s.log_g[t] + s.eg[t] + s.c_g[t] + s.dlret[t];
        s.log_u[t] = s.log_v[t];
    }
    s.baseline = Baseline::top_m;
    return s;
}

/// Oracle strategy for the ranked multiplicative weights.
struct RankedMultiplicativeStrategy {
    const MarketPath* path;
    FamilySchedule schedule;

    WeightVector operator()(std::size_t day, const TradingState&) const {
        return ranked_portfolio_weights(schedule, *path, day);
    }
};

/// Oracle strategy holding the top-m open market portfolio.
struct TopMStrategy {
    const MarketPath* path;
    std::size_t m;

    WeightVector operator()(std::size_t day, const TradingState&) const { return top_m_weights(*path, day - 1, m); }
};

} // namespace fgp
