#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgp/error.hpp"
#include "fgp/generators.hpp"
#include "fgp/market.hpp"
#include "fgp/rank.hpp"

namespace fgp {

/// What the reported relative wealth is measured against.
enum class Baseline { total_market, sfm, top_m };

inline std::string_view to_string(Baseline b) {
    switch (b) {
    case Baseline::total_market: return "total_market";
    case Baseline::sfm: return "sfm";
    case Baseline::top_m: return "top_m";
    }
    return "total_market";
}

/// Per-day terms of the log relative wealth of a multiplicatively generated
/// strategy. All series start at 0 on day 0 and satisfy
///   log_v = log_g + eg + c_tm + c_g + dlret,   log_u = log_v - c_tm.
struct DecompositionSeries {
    std::vector<double> log_g;
    std::vector<double> eg;
    std::vector<double> c_tm;
    std::vector<double> c_g;
    std::vector<double> dlret;
    std::vector<double> log_v;
    std::vector<double> log_u;
    std::optional<Baseline> baseline;

    std::size_t size() const noexcept { return log_v.size(); }

    void resize(std::size_t n) {
        for (auto* s : {&log_g, &eg, &c_tm, &c_g, &dlret, &log_v, &log_u}) s->assign(n, 0.0);
    }

    friend bool operator==(const DecompositionSeries&, const DecompositionSeries&) = default;
};

/// Relative wealth of an additively generated strategy and its terms:
///   v = g + eg_add + c_add,   u = v / (self-financing market relative wealth).
/// Everything is scaled so that v(0) = 1.
struct AdditiveSeries {
    std::vector<double> g;
    std::vector<double> eg_add;
    std::vector<double> c_add;
    std::vector<double> v;
    std::vector<double> u;

    std::size_t size() const noexcept { return v.size(); }
};

/// Holdings carried over the step that ends on a given day, plus wealth
/// marked on that day. Day 0 has no holdings yet.
struct TradingState {
    std::vector<double> shares;
    double wealth = 0.0;
    double relative_wealth = 0.0;
};

namespace detail {

inline void require_unranked(const FamilySchedule& schedule) {
    schedule.for_each([](const GeneratingFamily& f) {
        if (f.flags().rank_only)
            throw Error(ErrorKind::RankOnlyFamily, "family '" + f.spec() + "' can only be used by the rank engine");
    });
}

/// Evaluates G and the per-index integrand theta on a weight vector. The
/// unranked form uses grad G(mu); the ranked form evaluates G on the sorted
/// vector and hands each index the derivative of the rank it holds.
template <bool Ranked>
class Evaluator {
public:
    double operator()(const GeneratingFamily& fam, std::span<const double> mu, std::span<double> theta) {
        double g = 0.0;
        if constexpr (!Ranked) {
            g = fam.value_gradient(mu, theta);
        } else {
            rank_order_into(mu, order_);
            sorted_.resize(mu.size());
            grad_.resize(mu.size());
            for (std::size_t l = 0; l < mu.size(); ++l) sorted_[l] = mu[order_[l]];
            g = fam.value_gradient(sorted_, grad_);
            for (std::size_t l = 0; l < mu.size(); ++l) theta[order_[l]] = grad_[l];
        }
        if (!(g > 0.0) || !std::isfinite(g))
            throw Error(ErrorKind::NonPositiveG, "generating function '" + fam.spec() + "' is not positive");
        return g;
    }

private:
    std::vector<std::size_t> order_;
    std::vector<double> sorted_;
    std::vector<double> grad_;
};

/// pi_i = mu_i (theta_i + G - <mu, theta>) / G; for balanced G this is
/// mu_i theta_i / G.
inline void multiplicative_weights_into(std::span<const double> mu, double g, std::span<const double> theta,
                                        std::span<double> out) {
    double defect = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) defect += mu[i] * theta[i];
    const double shift = g - defect;
    for (std::size_t i = 0; i < mu.size(); ++i) out[i] = mu[i] * (theta[i] + shift) / g;
}

inline double delisting_log_term(const MarketPath& path, std::size_t day, std::span<const double> pi) {
    double s = 0.0;
    for (const auto& e : path.delistings_on(day))
        if (e.dlret) s += pi[e.index] * *e.dlret;
    if (!(1.0 + s > 0.0))
        throw Error(ErrorKind::TotalLoss, "delisting on day " + std::to_string(day) + " wipes out the portfolio");
    return std::log1p(s);
}

template <bool Ranked>
DecompositionSeries multiplicative_impl(const MarketPath& path, const FamilySchedule& schedule, bool dlret_on) {
    const std::size_t days = path.num_days();
    DecompositionSeries out;
    out.resize(days);

    Evaluator<Ranked> eval;
    std::vector<double> mu_prev(path.dimension(0)), theta_prev(mu_prev.size());
    std::vector<double> mu(0), theta(0), pi;

    path.weights_into(0, mu_prev);
    double g_prev = eval(schedule.for_epoch(1), mu_prev, theta_prev);
    const double log_g0 = std::log(g_prev);

    double eg = 0.0, c_tm = 0.0, c_g = 0.0, dl = 0.0;
    for (std::size_t t = 1; t < days; ++t) {
        const Epoch& ep = path.epoch_of(t);
        const auto& fam = schedule.for_epoch(ep.k);
        const std::size_t n = ep.n;
        mu.resize(n);
        theta.resize(n);
        path.weights_into(t, mu);
        const double g = eval(fam, mu, theta);

        if (!path.is_reset(t)) {
            double lin = 0.0;
            for (std::size_t i = 0; i < n; ++i) lin += theta_prev[i] * (mu[i] - mu_prev[i]);
            const double d_gamma = -(g - g_prev) + lin;
            eg += std::log1p(d_gamma / g);
        } else {
            c_tm += std::log(path.total(t - 1) / path.total(t));
            c_g += std::log(g_prev) - std::log(g);
            if (dlret_on && !path.delistings_on(t).empty()) {
                pi.resize(mu_prev.size());
                multiplicative_weights_into(mu_prev, g_prev, theta_prev, pi);
                dl += delisting_log_term(path, t, pi);
            }
        }

        out.log_g[t] = std::log(g) - log_g0;
        out.eg[t] = eg;
        out.c_tm[t] = c_tm;
        out.c_g[t] = c_g;
        out.dlret[t] = dl;
        out.log_v[t] = out.log_g[t] + eg + c_tm + c_g + dl;
        out.log_u[t] = out.log_v[t] - c_tm;

        std::swap(mu, mu_prev);
        std::swap(theta, theta_prev);
        g_prev = g;
    }
    return out;
}

template <bool Ranked>
WeightVector multiplicative_weights_at(const FamilySchedule& schedule, const MarketPath& path, std::size_t day) {
    if (day < 1 || day >= path.num_days())
        throw Error(ErrorKind::InvalidArgument, "portfolio weights need 1 <= day < num_days");
    const std::size_t prev = day - 1;
    const auto& fam = schedule.for_epoch(path.epoch_of(prev).k);
    WeightVector mu = path.weights_at(prev);
    std::vector<double> theta(mu.size());
    Evaluator<Ranked> eval;
    const double g = eval(fam, mu, theta);
    WeightVector pi(mu.size());
    multiplicative_weights_into(mu, g, theta, pi);
    return pi;
}

} // namespace detail

/// Exact discrete decomposition of log V for the multiplicatively generated
/// strategy. Excess growth accrues on steps inside an epoch; the total-market
/// and generating-function corrections (and any delisting returns) accrue on
/// reset days.
inline DecompositionSeries multiplicative_decomposition(const MarketPath& path, const FamilySchedule& schedule,
                                                        bool dlret_on = false) {
    detail::require_unranked(schedule);
    return detail::multiplicative_impl<false>(path, schedule, dlret_on);
}

/// Weights held over the step (day - 1, day], computed from the market
/// weights of day - 1 and the family of that day's epoch.
inline WeightVector portfolio_weights(const FamilySchedule& schedule, const MarketPath& path, std::size_t day) {
    detail::require_unranked(schedule);
    return detail::multiplicative_weights_at<false>(schedule, path, day);
}

/// Buy-and-hold equal shares within epochs, redeployed pro rata at resets.
/// Its log relative wealth is the accumulated log sigma.
inline DecompositionSeries self_financing_market(const MarketPath& path) {
    DecompositionSeries out;
    out.resize(path.num_days());
    double c_tm = 0.0;
    for (std::size_t t = 1; t < path.num_days(); ++t) {
        if (path.is_reset(t)) c_tm += std::log(path.total(t - 1) / path.total(t));
        out.c_tm[t] = c_tm;
        out.log_v[t] = c_tm;
    }
    return out;
}

/// Additively generated strategy, scaled so that V(0) = 1. Past Gamma and
/// correction summands are rescaled by every later sigma.
inline AdditiveSeries additive_decomposition(const MarketPath& path, const FamilySchedule& schedule) {
    detail::require_unranked(schedule);
    const std::size_t days = path.num_days();
    AdditiveSeries out;
    for (auto* s : {&out.g, &out.eg_add, &out.c_add, &out.v, &out.u}) s->assign(days, 0.0);

    detail::Evaluator<false> eval;
    std::vector<double> mu_prev(path.dimension(0)), grad_prev(mu_prev.size()), mu, grad;
    path.weights_into(0, mu_prev);
    double g_prev = eval(schedule.for_epoch(1), mu_prev, grad_prev);
    const double scale = 1.0 / g_prev;

    out.g[0] = 1.0;
    out.v[0] = 1.0;
    out.u[0] = 1.0;

    double gamma = 0.0;     // Gamma of the current epoch
    double eg_past = 0.0;   // finished epochs' Gamma, rescaled by later sigmas
    double c_add = 0.0;
    double sfm = 1.0;       // self-financing market relative wealth
    for (std::size_t t = 1; t < days; ++t) {
        const Epoch& ep = path.epoch_of(t);
        mu.resize(ep.n);
        grad.resize(ep.n);
        path.weights_into(t, mu);
        const double g = eval(schedule.for_epoch(ep.k), mu, grad);

        if (!path.is_reset(t)) {
            double lin = 0.0;
            for (std::size_t i = 0; i < ep.n; ++i) lin += grad_prev[i] * (mu[i] - mu_prev[i]);
            gamma += scale * (-(g - g_prev) + lin);
        } else {
            const double sigma = path.total(t - 1) / path.total(t);
            eg_past = (eg_past + gamma) * sigma;
            gamma = 0.0;
            c_add = c_add * sigma + scale * (sigma * g_prev - g);
            sfm *= sigma;
        }

        out.g[t] = scale * g;
        out.eg_add[t] = eg_past + gamma;
        out.c_add[t] = c_add;
        out.v[t] = out.g[t] + out.eg_add[t] + c_add;
        out.u[t] = out.v[t] / sfm;

        std::swap(mu, mu_prev);
        std::swap(grad, grad_prev);
        g_prev = g;
    }
    return out;
}

/// Strategy callables for the share oracle: given the day whose step is
/// about to be held and the state on the previous day, return target weights
/// over the previous day's stocks.
template <class S>
concept Strategy = requires(S s, std::size_t day, const TradingState& prev) {
    { s(day, prev) } -> std::convertible_to<WeightVector>;
};

/// Weights of the multiplicatively generated strategy.
struct MultiplicativeStrategy {
    const MarketPath* path;
    FamilySchedule schedule;

    WeightVector operator()(std::size_t day, const TradingState&) const {
        return portfolio_weights(schedule, *path, day);
    }
};

/// Weights of the additively generated strategy. Its share holdings are
/// dG(mu_prev) shifted by a constant so that their value equals the current
/// relative wealth, which is read from the oracle's own state.
struct AdditiveStrategy {
    const MarketPath* path;
    FamilySchedule schedule;
    double scale;  ///< 1 / G(mu_0)

    AdditiveStrategy(const MarketPath& p, FamilySchedule s) : path(&p), schedule(std::move(s)), scale(0.0) {
        detail::require_unranked(schedule);
        scale = 1.0 / schedule.for_epoch(1).value(path->weights_at(0));
    }

    WeightVector operator()(std::size_t day, const TradingState& prev) const {
        const std::size_t d = day - 1;
        const auto& fam = schedule.for_epoch(path->epoch_of(d).k);
        WeightVector mu = path->weights_at(d);
        std::vector<double> grad(mu.size());
        fam.value_gradient(mu, grad);
        double level = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) level += mu[i] * grad[i];
        const double v = prev.relative_wealth;
        if (v == 0.0) throw Error(ErrorKind::TotalLoss, "additive strategy has zero wealth");
        WeightVector pi(mu.size());
        for (std::size_t i = 0; i < mu.size(); ++i) pi[i] = mu[i] * (scale * (grad[i] - level) + v) / v;
        return pi;
    }
};

/// Share-level brute-force simulation of a self-financing strategy.
///
/// Inside an epoch the strategy buys shares at the previous day's prices and
/// marks them to the current day. Over a jump step the surviving prices stay
/// frozen, absolute wealth is carried across unchanged, and a delisted
/// position is scaled by (1 + DLRET) when `dlret_on`. Starts with wealth equal
/// to the total capitalization of day 0, i.e. relative wealth 1.
template <Strategy S>
std::vector<TradingState> share_oracle(const MarketPath& path, S&& strategy, bool dlret_on = false) {
    const std::size_t days = path.num_days();
    std::vector<TradingState> states(days);
    states[0].wealth = path.total(0);
    states[0].relative_wealth = 1.0;

    for (std::size_t t = 1; t < days; ++t) {
        const TradingState& prev = states[t - 1];
        const WeightVector pi = strategy(t, prev);
        const auto old_caps = path.caps(t - 1);
        if (pi.size() != old_caps.size())
            throw Error(ErrorKind::DimensionMismatch, "strategy weights do not match the market dimension");
        double sum = 0.0;
        for (double w : pi) sum += w;
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorKind::InvalidArgument, "strategy weights do not sum to one on day " + std::to_string(t));

        TradingState& cur = states[t];
        cur.shares.resize(pi.size());
        for (std::size_t i = 0; i < pi.size(); ++i) cur.shares[i] = prev.wealth * pi[i] / old_caps[i];

        double wealth = 0.0;
        if (!path.is_reset(t)) {
            const auto new_caps = path.caps(t);
            for (std::size_t i = 0; i < pi.size(); ++i) wealth += cur.shares[i] * new_caps[i];
        } else {
            for (std::size_t i = 0; i < pi.size(); ++i) wealth += cur.shares[i] * old_caps[i];
            if (dlret_on)
                for (const auto& e : path.delistings_on(t))
                    if (e.dlret) wealth += cur.shares[e.index] * old_caps[e.index] * *e.dlret;
            if (!(wealth > 0.0))
                throw Error(ErrorKind::TotalLoss, "oracle wealth is exhausted on day " + std::to_string(t));
        }
        cur.wealth = wealth;
        cur.relative_wealth = wealth / path.total(t);
    }
    return states;
}

} // namespace fgp
