#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "fgp/error.hpp"
#include "fgp/market.hpp"

namespace fgp {

enum class SimModel { birth_death, split_merge, combined };
enum class EntrantCap { median, mean, smallest };
enum class DeathDlret { missing, zero };

inline std::string_view to_string(SimModel m) {
    switch (m) {
    case SimModel::birth_death: return "birth-death";
    case SimModel::split_merge: return "split-merge";
    case SimModel::combined: return "combined";
    }
    return "birth-death";
}

inline SimModel parse_sim_model(std::string_view s) {
    if (s == "birth-death" || s == "birth_death") return SimModel::birth_death;
    if (s == "split-merge" || s == "split_merge") return SimModel::split_merge;
    if (s == "combined") return SimModel::combined;
    throw Error(ErrorKind::BadParameter, "unknown model '" + std::string(s) + "'");
}

/// Synthetic market settings. Rates are per day; death_rate is per stock.
struct SimConfig {
    SimModel model = SimModel::birth_death;
    std::size_t horizon = 250;
    std::size_t n0 = 10;
    double birth_rate = 0.0;
    double death_rate = 0.0;
    double split_threshold = 0.5;
    double split_low = 0.3;   ///< the parent keeps a U(split_low, split_high) share
    double split_high = 0.7;
    double merge_rate = 0.0;
    double volatility = 0.02;
    double drift = 0.0;
    double init_log_sd = 1.0;  ///< spread of the initial log caps
    EntrantCap entrant = EntrantCap::median;
    DeathDlret death_dlret = DeathDlret::missing;
    std::uint64_t seed = 0;

    void validate() const {
        auto prob_rate = [](double r) { return r >= 0.0 && std::isfinite(r); };
        if (horizon < 2) throw Error(ErrorKind::BadParameter, "horizon must be at least 2 days");
        if (n0 < 1) throw Error(ErrorKind::BadParameter, "n0 must be at least 1");
        if (!prob_rate(birth_rate) || !prob_rate(death_rate) || !prob_rate(merge_rate))
            throw Error(ErrorKind::BadParameter, "rates must be finite and nonnegative");
        if (!(split_threshold > 0.0 && split_threshold <= 1.0))
            throw Error(ErrorKind::BadParameter, "split threshold must lie in (0, 1]");
        if (!(split_low > 0.0 && split_low <= split_high && split_high < 1.0))
            throw Error(ErrorKind::BadParameter, "split proportions must satisfy 0 < low <= high < 1");
        if (!(volatility > 0.0) || !std::isfinite(volatility))
            throw Error(ErrorKind::BadParameter, "volatility must be positive");
        if (!std::isfinite(drift) || !(init_log_sd >= 0.0))
            throw Error(ErrorKind::BadParameter, "bad drift or initial spread");
    }
};

/// ISO date of `day` days after 2000-01-01.
inline std::string sim_date(std::size_t day) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{year{2000} / January / 1} + days{static_cast<int>(day)}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

/// Generates a market path with ids, ISO date labels and delisting records.
/// Stocks follow independent lognormal daily steps; at most one dimensional
/// event happens per day, tried in the order split, merge, birth, death.
inline MarketPath simulate(const SimConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const bool births = cfg.model != SimModel::split_merge;
    const bool splits = cfg.model != SimModel::birth_death;

    std::size_t next_id = 1;
    auto new_id = [&] {
        char buf[24];
        std::snprintf(buf, sizeof buf, "S%05zu", next_id++);
        return std::string(buf);
    };

    std::vector<double> cap(cfg.n0);
    std::vector<std::string> id(cfg.n0);
    for (std::size_t i = 0; i < cfg.n0; ++i) {
        cap[i] = std::exp(cfg.init_log_sd * normal(rng));
        id[i] = new_id();
    }

    std::vector<std::vector<double>> caps{cap};
    std::vector<std::vector<std::string>> ids{id};
    std::vector<DelistingEvent> delistings;

    for (std::size_t t = 1; t < cfg.horizon; ++t) {
        double prev_total = 0.0, prev_max = 0.0;
        std::size_t largest = 0;
        for (std::size_t i = 0; i < cap.size(); ++i) {
            prev_total += cap[i];
            if (cap[i] > prev_max) {
                prev_max = cap[i];
                largest = i;
            }
        }

        for (double& c : cap) c *= std::exp(cfg.drift + cfg.volatility * normal(rng));

        const std::size_t n = cap.size();
        bool done = false;
        if (splits && prev_max / prev_total > cfg.split_threshold) {
            const double u = cfg.split_low + (cfg.split_high - cfg.split_low) * unit(rng);
            const double parent = cap[largest];
            cap[largest] = u * parent;
            cap.push_back(parent - cap[largest]);
            id.push_back(new_id());
            done = true;
        }
        if (!done && splits && n >= 3 && unit(rng) < 1.0 - std::exp(-cfg.merge_rate)) {
            // pick two distinct stocks other than the current largest
            std::size_t a = static_cast<std::size_t>(unit(rng) * static_cast<double>(n - 1));
            std::size_t b = static_cast<std::size_t>(unit(rng) * static_cast<double>(n - 2));
            a = std::min(a, n - 2);
            b = std::min(b, n - 3);
            if (b >= a) ++b;
            if (a >= largest) ++a;
            if (b >= largest) ++b;
            const std::size_t keep = std::min(a, b), gone = std::max(a, b);
            cap[keep] += cap[gone];
            delistings.push_back(DelistingEvent{t, id[gone], gone, 0.0, false});
            cap.erase(cap.begin() + static_cast<std::ptrdiff_t>(gone));
            id.erase(id.begin() + static_cast<std::ptrdiff_t>(gone));
            done = true;
        }
        if (!done && births && unit(rng) < 1.0 - std::exp(-cfg.birth_rate)) {
            std::vector<double> sorted = cap;
            double entrant = 0.0;
            switch (cfg.entrant) {
            case EntrantCap::median: {
                std::sort(sorted.begin(), sorted.end());
                const std::size_t h = sorted.size() / 2;
                entrant = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
                break;
            }
            case EntrantCap::mean:
                for (double c : sorted) entrant += c;
                entrant /= static_cast<double>(sorted.size());
                break;
            case EntrantCap::smallest:
                entrant = *std::min_element(sorted.begin(), sorted.end());
                break;
            }
            cap.push_back(entrant);
            id.push_back(new_id());
            done = true;
        }
        if (!done && births && unit(rng) < 1.0 - std::exp(-cfg.death_rate * static_cast<double>(n))) {
            if (n == 1) throw Error(ErrorKind::DegenerateConfig, "the last stock would be delisted");
            const std::size_t gone = std::min(static_cast<std::size_t>(unit(rng) * static_cast<double>(n)), n - 1);
            std::optional<double> dl;
            if (cfg.death_dlret == DeathDlret::zero) dl = 0.0;
            delistings.push_back(DelistingEvent{t, id[gone], gone, dl, false});
            cap.erase(cap.begin() + static_cast<std::ptrdiff_t>(gone));
            id.erase(id.begin() + static_cast<std::ptrdiff_t>(gone));
        }

        caps.push_back(cap);
        ids.push_back(id);
    }

    std::vector<std::string> labels(cfg.horizon);
    for (std::size_t t = 0; t < cfg.horizon; ++t) labels[t] = sim_date(t);
    return MarketPath::from_panel(caps, ids, std::move(delistings), std::move(labels));
}

} // namespace fgp
