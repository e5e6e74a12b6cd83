#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fgp/error.hpp"

namespace fgp {

/// Market weights or portfolio weights over the stocks of one epoch.
using WeightVector = std::vector<double>;

/// A stock that is present on `day - 1` and gone on `day`.
///
/// `index` is the stock's position in the capitalization vector of
/// `day - 1`. A missing `dlret` means the position is credited at its last
/// traded value; `imputed` marks a value that was filled in by a policy
/// rather than observed.
struct DelistingEvent {
    std::size_t day = 0;
    std::string stock_id;
    std::size_t index = 0;
    std::optional<double> dlret;
    bool imputed = false;

    friend bool operator==(const DelistingEvent&, const DelistingEvent&) = default;
};

/// A maximal run of days with constant dimension (and constant constituents).
struct Epoch {
    std::size_t k = 0;      ///< 1-based epoch number
    std::size_t n = 0;      ///< dimension
    std::size_t first = 0;  ///< first day of the epoch (a reset day for k >= 2)
    std::size_t last = 0;   ///< last day of the epoch

    friend bool operator==(const Epoch&, const Epoch&) = default;
};

/// Discrete-time capitalization history of a market whose number of stocks
/// changes over time. Days are addressed by position 0..num_days()-1.
///
/// Epoch k occupies days [tau_{k-1}, tau_k - 1]; the jump step of reset k is
/// the day pair (tau_k - 1, tau_k). Immutable once built.
class MarketPath {
public:
    /// Builds a path from per-day capitalization vectors. Resets are the days
    /// whose vector length differs from the previous day.
    static MarketPath from_panel(const std::vector<std::vector<double>>& caps,
                                 std::vector<DelistingEvent> delistings = {}) {
        return build(caps, {}, std::move(delistings), {});
    }

    /// Builds a path with explicit stock identities. A day starts a new epoch
    /// whenever its id sequence differs from the previous day's, which also
    /// covers same-day entry and exit with unchanged dimension.
    static MarketPath from_panel(const std::vector<std::vector<double>>& caps,
                                 const std::vector<std::vector<std::string>>& ids,
                                 std::vector<DelistingEvent> delistings = {},
                                 std::vector<std::string> labels = {}) {
        if (ids.size() != caps.size())
            throw Error(ErrorKind::DimensionMismatch, "ids and caps disagree on the number of days");
        return build(caps, ids, std::move(delistings), std::move(labels));
    }

    std::size_t num_days() const noexcept { return offsets_.size() - 1; }

    std::span<const double> caps(std::size_t day) const {
        return {flat_caps_.data() + offsets_[day], offsets_[day + 1] - offsets_[day]};
    }
    std::size_t dimension(std::size_t day) const { return offsets_[day + 1] - offsets_[day]; }
    double total(std::size_t day) const { return totals_[day]; }

    /// Market weights on `day`, written into `out` (size must equal the dimension).
    void weights_into(std::size_t day, std::span<double> out) const {
        const auto c = caps(day);
        const double t = totals_[day];
        for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i] / t;
    }

    WeightVector weights_at(std::size_t day) const {
        check_day(day);
        WeightVector w(dimension(day));
        weights_into(day, w);
        return w;
    }

    /// Reset days including tau_0 = 0.
    const std::vector<std::size_t>& resets() const noexcept { return resets_; }
    bool is_reset(std::size_t day) const { return day > 0 && epoch_of_day_[day] != epoch_of_day_[day - 1]; }

    const std::vector<Epoch>& epochs() const noexcept { return epochs_; }
    /// Zero-based position in epochs() of the epoch containing `day`.
    std::size_t epoch_index(std::size_t day) const { return epoch_of_day_[day]; }
    const Epoch& epoch_of(std::size_t day) const { return epochs_[epoch_of_day_[day]]; }

    /// Total capitalization just before reset k divided by the total on the
    /// reset day itself. Epoch 1 starts at day 0 without a jump, so sigma(1) = 1.
    double sigma(std::size_t k) const {
        if (k < 1 || k > epochs_.size())
            throw Error(ErrorKind::InvalidArgument, "epoch number out of range: " + std::to_string(k));
        if (k == 1) return 1.0;
        const std::size_t tau = epochs_[k - 1].first;
        return totals_[tau - 1] / totals_[tau];
    }

    /// Product of sigma(l) for l = i..k; the empty product (i > k) is 1.
    double sigma_product(std::size_t i, std::size_t k) const {
        double p = 1.0;
        for (std::size_t l = std::max<std::size_t>(i, 1); l <= k; ++l) p *= sigma(l);
        return p;
    }

    bool has_ids() const noexcept { return !epoch_ids_.empty(); }
    /// Stock ids of the epoch containing `day`; empty when the path carries no ids.
    std::span<const std::string> ids(std::size_t day) const {
        if (epoch_ids_.empty()) return {};
        return epoch_ids_[epoch_of_day_[day]];
    }

    /// Optional per-day labels (ISO dates when loaded from a panel file).
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    const std::vector<DelistingEvent>& delistings() const noexcept { return delistings_; }
    std::span<const DelistingEvent> delistings_on(std::size_t day) const {
        auto lo = std::lower_bound(delistings_.begin(), delistings_.end(), day,
                                   [](const DelistingEvent& e, std::size_t d) { return e.day < d; });
        auto hi = lo;
        while (hi != delistings_.end() && hi->day == day) ++hi;
        return {lo, hi};
    }

    /// Same market with a different set of delisting records.
    MarketPath with_delistings(std::vector<DelistingEvent> delistings) const {
        MarketPath copy = *this;
        copy.delistings_ = std::move(delistings);
        copy.validate_delistings();
        return copy;
    }

    /// Per-day capitalization vectors, the inverse of from_panel.
    std::vector<std::vector<double>> caps_by_day() const {
        std::vector<std::vector<double>> out;
        out.reserve(num_days());
        for (std::size_t d = 0; d < num_days(); ++d) {
            auto c = caps(d);
            out.emplace_back(c.begin(), c.end());
        }
        return out;
    }

    friend bool operator==(const MarketPath&, const MarketPath&) = default;

private:
    static MarketPath build(const std::vector<std::vector<double>>& caps,
                            const std::vector<std::vector<std::string>>& ids,
                            std::vector<DelistingEvent> delistings,
                            std::vector<std::string> labels) {
        if (caps.size() < 2)
            throw Error(ErrorKind::InvalidArgument, "a market path needs at least two days");
        if (!labels.empty() && labels.size() != caps.size())
            throw Error(ErrorKind::DimensionMismatch, "labels and caps disagree on the number of days");

        MarketPath p;
        p.offsets_.reserve(caps.size() + 1);
        p.offsets_.push_back(0);
        p.totals_.reserve(caps.size());
        for (std::size_t d = 0; d < caps.size(); ++d) {
            const auto& row = caps[d];
            if (row.empty())
                throw Error(ErrorKind::EmptyDay, "day " + std::to_string(d) + " has no stocks");
            if (!ids.empty() && ids[d].size() != row.size())
                throw Error(ErrorKind::DimensionMismatch, "ids and caps disagree on day " + std::to_string(d));
            double total = 0.0;
            for (std::size_t i = 0; i < row.size(); ++i) {
                // written as !(x > 0) so that NaN is rejected too
                if (!(row[i] > 0.0) || !std::isfinite(row[i]))
                    throw Error(ErrorKind::NonPositiveCap,
                                "day " + std::to_string(d) + ", stock " + std::to_string(i));
                total += row[i];
            }
            p.flat_caps_.insert(p.flat_caps_.end(), row.begin(), row.end());
            p.offsets_.push_back(p.flat_caps_.size());
            p.totals_.push_back(total);
        }

        p.epoch_of_day_.assign(caps.size(), 0);
        p.resets_.push_back(0);
        p.epochs_.push_back(Epoch{1, caps[0].size(), 0, 0});
        if (!ids.empty()) p.epoch_ids_.push_back(ids[0]);
        for (std::size_t d = 1; d < caps.size(); ++d) {
            const bool jump = ids.empty() ? caps[d].size() != caps[d - 1].size() : ids[d] != ids[d - 1];
            if (jump) {
                p.epochs_.back().last = d - 1;
                p.resets_.push_back(d);
                p.epochs_.push_back(Epoch{p.epochs_.size() + 1, caps[d].size(), d, d});
                if (!ids.empty()) p.epoch_ids_.push_back(ids[d]);
            }
            p.epoch_of_day_[d] = p.epochs_.size() - 1;
        }
        p.epochs_.back().last = caps.size() - 1;

        p.labels_ = std::move(labels);
        std::stable_sort(delistings.begin(), delistings.end(),
                         [](const DelistingEvent& a, const DelistingEvent& b) { return a.day < b.day; });
        p.delistings_ = std::move(delistings);
        p.validate_delistings();
        return p;
    }

    void check_day(std::size_t day) const {
        if (day >= num_days())
            throw Error(ErrorKind::InvalidArgument, "day out of range: " + std::to_string(day));
    }

    void validate_delistings() {
        std::stable_sort(delistings_.begin(), delistings_.end(),
                         [](const DelistingEvent& a, const DelistingEvent& b) { return a.day < b.day; });
        for (const auto& e : delistings_) {
            if (e.day == 0 || e.day >= num_days() || !is_reset(e.day))
                throw Error(ErrorKind::InvalidArgument,
                            "delisting of '" + e.stock_id + "' is not on a reset day");
            if (e.index >= dimension(e.day - 1))
                throw Error(ErrorKind::InvalidArgument, "delisting index out of range for '" + e.stock_id + "'");
            if (e.dlret && !(*e.dlret >= -1.0))
                throw Error(ErrorKind::InvalidArgument, "delisting return below -1 for '" + e.stock_id + "'");
            if (has_ids()) {
                auto before = ids(e.day - 1);
                auto after = ids(e.day);
                if (before[e.index] != e.stock_id)
                    throw Error(ErrorKind::InvalidArgument, "delisting id mismatch for '" + e.stock_id + "'");
                if (std::find(after.begin(), after.end(), e.stock_id) != after.end())
                    throw Error(ErrorKind::InvalidArgument, "delisted stock '" + e.stock_id + "' is still listed");
            }
        }
    }

    std::vector<double> flat_caps_;
    std::vector<std::size_t> offsets_;
    std::vector<double> totals_;
    std::vector<std::size_t> resets_;
    std::vector<Epoch> epochs_;
    std::vector<std::size_t> epoch_of_day_;
    std::vector<std::vector<std::string>> epoch_ids_;
    std::vector<std::string> labels_;
    std::vector<DelistingEvent> delistings_;
};

} // namespace fgp
