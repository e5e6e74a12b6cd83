#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fgp/error.hpp"
#include "fgp/format.hpp"

namespace fgp {

struct FamilyFlags {
    bool symmetric = false;
    bool concave = false;
    bool balanced = false;
    /// Only meaningful on a vector sorted in descending order.
    bool rank_only = false;
};

/// A generating function applied to every dimension n. `value_gradient`
/// returns G(x) and writes the n partial derivatives into `grad`.
template <class F>
concept GeneratingFunction = requires(const F f, std::span<const double> x, std::span<double> grad) {
    { f.value(x) } -> std::convertible_to<double>;
    { f.value_gradient(x, grad) } -> std::convertible_to<double>;
    { f.flags() } -> std::same_as<FamilyFlags>;
    { f.spec() } -> std::convertible_to<std::string>;
    { f.support(std::size_t{}) } -> std::convertible_to<std::size_t>;
};

namespace detail {

inline void require_interior(std::span<const double> x) {
    if (x.empty()) throw Error(ErrorKind::DimensionMismatch, "generating function evaluated on an empty vector");
    for (double xi : x)
        if (!(xi > 0.0)) throw Error(ErrorKind::InvalidArgument, "generating function needs strictly positive weights");
}

// (sum_{i<m} x_i^p)^{1/p} and its gradient, with zero derivatives beyond m.
inline double power_mean_value_gradient(std::span<const double> x, double p, std::size_t m, std::span<double> grad) {
    const std::size_t top = std::min(m, x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < top; ++i) s += std::pow(x[i], p);
    const double g = std::pow(s, 1.0 / p);
    if (!grad.empty()) {
        const double scale = std::pow(s, 1.0 / p - 1.0);
        for (std::size_t i = 0; i < top; ++i) grad[i] = std::pow(x[i], p - 1.0) * scale;
        for (std::size_t i = top; i < x.size(); ++i) grad[i] = 0.0;
    }
    return g;
}

} // namespace detail

/// G(x) = sum_i x_i. Generates the self-financing market portfolio.
struct MarketFamily {
    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        detail::require_interior(x);
        double s = 0.0;
        for (double xi : x) s += xi;
        std::fill(grad.begin(), grad.end(), 1.0);
        return s;
    }
    double value(std::span<const double> x) const { return value_gradient(x, {}); }
    FamilyFlags flags() const { return {true, true, true, false}; }
    std::string spec() const { return "market"; }
    std::size_t support(std::size_t n) const { return n; }
};

/// G(x) = (sum_i x_i^p)^{1/p}, p in (0, 1].
struct DiversityFamily {
    double p = 0.5;

    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        detail::require_interior(x);
        return detail::power_mean_value_gradient(x, p, x.size(), grad);
    }
    double value(std::span<const double> x) const { return value_gradient(x, {}); }
    FamilyFlags flags() const { return {true, true, true, false}; }
    std::string spec() const { return "diversity:p=" + format_double(p); }
    std::size_t support(std::size_t n) const { return n; }
};

/// G(x) = prod_i x_i^{1/n}; generates the equal-weighted portfolio.
struct EqualFamily {
    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        detail::require_interior(x);
        const double n = static_cast<double>(x.size());
        double s = 0.0;
        for (double xi : x) s += std::log(xi);
        const double g = std::exp(s / n);
        if (!grad.empty())
            for (std::size_t i = 0; i < x.size(); ++i) grad[i] = g / (n * x[i]);
        return g;
    }
    double value(std::span<const double> x) const { return value_gradient(x, {}); }
    FamilyFlags flags() const { return {true, true, true, false}; }
    std::string spec() const { return "equal"; }
    std::size_t support(std::size_t n) const { return n; }
};

/// Shannon entropy G(x) = -sum_i x_i log x_i. Not balanced.
struct EntropyFamily {
    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        detail::require_interior(x);
        double h = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double lx = std::log(x[i]);
            h -= x[i] * lx;
            if (!grad.empty()) grad[i] = -lx - 1.0;
        }
        return h;
    }
    double value(std::span<const double> x) const { return value_gradient(x, {}); }
    FamilyFlags flags() const { return {true, true, false, false}; }
    std::string spec() const { return "entropy"; }
    std::size_t support(std::size_t n) const { return n; }
};

/// Sum of the m largest weights; expects x sorted in descending order.
struct TopMSumFamily {
    std::size_t m = 1;

    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        detail::require_interior(x);
        const std::size_t top = std::min(m, x.size());
        double s = 0.0;
        for (std::size_t i = 0; i < top; ++i) s += x[i];
        if (!grad.empty())
            for (std::size_t i = 0; i < x.size(); ++i) grad[i] = i < top ? 1.0 : 0.0;
        return s;
    }
    double value(std::span<const double> x) const { return value_gradient(x, {}); }
    FamilyFlags flags() const { return {false, true, true, true}; }
    std::string spec() const { return "top_m:m=" + std::to_string(m); }
    std::size_t support(std::size_t n) const { return std::min(m, n); }
};

/// Diversity function of the m largest weights; expects sorted input.
struct DiversityTopMFamily {
    double p = 0.5;
    std::size_t m = 1;

    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        detail::require_interior(x);
        return detail::power_mean_value_gradient(x, p, m, grad);
    }
    double value(std::span<const double> x) const { return value_gradient(x, {}); }
    FamilyFlags flags() const { return {false, false, true, true}; }
    std::string spec() const { return "diversity_top_m:p=" + format_double(p) + ",m=" + std::to_string(m); }
    std::size_t support(std::size_t n) const { return std::min(m, n); }
};

static_assert(GeneratingFunction<MarketFamily>);
static_assert(GeneratingFunction<DiversityFamily>);
static_assert(GeneratingFunction<EqualFamily>);
static_assert(GeneratingFunction<EntropyFamily>);
static_assert(GeneratingFunction<TopMSumFamily>);
static_assert(GeneratingFunction<DiversityTopMFamily>);

/// Type-erased handle over the shipped families. Immutable value type.
class GeneratingFamily {
public:
    using Variant = std::variant<MarketFamily, DiversityFamily, EqualFamily, EntropyFamily, TopMSumFamily,
                                 DiversityTopMFamily>;

    template <GeneratingFunction F>
        requires(!std::same_as<std::remove_cvref_t<F>, GeneratingFamily>)
    GeneratingFamily(F f) : impl_(std::move(f)) {}

    double value(std::span<const double> x) const {
        return std::visit([&](const auto& f) { return f.value(x); }, impl_);
    }
    double value_gradient(std::span<const double> x, std::span<double> grad) const {
        if (!grad.empty() && grad.size() != x.size())
            throw Error(ErrorKind::DimensionMismatch, "gradient buffer has the wrong size");
        return std::visit([&](const auto& f) { return f.value_gradient(x, grad); }, impl_);
    }
    std::vector<double> gradient(std::span<const double> x) const {
        std::vector<double> g(x.size());
        value_gradient(x, g);
        return g;
    }
    FamilyFlags flags() const {
        return std::visit([](const auto& f) { return f.flags(); }, impl_);
    }
    std::string spec() const {
        return std::visit([](const auto& f) { return f.spec(); }, impl_);
    }
    /// Number of leading coordinates with possibly nonzero derivative in dimension n.
    std::size_t support(std::size_t n) const {
        return std::visit([n](const auto& f) { return f.support(n); }, impl_);
    }
    const Variant& variant() const noexcept { return impl_; }

private:
    Variant impl_;
};

namespace family {

inline GeneratingFamily market() { return MarketFamily{}; }

inline GeneratingFamily diversity(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::BadParameter, "diversity needs p in (0, 1]");
    return DiversityFamily{p};
}

inline GeneratingFamily equal() { return EqualFamily{}; }
inline GeneratingFamily entropy() { return EntropyFamily{}; }

inline GeneratingFamily top_m_sum(std::size_t m) {
    if (m < 1) throw Error(ErrorKind::BadParameter, "top_m needs m >= 1");
    return TopMSumFamily{m};
}

inline GeneratingFamily diversity_top_m(double p, std::size_t m) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::BadParameter, "diversity_top_m needs p in (0, 1]");
    if (m < 1) throw Error(ErrorKind::BadParameter, "diversity_top_m needs m >= 1");
    return DiversityTopMFamily{p, m};
}

} // namespace family

/// Parses `name[:key=value[,key=value]]`, e.g. `diversity:p=0.25` or `top_m:m=100`.
inline GeneratingFamily parse_family(std::string_view text) {
    const auto colon = text.find(':');
    const std::string name(text.substr(0, colon));
    std::map<std::string, std::string, std::less<>> params;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0)
                throw Error(ErrorKind::BadParameter, "expected key=value in family spec '" + std::string(text) + "'");
            params.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
    }

    auto take_double = [&](std::string_view key) {
        auto it = params.find(key);
        if (it == params.end()) throw Error(ErrorKind::BadParameter, "family '" + name + "' needs " + std::string(key));
        double v = 0.0;
        if (!parse_double(it->second, v))
            throw Error(ErrorKind::BadParameter, "not a number: '" + it->second + "'");
        params.erase(it);
        return v;
    };
    auto take_size = [&](std::string_view key) {
        auto it = params.find(key);
        if (it == params.end()) throw Error(ErrorKind::BadParameter, "family '" + name + "' needs " + std::string(key));
        std::size_t v = 0;
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size())
            throw Error(ErrorKind::BadParameter, "not a count: '" + s + "'");
        params.erase(it);
        return v;
    };

    GeneratingFamily fam = family::market();
    if (name == "market") {
        fam = family::market();
    } else if (name == "diversity") {
        fam = family::diversity(take_double("p"));
    } else if (name == "equal") {
        fam = family::equal();
    } else if (name == "entropy") {
        fam = family::entropy();
    } else if (name == "top_m" || name == "top_m_sum") {
        fam = family::top_m_sum(take_size("m"));
    } else if (name == "diversity_top_m") {
        const double p = take_double("p");
        fam = family::diversity_top_m(p, take_size("m"));
    } else {
        throw Error(ErrorKind::BadParameter, "unknown family '" + name + "'");
    }
    if (!params.empty())
        throw Error(ErrorKind::BadParameter, "unexpected parameter '" + params.begin()->first + "' for family '" + name + "'");
    return fam;
}

/// d_B(x, y) = G(x) - G(y) - <grad G(y), x - y>; nonpositive for concave G.
inline double bregman(const GeneratingFamily& fam, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "bregman needs equal dimensions");
    std::vector<double> grad(y.size());
    const double gy = fam.value_gradient(y, grad);
    const double gx = fam.value(x);
    double lin = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) lin += grad[i] * (x[i] - y[i]);
    return gx - gy - lin;
}

/// sum_i x_i dG/dx_i - G(x); zero for balanced families.
inline double balance_residual(const GeneratingFamily& fam, std::span<const double> x) {
    std::vector<double> grad(x.size());
    const double g = fam.value_gradient(x, grad);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * grad[i];
    return s - g;
}

/// A family per epoch: one default plus optional overrides keyed by the
/// 1-based epoch number.
class FamilySchedule {
public:
    FamilySchedule(GeneratingFamily base) : base_(std::move(base)) {}

    FamilySchedule& set(std::size_t epoch_k, GeneratingFamily fam) {
        overrides_.insert_or_assign(epoch_k, std::move(fam));
        return *this;
    }
    const GeneratingFamily& for_epoch(std::size_t epoch_k) const {
        auto it = overrides_.find(epoch_k);
        return it == overrides_.end() ? base_ : it->second;
    }
    const GeneratingFamily& base() const noexcept { return base_; }

    template <class Fn>
    void for_each(Fn&& fn) const {
        fn(base_);
        for (const auto& [k, f] : overrides_) fn(f);
    }

private:
    GeneratingFamily base_;
    std::map<std::size_t, GeneratingFamily> overrides_;
};

} // namespace fgp
