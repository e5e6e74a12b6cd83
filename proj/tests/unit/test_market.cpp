#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fgp/market.hpp"
#include "fgp/simulator.hpp"

using fgp::ErrorKind;
using fgp::MarketPath;

namespace {

MarketPath p0() { return MarketPath::from_panel({{2, 2}, {3, 1}, {3, 1, 1}, {4, 2, 2}}); }

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const fgp::Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

} // namespace

TEST(MarketPath, DetectsSingleReset) {
    const auto p = p0();
    EXPECT_EQ(p.resets(), (std::vector<std::size_t>{0, 2}));
    ASSERT_EQ(p.epochs().size(), 2u);
    EXPECT_EQ(p.epochs()[0], (fgp::Epoch{1, 2, 0, 1}));
    EXPECT_EQ(p.epochs()[1], (fgp::Epoch{2, 3, 2, 3}));
    EXPECT_TRUE(p.is_reset(2));
    EXPECT_FALSE(p.is_reset(1));
    EXPECT_FALSE(p.is_reset(0));
}

TEST(MarketPath, ConstantDimensionHasOneEpoch) {
    const auto p = MarketPath::from_panel({{1}, {1}});
    EXPECT_EQ(p.epochs().size(), 1u);
    EXPECT_EQ(p.epochs()[0], (fgp::Epoch{1, 1, 0, 1}));
}

TEST(MarketPath, RejectsBadInput) {
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {0, 2}}); }), ErrorKind::NonPositiveCap);
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {-1, 2}}); }), ErrorKind::NonPositiveCap);
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {NAN, 2}}); }), ErrorKind::NonPositiveCap);
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {}}); }), ErrorKind::EmptyDay);
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}}); }), ErrorKind::InvalidArgument);
}

TEST(MarketPath, Weights) {
    const auto p = MarketPath::from_panel({{3, 1}, {2, 2}, {3, 1, 1}});
    EXPECT_EQ(p.weights_at(0), (fgp::WeightVector{0.75, 0.25}));
    EXPECT_EQ(p.weights_at(1), (fgp::WeightVector{0.5, 0.5}));
    const auto w = p.weights_at(2);
    EXPECT_NEAR(w[0], 0.6, 1e-15);
    EXPECT_NEAR(w[1], 0.2, 1e-15);
    EXPECT_NEAR(w[2], 0.2, 1e-15);
}

TEST(MarketPath, WeightsOnSimplex) {
    fgp::SimConfig cfg;
    cfg.n0 = 40;
    cfg.horizon = 300;
    cfg.birth_rate = 0.1;
    cfg.death_rate = 0.003;
    cfg.seed = 5;
    const auto p = fgp::simulate(cfg);
    for (std::size_t t = 0; t < p.num_days(); ++t) {
        const auto w = p.weights_at(t);
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        EXPECT_NEAR(s, 1.0, 1e-12);
        for (double x : w) {
            EXPECT_GT(x, 0.0);
            EXPECT_LE(x, 1.0);
        }
    }
}

TEST(MarketPath, Sigma) {
    const auto p = p0();
    EXPECT_DOUBLE_EQ(p.sigma(1), 1.0);
    EXPECT_DOUBLE_EQ(p.sigma(2), 0.8);
    EXPECT_DOUBLE_EQ(p.sigma_product(2, 1), 1.0);
    EXPECT_EQ(kind_of([&] { p.sigma(3); }), ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([&] { p.sigma(0); }), ErrorKind::InvalidArgument);

    const auto one = MarketPath::from_panel({{1, 2}, {2, 2}, {3, 1}});
    EXPECT_DOUBLE_EQ(one.sigma_product(1, 1), 1.0);

    // totals 4 -> 5 at the first jump, 8 -> 6 at the second
    const auto two = MarketPath::from_panel({{2, 2}, {3, 1, 1}, {4, 4, 0.5}, {3, 3}});
    ASSERT_EQ(two.epochs().size(), 3u);
    EXPECT_NEAR(two.sigma_product(1, 3), (4.0 / 5.0) * (8.5 / 6.0), 1e-15);
    const auto two_b = MarketPath::from_panel({{2, 2}, {3, 1, 1}, {4, 2, 2}, {3, 3}});
    EXPECT_NEAR(two_b.sigma_product(2, 3), 0.8 * (8.0 / 6.0), 1e-15);
    EXPECT_NEAR(two_b.sigma_product(2, 3), 1.0667, 1e-4);
}

TEST(MarketPath, SigmaTelescopes) {
    fgp::SimConfig cfg;
    cfg.n0 = 10;
    cfg.horizon = 400;
    cfg.birth_rate = 0.05;
    cfg.death_rate = 0.005;
    cfg.seed = 9;
    const auto p = fgp::simulate(cfg);
    double direct = 0.0;
    for (std::size_t t = 1; t < p.num_days(); ++t)
        if (p.is_reset(t)) direct += std::log(p.total(t - 1)) - std::log(p.total(t));
    double via_sigma = 0.0;
    for (std::size_t k = 1; k <= p.epochs().size(); ++k) via_sigma += std::log(p.sigma(k));
    EXPECT_NEAR(direct, via_sigma, 1e-12);
    EXPECT_NEAR(std::log(p.sigma_product(1, p.epochs().size())), via_sigma, 1e-10);
}

TEST(MarketPath, RebuildIsIdempotent) {
    const auto p = p0();
    const auto q = MarketPath::from_panel(p.caps_by_day());
    EXPECT_EQ(p.resets(), q.resets());
    EXPECT_EQ(p.epochs(), q.epochs());
    EXPECT_TRUE(p == q);
}

TEST(MarketPath, IdChangeWithSameDimensionIsAReset) {
    const auto p = MarketPath::from_panel({{1, 2}, {1, 2}, {1, 3}}, {{"A", "B"}, {"A", "B"}, {"A", "C"}},
                                          {{2, "B", 1, -0.5, false}});
    EXPECT_EQ(p.resets(), (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(p.ids(2)[1], "C");
    EXPECT_EQ(p.delistings_on(2).size(), 1u);
    EXPECT_TRUE(p.delistings_on(1).empty());
}

TEST(MarketPath, DelistingsMustSitOnResets) {
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {1, 2}, {1}}, {{1, "x", 0, std::nullopt, false}}); }),
              ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {1, 2}, {1}}, {{2, "x", 5, std::nullopt, false}}); }),
              ErrorKind::InvalidArgument);
    EXPECT_EQ(kind_of([] { MarketPath::from_panel({{1, 2}, {1, 2}, {1}}, {{2, "x", 1, -1.5, false}}); }),
              ErrorKind::InvalidArgument);
    EXPECT_NO_THROW(MarketPath::from_panel({{1, 2}, {1, 2}, {1}}, {{2, "x", 1, -1.0, false}}));
}
