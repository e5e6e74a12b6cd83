// Command-line front end: simulate markets, run decompositions, write CSV
// series and SVG charts.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fgp.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string input;
    bool synthetic = false;
    std::vector<std::string> families;
    std::string baseline = "total_market";
    std::size_t top_m = 0;
    std::string dlret_policy = "as-given";
    bool plot = false;
    std::string out = ".";

    fgp::SimConfig sim;
    std::string model = "birth-death";
    std::string entrant = "median";
    std::string death_dlret = "missing";
};

struct RunResult {
    std::string family;
    std::string error;
};

std::string slug(std::string s) {
    for (char& c : s)
        if (c == ':' || c == '=' || c == ',' || c == '/' || c == ' ') c = '_';
    return s;
}

fgp::SimConfig sim_config(const Options& o) {
    fgp::SimConfig cfg = o.sim;
    cfg.model = fgp::parse_sim_model(o.model);
    if (o.entrant == "median") cfg.entrant = fgp::EntrantCap::median;
    else if (o.entrant == "mean") cfg.entrant = fgp::EntrantCap::mean;
    else if (o.entrant == "smallest") cfg.entrant = fgp::EntrantCap::smallest;
    else throw fgp::Error(fgp::ErrorKind::BadParameter, "unknown entrant rule '" + o.entrant + "'");
    if (o.death_dlret == "missing") cfg.death_dlret = fgp::DeathDlret::missing;
    else if (o.death_dlret == "zero") cfg.death_dlret = fgp::DeathDlret::zero;
    else throw fgp::Error(fgp::ErrorKind::BadParameter, "unknown death dlret '" + o.death_dlret + "'");
    return cfg;
}

fgp::MarketPath load_market(const Options& o) {
    const auto policy = fgp::parse_dlret_policy(o.dlret_policy);
    if (o.synthetic) return fgp::apply_policy(fgp::simulate(sim_config(o)), policy);
    if (o.input.empty()) throw fgp::Error(fgp::ErrorKind::InvalidArgument, "need --input or --simulate");
    return fgp::load_csv(o.input, policy);
}

/// Runs one family against the requested baseline.
fgp::DecompositionSeries decompose(const fgp::MarketPath& path, const std::string& spec, const Options& o) {
    const fgp::FamilySchedule fam = fgp::parse_family(spec);
    const auto baseline = fgp::parse_baseline(o.baseline);
    if (baseline == fgp::Baseline::top_m) {
        if (o.top_m == 0) throw fgp::Error(fgp::ErrorKind::BadParameter, "baseline top_m needs --m");
        return fgp::open_market_decomposition(path, fam, o.top_m, true);
    }
    fgp::DecompositionSeries s = fam.base().flags().rank_only
                                     ? fgp::ranked_multiplicative_decomposition(path, fam, true)
                                     : fgp::multiplicative_decomposition(path, fam, true);
    s.baseline = baseline;
    if (baseline == fgp::Baseline::sfm) {
        for (std::size_t t = 0; t < s.size(); ++t) {
            s.c_tm[t] = 0.0;
            s.log_v[t] = s.log_u[t];
        }
    }
    return s;
}

bool has_unobserved_dlret(const fgp::MarketPath& path) {
    for (const auto& e : path.delistings())
        if (!e.dlret || e.imputed) return true;
    return false;
}

void run_one(const fgp::MarketPath& path, const std::string& spec, const Options& o) {
    const auto series = decompose(path, spec, o);
    const fs::path base = fs::path(o.out) / slug(spec);
    fgp::write_series_csv(base.string() + ".csv", series);
    if (!o.plot) return;
    const std::string title = spec + " vs " + o.baseline;
    if (has_unobserved_dlret(path)) {
        const auto cons = decompose(fgp::apply_policy(path, fgp::DlretPolicy::conservative), spec, o);
        const auto opt = decompose(fgp::apply_policy(path, fgp::DlretPolicy::optimistic), spec, o);
        fgp::write_svg_plot(base.string() + ".svg", title, cons, &opt);
    } else {
        fgp::write_svg_plot(base.string() + ".svg", title, series);
    }
}

int cmd_simulate(const Options& o) {
    const auto path = fgp::simulate(sim_config(o));
    fs::create_directories(o.out);
    const fs::path file = fs::path(o.out) / "panel.csv";
    fgp::write_panel_csv(file.string(), path);
    std::cout << file.string() << ": " << path.num_days() << " days, " << path.epochs().size() << " epochs, "
              << path.delistings().size() << " delistings\n";
    return 0;
}

int cmd_backtest(const Options& o) {
    if (o.families.empty()) throw fgp::Error(fgp::ErrorKind::InvalidArgument, "need at least one --family");
    const auto path = load_market(o);
    fs::create_directories(o.out);

    std::vector<std::future<void>> jobs;
    for (const auto& spec : o.families)
        jobs.push_back(std::async(std::launch::async, [&path, &o, spec] { run_one(path, spec, o); }));

    std::vector<RunResult> failures;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        try {
            jobs[i].get();
            std::cout << "ok      " << o.families[i] << '\n';
        } catch (const std::exception& e) {
            failures.push_back({o.families[i], e.what()});
        }
    }
    if (failures.empty()) return 0;
    std::cerr << "family                          error\n";
    for (const auto& f : failures) {
        std::string name = f.family;
        if (name.size() < 32) name.resize(32, ' ');
        std::cerr << name << f.error << '\n';
    }
    return 1;
}

int cmd_decompose(const Options& o) {
    if (o.families.size() != 1) throw fgp::Error(fgp::ErrorKind::InvalidArgument, "decompose takes exactly one --family");
    const auto path = load_market(o);
    fgp::write_series_csv(std::cout, decompose(path, o.families.front(), o));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functionally generated portfolios in markets of changing dimension"};
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--input", o.input, "panel CSV (date,stock_id,cap[,dlret])");
    app.add_flag("--simulate", o.synthetic, "use a simulated market instead of --input");
    app.add_option("--family", o.families, "family spec such as diversity:p=0.5 (repeatable)");
    app.add_option("--baseline", o.baseline, "total_market, sfm or top_m")
        ->check(CLI::IsMember({"total_market", "sfm", "top_m"}));
    app.add_option("--m", o.top_m, "size of the open market for --baseline top_m");
    app.add_option("--dlret-policy", o.dlret_policy, "conservative, optimistic or as-given")
        ->check(CLI::IsMember({"conservative", "optimistic", "as-given"}));
    app.add_flag("--plot", o.plot, "also write an SVG chart per family");
    app.add_option("--out", o.out, "output directory")->envname("FGP_OUT_DIR");

    app.add_option("--seed", o.sim.seed, "simulation seed");
    app.add_option("--model", o.model, "birth-death, split-merge or combined");
    app.add_option("--horizon", o.sim.horizon, "number of simulated days");
    app.add_option("--n0", o.sim.n0, "initial number of stocks");
    app.add_option("--birth-rate", o.sim.birth_rate, "entry rate per day");
    app.add_option("--death-rate", o.sim.death_rate, "exit rate per stock and day");
    app.add_option("--split-threshold", o.sim.split_threshold, "largest weight that triggers a split");
    app.add_option("--split-low", o.sim.split_low, "lower bound of the parent's share after a split");
    app.add_option("--split-high", o.sim.split_high, "upper bound of the parent's share after a split");
    app.add_option("--merge-rate", o.sim.merge_rate, "merger rate per day");
    app.add_option("--volatility", o.sim.volatility, "daily log-return volatility");
    app.add_option("--drift", o.sim.drift, "daily log-return drift");
    app.add_option("--init-log-sd", o.sim.init_log_sd, "spread of initial log caps");
    app.add_option("--entrant", o.entrant, "entrant cap rule: median, mean or smallest");
    app.add_option("--death-dlret", o.death_dlret, "dlret recorded at deaths: missing or zero");

    auto* simulate = app.add_subcommand("simulate", "write a simulated panel CSV to <out>/panel.csv");
    auto* backtest = app.add_subcommand("backtest", "write one series CSV (and chart) per family");
    auto* decompose_cmd = app.add_subcommand("decompose", "print one family's series CSV to stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(o);
        if (backtest->parsed()) return cmd_backtest(o);
        if (decompose_cmd->parsed()) return cmd_decompose(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
