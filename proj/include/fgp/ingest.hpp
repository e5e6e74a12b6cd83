#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fgp/error.hpp"
#include "fgp/format.hpp"
#include "fgp/market.hpp"
#include "fgp/simulator.hpp"

namespace fgp {

/// How missing delisting returns are filled in.
enum class DlretPolicy { conservative, optimistic, as_given };

inline std::string_view to_string(DlretPolicy p) {
    switch (p) {
    case DlretPolicy::conservative: return "conservative";
    case DlretPolicy::optimistic: return "optimistic";
    case DlretPolicy::as_given: return "as-given";
    }
    return "as-given";
}

inline DlretPolicy parse_dlret_policy(std::string_view s) {
    if (s == "conservative") return DlretPolicy::conservative;
    if (s == "optimistic") return DlretPolicy::optimistic;
    if (s == "as-given" || s == "as_given") return DlretPolicy::as_given;
    throw Error(ErrorKind::BadParameter, "unknown dlret policy '" + std::string(s) + "'");
}

/// Resolves missing (or previously imputed) delisting returns under `policy`:
/// conservative uses -1, optimistic 0, as-given leaves them missing.
inline std::vector<DelistingEvent> apply_policy(std::vector<DelistingEvent> events, DlretPolicy policy) {
    for (auto& e : events) {
        if (e.dlret && !e.imputed) continue;
        switch (policy) {
        case DlretPolicy::conservative: e.dlret = -1.0; e.imputed = true; break;
        case DlretPolicy::optimistic: e.dlret = 0.0; e.imputed = true; break;
        case DlretPolicy::as_given: e.dlret.reset(); e.imputed = false; break;
        }
    }
    return events;
}

inline MarketPath apply_policy(const MarketPath& path, DlretPolicy policy) {
    return path.with_delistings(apply_policy(path.delistings(), policy));
}

namespace detail {

struct PanelCell {
    double cap = 0.0;
    std::optional<double> dlret;
};

[[noreturn]] inline void malformed(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line) + ": " + what);
}

} // namespace detail

/// Reads a panel with header `date,stock_id,cap[,dlret]`.
///
/// Days are the distinct dates in sorted order. Each day's vector lists the
/// stocks present that day in order of their first appearance. A stock that
/// is present on one day and absent the next produces a delisting on the
/// later day; its dlret, if any, must sit on the stock's final row.
inline MarketPath load_csv(std::istream& in, DlretPolicy policy = DlretPolicy::as_given) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw Error(ErrorKind::MalformedRow, "empty panel");
    const auto header = split_csv(line);
    std::vector<std::string_view> cols;
    for (auto h : header) cols.push_back(trim(h));
    const bool has_dlret = cols.size() == 4 && cols[3] == "dlret";
    if (cols.size() < 3 || cols[0] != "date" || cols[1] != "stock_id" || cols[2] != "cap" ||
        (cols.size() == 4 && !has_dlret) || cols.size() > 4)
        detail::malformed(line_no, "expected header date,stock_id,cap[,dlret]");

    std::map<std::string, std::map<std::string, detail::PanelCell>> by_date;  // date -> id -> cell
    std::unordered_map<std::string, std::size_t> dlret_line;
    std::vector<std::pair<std::string, std::string>> row_keys;  // (date, id) in file order

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != cols.size()) detail::malformed(line_no, "expected " + std::to_string(cols.size()) + " fields");
        const std::string date(trim(f[0]));
        const std::string id(trim(f[1]));
        if (date.empty() || id.empty()) detail::malformed(line_no, "empty date or stock id");
        detail::PanelCell cell;
        if (!parse_double(f[2], cell.cap)) detail::malformed(line_no, "cap is not a number");
        if (!(cell.cap > 0.0) || !std::isfinite(cell.cap))
            throw Error(ErrorKind::NonPositiveCap, "line " + std::to_string(line_no) + ": cap must be positive");
        if (has_dlret && !trim(f[3]).empty()) {
            double d = 0.0;
            if (!parse_double(f[3], d) || !(d >= -1.0) || !std::isfinite(d))
                detail::malformed(line_no, "dlret must be a number >= -1");
            cell.dlret = d;
            dlret_line[id] = line_no;
        }
        auto& day = by_date[date];
        if (!day.emplace(id, cell).second)
            throw Error(ErrorKind::DuplicateStockDay, "line " + std::to_string(line_no) + ": '" + id +
                                                          "' appears twice on " + date);
        row_keys.emplace_back(date, id);
    }
    if (by_date.empty()) throw Error(ErrorKind::MalformedRow, "panel has no rows");

    // first appearance: walk dates in order, rows within a date in file order
    std::stable_sort(row_keys.begin(), row_keys.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::unordered_map<std::string, std::size_t> first_seen;
    for (const auto& [date, id] : row_keys) first_seen.emplace(id, first_seen.size());

    std::vector<std::string> labels;
    std::vector<std::vector<double>> caps;
    std::vector<std::vector<std::string>> ids;
    std::unordered_map<std::string, std::string> last_date;
    for (const auto& [date, day] : by_date) {
        std::vector<std::string> present;
        present.reserve(day.size());
        for (const auto& [id, cell] : day) {
            present.push_back(id);
            last_date[id] = date;
        }
        std::sort(present.begin(), present.end(),
                  [&](const std::string& a, const std::string& b) { return first_seen[a] < first_seen[b]; });
        std::vector<double> c;
        c.reserve(present.size());
        for (const auto& id : present) c.push_back(day.at(id).cap);
        labels.push_back(date);
        caps.push_back(std::move(c));
        ids.push_back(std::move(present));
    }

    for (const auto& [date, day] : by_date)
        for (const auto& [id, cell] : day)
            if (cell.dlret && last_date[id] != date)
                detail::malformed(dlret_line[id], "dlret for '" + id + "' is not on its final row");

    std::vector<DelistingEvent> events;
    for (std::size_t d = 1; d < ids.size(); ++d) {
        const std::unordered_set<std::string> now(ids[d].begin(), ids[d].end());
        for (std::size_t i = 0; i < ids[d - 1].size(); ++i) {
            const auto& id = ids[d - 1][i];
            if (now.count(id)) continue;
            DelistingEvent e{d, id, i, std::nullopt, false};
            const auto& cell = by_date.at(labels[d - 1]).at(id);
            if (last_date[id] == labels[d - 1]) e.dlret = cell.dlret;
            events.push_back(std::move(e));
        }
    }
    return MarketPath::from_panel(caps, ids, apply_policy(std::move(events), policy), std::move(labels));
}

inline MarketPath load_csv(const std::string& file, DlretPolicy policy = DlretPolicy::as_given) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + file + "'");
    return load_csv(in, policy);
}

/// Writes `path` in the panel format read by load_csv. Observed delisting
/// returns go on the stock's last row; imputed ones are left empty. Paths
/// without labels get ISO dates counted from 2000-01-01.
inline void write_panel_csv(std::ostream& out, const MarketPath& path) {
    if (!path.has_ids()) throw Error(ErrorKind::InvalidArgument, "writing a panel needs stock ids");
    std::map<std::pair<std::size_t, std::string>, double> dl;  // (last day, id) -> dlret
    for (const auto& e : path.delistings())
        if (e.dlret && !e.imputed) dl.emplace(std::pair{e.day - 1, e.stock_id}, *e.dlret);

    out << "date,stock_id,cap,dlret\n";
    for (std::size_t d = 0; d < path.num_days(); ++d) {
        const std::string date = path.labels().empty() ? sim_date(d) : path.labels()[d];
        const auto c = path.caps(d);
        const auto ids = path.ids(d);
        for (std::size_t i = 0; i < c.size(); ++i) {
            out << date << ',' << ids[i] << ',' << format_double(c[i]) << ',';
            if (auto it = dl.find({d, ids[i]}); it != dl.end()) out << format_double(it->second);
            out << '\n';
        }
    }
}

inline void write_panel_csv(const std::string& file, const MarketPath& path) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + file + "'");
    write_panel_csv(out, path);
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + file + "'");
}

} // namespace fgp
