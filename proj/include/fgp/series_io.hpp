#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "fgp/engine.hpp"
#include "fgp/error.hpp"
#include "fgp/format.hpp"

namespace fgp {

inline Baseline parse_baseline(std::string_view s) {
    if (s == "total_market") return Baseline::total_market;
    if (s == "sfm") return Baseline::sfm;
    if (s == "top_m") return Baseline::top_m;
    throw Error(ErrorKind::BadParameter, "unknown baseline '" + std::string(s) + "'");
}

/// CSV with columns day,log_g,eg,c_tm,c_g,dlret,log_v,log_u and, when the
/// series carries a baseline tag, a trailing baseline column.
inline void write_series_csv(std::ostream& out, const DecompositionSeries& s) {
    out << "day,log_g,eg,c_tm,c_g,dlret,log_v,log_u";
    if (s.baseline) out << ",baseline";
    out << '\n';
    for (std::size_t t = 0; t < s.size(); ++t) {
        out << t;
        for (const auto* col : {&s.log_g, &s.eg, &s.c_tm, &s.c_g, &s.dlret, &s.log_v, &s.log_u})
            out << ',' << format_double((*col)[t]);
        if (s.baseline) out << ',' << to_string(*s.baseline);
        out << '\n';
    }
}

inline void write_series_csv(const std::string& file, const DecompositionSeries& s) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + file + "'");
    write_series_csv(out, s);
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + file + "'");
}

inline DecompositionSeries read_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::MalformedRow, "empty series file");
    const auto header = split_csv(line);
    const bool tagged = header.size() == 9;
    if (header.size() != 8 && !tagged) throw Error(ErrorKind::MalformedRow, "unexpected series header");

    DecompositionSeries s;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != header.size())
            throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": wrong field count");
        std::size_t c = 1;
        for (auto* col : {&s.log_g, &s.eg, &s.c_tm, &s.c_g, &s.dlret, &s.log_v, &s.log_u}) {
            double v = 0.0;
            if (!parse_double(f[c++], v))
                throw Error(ErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": not a number");
            col->push_back(v);
        }
        if (tagged) s.baseline = parse_baseline(trim(f[8]));
    }
    return s;
}

inline DecompositionSeries read_series_csv(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + file + "'");
    return read_series_csv(in);
}

} // namespace fgp
