#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sps/asymptotics.hpp"
#include "sps/multiplicity.hpp"

namespace sps::io {

namespace fs = std::filesystem;

/// 17 significant digits: round-trips every double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes `content` to a sibling temporary and renames it over `path`. On
/// failure the temporary is removed and IoError is raised.
inline void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (out) out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error(ErrorCode::io_error, "cannot write " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::io_error, "cannot move " + tmp.string() + " to " + path.string());
    }
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// FNV-1a 64-bit digest as 16 hex digits.
inline std::string hash_bytes(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string hash_file(const fs::path& path) { return hash_bytes(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV

inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline const std::vector<std::string> sweep_columns{"p",         "lambda",        "resolution",  "m_p",
                                                    "m_tilde_p", "t_star_simple", "t_star_full", "R_est",
                                                    "iterations", "converged",    "runtime_s"};

inline std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
    return s + "\n";
}

inline std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out = join(sweep_columns);
    for (const auto& r : records) {
        out += join({format_double(r.p), format_double(r.lambda), std::to_string(r.resolution), format_double(r.m_p),
                     format_double(r.m_tilde_p), format_double(r.t_star_simple), format_double(r.t_star_full),
                     format_double(r.R_est), std::to_string(r.iterations), r.converged ? "1" : "0",
                     format_double(r.runtime_s)});
    }
    return out;
}

inline std::vector<SweepRecord> parse_sweep_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    require(!rows.empty() && rows.front() == sweep_columns, ErrorCode::io_error, "unexpected sweep CSV header");
    std::vector<SweepRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& c = rows[i];
        require(c.size() == sweep_columns.size(), ErrorCode::io_error, "sweep CSV row " + std::to_string(i) + " has wrong width");
        SweepRecord r;
        r.p = std::stod(c[0]);
        r.lambda = std::stod(c[1]);
        r.resolution = std::stoi(c[2]);
        r.m_p = std::stod(c[3]);
        r.m_tilde_p = std::stod(c[4]);
        r.t_star_simple = std::stod(c[5]);
        r.t_star_full = std::stod(c[6]);
        r.R_est = std::stod(c[7]);
        r.iterations = std::stoi(c[8]);
        r.converged = c[9] == "1";
        r.runtime_s = std::stod(c[10]);
        out.push_back(r);
    }
    return out;
}

inline const std::vector<std::string> catalog_columns{"id", "m",  "G_residual", "ps_residual", "bx",
                                                      "by", "bz", "membership", "sublevel"};

inline std::string catalog_csv(const SolutionCatalog& cat) {
    std::string out = join(catalog_columns);
    for (std::size_t i = 0; i < cat.entries.size(); ++i) {
        const auto& e = cat.entries[i];
        out += join({std::to_string(i), format_double(e.state.m), format_double(e.state.nehari_residual),
                     format_double(e.state.ps_residual), format_double(e.barycenter[0]),
                     format_double(e.barycenter[1]), format_double(e.barycenter[2]), to_string(e.membership),
                     e.sublevel ? "1" : "0"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// VTK legacy ASCII structured points; nodes outside the domain are written as 0.

inline std::string vtk_structured_points(const ScalarField& u, const std::string& name = "u") {
    const Grid& g = u.grid();
    const auto& d = g.dims();
    std::vector<double> full(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0.0);
    for (std::size_t n = 0; n < u.size(); ++n) {
        const auto& ijk = g.lattice_index(n);
        full[(static_cast<std::size_t>(ijk[2]) * d[1] + ijk[1]) * d[0] + ijk[0]] = u[n];
    }
    std::string out;
    out += "# vtk DataFile Version 3.0\n" + name + "\nASCII\nDATASET STRUCTURED_POINTS\n";
    out += "DIMENSIONS " + std::to_string(d[0]) + " " + std::to_string(d[1]) + " " + std::to_string(d[2]) + "\n";
    const auto& o = g.origin();
    out += "ORIGIN " + format_double(o[0]) + " " + format_double(o[1]) + " " + format_double(o[2]) + "\n";
    const std::string h = format_double(g.spacing());
    out += "SPACING " + h + " " + h + " " + h + "\n";
    out += "POINT_DATA " + std::to_string(full.size()) + "\nSCALARS " + name + " double 1\nLOOKUP_TABLE default\n";
    for (double v : full) out += format_double(v) + "\n";
    return out;
}

/// Values of the SCALARS block of a file written by vtk_structured_points.
inline std::vector<double> parse_vtk_scalars(const std::string& text) {
    const auto pos = text.find("LOOKUP_TABLE default\n");
    require(pos != std::string::npos, ErrorCode::io_error, "no SCALARS block in VTK text");
    std::istringstream in(text.substr(pos + 21));
    std::vector<double> out;
    for (std::string tok; in >> tok;) out.push_back(std::stod(tok));
    return out;
}

} // namespace sps::io
