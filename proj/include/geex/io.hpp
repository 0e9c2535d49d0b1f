#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "geex/errors.hpp"
#include "geex/explain.hpp"
#include "geex/grid.hpp"
#include "geex/sampling.hpp"

namespace geex {

// ---------------------------------------------------------------------------
// Plain-text PGM (P2)
// ---------------------------------------------------------------------------

// Pixel values are scaled to [0,1] on load (divide by maxval).
inline Grid read_pgm(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::string magic;
    in >> magic;
    if (magic != "P2") raise(ErrorKind::ParseError, path + ": expected P2 header");
    auto next_token = [&](const char* what) {
        std::string tok;
        while (in >> tok) {
            if (tok[0] == '#') {
                std::string rest;
                std::getline(in, rest);
                continue;
            }
            return tok;
        }
        raise(ErrorKind::ParseError, path + ": truncated while reading " +
                                         std::string(what));
    };
    const std::size_t cols = std::stoul(next_token("width"));
    const std::size_t rows = std::stoul(next_token("height"));
    const double maxval = std::stod(next_token("maxval"));
    if (maxval <= 0) raise(ErrorKind::ParseError, path + ": non-positive maxval");
    Grid g({rows, cols});
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = std::stod(next_token("pixel")) / maxval;
    return g;
}

inline void write_pgm(const std::string& path, const std::vector<int>& pixels,
                      std::size_t rows, std::size_t cols) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::ParseError, "cannot open '" + path + "' for writing");
    out << "P2\n" << cols << " " << rows << "\n255\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out << " ";
            out << pixels[r * cols + c];
        }
        out << "\n";
    }
}

// 8-bit heatmap with symmetric normalization around 0: value 128 marks zero
// attribution. Preserves the rank ordering of attribution values.
inline std::vector<int> attribution_heatmap(const Grid& xi) {
    double peak = 0.0;
    for (double v : xi.data) peak = std::max(peak, std::fabs(v));
    std::vector<int> pixels(xi.size(), 128);
    if (peak == 0.0) return pixels;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const int p = 128 + static_cast<int>(std::lround(xi[i] / peak * 127.0));
        pixels[i] = std::clamp(p, 0, 255);
    }
    return pixels;
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    std::ostringstream ss;
    ss << std::setprecision(17) << v;
    return ss.str();
}

// flat index,value rows
inline void write_attribution_csv(const std::string& path, const Grid& xi) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::ParseError, "cannot open '" + path + "' for writing");
    out << "index,value\n";
    for (std::size_t i = 0; i < xi.size(); ++i)
        out << i << "," << format_double(xi[i]) << "\n";
}

inline std::vector<double> read_value_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected index,value");
        try {
            values.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": bad value field");
        }
    }
    return values;
}

// Grid as a CSV matrix (one row per grid row); 1-D grids become one row.
inline Grid read_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                raise(ErrorKind::ParseError,
                      path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows[0].size())
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(ErrorKind::ParseError, path + ": empty grid file");
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    if (rows.size() == 1) return Grid({rows[0].size()}, std::move(flat));
    return Grid({rows.size(), rows[0].size()}, std::move(flat));
}

inline void write_grid_csv(const std::string& path, const Grid& g) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::ParseError, "cannot open '" + path + "' for writing");
    const std::size_t cols = g.shape.size() == 2 ? g.shape[1] : g.size();
    for (std::size_t i = 0; i < g.size(); ++i) {
        out << format_double(g[i]);
        out << (((i + 1) % cols == 0) ? "\n" : ",");
    }
}

// ---------------------------------------------------------------------------
// MaskSet bundle
// ---------------------------------------------------------------------------
// Header line with the generation parameters, then one CSV row per mask:
// alpha followed by the mask values. Scores are recomputed on load.

inline void save_mask_set(const std::string& path, const MaskSet& ms,
                          const Shape& shape) {
    std::ofstream out(path);
    if (!out) raise(ErrorKind::ParseError, "cannot open '" + path + "' for writing");
    out << "n_star=" << ms.size() << " sigma=" << format_double(ms.sigma)
        << " shape=" << shape_to_string(shape) << " seed=" << ms.seed
        << " mirrored=" << (ms.mirrored ? 1 : 0);
    if (ms.smoothing)
        out << " smooth_size=" << ms.smoothing->size
            << " smooth_sigma=" << format_double(ms.smoothing->sigma);
    out << "\n";
    for (std::size_t i = 0; i < ms.size(); ++i) {
        out << format_double(ms.alphas[i]);
        for (double v : ms.masks[i].data) out << "," << format_double(v);
        out << "\n";
    }
}

inline MaskSet load_mask_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ParseError, "cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header))
        raise(ErrorKind::ParseError, path + ": missing header line");

    auto field = [&](const std::string& key) -> std::string {
        const std::string tag = key + "=";
        const auto pos = header.find(tag);
        if (pos == std::string::npos) return {};
        const auto end = header.find(' ', pos);
        return header.substr(pos + tag.size(), end == std::string::npos
                                                   ? std::string::npos
                                                   : end - pos - tag.size());
    };
    const std::string sigma_s = field("sigma");
    const std::string shape_s = field("shape");
    if (sigma_s.empty() || shape_s.empty())
        raise(ErrorKind::ParseError, path + ":1: malformed mask bundle header");

    MaskSet ms;
    ms.sigma = std::stod(sigma_s);
    ms.seed = std::stoull(field("seed"));
    ms.mirrored = field("mirrored") == "1";
    if (!field("smooth_size").empty())
        ms.smoothing = make_gaussian_kernel(std::stoi(field("smooth_size")),
                                            std::stod(field("smooth_sigma")));
    Shape shape;
    {
        std::stringstream ss(shape_s.substr(1, shape_s.size() - 2));
        std::string dim;
        while (std::getline(ss, dim, ',')) shape.push_back(std::stoul(dim));
    }
    const std::size_t numel = shape_numel(shape);
    SearchDistribution dist(ms.sigma, shape);

    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != numel + 1)
            raise(ErrorKind::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(numel + 1) + " fields, got " +
                      std::to_string(row.size()));
        ms.alphas.push_back(row[0]);
        Grid eps(shape, std::vector<double>(row.begin() + 1, row.end()));
        ms.scores.push_back(score_gradient(dist, eps));
        ms.masks.push_back(std::move(eps));
    }
    if (ms.masks.empty()) raise(ErrorKind::ParseError, path + ": no masks in bundle");
    return ms;
}

}  // namespace geex
