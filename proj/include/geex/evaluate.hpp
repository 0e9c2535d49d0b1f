#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "geex/errors.hpp"
#include "geex/explain.hpp"
#include "geex/grid.hpp"
#include "geex/model.hpp"
#include "geex/rng.hpp"

namespace geex {

enum class Replacement { Baseline, Gaussian };

inline std::string replacement_name(Replacement r) {
    return r == Replacement::Baseline ? "baseline" : "gaussian";
}

struct DeletionCurve {
    std::vector<double> ratios;  // i-th entry: 1 - f(x^(i)) / f(x)
    int l = 0;
    Replacement replacement = Replacement::Baseline;
    double aopc = 0.0;
};

// Feature ranking for deletion: by attribution value descending, ties broken
// by ascending flat index.
inline std::vector<std::size_t> deletion_order(const Grid& xi) {
    std::vector<std::size_t> order(xi.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (xi[a] != xi[b]) return xi[a] > xi[b];
        return a < b;
    });
    return order;
}

// Removes features cumulatively in attribution order and tracks the relative
// confidence drop. Baseline replacement substitutes the attribution's
// baseline value; Gaussian replacement substitutes a seeded N(0,1) draw
// clipped to the model's declared input range.
inline DeletionCurve deletion_curve(const QueryModel& m, const Grid& x,
                                    const Attribution& attribution, int l,
                                    Replacement replacement, std::uint64_t seed,
                                    int batch = 1) {
    require_same_shape(attribution.xi, x, "deletion_curve");
    if (batch < 1) raise(ErrorKind::BadLength, "batch must be >= 1");
    if (l < 1 || static_cast<std::size_t>(l) * batch > x.size())
        raise(ErrorKind::BadLength, "deletion length exceeds feature count");

    const double fx =
        m.checked_query(x)[static_cast<std::size_t>(attribution.class_idx)];
    if (std::fabs(fx) < 1e-9)
        raise(ErrorKind::ZeroConfidence, "f(x) too close to zero to normalize");

    const auto [lo, hi] = m.input_range();
    const std::vector<std::size_t> order = deletion_order(attribution.xi);

    DeletionCurve curve;
    curve.l = l;
    curve.replacement = replacement;
    curve.ratios.reserve(l);

    Grid current = x;
    std::size_t cursor = 0;
    for (int step = 0; step < l; ++step) {
        for (int b = 0; b < batch; ++b) {
            const std::size_t pixel = order[cursor++];
            if (replacement == Replacement::Baseline) {
                current[pixel] = attribution.baseline[pixel];
            } else {
                CounterRng rng(seed, 0x44454cULL ^
                                         (static_cast<std::uint64_t>(step) << 32) ^
                                         static_cast<std::uint64_t>(pixel));
                current[pixel] = std::clamp(rng.normal(), lo, hi);
            }
        }
        const double fi =
            m.checked_query(current)[static_cast<std::size_t>(attribution.class_idx)];
        curve.ratios.push_back(1.0 - fi / fx);
    }
    curve.aopc = std::accumulate(curve.ratios.begin(), curve.ratios.end(), 0.0) /
                 static_cast<double>(l);
    return curve;
}

// Brute-force upper reference: at every step delete whichever remaining
// feature causes the largest confidence drop. Quadratic in the feature count,
// so only meant for small toy inputs; any sane explainer's deletion curve
// should sit between the random ordering and this one.
inline DeletionCurve greedy_oracle_curve(const QueryModel& m, const Grid& x,
                                         const Grid& baseline, int class_idx, int l,
                                         Replacement replacement,
                                         std::uint64_t seed) {
    require_same_shape(baseline, x, "greedy_oracle_curve");
    if (l < 1 || static_cast<std::size_t>(l) > x.size())
        raise(ErrorKind::BadLength, "deletion length exceeds feature count");
    const double fx = m.checked_query(x)[static_cast<std::size_t>(class_idx)];
    if (std::fabs(fx) < 1e-9)
        raise(ErrorKind::ZeroConfidence, "f(x) too close to zero to normalize");
    const auto [lo, hi] = m.input_range();

    DeletionCurve curve;
    curve.l = l;
    curve.replacement = replacement;
    curve.ratios.reserve(l);

    Grid current = x;
    std::vector<bool> deleted(x.size(), false);
    for (int step = 0; step < l; ++step) {
        std::size_t best_pixel = x.size();
        double best_fi = 0.0;
        for (std::size_t p = 0; p < x.size(); ++p) {
            if (deleted[p]) continue;
            double replaced;
            if (replacement == Replacement::Baseline) {
                replaced = baseline[p];
            } else {
                CounterRng rng(seed, 0x44454cULL ^
                                         (static_cast<std::uint64_t>(step) << 32) ^
                                         static_cast<std::uint64_t>(p));
                replaced = std::clamp(rng.normal(), lo, hi);
            }
            const double saved = current[p];
            current[p] = replaced;
            const double fi =
                m.checked_query(current)[static_cast<std::size_t>(class_idx)];
            current[p] = saved;
            if (best_pixel == x.size() || fi < best_fi) {
                best_pixel = p;
                best_fi = fi;
            }
        }
        deleted[best_pixel] = true;
        if (replacement == Replacement::Baseline) {
            current[best_pixel] = baseline[best_pixel];
        } else {
            CounterRng rng(seed, 0x44454cULL ^
                                     (static_cast<std::uint64_t>(step) << 32) ^
                                     static_cast<std::uint64_t>(best_pixel));
            current[best_pixel] = std::clamp(rng.normal(), lo, hi);
        }
        curve.ratios.push_back(1.0 - best_fi / fx);
    }
    curve.aopc = std::accumulate(curve.ratios.begin(), curve.ratios.end(), 0.0) /
                 static_cast<double>(l);
    return curve;
}

// ---------------------------------------------------------------------------
// AOPC table
// ---------------------------------------------------------------------------

struct AopcCell {
    std::string method;
    std::string replacement;
    double mean = 0.0;
    double stddev = 0.0;
    int seeds = 0;
    bool failed = false;
    std::string error;
};

struct NamedExplainer {
    std::string name;
    Method method;
};

// Per (explainer, replacement) cell: mean and std of the AOPC over seeds.
// A failing cell is reported in place, not fatal for the rest of the table.
inline std::vector<AopcCell> aopc_table(const QueryModel& m,
                                        const std::vector<Grid>& explicands,
                                        const std::vector<NamedExplainer>& explainers,
                                        const std::vector<Replacement>& replacements,
                                        const ExplainConfig& base_cfg,
                                        const std::vector<std::uint64_t>& seeds,
                                        int deletion_l = 0) {
    std::vector<AopcCell> cells;
    for (const NamedExplainer& ex : explainers) {
        for (Replacement rep : replacements) {
            AopcCell cell;
            cell.method = ex.name;
            cell.replacement = replacement_name(rep);
            try {
                std::vector<double> values;
                for (std::uint64_t seed : seeds) {
                    for (const Grid& x : explicands) {
                        ExplainConfig cfg = base_cfg;
                        cfg.seed = seed;
                        Attribution a = explain(ex.method, m, x, cfg);
                        const int l = deletion_l > 0 ? deletion_l
                                                     : static_cast<int>(x.size());
                        values.push_back(
                            deletion_curve(m, x, a, l, rep, seed).aopc);
                    }
                }
                double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                              values.size();
                double var = 0.0;
                for (double v : values) var += (v - mean) * (v - mean);
                cell.mean = mean;
                cell.stddev = values.size() > 1
                                  ? std::sqrt(var / (values.size() - 1))
                                  : 0.0;
                cell.seeds = static_cast<int>(seeds.size());
            } catch (const Error& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// Convergence sweep toward IG
// ---------------------------------------------------------------------------

struct SweepPoint {
    int budget = 0;
    double mean_rel_l2 = 0.0;
    double std_rel_l2 = 0.0;
    double mean_aopc = 0.0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    int ig_steps = 512;
    std::vector<std::uint64_t> seeds;
};

inline double rel_l2_distance(const Grid& a, const Grid& b) {
    const double num = frobenius_norm(sub(a, b));
    const double den = frobenius_norm(b);
    return num / den;
}

// For each budget: seed-averaged relative L2 distance between the merged
// estimate and an IG reference, plus the mean AOPC of the estimate.
inline SweepResult convergence_sweep(const QueryModel& m, const Grid& x,
                                     const std::vector<int>& budgets,
                                     const ExplainConfig& base_cfg,
                                     const std::vector<std::uint64_t>& seeds,
                                     int ig_steps = 512, int deletion_l = 0,
                                     Replacement rep = Replacement::Baseline) {
    if (budgets.empty()) raise(ErrorKind::BadBudgetList, "empty budget list");
    for (std::size_t i = 1; i < budgets.size(); ++i)
        if (budgets[i] <= budgets[i - 1])
            raise(ErrorKind::BadBudgetList, "budgets must be strictly increasing");
    if (!m.white_box())
        raise(ErrorKind::NotWhiteBox, "convergence sweep needs an IG target");
    if (seeds.empty()) raise(ErrorKind::BadCount, "need at least one seed");

    const Grid baseline = resolve_baseline(base_cfg, x);
    const Attribution ig =
        ig_reference(m, x, baseline, ig_steps, base_cfg.class_idx, base_cfg.workers);
    const int l = deletion_l > 0 ? deletion_l : static_cast<int>(x.size());

    SweepResult result;
    result.ig_steps = ig_steps;
    result.seeds = seeds;
    for (int budget : budgets) {
        std::vector<double> dists;
        std::vector<double> aopcs;
        for (std::uint64_t seed : seeds) {
            ExplainConfig cfg = base_cfg;
            cfg.n_star = budget;
            cfg.seed = seed;
            cfg.class_idx = ig.class_idx;
            Attribution a = geex_merged(m, x, cfg);
            dists.push_back(rel_l2_distance(a.xi, ig.xi));
            aopcs.push_back(deletion_curve(m, x, a, l, rep, seed).aopc);
        }
        SweepPoint pt;
        pt.budget = budget;
        pt.mean_rel_l2 = std::accumulate(dists.begin(), dists.end(), 0.0) / dists.size();
        double var = 0.0;
        for (double d : dists) var += (d - pt.mean_rel_l2) * (d - pt.mean_rel_l2);
        pt.std_rel_l2 = dists.size() > 1 ? std::sqrt(var / (dists.size() - 1)) : 0.0;
        pt.mean_aopc = std::accumulate(aopcs.begin(), aopcs.end(), 0.0) / aopcs.size();
        result.points.push_back(pt);
    }
    return result;
}

}  // namespace geex
