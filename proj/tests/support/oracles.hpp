#pragma once

// Straight-from-definition reference implementations used as referees. These
// intentionally share no code with the library: full-table dynamic programs,
// per-item recounts, indicator covariances.

#include "colab/fuzzy.hpp"
#include "colab/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace oracles {

// Full O(n*m) table, no row reuse.
inline std::size_t levenshtein_full_table(const std::u32string& a, const std::u32string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                            std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t best = std::min(d[i - 1][j], d[i][j - 1]) + 1;
            std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            d[i][j] = std::min(best, sub);
        }
    }
    return d[a.size()][b.size()];
}

// Literal sliding-window definition: every window position, full-table
// distance per window, max of the per-window similarities.
inline double partial_similarity_bruteforce(const std::string& a, const std::string& b) {
    std::u32string ua = colab::fuzzy::decode_utf8(a);
    std::u32string ub = colab::fuzzy::decode_utf8(b);
    if (ua.size() > ub.size()) std::swap(ua, ub);
    if (ua.empty()) return 100.0;
    double best = 0.0;
    for (std::size_t i = 0; i + ua.size() <= ub.size(); ++i) {
        std::u32string window = ub.substr(i, ua.size());
        std::size_t dist = levenshtein_full_table(ua, window);
        double sim =
            (1.0 - static_cast<double>(dist) / static_cast<double>(ua.size())) * 100.0;
        best = std::max(best, sim);
    }
    return best;
}

inline double diversity_bruteforce(const std::string& a, const std::string& b) {
    return 100.0 - partial_similarity_bruteforce(a, b);
}

// Item-level view of a confusion tally: gold index, predicted index
// (pred == -1 encodes an abstention).
struct Item {
    int gold;
    int pred;
};

inline std::vector<Item> items_from_tally(const colab::metrics::ConfusionTally& t) {
    auto counts = t.counts();
    auto abstains = t.abstains();
    std::vector<Item> items;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = 0; j < counts.size(); ++j)
            for (long long n = 0; n < counts[i][j]; ++n)
                items.push_back({static_cast<int>(i), static_cast<int>(j)});
        for (long long n = 0; n < abstains[i]; ++n) items.push_back({static_cast<int>(i), -1});
    }
    return items;
}

struct OracleMetrics {
    double acc, f1, pre, sen, spe, mcc, ck;
};

// Recomputes all seven metrics by looping over individual items. Abstentions
// behave as a prediction of a class that is never gold. Zero-division
// conventions mirror the documented ones: per-class statistics fall back to
// 0, MCC falls back to 0 on zero variance, kappa to 1 for exact perfect
// agreement at expected agreement 1 (0 otherwise).
inline OracleMetrics metrics_per_item(const colab::metrics::ConfusionTally& t) {
    auto items = items_from_tally(t);
    const int k = static_cast<int>(t.classes().size());
    const double total = static_cast<double>(items.size());

    OracleMetrics m{};
    int correct = 0;
    for (const auto& it : items)
        if (it.pred == it.gold) ++correct;
    m.acc = correct / total;

    m.pre = m.sen = m.f1 = m.spe = 0.0;
    for (int c = 0; c < k; ++c) {
        long long tp = 0, fp = 0, fn = 0, tn = 0;
        for (const auto& it : items) {
            bool gold_c = it.gold == c;
            bool pred_c = it.pred == c;
            if (gold_c && pred_c) ++tp;
            else if (!gold_c && pred_c) ++fp;
            else if (gold_c && !pred_c) ++fn;
            else ++tn;
        }
        double support = static_cast<double>(tp + fn);
        if (support == 0) continue;
        double w = support / total;
        double pre_c = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        double sen_c = static_cast<double>(tp) / support;
        double f1_c = (pre_c + sen_c) > 0 ? 2 * pre_c * sen_c / (pre_c + sen_c) : 0.0;
        double spe_c = (tn + fp) > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
        m.pre += w * pre_c;
        m.sen += w * sen_c;
        m.f1 += w * f1_c;
        m.spe += w * spe_c;
    }

    // MCC as the correlation of one-hot indicator matrices. Classes are the
    // real ones plus the abstain pseudo-class when present.
    int ext = k + 1; // the extra slot is harmless when unused
    std::vector<double> gold_mean(ext, 0), pred_mean(ext, 0);
    for (const auto& it : items) {
        gold_mean[it.gold] += 1;
        pred_mean[it.pred < 0 ? k : it.pred] += 1;
    }
    for (auto& v : gold_mean) v /= total;
    for (auto& v : pred_mean) v /= total;
    double cov_xy = 0, cov_xx = 0, cov_yy = 0;
    for (const auto& it : items) {
        for (int c = 0; c < ext; ++c) {
            double x = (it.gold == c ? 1.0 : 0.0) - gold_mean[c];
            double y = ((it.pred < 0 ? k : it.pred) == c ? 1.0 : 0.0) - pred_mean[c];
            cov_xy += x * y;
            cov_xx += x * x;
            cov_yy += y * y;
        }
    }
    m.mcc = (cov_xx > 0 && cov_yy > 0) ? cov_xy / std::sqrt(cov_xx * cov_yy) : 0.0;

    double pe = 0;
    for (int c = 0; c < ext; ++c) pe += gold_mean[c] * pred_mean[c];
    if (1.0 - pe <= 0)
        m.ck = m.acc >= 1.0 ? 1.0 : 0.0;
    else
        m.ck = (m.acc - pe) / (1.0 - pe);

    return m;
}

} // namespace oracles
