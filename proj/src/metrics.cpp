#include "colab/metrics.hpp"

#include "colab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace colab::metrics {

void ConfusionTally::add(const std::string& gold, const std::optional<std::string>& predicted,
                         long long n) {
    if (n < 0) throw InvalidInputError("confusion tally: negative count");
    counts_[gold]; // make the gold class visible even if all its items abstain
    if (predicted)
        counts_[gold][*predicted] += n;
    else
        abstains_[gold] += n;
}

std::vector<std::string> ConfusionTally::classes() const {
    std::set<std::string> labels;
    for (const auto& [gold, row] : counts_) {
        labels.insert(gold);
        for (const auto& [pred, n] : row) labels.insert(pred);
    }
    for (const auto& [gold, n] : abstains_) labels.insert(gold);
    return {labels.begin(), labels.end()};
}

std::vector<std::vector<long long>> ConfusionTally::counts() const {
    auto cls = classes();
    std::vector<std::vector<long long>> m(cls.size(), std::vector<long long>(cls.size(), 0));
    for (std::size_t i = 0; i < cls.size(); ++i) {
        auto it = counts_.find(cls[i]);
        if (it == counts_.end()) continue;
        for (std::size_t j = 0; j < cls.size(); ++j) {
            auto jt = it->second.find(cls[j]);
            if (jt != it->second.end()) m[i][j] = jt->second;
        }
    }
    return m;
}

std::vector<long long> ConfusionTally::abstains() const {
    auto cls = classes();
    std::vector<long long> a(cls.size(), 0);
    for (std::size_t i = 0; i < cls.size(); ++i) {
        auto it = abstains_.find(cls[i]);
        if (it != abstains_.end()) a[i] = it->second;
    }
    return a;
}

long long ConfusionTally::abstain_count() const {
    long long n = 0;
    for (const auto& [gold, c] : abstains_) n += c;
    return n;
}

long long ConfusionTally::total() const {
    long long n = abstain_count();
    for (const auto& [gold, row] : counts_)
        for (const auto& [pred, c] : row) n += c;
    return n;
}

ConfusionTally ConfusionTally::merge(const ConfusionTally& a, const ConfusionTally& b) {
    ConfusionTally out = a;
    for (const auto& [gold, row] : b.counts_) {
        out.counts_[gold];
        for (const auto& [pred, c] : row) out.counts_[gold][pred] += c;
    }
    for (const auto& [gold, c] : b.abstains_) out.abstains_[gold] += c;
    return out;
}

ConfusionTally ConfusionTally::from_matrix(const std::vector<std::string>& classes,
                                           const std::vector<std::vector<long long>>& counts,
                                           const std::vector<long long>& abstains) {
    if (counts.size() != classes.size())
        throw InvalidInputError("confusion tally: matrix/class size mismatch");
    ConfusionTally t;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (counts[i].size() != classes.size())
            throw InvalidInputError("confusion tally: matrix is not square");
        t.counts_[classes[i]];
        for (std::size_t j = 0; j < classes.size(); ++j)
            if (counts[i][j] != 0) t.add(classes[i], classes[j], counts[i][j]);
        if (i < abstains.size() && abstains[i] != 0) t.add(classes[i], std::nullopt, abstains[i]);
    }
    return t;
}

namespace {

// Dense view with abstentions materialized as one predicted-only pseudo-class
// (zero gold support, so it never contributes weight).
struct DenseTally {
    std::size_t k = 0; // real classes; the pseudo-class, if any, sits at index k
    std::vector<std::vector<double>> m;
    std::vector<double> row; // gold supports
    std::vector<double> col; // predicted counts
    double total = 0;
    double diag = 0;
};

DenseTally densify(const ConfusionTally& t) {
    if (t.total() <= 0) throw InvalidInputError("metrics: empty tally");
    DenseTally d;
    auto counts = t.counts();
    auto abstains = t.abstains();
    d.k = counts.size();
    const bool pseudo = t.abstain_count() > 0;
    const std::size_t n = d.k + (pseudo ? 1 : 0);
    d.m.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < d.k; ++i) {
        for (std::size_t j = 0; j < d.k; ++j) d.m[i][j] = static_cast<double>(counts[i][j]);
        if (pseudo) d.m[i][d.k] = static_cast<double>(abstains[i]);
    }
    d.row.assign(n, 0.0);
    d.col.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            d.row[i] += d.m[i][j];
            d.col[j] += d.m[i][j];
            d.total += d.m[i][j];
            if (i == j) d.diag += d.m[i][j];
        }
    return d;
}

double ratio_or_zero(double num, double den) { return den > 0 ? num / den : 0.0; }

// Support-weighted mean of a per-class statistic over the real classes.
template <typename Fn>
double support_weighted(const DenseTally& d, Fn per_class) {
    double acc = 0;
    for (std::size_t c = 0; c < d.k; ++c) {
        if (d.row[c] <= 0) continue;
        acc += (d.row[c] / d.total) * per_class(c);
    }
    return acc;
}

} // namespace

double accuracy(const ConfusionTally& t) {
    DenseTally d = densify(t);
    return d.diag / d.total;
}

double weighted_precision(const ConfusionTally& t) {
    DenseTally d = densify(t);
    return support_weighted(d, [&](std::size_t c) { return ratio_or_zero(d.m[c][c], d.col[c]); });
}

double weighted_recall(const ConfusionTally& t) {
    DenseTally d = densify(t);
    return support_weighted(d, [&](std::size_t c) { return ratio_or_zero(d.m[c][c], d.row[c]); });
}

double weighted_f1(const ConfusionTally& t) {
    DenseTally d = densify(t);
    return support_weighted(d, [&](std::size_t c) {
        double p = ratio_or_zero(d.m[c][c], d.col[c]);
        double r = ratio_or_zero(d.m[c][c], d.row[c]);
        return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    });
}

double weighted_specificity(const ConfusionTally& t) {
    DenseTally d = densify(t);
    return support_weighted(d, [&](std::size_t c) {
        double fp = d.col[c] - d.m[c][c];
        double tn = d.total - d.row[c] - fp;
        return ratio_or_zero(tn, tn + fp);
    });
}

double mcc(const ConfusionTally& t) {
    // Multiclass R_k statistic over the matrix extended with the abstain
    // pseudo-class (gold support zero, so it only enters the predicted
    // marginals).
    DenseTally d = densify(t);
    const double s = d.total;
    const double c = d.diag;
    double sum_pt = 0, sum_pp = 0, sum_tt = 0;
    for (std::size_t k = 0; k < d.row.size(); ++k) {
        sum_pt += d.col[k] * d.row[k];
        sum_pp += d.col[k] * d.col[k];
        sum_tt += d.row[k] * d.row[k];
    }
    const double cov_xy = c * s - sum_pt;
    const double cov_xx = s * s - sum_pp;
    const double cov_yy = s * s - sum_tt;
    if (cov_xx <= 0 || cov_yy <= 0) return 0.0;
    return cov_xy / std::sqrt(cov_xx * cov_yy);
}

double cohens_kappa(const ConfusionTally& t) {
    DenseTally d = densify(t);
    const double po = d.diag / d.total;
    double pe = 0;
    for (std::size_t k = 0; k < d.row.size(); ++k)
        pe += (d.row[k] / d.total) * (d.col[k] / d.total);
    if (1.0 - pe <= 0) return po >= 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

MetricSet compute_all(const ConfusionTally& t) {
    MetricSet m;
    m.acc = accuracy(t);
    m.f1 = weighted_f1(t);
    m.pre = weighted_precision(t);
    m.sen = weighted_recall(t);
    m.spe = weighted_specificity(t);
    m.mcc = mcc(t);
    m.ck = cohens_kappa(t);
    return m;
}

} // namespace colab::metrics
