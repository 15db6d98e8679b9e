#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace colab::metrics {

/// Multiclass confusion tally. Rows are gold classes, columns are predicted
/// classes. Abstentions (no extractable prediction) are tracked per gold
/// class outside the matrix and every metric treats them as a distinguished
/// wrong prediction; they are never dropped.
class ConfusionTally {
public:
    /// Records one item. An empty `predicted` is an abstention.
    void add(const std::string& gold, const std::optional<std::string>& predicted,
             long long n = 1);

    /// Sorted union of every gold and predicted label seen.
    std::vector<std::string> classes() const;

    /// Square matrix aligned with classes(): counts[i][j] = gold i, predicted j.
    std::vector<std::vector<long long>> counts() const;

    /// Abstentions aligned with classes() (by gold class).
    std::vector<long long> abstains() const;

    long long abstain_count() const;
    long long total() const; // matrix sum + abstain_count

    /// Component-wise sum; class sets are unified.
    static ConfusionTally merge(const ConfusionTally& a, const ConfusionTally& b);

    /// Builds a tally from an explicit matrix, mostly for tests and oracles.
    static ConfusionTally from_matrix(const std::vector<std::string>& classes,
                                      const std::vector<std::vector<long long>>& counts,
                                      const std::vector<long long>& abstains = {});

private:
    std::map<std::string, std::map<std::string, long long>> counts_;
    std::map<std::string, long long> abstains_;
};

// The seven evaluation metrics. Accuracy and the weighted one-vs-rest family
// are fractions in [0,1]; MCC and kappa lie in [-1,1]. All of them raise
// InvalidInputError on an empty tally.
//
// Conventions for degenerate denominators: per-class precision, recall, F1
// and specificity fall back to 0; MCC returns 0 when either variance factor
// vanishes; kappa returns 1 for exact perfect agreement with expected
// agreement 1, otherwise 0 when expected agreement is 1.
double accuracy(const ConfusionTally& t);
double weighted_precision(const ConfusionTally& t);
double weighted_recall(const ConfusionTally& t);
double weighted_f1(const ConfusionTally& t);
double weighted_specificity(const ConfusionTally& t);
double mcc(const ConfusionTally& t);
double cohens_kappa(const ConfusionTally& t);

/// All seven in the paper's reporting order.
struct MetricSet {
    double acc = 0;
    double f1 = 0;
    double pre = 0;
    double sen = 0;
    double spe = 0;
    double mcc = 0;
    double ck = 0;
};

MetricSet compute_all(const ConfusionTally& t);

} // namespace colab::metrics
