#pragma once

#include <string>
#include <vector>

#include "distillbench/matrix.hpp"

namespace distillbench {

/// Linear CKA between two feature sets over the same examples (columns).
/// Features are centered per dimension across examples; the statistic is
/// ||Tc Sc^T||_F^2 / (||Sc Sc^T||_F ||Tc Tc^T||_F). Symmetric, in [0, 1],
/// invariant to orthogonal transforms and positive isotropic scaling.
double linear_cka(const Matrix& s, const Matrix& t);

/// RBF-kernel CKA with biased HSIC. Per input, sigma = bandwidth_fraction
/// times the median pairwise Euclidean distance between examples.
double rbf_cka(const Matrix& s, const Matrix& t, double bandwidth_fraction);

/// One point of an in-training CKA track.
struct CkaSeries {
    std::string kind;                            // "linear" | "rbf"
    double bandwidth_fraction = 0.0;             // rbf only
    std::vector<std::pair<int, double>> values;  // (epoch, cka)
};

struct CalibrationBin {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
    double accuracy = 0.0;   // 0 for empty bins
    double confidence = 0.0; // 0 for empty bins
};

struct CalibrationReport {
    int bin_count = 0;
    int n_test = 0;
    std::vector<CalibrationBin> bins;
    double ece = 0.0;
};

/// Confidence is the max softmax score, prediction the argmax (first max on
/// ties). Bin i covers ((i-1)/l, i/l]; a confidence of 0 cannot occur after
/// softmax, so every sample lands in exactly one bin.
CalibrationReport calibration(const Matrix& logits, const std::vector<int>& labels,
                              int bin_count);

struct AffinityEntry {
    int class_label = 0;
    double cosine = 0.0;
};

/// Per projector: classes ranked by mean cosine similarity between the
/// projected student features and the teacher features, top_n retained.
struct AffinityTable {
    int top_n = 0;
    std::vector<std::vector<AffinityEntry>> per_projector;
};

AffinityTable class_affinity(const std::vector<Matrix>& projected, const Matrix& teacher,
                             const std::vector<int>& labels, int top_n);

// CSV exports. Reliability: bin_lo,bin_hi,count,accuracy,confidence.
// CKA series: epoch,cka. Affinity: projector,rank,class,cosine.
std::string reliability_csv(const CalibrationReport& report);
std::string cka_series_csv(const CkaSeries& series);
std::string affinity_csv(const AffinityTable& table);

} // namespace distillbench
