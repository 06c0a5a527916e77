#include "distillbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "distillbench/errors.hpp"
#include "distillbench/io.hpp"
#include "distillbench/numkit.hpp"

namespace distillbench {

namespace {

void require_cka_inputs(const Matrix& s, const Matrix& t) {
    if (s.cols() != t.cols()) {
        throw DimensionError("CKA needs the same examples in both inputs: " + s.shape_str() +
                             " vs " + t.shape_str());
    }
    if (s.cols() < 3) {
        throw InvalidArgument("CKA needs at least 3 examples, got " + std::to_string(s.cols()));
    }
}

// Subtract from every row its mean across columns (center each feature
// dimension across examples).
Matrix center_examples(const Matrix& m) {
    Matrix out = m;
    for (int r = 0; r < m.rows(); ++r) {
        double mean = 0.0;
        for (int c = 0; c < m.cols(); ++c) mean += m.at(r, c);
        mean /= static_cast<double>(m.cols());
        for (int c = 0; c < m.cols(); ++c) out.at(r, c) -= mean;
    }
    return out;
}

// Squared pairwise distances between columns.
Matrix pairwise_sq_dists(const Matrix& m) {
    const int b = m.cols();
    Matrix d2(b, b);
    for (int i = 0; i < b; ++i) {
        for (int j = i + 1; j < b; ++j) {
            double acc = 0.0;
            for (int r = 0; r < m.rows(); ++r) {
                const double diff = m.at(r, i) - m.at(r, j);
                acc += diff * diff;
            }
            d2.at(i, j) = acc;
            d2.at(j, i) = acc;
        }
    }
    return d2;
}

double median_pairwise_distance(const Matrix& d2) {
    const int b = d2.rows();
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(b) * (b - 1) / 2);
    for (int i = 0; i < b; ++i) {
        for (int j = i + 1; j < b; ++j) {
            dists.push_back(std::sqrt(d2.at(i, j)));
        }
    }
    std::sort(dists.begin(), dists.end());
    const std::size_t n = dists.size();
    if (n % 2 == 1) {
        return dists[n / 2];
    }
    return 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

// Double-center a symmetric Gram matrix: K <- K - row means - col means +
// total mean, i.e. HKH with H = I - 11^T/b.
void double_center(Matrix& k) {
    const int b = k.rows();
    std::vector<double> rowmean(b, 0.0);
    double total = 0.0;
    for (int i = 0; i < b; ++i) {
        double acc = 0.0;
        for (int j = 0; j < b; ++j) acc += k.at(i, j);
        rowmean[i] = acc / b;
        total += acc;
    }
    total /= static_cast<double>(b) * b;
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            k.at(i, j) += total - rowmean[i] - rowmean[j];
        }
    }
}

// Biased HSIC of two already-centered Grams: sum of elementwise products
// over (b-1)^2.
double hsic_centered(const Matrix& kc, const Matrix& lc) {
    const int b = kc.rows();
    double acc = 0.0;
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < b; ++j) {
            acc += kc.at(i, j) * lc.at(i, j);
        }
    }
    const double bm1 = static_cast<double>(b - 1);
    return acc / (bm1 * bm1);
}

} // namespace

double linear_cka(const Matrix& s, const Matrix& t) {
    require_cka_inputs(s, t);
    const Matrix sc = center_examples(s);
    const Matrix tc = center_examples(t);
    const double numerator_root = frobenius_norm(matmul(tc, transpose(sc)));
    const double ss = frobenius_norm(matmul(sc, transpose(sc)));
    const double tt = frobenius_norm(matmul(tc, transpose(tc)));
    if (ss == 0.0 || tt == 0.0) {
        throw DegenerateError("linear_cka: constant features make CKA undefined");
    }
    return numerator_root * numerator_root / (ss * tt);
}

double rbf_cka(const Matrix& s, const Matrix& t, double bandwidth_fraction) {
    require_cka_inputs(s, t);
    if (bandwidth_fraction <= 0.0) {
        throw InvalidArgument("rbf_cka requires bandwidth_fraction > 0");
    }
    const int b = s.cols();
    Matrix grams[2];
    const Matrix* inputs[2] = {&s, &t};
    for (int which = 0; which < 2; ++which) {
        Matrix d2 = pairwise_sq_dists(*inputs[which]);
        const double median = median_pairwise_distance(d2);
        if (median == 0.0) {
            throw DegenerateError("rbf_cka: all examples identical, median distance is 0");
        }
        const double sigma = bandwidth_fraction * median;
        Matrix k(b, b);
        for (int i = 0; i < b; ++i) {
            for (int j = 0; j < b; ++j) {
                k.at(i, j) = std::exp(-d2.at(i, j) / (2.0 * sigma * sigma));
            }
        }
        grams[which] = std::move(k);
    }
    double_center(grams[0]);
    double_center(grams[1]);
    const double cross = hsic_centered(grams[0], grams[1]);
    const double kk = hsic_centered(grams[0], grams[0]);
    const double ll = hsic_centered(grams[1], grams[1]);
    if (kk <= 0.0 || ll <= 0.0) {
        throw DegenerateError("rbf_cka: degenerate Gram matrix");
    }
    return cross / std::sqrt(kk * ll);
}

CalibrationReport calibration(const Matrix& logits, const std::vector<int>& labels,
                              int bin_count) {
    if (bin_count < 1) {
        throw InvalidArgument("calibration needs bin_count >= 1");
    }
    const int classes = logits.rows();
    const int n = logits.cols();
    if (static_cast<int>(labels.size()) != n) {
        throw DimensionError("calibration: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n) + " samples");
    }
    CalibrationReport report;
    report.bin_count = bin_count;
    report.n_test = n;
    report.bins.resize(bin_count);
    for (int i = 0; i < bin_count; ++i) {
        report.bins[i].lo = static_cast<double>(i) / bin_count;
        report.bins[i].hi = static_cast<double>(i + 1) / bin_count;
    }
    std::vector<double> col(classes);
    std::vector<int> correct(bin_count, 0);
    std::vector<double> conf_sum(bin_count, 0.0);
    for (int c = 0; c < n; ++c) {
        if (labels[c] < 0 || labels[c] >= classes) {
            throw InvalidArgument("calibration: label " + std::to_string(labels[c]) +
                                  " at sample " + std::to_string(c) + " outside [0, " +
                                  std::to_string(classes) + ")");
        }
        for (int r = 0; r < classes; ++r) col[r] = logits.at(r, c);
        std::vector<double> prob = softmax_temp(col, 1.0);
        int pred = 0;
        for (int r = 1; r < classes; ++r) {
            if (prob[r] > prob[pred]) pred = r;
        }
        const double conf = prob[pred];
        int bin = static_cast<int>(std::ceil(conf * bin_count));
        bin = std::min(std::max(bin, 1), bin_count) - 1;
        report.bins[bin].count += 1;
        conf_sum[bin] += conf;
        if (pred == labels[c]) correct[bin] += 1;
    }
    double ece = 0.0;
    for (int i = 0; i < bin_count; ++i) {
        CalibrationBin& bin = report.bins[i];
        if (bin.count > 0) {
            bin.accuracy = static_cast<double>(correct[i]) / bin.count;
            bin.confidence = conf_sum[i] / bin.count;
            ece += (static_cast<double>(bin.count) / n) * std::fabs(bin.accuracy - bin.confidence);
        }
    }
    report.ece = ece;
    return report;
}

AffinityTable class_affinity(const std::vector<Matrix>& projected, const Matrix& teacher,
                             const std::vector<int>& labels, int top_n) {
    if (projected.empty()) {
        throw InvalidArgument("class_affinity needs at least one projector output");
    }
    if (top_n < 1) {
        throw InvalidArgument("class_affinity needs top_n >= 1");
    }
    const int b = teacher.cols();
    if (static_cast<int>(labels.size()) != b) {
        throw DimensionError("class_affinity: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(b) + " samples");
    }
    std::map<int, int> class_counts;
    for (int label : labels) class_counts[label]++;
    if (static_cast<int>(class_counts.size()) < top_n) {
        throw InvalidArgument("class_affinity: only " + std::to_string(class_counts.size()) +
                              " distinct classes present, top_n is " + std::to_string(top_n));
    }
    AffinityTable table;
    table.top_n = top_n;
    for (const Matrix& g : projected) {
        if (!g.same_shape(teacher)) {
            throw DimensionError("class_affinity projector output " + g.shape_str() +
                                 " does not match teacher " + teacher.shape_str());
        }
        std::map<int, double> cos_sum;
        for (int c = 0; c < b; ++c) {
            double dot = 0.0;
            double gn2 = 0.0;
            double tn2 = 0.0;
            for (int r = 0; r < g.rows(); ++r) {
                dot += g.at(r, c) * teacher.at(r, c);
                gn2 += g.at(r, c) * g.at(r, c);
                tn2 += teacher.at(r, c) * teacher.at(r, c);
            }
            const double ng = std::max(std::sqrt(gn2), kNormEps);
            const double nt = std::max(std::sqrt(tn2), kNormEps);
            cos_sum[labels[c]] += dot / (ng * nt);
        }
        std::vector<AffinityEntry> ranked;
        ranked.reserve(class_counts.size());
        for (const auto& [label, count] : class_counts) {
            ranked.push_back({label, cos_sum[label] / count});
        }
        std::sort(ranked.begin(), ranked.end(), [](const AffinityEntry& a, const AffinityEntry& b2) {
            if (a.cosine != b2.cosine) return a.cosine > b2.cosine;
            return a.class_label < b2.class_label;
        });
        ranked.resize(top_n);
        table.per_projector.push_back(std::move(ranked));
    }
    return table;
}

std::string reliability_csv(const CalibrationReport& report) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,count,accuracy,confidence\n";
    for (const CalibrationBin& bin : report.bins) {
        out << format_double(bin.lo) << ',' << format_double(bin.hi) << ',' << bin.count << ','
            << format_double(bin.accuracy) << ',' << format_double(bin.confidence) << '\n';
    }
    return out.str();
}

std::string cka_series_csv(const CkaSeries& series) {
    std::ostringstream out;
    out << "epoch,cka\n";
    for (const auto& [epoch, value] : series.values) {
        out << epoch << ',' << format_double(value) << '\n';
    }
    return out.str();
}

std::string affinity_csv(const AffinityTable& table) {
    std::ostringstream out;
    out << "projector,rank,class,cosine\n";
    for (std::size_t k = 0; k < table.per_projector.size(); ++k) {
        const auto& ranked = table.per_projector[k];
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            out << k << ',' << (r + 1) << ',' << ranked[r].class_label << ','
                << format_double(ranked[r].cosine) << '\n';
        }
    }
    return out.str();
}

} // namespace distillbench
