#include "hv/audit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hv {

double kolmogorov_q(double lambda) {
    if (lambda <= 0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16 * std::abs(sum) || term < 1e-300) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
    if (a.size() < 5 || b.size() < 5)
        throw std::invalid_argument("ks_two_sample: both samples need size >= 5");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }

    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;

    KsResult out;
    out.statistic = d;
    out.p_value = kolmogorov_q(lambda);
    out.alpha = alpha;
    out.reject = out.p_value < alpha;
    return out;
}

KsBatteryResult ks_battery(const Mat& real_coeffs, const Mat& synth_pool, int runs,
                           double alpha, RngStream& rng) {
    if (real_coeffs.cols() != synth_pool.cols())
        throw std::invalid_argument("ks_battery: dimension mismatch");
    if (runs < 1) throw std::invalid_argument("ks_battery: runs must be positive");
    const auto n = real_coeffs.rows();
    if (synth_pool.rows() < n) throw std::invalid_argument("ks_battery: pool smaller than real set");
    const auto d = real_coeffs.cols();

    std::size_t accepted = 0;
    double p_sum = 0.0;
    std::vector<Eigen::Index> pool_rows(static_cast<std::size_t>(synth_pool.rows()));
    std::iota(pool_rows.begin(), pool_rows.end(), 0);

    for (int run = 0; run < runs; ++run) {
        RngStream sub = rng.substream(static_cast<std::uint64_t>(run));
        // Partial Fisher-Yates: the first n entries become the run's subset.
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto j = i + static_cast<Eigen::Index>(
                                   sub.below(static_cast<std::uint64_t>(pool_rows.size() - i)));
            std::swap(pool_rows[static_cast<std::size_t>(i)], pool_rows[static_cast<std::size_t>(j)]);
        }
        for (Eigen::Index dim = 0; dim < d; ++dim) {
            std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                a[static_cast<std::size_t>(i)] = real_coeffs(i, dim);
                b[static_cast<std::size_t>(i)] = synth_pool(pool_rows[static_cast<std::size_t>(i)], dim);
            }
            const KsResult r = ks_two_sample(std::move(a), std::move(b), alpha);
            if (!r.reject) ++accepted;
            p_sum += r.p_value;
        }
    }

    KsBatteryResult out;
    out.tests = static_cast<std::size_t>(runs) * static_cast<std::size_t>(d);
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(out.tests);
    out.mean_p = p_sum / static_cast<double>(out.tests);
    return out;
}

double angular_distance(const Template& a, const Template& b) {
    const double na = a.coeffs.norm(), nb = b.coeffs.norm();
    if (na == 0 || nb == 0) throw std::invalid_argument("angular_distance: zero vector");
    return 1.0 - a.coeffs.dot(b.coeffs) / (na * nb);
}

namespace {

double pair_distance(const Template& a, const Template& b, DistanceMetric metric) {
    return metric == DistanceMetric::Euclidean ? template_distance(a, b) : angular_distance(a, b);
}

}  // namespace

std::vector<double> pairwise_distance_sample(const std::vector<Template>& set,
                                             DistanceMetric metric, std::size_t max_pairs,
                                             RngStream& rng) {
    const std::size_t n = set.size();
    if (n < 2) throw std::invalid_argument("pairwise_distance_sample: need >= 2 templates");
    const std::size_t total = n * (n - 1) / 2;
    std::vector<double> out;
    if (total <= max_pairs) {
        out.reserve(total);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                out.push_back(pair_distance(set[i], set[j], metric));
    } else {
        out.reserve(max_pairs);
        for (std::size_t k = 0; k < max_pairs; ++k) {
            std::size_t i = rng.below(n), j = rng.below(n - 1);
            if (j >= i) ++j;
            out.push_back(pair_distance(set[i], set[j], metric));
        }
    }
    return out;
}

DistanceHistogram distance_distribution(const std::vector<Template>& set, DistanceMetric metric,
                                        int bins, std::size_t max_pairs, RngStream& rng) {
    if (bins < 1) throw std::invalid_argument("distance_distribution: invalid bins");
    const std::vector<double> dists = pairwise_distance_sample(set, metric, max_pairs, rng);
    const auto [lo_it, hi_it] = std::minmax_element(dists.begin(), dists.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) hi = lo + 1.0;  // single distinct value, one occupied bin

    DistanceHistogram h;
    h.metric = metric;
    h.sample_size = dists.size();
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        h.edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / bins;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (double x : dists) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        if (b >= h.counts.size()) b = h.counts.size() - 1;  // right edge inclusive
        ++h.counts[b];
    }
    return h;
}

double gaussian_space_distance(const Vec& sigma_a, const Vec& sigma_b) {
    if (sigma_a.size() != sigma_b.size())
        throw std::invalid_argument("gaussian_space_distance: dimension mismatch");
    if ((sigma_a.array() <= 0).any() || (sigma_b.array() <= 0).any())
        throw std::invalid_argument("gaussian_space_distance: non-positive sigma");
    // Bhattacharyya coefficient in log space to avoid underflow.
    double log_bc = 0.0;
    for (Eigen::Index i = 0; i < sigma_a.size(); ++i) {
        const double a = sigma_a(i), b = sigma_b(i);
        log_bc += 0.5 * std::log(2.0 * a * b / (a * a + b * b));
    }
    const double h2 = 1.0 - std::exp(log_bc);
    return std::sqrt(std::max(0.0, h2));
}

double tv_distance_1d(double sigma_a, double sigma_b) {
    if (!(sigma_a > 0) || !(sigma_b > 0))
        throw std::invalid_argument("tv_distance_1d: non-positive sigma");
    const double hi = 10.0 * std::max(sigma_a, sigma_b);
    const int n = 20000;  // Simpson panels over [-hi, hi]
    const double h = 2.0 * hi / n;
    auto f = [&](double x) {
        const double pa = std::exp(-0.5 * x * x / (sigma_a * sigma_a)) /
                          (sigma_a * std::sqrt(2.0 * M_PI));
        const double pb = std::exp(-0.5 * x * x / (sigma_b * sigma_b)) /
                          (sigma_b * std::sqrt(2.0 * M_PI));
        return std::abs(pa - pb);
    };
    double sum = f(-hi) + f(hi);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(-hi + i * h);
    return 0.5 * sum * h / 3.0;
}

RankingHistogram last_user_ranking(const Mat& real_coeffs, const std::vector<Template>& synth_pool,
                                   const Vec& system_sigma, int trials, int candidates_per_trial,
                                   int bins, RngStream& rng) {
    const auto n = real_coeffs.rows();
    const auto d = real_coeffs.cols();
    if (n < 3) throw std::invalid_argument("last_user_ranking: insufficient known faces");
    if (candidates_per_trial < 1 || trials < 1 || bins < 1)
        throw std::invalid_argument("last_user_ranking: invalid parameters");
    if (candidates_per_trial > 1 &&
        synth_pool.size() < static_cast<std::size_t>(candidates_per_trial - 1))
        throw std::invalid_argument("last_user_ranking: synthetic pool too small");
    if (system_sigma.size() != d) throw std::invalid_argument("last_user_ranking: sigma mismatch");

    RankingHistogram hist;
    hist.counts.assign(static_cast<std::size_t>(bins), 0);
    hist.trials = static_cast<std::size_t>(trials);

    for (int trial = 0; trial < trials; ++trial) {
        RngStream sub = rng.substream(static_cast<std::uint64_t>(trial));
        const auto held_out = static_cast<Eigen::Index>(sub.below(static_cast<std::uint64_t>(n)));

        // Known faces: every real row but the held-out one. Candidate sigma
        // shares their sums, so accumulate once.
        Vec sum = Vec::Zero(d), sum_sq = Vec::Zero(d);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i == held_out) continue;
            const Vec row = real_coeffs.row(i);
            sum += row;
            sum_sq += row.cwiseProduct(row);
        }
        const double total = static_cast<double>(n);  // known + candidate

        auto candidate_distance = [&](const Vec& cand) {
            const Vec s = sum + cand;
            const Vec sq = sum_sq + cand.cwiseProduct(cand);
            // Per-dimension sample std (n-1 denominator) of known + candidate.
            Vec var = (sq - s.cwiseProduct(s) / total) / (total - 1.0);
            var = var.cwiseMax(1e-300);
            return gaussian_space_distance(var.cwiseSqrt(), system_sigma);
        };

        const double real_dist = candidate_distance(real_coeffs.row(held_out));
        std::size_t strictly_less = 0, ties = 0;
        for (int c = 0; c < candidates_per_trial - 1; ++c) {
            const auto pick = sub.below(synth_pool.size());
            const double dist = candidate_distance(synth_pool[pick].coeffs);
            if (dist < real_dist) ++strictly_less;
            else if (dist == real_dist) ++ties;
        }
        // Uniform tie-break under the seeded stream.
        const std::size_t rank = strictly_less + (ties ? sub.below(ties + 1) : 0);
        const double percentile =
            static_cast<double>(rank) / static_cast<double>(candidates_per_trial);
        auto b = static_cast<std::size_t>(percentile * bins);
        if (b >= hist.counts.size()) b = hist.counts.size() - 1;
        ++hist.counts[b];
    }
    return hist;
}

double gamma_q(double a, double x) {
    if (a <= 0 || x < 0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0) return 1.0;
    if (x < a + 1.0) {
        // Series for P(a, x), Q = 1 - P.
        double ap = a, term = 1.0 / a, sum = term;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return std::clamp(1.0 - p, 0.0, 1.0);
    }
    // Continued fraction for Q(a, x) (modified Lentz).
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    const double q = h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    return std::clamp(q, 0.0, 1.0);
}

double chi_square_uniformity_p(const std::vector<std::size_t>& counts) {
    if (counts.size() < 2) throw std::invalid_argument("chi_square_uniformity_p: need >= 2 bins");
    const double total = static_cast<double>(
        std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (total == 0) throw std::invalid_argument("chi_square_uniformity_p: empty histogram");
    const double expected = total / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (std::size_t c : counts) {
        const double diff = static_cast<double>(c) - expected;
        chi2 += diff * diff / expected;
    }
    const double dof = static_cast<double>(counts.size() - 1);
    return gamma_q(dof / 2.0, chi2 / 2.0);
}

PartialLeakReport partial_leak_experiment(const Vault& vault,
                                          const std::vector<Template>& insider_probes,
                                          const std::vector<Template>& outsider_probes,
                                          int num_coeffs, double percentile,
                                          std::size_t sample_size, RngStream& rng,
                                          int num_threads) {
    if (num_coeffs < 1 || num_coeffs > vault.dim)
        throw std::invalid_argument("partial_leak: num_coeffs out of range");
    if (insider_probes.empty() || outsider_probes.empty())
        throw std::invalid_argument("partial_leak: empty probe set");
    if (!(percentile > 0) || percentile >= 1)
        throw std::invalid_argument("partial_leak: percentile must be in (0, 1)");
    if (static_cast<double>(sample_size) * percentile < 1.0)
        throw std::invalid_argument("partial_leak: sample_size too small for percentile");
    const std::size_t n = vault.size();
    if (n < 2) throw std::invalid_argument("partial_leak: vault too small");

    // Truncation keeps the leading (highest-variance) coefficients.
    Mat trunc(static_cast<Eigen::Index>(n), num_coeffs);
    for (std::size_t i = 0; i < n; ++i)
        trunc.row(static_cast<Eigen::Index>(i)) = vault.records[i].tmpl.coeffs.head(num_coeffs);

    // Threshold: the stated percentile of sampled mutual distances.
    std::vector<double> mutual(sample_size);
    for (std::size_t k = 0; k < sample_size; ++k) {
        std::size_t i = rng.below(n), j = rng.below(n - 1);
        if (j >= i) ++j;
        mutual[k] = (trunc.row(static_cast<Eigen::Index>(i)) -
                     trunc.row(static_cast<Eigen::Index>(j))).norm();
    }
    std::sort(mutual.begin(), mutual.end());
    const auto qidx = static_cast<std::size_t>(
        std::ceil(percentile * static_cast<double>(sample_size))) - 1;
    const double threshold = mutual[std::min(qidx, sample_size - 1)];

    auto below_rate = [&](const std::vector<Template>& probes) {
        std::size_t below = 0;
        const auto np = static_cast<std::int64_t>(probes.size());
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(num_threads) reduction(+ : below) if (num_threads > 1)
#endif
        for (std::int64_t p = 0; p < np; ++p) {
            const Vec q = probes[static_cast<std::size_t>(p)].coeffs.head(num_coeffs);
            double best_sq = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < trunc.rows(); ++i)
                best_sq = std::min(best_sq, (trunc.row(i).transpose() - q).squaredNorm());
            if (best_sq < threshold * threshold) ++below;
        }
        return static_cast<double>(below) / static_cast<double>(probes.size());
    };

    PartialLeakReport report;
    report.num_coeffs = num_coeffs;
    report.threshold = threshold;
    report.insider_below_rate = below_rate(insider_probes);
    report.outsider_below_rate = below_rate(outsider_probes);
    return report;
}

double exfil_time_seconds(double file_bytes, double bandwidth_bits_per_second) {
    if (!(file_bytes > 0) || !(bandwidth_bits_per_second > 0))
        throw std::invalid_argument("exfil_time: inputs must be positive");
    return 8.0 * file_bytes / bandwidth_bits_per_second;
}

double membership_cost_estimate(double vault_size, double per_attempt_seconds) {
    if (!(vault_size > 0) || !(per_attempt_seconds > 0))
        throw std::invalid_argument("membership_cost_estimate: inputs must be positive");
    return vault_size * per_attempt_seconds;
}

}  // namespace hv
