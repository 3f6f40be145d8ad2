#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hv/facespace.hpp"
#include "hv/rng.hpp"
#include "hv/vault.hpp"

namespace hv {

struct KsResult {
    double statistic = 0.0;  // D = sup |ECDF_a - ECDF_b|
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
};

// Two-sample Kolmogorov-Smirnov test. p-value from the asymptotic Kolmogorov
// series with the standard small-sample correction,
// lambda = (sqrt(n_e) + 0.12 + 0.11/sqrt(n_e)) * D, n_e = na*nb/(na+nb).
// Requires both samples of size >= 5.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha);

// Survival function Q(lambda) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsBatteryResult {
    double acceptance_rate = 0.0;  // fraction of tests not rejecting
    double mean_p = 0.0;
    std::size_t tests = 0;
};

// Repeats the per-dimension KS comparison `runs` times, re-sampling the
// synthetic subset (same size as the real set) from the pool each run, and
// aggregates over runs * d tests.
KsBatteryResult ks_battery(const Mat& real_coeffs, const Mat& synth_pool, int runs,
                           double alpha, RngStream& rng);

// One minus the cosine of the included angle; in [0, 2].
double angular_distance(const Template& a, const Template& b);

enum class DistanceMetric { Euclidean, Angular };

struct DistanceHistogram {
    DistanceMetric metric = DistanceMetric::Euclidean;
    std::vector<double> edges;   // strictly increasing, size = bins + 1
    std::vector<std::size_t> counts;
    std::size_t sample_size = 0;  // equals sum of counts
};

// Unordered-pair distances: exhaustive when the pair count fits in
// max_pairs, uniformly sampled otherwise.
std::vector<double> pairwise_distance_sample(const std::vector<Template>& set,
                                             DistanceMetric metric, std::size_t max_pairs,
                                             RngStream& rng);

DistanceHistogram distance_distribution(const std::vector<Template>& set, DistanceMetric metric,
                                        int bins, std::size_t max_pairs, RngStream& rng);

// Hellinger distance between two zero-mean diagonal Gaussians (closed form).
// Symmetric, zero iff the vectors are equal.
double gaussian_space_distance(const Vec& sigma_a, const Vec& sigma_b);

// 1-D total variation between N(0, a^2) and N(0, b^2) by numerical
// integration (Simpson); reported alongside the Hellinger figure.
double tv_distance_1d(double sigma_a, double sigma_b);

struct RankingHistogram {
    std::vector<std::size_t> counts;  // percentile bins
    std::size_t trials = 0;
};

// Last-user ranking attack: each trial holds out one real face, forms
// candidate sets of (known reals + candidate), ranks candidates by the
// statistical distance between the candidate-set sigma and system_sigma,
// and records the percentile of the held-out real face. Ties break
// uniformly at random under the seeded stream.
RankingHistogram last_user_ranking(const Mat& real_coeffs, const std::vector<Template>& synth_pool,
                                   const Vec& system_sigma, int trials, int candidates_per_trial,
                                   int bins, RngStream& rng);

// Pearson chi-square p-value for uniformity of a histogram.
double chi_square_uniformity_p(const std::vector<std::size_t>& counts);

// Regularized upper incomplete gamma Q(a, x) (used by the chi-square test).
double gamma_q(double a, double x);

struct PartialLeakReport {
    int num_coeffs = 0;
    double threshold = 0.0;
    double insider_below_rate = 0.0;
    double outsider_below_rate = 0.0;
};

// Truncates the vault to the leading num_coeffs coefficients, sets the
// threshold at the given percentile (fraction) of sample_size sampled mutual
// distances, then reports the fraction of each probe set whose minimum
// distance to the truncated vault falls below it.
PartialLeakReport partial_leak_experiment(const Vault& vault,
                                          const std::vector<Template>& insider_probes,
                                          const std::vector<Template>& outsider_probes,
                                          int num_coeffs, double percentile,
                                          std::size_t sample_size, RngStream& rng,
                                          int num_threads = 1);

// 8 * file_bytes / bandwidth, exact rational arithmetic in doubles.
double exfil_time_seconds(double file_bytes, double bandwidth_bits_per_second);

// vault_size * per_attempt_seconds; documentation-grade estimator for the
// brute-force membership attack.
double membership_cost_estimate(double vault_size, double per_attempt_seconds);

}  // namespace hv
