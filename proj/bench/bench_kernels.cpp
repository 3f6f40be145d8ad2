// Compares the serial reference implementations of the parallel kernels
// against their OpenMP counterparts: same inputs, results checked for
// agreement, wall times reported side by side.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

#include "hv/audit.hpp"
#include "hv/facespace.hpp"
#include "hv/model_io.hpp"
#include "hv/synth.hpp"
#include "hv/vault.hpp"

using namespace hv;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename F>
std::pair<double, double> timed(F&& f) {
    const double t0 = now_seconds();
    const double result = f();
    return {result, now_seconds() - t0};
}

void row(const char* name, double serial_s, double parallel_s, bool agree) {
    std::printf("%-28s %10.4f s %12.4f s %8.2fx   %s\n", name, serial_s, parallel_s,
                serial_s / parallel_s, agree ? "results agree" : "RESULTS DIFFER");
}

}  // namespace

int main() {
    int threads = 1;
#if defined(_OPENMP)
    threads = omp_get_max_threads();
#endif
    std::printf("hardware threads available: %d\n", threads);
    std::printf("%-28s %12s %14s %9s\n", "kernel", "serial", "parallel", "speedup");

    const ToyCorpus corpus = make_toy_corpus(97, 500, 60, 150, 80, 0.0);
    const ShapeModel sm = build_shape_model(corpus.shapes, 80);
    const TextureModel tm = build_texture_model(corpus.textures, 80);
    const FaceSpace space = build_face_space(sm, tm, corpus.shapes, corpus.textures, 1.0, 80, 7.0);

    bool all_agree = true;

    {  // exhaustive pairwise minimum
        std::vector<Template> set;
        RngStream rng(11);
        for (int i = 0; i < 4000; ++i) {
            RngStream sub = rng.substream(i);
            set.push_back(sample_template(space, sub));
        }
        const auto [d_serial, t_serial] = timed([&] { return min_pairwise_distance_serial(set); });
        const auto [d_par, t_par] = timed([&] { return min_pairwise_distance(set, threads); });
        const bool agree = d_serial == d_par;
        all_agree = all_agree && agree;
        row("min pairwise distance", t_serial, t_par, agree);
    }

    {  // minimum-separation rejection sampling
        auto run = [&](int n_threads) {
            SeparationIndex index(4800.0);
            RngStream rng(13);
            GenerateOptions opts;
            opts.num_threads = n_threads;
            return generate_honey(space, index, 30000, 4800.0, rng, opts).first;
        };
        const double t0 = now_seconds();
        const std::vector<Template> serial_out = run(1);
        const double t_serial = now_seconds() - t0;
        const double t1 = now_seconds();
        const std::vector<Template> par_out = run(threads);
        const double t_par = now_seconds() - t1;
        bool agree = serial_out.size() == par_out.size();
        for (std::size_t i = 0; agree && i < serial_out.size(); ++i)
            agree = serial_out[i].coeffs == par_out[i].coeffs;
        all_agree = all_agree && agree;
        row("honey generation", t_serial, t_par, agree);
    }

    {  // truncated-vault probe scan
        Vault vault;
        vault.space_id = model_digest(space);
        vault.dim = space.dim();
        RngStream rng(17);
        for (int i = 0; i < 30000; ++i) {
            RngStream sub = rng.substream(i);
            char name[32];
            std::snprintf(name, sizeof name, "u%06d", i);
            vault.records.push_back(VaultRecord{name, sample_template(space, sub)});
        }
        std::vector<Template> insiders, outsiders;
        for (int i = 0; i < 200; ++i) insiders.push_back(vault.records[static_cast<std::size_t>(i)].tmpl);
        RngStream out_rng = rng.substream(40000);
        for (int i = 0; i < 800; ++i) outsiders.push_back(sample_template(space, out_rng));
        auto run = [&](int n_threads) {
            RngStream exp_rng(19);
            return partial_leak_experiment(vault, insiders, outsiders, 10, 1e-4, 200000, exp_rng,
                                           n_threads);
        };
        const double t0 = now_seconds();
        const PartialLeakReport serial_r = run(1);
        const double t_serial = now_seconds() - t0;
        const double t1 = now_seconds();
        const PartialLeakReport par_r = run(threads);
        const double t_par = now_seconds() - t1;
        const bool agree = serial_r.threshold == par_r.threshold &&
                           serial_r.insider_below_rate == par_r.insider_below_rate &&
                           serial_r.outsider_below_rate == par_r.outsider_below_rate;
        all_agree = all_agree && agree;
        row("partial-leak probe scan", t_serial, t_par, agree);
    }

    return all_agree ? 0 : 1;
}
