// honeyvault: operator front-end for the face-space vault pipeline.
//
// Subcommands cover the whole lifecycle: synthesize a toy corpus, fit the
// appearance model, enroll real users, inflate the vault with honey
// templates, verify probes, run the two-server login simulation, and run the
// audit battery. Every stochastic subcommand requires a seed (flag, config
// file, or the HONEYVAULT_SEED environment variable) and is byte-for-byte
// reproducible from it. Exit codes: 0 success, 1 domain error (and verify
// rejection), 2 usage error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hv/audit.hpp"
#include "hv/authn.hpp"
#include "hv/detail/bytes.hpp"
#include "hv/honeycheck.hpp"
#include "hv/model_io.hpp"
#include "hv/synth.hpp"
#include "hv/vault.hpp"

namespace {

using namespace hv;

// ---------------------------------------------------------------------------
// Toy corpus file "HFT1": magic, u32 version = 1, u32 subject count,
// u32 shape dimension, u32 texture dimension, then per subject the shape
// vector followed by the texture vector, all little-endian 64-bit floats.

struct CorpusFile {
    std::vector<ShapeVector> shapes;
    std::vector<TextureVector> textures;
};

void save_corpus(const CorpusFile& corpus, const std::string& path) {
    detail::ByteWriter w;
    w.magic("HFT1");
    w.u32(1);
    w.u32(static_cast<std::uint32_t>(corpus.shapes.size()));
    w.u32(static_cast<std::uint32_t>(corpus.shapes.empty() ? 0 : corpus.shapes[0].size()));
    w.u32(static_cast<std::uint32_t>(corpus.textures.empty() ? 0 : corpus.textures[0].size()));
    for (std::size_t i = 0; i < corpus.shapes.size(); ++i) {
        for (Eigen::Index j = 0; j < corpus.shapes[i].size(); ++j) w.f64(corpus.shapes[i](j));
        for (Eigen::Index j = 0; j < corpus.textures[i].size(); ++j) w.f64(corpus.textures[i](j));
    }
    write_file_bytes(path, w.take());
}

CorpusFile load_corpus(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    detail::ByteReader r(bytes);
    r.expect_magic("HFT1", "corpus");
    if (r.u32() != 1) throw std::runtime_error("corpus: unsupported version");
    const std::uint32_t n = r.u32(), sdim = r.u32(), tdim = r.u32();
    CorpusFile corpus;
    corpus.shapes.resize(n);
    corpus.textures.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        corpus.shapes[i] = Vec(sdim);
        for (std::uint32_t j = 0; j < sdim; ++j) corpus.shapes[i](j) = r.f64();
        corpus.textures[i] = Vec(tdim);
        for (std::uint32_t j = 0; j < tdim; ++j) corpus.textures[i](j) = r.f64();
    }
    r.expect_done("corpus");
    return corpus;
}

// ---------------------------------------------------------------------------
// Report plumbing: the effective configuration plus results as key=value
// lines, written to --out when given and summarized on stdout.

class Report {
public:
    void kv(const std::string& key, const std::string& value) {
        lines_.push_back(key + "=" + value);
    }
    void kv(const std::string& key, double value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", value);
        kv(key, std::string(buf));
    }
    void kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }

    void write(const std::string& path) const {
        if (path.empty()) return;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open report path: " + path);
        for (const auto& l : lines_) out << l << "\n";
    }

private:
    std::vector<std::string> lines_;
};

// Configuration files are flat key=value lists addressing the options of
// whichever subcommand was invoked. The stock reader namespaces keys by
// subcommand, so prefix-free keys are re-parented onto the parsed
// subcommand path here; explicitly dotted or sectioned keys pass through.
class FlatConfig : public CLI::ConfigTOML {
public:
    explicit FlatConfig(const CLI::App* app) : app_(app) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        std::vector<CLI::ConfigItem> items = CLI::ConfigTOML::from_config(input);
        std::vector<std::string> path;
        for (const CLI::App* a = app_; a;) {
            const auto parsed = a->get_subcommands();
            if (parsed.empty()) break;
            path.push_back(parsed.front()->get_name());
            a = parsed.front();
        }
        for (CLI::ConfigItem& item : items)
            if (item.parents.empty()) item.parents = path;
        return items;
    }

private:
    const CLI::App* app_;
};

void record_options(const CLI::App& cmd, Report& report) {
    for (const CLI::Option* opt : cmd.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "out") continue;
        std::string value = opt->count() > 0 ? opt->as<std::string>() : opt->get_default_str();
        report.kv("config." + name, value);
    }
}

// Seed resolution: the --seed flag (or its config-file key) wins; otherwise
// HONEYVAULT_SEED; a stochastic command with neither is a usage error.
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
    if (seed_opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("HONEYVAULT_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CLI::ValidationError("HONEYVAULT_SEED is not an unsigned integer");
        }
    }
    throw CLI::RequiredError("--seed (or HONEYVAULT_SEED)");
}

void check_vault_binding(const Vault& vault, const FaceSpace& space) {
    if (vault.space_id != model_digest(space))
        throw std::runtime_error("vault was built against a different model (digest mismatch)");
    if (vault.dim != space.dim()) throw std::runtime_error("vault/model dimension mismatch");
}

std::vector<std::string> load_realdb(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open real-user list: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) names.push_back(line);
    return names;
}

Vec gaussian_coeffs(const FaceSpace& space, RngStream& rng) {
    Vec c(space.dim());
    for (int j = 0; j < space.dim(); ++j) c(j) = space.sigma(j) * rng.gaussian();
    return c;
}

Mat corpus_coefficients(const CorpusFile& corpus, const FaceSpace& space) {
    Mat coeffs(static_cast<Eigen::Index>(corpus.shapes.size()), space.dim());
    for (std::size_t i = 0; i < corpus.shapes.size(); ++i)
        coeffs.row(static_cast<Eigen::Index>(i)) =
            encode(corpus.shapes[i], corpus.textures[i], space);
    return coeffs;
}

std::string humanize_seconds(double s) {
    char buf[64];
    if (s < 120.0)
        std::snprintf(buf, sizeof buf, "%.4g s", s);
    else if (s < 2.0 * 86400.0)
        std::snprintf(buf, sizeof buf, "%.4g s (%.3g hours)", s, s / 3600.0);
    else if (s < 2.0 * 365.25 * 86400.0)
        std::snprintf(buf, sizeof buf, "%.4g s (%.3g days)", s, s / 86400.0);
    else
        std::snprintf(buf, sizeof buf, "%.4g s (%.5g years)", s, s / (365.25 * 86400.0));
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"honeyvault: face-space vault construction, authentication, and audits"};
    app.require_subcommand(1);
    app.set_config("--config")->description("flat key=value configuration file");
    app.config_formatter(std::make_shared<FlatConfig>(&app));
    app.failure_message(CLI::FailureMessage::simple);

    std::string out_path;
    app.add_option("--out", out_path, "write a machine-readable key=value report here")
        ->configurable(false);

    // --- toy-corpus ---------------------------------------------------------
    auto* cmd_corpus = app.add_subcommand("toy-corpus", "synthesize a ground-truth corpus");
    std::uint64_t tc_seed = 0;
    int tc_subjects = 500, tc_landmarks = 60, tc_texture = 150, tc_dim = 80;
    double tc_noise = 0.0;
    std::string tc_out;
    auto* tc_seed_opt = cmd_corpus->add_option("--seed", tc_seed, "generator seed");
    cmd_corpus->add_option("--subjects", tc_subjects, "number of subjects")->capture_default_str();
    cmd_corpus->add_option("--landmarks", tc_landmarks, "landmarks per face")->capture_default_str();
    cmd_corpus->add_option("--texture-dim", tc_texture, "texture samples per face")->capture_default_str();
    cmd_corpus->add_option("--dim", tc_dim, "planted latent dimension")->capture_default_str();
    cmd_corpus->add_option("--noise", tc_noise, "isotropic observation noise scale")->capture_default_str();
    cmd_corpus->add_option("--corpus-out", tc_out, "output corpus path")->required();

    // --- fit ----------------------------------------------------------------
    auto* cmd_fit = app.add_subcommand("fit", "fit the appearance model from a corpus");
    std::string fit_corpus, fit_out;
    int fit_dim = 80, fit_m = 0, fit_t = 0;
    double fit_w = 0.0, fit_k = 7.0;
    int fit_subjects = 0;
    cmd_fit->add_option("--corpus", fit_corpus, "input corpus path")->required();
    cmd_fit->add_option("--subjects", fit_subjects,
                        "fit on the first N subjects only (0 = all); leaves the "
                        "rest as hold-outs for the audits");
    cmd_fit->add_option("--dim", fit_dim, "combined-model dimension d")->capture_default_str();
    cmd_fit->add_option("--shape-components", fit_m, "shape components (default: d)");
    cmd_fit->add_option("--texture-components", fit_t, "texture components (default: d)");
    cmd_fit->add_option("--weight", fit_w, "shape weight w (<=0 selects the variance ratio)")->capture_default_str();
    cmd_fit->add_option("--shell-factor", fit_k, "shell factor k")->capture_default_str();
    cmd_fit->add_option("--model-out", fit_out, "output model path")->required();

    // --- enroll -------------------------------------------------------------
    auto* cmd_enroll = app.add_subcommand("enroll", "enroll real users into a fresh vault");
    std::string en_corpus, en_model, en_out, en_prefix = "user", en_realdb;
    int en_count = 0;
    cmd_enroll->add_option("--corpus", en_corpus, "corpus providing the probes")->required();
    cmd_enroll->add_option("--model", en_model, "fitted model path")->required();
    cmd_enroll->add_option("--count", en_count, "number of subjects to enroll")->required();
    cmd_enroll->add_option("--prefix", en_prefix, "username prefix")->capture_default_str();
    cmd_enroll->add_option("--vault-out", en_out, "output vault path")->required();
    cmd_enroll->add_option("--realdb-out", en_realdb,
                           "write enrolled usernames here (honeychecker state)");

    // --- inflate ------------------------------------------------------------
    auto* cmd_inflate = app.add_subcommand("inflate", "add honey records up to a target count");
    std::string in_vault, in_model, in_out;
    std::uint64_t in_seed = 0, in_target = 10000;
    double in_min_dist = 4800.0;
    int in_threads = 1;
    cmd_inflate->add_option("--vault", in_vault, "input vault path")->required();
    cmd_inflate->add_option("--model", in_model, "fitted model path")->required();
    cmd_inflate->add_option("--target", in_target, "total record count after inflation")->capture_default_str();
    cmd_inflate->add_option("--min-dist", in_min_dist, "minimum pairwise separation")->capture_default_str();
    cmd_inflate->add_option("--threads", in_threads, "sampling threads")->capture_default_str();
    auto* in_seed_opt = cmd_inflate->add_option("--seed", in_seed, "generator seed");
    cmd_inflate->add_option("--vault-out", in_out, "output vault path")->required();

    // --- verify -------------------------------------------------------------
    auto* cmd_verify = app.add_subcommand("verify", "verify a corpus probe against a vault");
    std::string vf_vault, vf_model, vf_corpus, vf_user;
    int vf_subject = 0;
    double vf_threshold = 0.0;
    cmd_verify->add_option("--vault", vf_vault, "vault path")->required();
    cmd_verify->add_option("--model", vf_model, "fitted model path")->required();
    cmd_verify->add_option("--corpus", vf_corpus, "corpus providing the probe")->required();
    cmd_verify->add_option("--subject", vf_subject, "probe subject index")->capture_default_str();
    cmd_verify->add_option("--user", vf_user, "claimed username")->required();
    cmd_verify->add_option("--threshold", vf_threshold, "acceptance threshold")->required();

    // --- serve-sim ----------------------------------------------------------
    auto* cmd_serve = app.add_subcommand(
        "serve-sim", "bounded two-server login simulation over a vault");
    std::string sv_vault, sv_model, sv_realdb;
    std::uint64_t sv_seed = 0, sv_attempts = 1000;
    double sv_threshold = 0.0;
    cmd_serve->add_option("--vault", sv_vault, "vault path")->required();
    cmd_serve->add_option("--model", sv_model, "fitted model path")->required();
    cmd_serve->add_option("--realdb", sv_realdb, "real-username list (one per line)")->required();
    cmd_serve->add_option("--threshold", sv_threshold, "acceptance threshold")->required();
    cmd_serve->add_option("--attempts", sv_attempts, "number of scripted login attempts")->capture_default_str();
    auto* sv_seed_opt = cmd_serve->add_option("--seed", sv_seed, "script seed");

    // --- audit --------------------------------------------------------------
    auto* cmd_audit = app.add_subcommand("audit", "statistical and leak audits");
    cmd_audit->require_subcommand(1);

    auto* cmd_ks = cmd_audit->add_subcommand("ks", "per-dimension two-sample KS battery");
    std::string ks_corpus, ks_model;
    std::uint64_t ks_seed = 0;
    int ks_runs = 50, ks_pool = 5000;
    double ks_alpha = 0.05;
    cmd_ks->add_option("--corpus", ks_corpus, "corpus of real faces")->required();
    cmd_ks->add_option("--model", ks_model, "fitted model path")->required();
    cmd_ks->add_option("--runs", ks_runs, "battery repetitions")->capture_default_str();
    cmd_ks->add_option("--alpha", ks_alpha, "per-test significance level")->capture_default_str();
    cmd_ks->add_option("--pool", ks_pool, "synthetic pool size")->capture_default_str();
    auto* ks_seed_opt = cmd_ks->add_option("--seed", ks_seed, "sampling seed");

    auto* cmd_dist = cmd_audit->add_subcommand(
        "distances", "real-real vs synthetic-synthetic distance distributions");
    std::string di_corpus, di_model;
    std::uint64_t di_seed = 0, di_pairs = 10000;
    int di_bins = 100;
    double di_alpha = 0.01;
    cmd_dist->add_option("--corpus", di_corpus, "corpus of real faces")->required();
    cmd_dist->add_option("--model", di_model, "fitted model path")->required();
    cmd_dist->add_option("--pairs", di_pairs, "sampled pairs per set")->capture_default_str();
    cmd_dist->add_option("--bins", di_bins, "histogram bins in the report")->capture_default_str();
    cmd_dist->add_option("--alpha", di_alpha, "KS significance level")->capture_default_str();
    auto* di_seed_opt = cmd_dist->add_option("--seed", di_seed, "sampling seed");

    auto* cmd_rank = cmd_audit->add_subcommand("ranking", "last-user ranking attack");
    std::string rk_corpus, rk_model;
    std::uint64_t rk_seed = 0;
    int rk_trials = 100, rk_candidates = 100, rk_bins = 10, rk_pool = 10000, rk_skip = 0;
    cmd_rank->add_option("--corpus", rk_corpus,
                         "corpus of real faces; must be disjoint from the model's "
                         "training subjects, or the attack wins trivially because the "
                         "held-out face completes the fitted variances exactly")
        ->required();
    cmd_rank->add_option("--skip", rk_skip,
                         "drop the first N corpus subjects (the ones the model was "
                         "fit on with fit --subjects N)");
    cmd_rank->add_option("--model", rk_model, "fitted model path")->required();
    cmd_rank->add_option("--trials", rk_trials, "hold-out trials")->capture_default_str();
    cmd_rank->add_option("--candidates", rk_candidates, "candidates per trial")->capture_default_str();
    cmd_rank->add_option("--bins", rk_bins, "percentile bins")->capture_default_str();
    cmd_rank->add_option("--pool", rk_pool, "synthetic candidate pool size")->capture_default_str();
    auto* rk_seed_opt = cmd_rank->add_option("--seed", rk_seed, "sampling seed");

    auto* cmd_leak = cmd_audit->add_subcommand("partial-leak", "leading-coefficient leak test");
    std::string pl_vault, pl_model, pl_realdb;
    std::uint64_t pl_seed = 0, pl_samples = 1000000;
    int pl_coeffs = 10, pl_outsiders = 2000, pl_threads = 1;
    double pl_percentile = 1e-4;
    cmd_leak->add_option("--vault", pl_vault, "leaked vault path")->required();
    cmd_leak->add_option("--model", pl_model, "fitted model path")->required();
    cmd_leak->add_option("--realdb", pl_realdb, "insider usernames (one per line)")->required();
    cmd_leak->add_option("--coeffs", pl_coeffs, "leading coefficients leaked")->capture_default_str();
    cmd_leak->add_option("--percentile", pl_percentile, "mutual-distance threshold percentile")
        ->capture_default_str();
    cmd_leak->add_option("--samples", pl_samples, "mutual-distance sample size")->capture_default_str();
    cmd_leak->add_option("--outsiders", pl_outsiders, "outsider probe count")->capture_default_str();
    cmd_leak->add_option("--threads", pl_threads, "probe-scan threads")->capture_default_str();
    auto* pl_seed_opt = cmd_leak->add_option("--seed", pl_seed, "sampling seed");

    // --- exfil --------------------------------------------------------------
    auto* cmd_exfil = app.add_subcommand("exfil", "exfiltration-time arithmetic");
    double ex_bytes = 0.0, ex_bps = 0.0;
    cmd_exfil->add_option("--bytes", ex_bytes, "file size in bytes")->required();
    cmd_exfil->add_option("--bps", ex_bps, "channel bandwidth in bits per second")->required();

    // Let --out and --config appear after the subcommand name as well.
    for (CLI::App* sc : app.get_subcommands(nullptr)) {
        sc->fallthrough();
        for (CLI::App* leaf : sc->get_subcommands(nullptr)) leaf->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Report report;
    int exit_code = 0;
    try {
        if (*cmd_corpus) {
            record_options(*cmd_corpus, report);
            const std::uint64_t seed = resolve_seed(tc_seed_opt, tc_seed);
            report.kv("seed", seed);
            const ToyCorpus corpus = make_toy_corpus(seed, tc_subjects, tc_landmarks,
                                                     tc_texture, tc_dim, tc_noise);
            save_corpus(CorpusFile{corpus.shapes, corpus.textures}, tc_out);
            report.kv("subjects", static_cast<std::uint64_t>(corpus.shapes.size()));
            std::printf("toy-corpus: wrote %d subjects to %s\n", tc_subjects, tc_out.c_str());
        } else if (*cmd_fit) {
            record_options(*cmd_fit, report);
            CorpusFile corpus = load_corpus(fit_corpus);
            if (fit_subjects > 0) {
                if (static_cast<std::size_t>(fit_subjects) > corpus.shapes.size())
                    throw std::runtime_error("fit: --subjects exceeds the corpus size");
                corpus.shapes.resize(static_cast<std::size_t>(fit_subjects));
                corpus.textures.resize(static_cast<std::size_t>(fit_subjects));
            }
            const int m = fit_m > 0 ? fit_m : fit_dim;
            const int t = fit_t > 0 ? fit_t : fit_dim;
            const ShapeModel sm = build_shape_model(corpus.shapes, m);
            const TextureModel tm = build_texture_model(corpus.textures, t);
            const FaceSpace space =
                build_face_space(sm, tm, corpus.shapes, corpus.textures, fit_w, fit_dim, fit_k);
            save_model(space, fit_out);
            report.kv("dim", static_cast<std::uint64_t>(space.dim()));
            report.kv("shape_weight", space.shape_weight);
            report.kv("sigma_max", space.sigma(0));
            report.kv("sigma_min", space.sigma(space.dim() - 1));
            std::printf("fit: d=%d w=%.6g sigma=[%.6g..%.6g] -> %s\n", space.dim(),
                        space.shape_weight, space.sigma(0), space.sigma(space.dim() - 1),
                        fit_out.c_str());
        } else if (*cmd_enroll) {
            record_options(*cmd_enroll, report);
            const CorpusFile corpus = load_corpus(en_corpus);
            const FaceSpace space = load_model(en_model);
            if (en_count < 1 || static_cast<std::size_t>(en_count) > corpus.shapes.size())
                throw std::runtime_error("enroll: --count outside the corpus size");
            std::vector<Enrollment> entries;
            for (int i = 0; i < en_count; ++i)
                entries.push_back(Enrollment{en_prefix + std::to_string(i),
                                             corpus.shapes[static_cast<std::size_t>(i)],
                                             corpus.textures[static_cast<std::size_t>(i)]});
            const Vault vault = create_vault(space, entries);
            save_vault(vault, en_out);
            if (!en_realdb.empty()) {
                std::ofstream db(en_realdb);
                if (!db) throw std::runtime_error("cannot open " + en_realdb);
                for (const auto& e : entries) db << e.username << "\n";
            }
            report.kv("enrolled", static_cast<std::uint64_t>(entries.size()));
            std::printf("enroll: %d users -> %s\n", en_count, en_out.c_str());
        } else if (*cmd_inflate) {
            record_options(*cmd_inflate, report);
            const std::uint64_t seed = resolve_seed(in_seed_opt, in_seed);
            report.kv("seed", seed);
            const FaceSpace space = load_model(in_model);
            const Vault vault = load_vault(in_vault);
            check_vault_binding(vault, space);
            RngStream rng(seed);
            GenerationStats stats;
            GenerateOptions opts;
            opts.num_threads = in_threads;
            const Vault out = inflate(vault, space, in_target, in_min_dist, rng,
                                      default_name_corpus(), opts, &stats);
            save_vault(out, in_out);
            report.kv("records", static_cast<std::uint64_t>(out.size()));
            report.kv("accepted", stats.accepted);
            report.kv("rejected", stats.rejected);
            report.kv("wall_seconds", stats.wall_seconds);
            std::printf("inflate: %zu -> %zu records (rejected %llu, %.3g s) -> %s\n",
                        vault.size(), out.size(),
                        static_cast<unsigned long long>(stats.rejected), stats.wall_seconds,
                        in_out.c_str());
        } else if (*cmd_verify) {
            record_options(*cmd_verify, report);
            const FaceSpace space = load_model(vf_model);
            const Vault vault = load_vault(vf_vault);
            check_vault_binding(vault, space);
            const CorpusFile corpus = load_corpus(vf_corpus);
            if (vf_subject < 0 || static_cast<std::size_t>(vf_subject) >= corpus.shapes.size())
                throw std::runtime_error("verify: --subject outside the corpus");
            const AuthDecision d =
                verify(vault, space, vf_user, corpus.shapes[static_cast<std::size_t>(vf_subject)],
                       corpus.textures[static_cast<std::size_t>(vf_subject)], vf_threshold);
            report.kv("accepted", static_cast<std::uint64_t>(d.accepted ? 1 : 0));
            report.kv("distance", d.distance);
            report.kv("threshold", d.threshold);
            std::printf("%s, distance %.6g (threshold %.6g)\n",
                        d.accepted ? "accept" : "reject", d.distance, d.threshold);
            exit_code = d.accepted ? 0 : 1;
        } else if (*cmd_serve) {
            record_options(*cmd_serve, report);
            const std::uint64_t seed = resolve_seed(sv_seed_opt, sv_seed);
            report.kv("seed", seed);
            const FaceSpace space = load_model(sv_model);
            const Vault vault = load_vault(sv_vault);
            check_vault_binding(vault, space);
            HoneycheckerDb db;
            for (const auto& name : load_realdb(sv_realdb)) db.real_usernames.insert(name);
            FrontServer front(vault, space, sv_threshold, FrontServer::local_transport(db));

            std::vector<const VaultRecord*> real_records, honey_records;
            for (const auto& r : vault.records)
                (db.real_usernames.count(r.username) ? real_records : honey_records)
                    .push_back(&r);
            if (real_records.empty() || honey_records.empty())
                throw std::runtime_error("serve-sim: vault must hold real and honey records");

            RngStream rng(seed);
            std::uint64_t counts[4] = {0, 0, 0, 0};
            for (std::uint64_t i = 0; i < sv_attempts; ++i) {
                RngStream sub = rng.substream(i);
                LoginOutcome outcome;
                switch (i % 3) {
                    case 0: {  // legitimate credential replay by a real user
                        const auto* r = real_records[sub.below(real_records.size())];
                        outcome = front.handle_login(r->username, r->tmpl);
                        break;
                    }
                    case 1: {  // attacker replaying a leaked honey record
                        const auto* r = honey_records[sub.below(honey_records.size())];
                        outcome = front.handle_login(r->username, r->tmpl);
                        break;
                    }
                    default: {  // blind credential guess
                        const auto& target = vault.records[sub.below(vault.size())];
                        outcome = front.handle_login(target.username, sample_template(space, sub));
                        break;
                    }
                }
                ++counts[static_cast<int>(outcome)];
            }
            report.kv("attempts", sv_attempts);
            report.kv("rejected", counts[0]);
            report.kv("accepted_real", counts[1]);
            report.kv("accepted_honey", counts[2]);
            report.kv("accepted_pending", counts[3]);
            report.kv("alarms", static_cast<std::uint64_t>(front.alarms().size()));
            std::printf("serve-sim: %llu attempts: %llu rejected, %llu real, %llu honey "
                        "(alarms %zu), %llu pending\n",
                        static_cast<unsigned long long>(sv_attempts),
                        static_cast<unsigned long long>(counts[0]),
                        static_cast<unsigned long long>(counts[1]),
                        static_cast<unsigned long long>(counts[2]), front.alarms().size(),
                        static_cast<unsigned long long>(counts[3]));
            for (const auto& alarm : front.alarms()) std::printf("%s\n", format_alarm(alarm).c_str());
        } else if (*cmd_ks) {
            record_options(*cmd_ks, report);
            const std::uint64_t seed = resolve_seed(ks_seed_opt, ks_seed);
            report.kv("seed", seed);
            const FaceSpace space = load_model(ks_model);
            const CorpusFile corpus = load_corpus(ks_corpus);
            const Mat real = corpus_coefficients(corpus, space);
            RngStream rng(seed);
            Mat pool(ks_pool, space.dim());
            for (int i = 0; i < ks_pool; ++i) pool.row(i) = gaussian_coeffs(space, rng);
            RngStream battery_rng = rng.substream(1);
            const KsBatteryResult r = ks_battery(real, pool, ks_runs, ks_alpha, battery_rng);
            report.kv("tests", static_cast<std::uint64_t>(r.tests));
            report.kv("acceptance_rate", r.acceptance_rate);
            report.kv("mean_p", r.mean_p);
            std::printf("audit ks: %zu tests, acceptance %.2f%%, mean p %.4f\n", r.tests,
                        100.0 * r.acceptance_rate, r.mean_p);
        } else if (*cmd_dist) {
            record_options(*cmd_dist, report);
            const std::uint64_t seed = resolve_seed(di_seed_opt, di_seed);
            report.kv("seed", seed);
            const FaceSpace space = load_model(di_model);
            const CorpusFile corpus = load_corpus(di_corpus);
            std::vector<Template> real, synth;
            RngStream rng(seed);
            for (std::size_t i = 0; i < corpus.shapes.size(); ++i) {
                real.push_back(Template{encode(corpus.shapes[i], corpus.textures[i], space)});
                synth.push_back(Template{gaussian_coeffs(space, rng)});
            }
            for (DistanceMetric metric : {DistanceMetric::Euclidean, DistanceMetric::Angular}) {
                const char* name = metric == DistanceMetric::Euclidean ? "euclidean" : "angular";
                RngStream ra = rng.substream(metric == DistanceMetric::Euclidean ? 1 : 2);
                RngStream rb = rng.substream(metric == DistanceMetric::Euclidean ? 3 : 4);
                auto dr = pairwise_distance_sample(real, metric, di_pairs, ra);
                auto ds = pairwise_distance_sample(synth, metric, di_pairs, rb);
                const KsResult ks = ks_two_sample(dr, ds, di_alpha);
                report.kv(std::string(name) + ".D", ks.statistic);
                report.kv(std::string(name) + ".p", ks.p_value);
                report.kv(std::string(name) + ".reject", static_cast<std::uint64_t>(ks.reject));
                std::printf("audit distances (%s): D=%.4f p=%.4f -> %s\n", name, ks.statistic,
                            ks.p_value, ks.reject ? "REJECT" : "no rejection");
                RngStream rh = rng.substream(metric == DistanceMetric::Euclidean ? 5 : 6);
                const DistanceHistogram h =
                    distance_distribution(real, metric, di_bins, di_pairs, rh);
                for (std::size_t b = 0; b < h.counts.size(); ++b)
                    report.kv(std::string(name) + ".hist." + std::to_string(b),
                              static_cast<std::uint64_t>(h.counts[b]));
            }
        } else if (*cmd_rank) {
            record_options(*cmd_rank, report);
            const std::uint64_t seed = resolve_seed(rk_seed_opt, rk_seed);
            report.kv("seed", seed);
            const FaceSpace space = load_model(rk_model);
            CorpusFile corpus = load_corpus(rk_corpus);
            if (rk_skip > 0) {
                if (static_cast<std::size_t>(rk_skip) >= corpus.shapes.size())
                    throw std::runtime_error("audit ranking: --skip leaves no subjects");
                corpus.shapes.erase(corpus.shapes.begin(), corpus.shapes.begin() + rk_skip);
                corpus.textures.erase(corpus.textures.begin(), corpus.textures.begin() + rk_skip);
            }
            const Mat real = corpus_coefficients(corpus, space);
            RngStream rng(seed);
            std::vector<Template> pool;
            for (int i = 0; i < rk_pool; ++i) pool.push_back(Template{gaussian_coeffs(space, rng)});
            RngStream trial_rng = rng.substream(1);
            const RankingHistogram h = last_user_ranking(real, pool, space.sigma, rk_trials,
                                                         rk_candidates, rk_bins, trial_rng);
            const double p = chi_square_uniformity_p(h.counts);
            report.kv("trials", static_cast<std::uint64_t>(h.trials));
            report.kv("chi_square_p", p);
            for (std::size_t b = 0; b < h.counts.size(); ++b)
                report.kv("hist." + std::to_string(b),
                          static_cast<std::uint64_t>(h.counts[b]));
            std::printf("audit ranking: %zu trials, chi-square uniformity p = %.4f\n", h.trials, p);
        } else if (*cmd_leak) {
            record_options(*cmd_leak, report);
            const std::uint64_t seed = resolve_seed(pl_seed_opt, pl_seed);
            report.kv("seed", seed);
            const FaceSpace space = load_model(pl_model);
            const Vault vault = load_vault(pl_vault);
            check_vault_binding(vault, space);
            std::vector<Template> insiders;
            for (const auto& name : load_realdb(pl_realdb)) {
                const VaultRecord* rec = vault.find(name);
                if (!rec) throw std::runtime_error("partial-leak: " + name + " not in the vault");
                insiders.push_back(rec->tmpl);
            }
            RngStream rng(seed);
            std::vector<Template> outsiders;
            for (int i = 0; i < pl_outsiders; ++i) outsiders.push_back(sample_template(space, rng));
            RngStream exp_rng = rng.substream(1);
            const PartialLeakReport r =
                partial_leak_experiment(vault, insiders, outsiders, pl_coeffs, pl_percentile,
                                        pl_samples, exp_rng, pl_threads);
            report.kv("num_coeffs", static_cast<std::uint64_t>(r.num_coeffs));
            report.kv("threshold", r.threshold);
            report.kv("insider_below_rate", r.insider_below_rate);
            report.kv("outsider_below_rate", r.outsider_below_rate);
            std::printf("audit partial-leak: %d coefficients, threshold %.6g, insider %.4f, "
                        "outsider %.4f\n",
                        r.num_coeffs, r.threshold, r.insider_below_rate, r.outsider_below_rate);
        } else if (*cmd_exfil) {
            record_options(*cmd_exfil, report);
            const double seconds = exfil_time_seconds(ex_bytes, ex_bps);
            report.kv("seconds", seconds);
            std::printf("exfil: %s\n", humanize_seconds(seconds).c_str());
        }
        report.write(out_path);
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
