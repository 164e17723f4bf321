#include "beem/bench/experiment.hpp"

#include "beem/baselines/em.hpp"
#include "beem/baselines/mhmm.hpp"
#include "beem/datagen.hpp"
#include "beem/log.hpp"
#include "beem/metrics.hpp"
#include "beem/models/gaussian.hpp"
#include "beem/models/gp.hpp"
#include "beem/models/hmm.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <variant>

namespace beem::bench {
namespace {

using nlohmann::json;

struct Dataset {
    std::variant<LabeledVectors, LabeledSequences> data;

    const Labels& labels() const {
        return std::visit([](const auto& d) -> const Labels& { return d.labels; }, data);
    }
    std::size_t num_classes() const {
        return std::visit([](const auto& d) { return d.num_classes; }, data);
    }
};

Dataset make_dataset(const DatasetSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case DatasetKind::Square: return {gen_square(spec.counts, spec.side, spec.var, seed)};
        case DatasetKind::Rainbow: return {gen_rainbow(spec.n, spec.radius, spec.clusters, seed)};
        case DatasetKind::RandomHmm: return {gen_random_hmms(spec.hmm, seed)};
        case DatasetKind::Sinusoid: return {gen_sinusoid_association(spec.variant, seed, spec.sinusoid)};
        case DatasetKind::Csv: return {load_labeled_csv(spec.path, spec.label_column)};
        case DatasetKind::Corpus: return {load_sequence_corpus(spec.path, spec.classes)};
    }
    throw std::logic_error("unknown dataset kind");
}

BeemConfig beem_config(const ExperimentConfig& c, std::uint64_t seed) {
    BeemConfig b;
    b.tau0 = c.hyper.tau0;
    b.alpha = c.hyper.alpha;
    b.patience = c.hyper.patience;
    b.max_iters = c.hyper.max_iters;
    b.termination = c.hyper.termination;
    b.epsilon = c.hyper.epsilon;
    b.weight_mode = c.weight_mode.value_or(WeightMode::UniformFixed);
    b.seed = seed;
    return b;
}

FitReport fit_gmm(const ExperimentConfig& c, const LabeledVectors& d, std::uint64_t seed) {
    std::span<const Vector> pts(d.points);
    if (c.method == Method::Beem) {
        const BeemConfig b = beem_config(c, seed);
        std::vector<GaussianComponent> start;
        if (c.init == InitKey::B) {
            start = beem_init_B(pts, c.k, seed);
        } else {
            // key A: means drawn from the observations
            Rng rng(seed);
            start = init_random_observations(pts, c.k, rng).components;
        }
        std::vector<GaussianModel> models;
        for (auto& comp : start) models.emplace_back(std::move(comp));
        return beem_fit_from<Vector, GaussianModel>(pts, std::move(models), b);
    }
    EmConfig e;
    e.max_iters = c.hyper.em_max_iters.value_or(500);
    e.tol = c.hyper.em_tol.value_or(1e-6);
    e.init = c.init == InitKey::B ? EmInit::KMeans : EmInit::RandomObservations;
    e.seed = seed;
    switch (c.method) {
        case Method::Em: return em_fit_gmm(pts, c.k, e).report;
        case Method::EmRestarts: return em_restarts(pts, c.k, c.hyper.restarts, e).report;
        case Method::Daem: {
            DaemConfig dc;
            dc.beta_schedule = c.hyper.beta_schedule;
            dc.inner_iters = c.hyper.inner_iters;
            return daem_fit_gmm(pts, c.k, dc, e).report;
        }
        case Method::Beem: break;
    }
    throw std::logic_error("unreachable");
}

FitReport fit_mhmm(const ExperimentConfig& c, const LabeledSequences& d, std::uint64_t seed) {
    std::span<const Sequence> seqs(d.sequences);
    const Eigen::Index states = c.hyper.hmm_states;
    if (c.method == Method::Beem) {
        const int iters = c.hyper.hmm_fit_iters;
        return beem_fit<Sequence, HmmModel>(
            seqs, c.k,
            [seed, states, iters](std::size_t j) {
                HmmModel::Options o;
                o.states = states;
                o.fit_iters = iters;
                o.seed = seed * 31 + j;
                return HmmModel(o);
            },
            beem_config(c, seed));
    }
    MhmmEmConfig e;
    if (c.hyper.em_tol) e.tol = *c.hyper.em_tol;
    if (c.hyper.em_max_iters) e.max_iters = *c.hyper.em_max_iters;
    std::vector<HmmComponent> init;
    if (c.init == InitKey::Smyth) {
        SmythOptions so;
        so.per_sequence_iters = c.hyper.smyth_iters;
        so.group_iters = c.hyper.smyth_iters;
        init = smyth_init(seqs, c.k, states, seed, so);
    } else {
        Rng rng(seed);
        init = mhmm_init_random(seqs, c.k, states, rng);
    }
    return em_fit_mhmm(seqs, std::move(init), e).report;
}

FitReport fit_mgp(const ExperimentConfig& c, const LabeledVectors& d, std::uint64_t seed) {
    const std::vector<GpPoint> pts = to_gp_points(d);
    GpModel::Options o;
    o.kernel.family = c.hyper.gp_kernel == "periodic" ? KernelFamily::Periodic : KernelFamily::Rbf;
    o.kernel.output_variance = c.hyper.gp_output_variance;
    o.kernel.lengthscale = c.hyper.gp_lengthscale;
    o.kernel.period = c.hyper.gp_period;
    o.noise_variance = c.hyper.gp_noise;
    o.fit_noise = c.hyper.gp_fit_noise;
    o.budget = c.hyper.gp_budget;
    o.score = c.hyper.gp_score == "leave_one_out" ? GpScore::LeaveOneOut : GpScore::LeaveIn;
    return beem_fit<GpPoint, GpModel>(std::span<const GpPoint>(pts), c.k, [o](std::size_t) { return GpModel(o); },
                                      beem_config(c, seed));
}

FitReport fit(const ExperimentConfig& c, const Dataset& d, std::uint64_t seed) {
    switch (c.family) {
        case ModelFamily::Gmm: return fit_gmm(c, std::get<LabeledVectors>(d.data), seed);
        case ModelFamily::Mhmm: return fit_mhmm(c, std::get<LabeledSequences>(d.data), seed);
        case ModelFamily::Mgp: return fit_mgp(c, std::get<LabeledVectors>(d.data), seed);
    }
    throw std::logic_error("unknown model family");
}

double purity_of(const Labels& truth, const Labels& pred) { return purity_acc(contingency(truth, pred)); }

RunRecord evaluate(const ExperimentConfig& c, const Dataset& d, int index, std::uint64_t seed) {
    RunRecord best;
    bool have = false;
    for (int attempt = 0; attempt < c.hyper.best_of; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt) * 1000003ULL;
        RunRecord r;
        r.index = index;
        r.seed = seed;
        r.truth = d.labels();
        r.report = fit(c, d, s);
        const Contingency ct = contingency(r.truth, r.report.labels);
        r.acc = purity_acc(ct);
        r.homo = homogeneity(ct);
        r.nmi = nmi(ct);
        r.ari = ari(ct);
        r.em_steps = r.report.em_steps;
        if (!have || r.acc > best.acc) {
            best = std::move(r);
            have = true;
        }
    }
    best.ok = true;
    for (const Labels& l : best.report.label_trace) best.purity_trace.push_back(purity_of(best.truth, l));

    if (c.k == 2 && d.num_classes() == 2 && best.report.responsibilities.cols() == 2) {
        // Cluster matched to class 1: the pairing that agrees with more labels.
        long long agree = 0;
        for (std::size_t i = 0; i < best.truth.size(); ++i) agree += (best.truth[i] == 1) == (best.report.labels[i] == 1);
        const Eigen::Index col = 2 * agree >= static_cast<long long>(best.truth.size()) ? 1 : 0;
        best.class1_scores.resize(best.truth.size());
        std::vector<int> positive(best.truth.size());
        for (std::size_t i = 0; i < best.truth.size(); ++i) {
            best.class1_scores[i] = best.report.responsibilities(static_cast<Eigen::Index>(i), col);
            positive[i] = best.truth[i] == 1 ? 1 : 0;
        }
        best.auroc = roc_auroc(best.class1_scores, positive).auroc;
    }
    return best;
}

std::string fmt(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

json stat_json(const Stat& s) { return json{{"mean", s.mean}, {"std", s.std}}; }
Stat stat_from(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

Stat mean_std(const std::vector<double>& values) {
    Stat s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

RunRecord run_once(const ExperimentConfig& config, int index, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset d = make_dataset(config.dataset, config.dataset.seed.value_or(seed));
    RunRecord r = evaluate(config, d, index, seed);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    const int repeats = options.repeats.value_or(config.repeats);
    if (repeats < 1) throw ConfigError("repeats must be at least 1");

    // File datasets and fixed-seed datasets are shared by every run.
    std::optional<Dataset> shared;
    if (config.dataset.is_file() || config.dataset.seed) {
        shared = make_dataset(config.dataset, config.dataset.seed.value_or(0));
    }

    std::vector<RunRecord> runs(static_cast<std::size_t>(repeats));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < repeats; i = next++) {
            const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
            RunRecord& slot = runs[static_cast<std::size_t>(i)];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                if (shared) {
                    slot = evaluate(config, *shared, i, seed);
                } else {
                    slot = run_once(config, i, seed);
                }
            } catch (const std::exception& e) {
                slot = RunRecord{};
                slot.index = i;
                slot.seed = seed;
                slot.error = e.what();
            }
            slot.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int jobs = std::max(1, std::min(options.jobs, repeats));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    ExperimentResult result;
    ResultRow& row = result.row;
    row.experiment = config.name;
    row.method = std::string(method_name(config.method));
    if (config.method == Method::EmRestarts) row.method = "EM_RESTARTS(" + std::to_string(config.hyper.restarts) + ")";
    row.init = std::string(init_name(config.init));
    row.weight = std::string(weight_name(config));
    row.family = std::string(family_name(config.family));

    std::vector<double> acc, homo, nmi_v, ari_v, steps, wall;
    for (const RunRecord& r : runs) {
        if (!r.ok) {
            ++row.failures;
            warn(config.name + ": run " + std::to_string(r.index) + " (seed " + std::to_string(r.seed) + ") failed: " + r.error);
            continue;
        }
        acc.push_back(r.acc);
        homo.push_back(r.homo);
        nmi_v.push_back(r.nmi);
        ari_v.push_back(r.ari);
        steps.push_back(r.em_steps);
        wall.push_back(r.wall_seconds);
    }
    row.runs = static_cast<int>(acc.size());
    row.acc = mean_std(acc);
    row.homo = mean_std(homo);
    row.nmi = mean_std(nmi_v);
    row.ari = mean_std(ari_v);
    row.em_steps = mean_std(steps);
    row.wall_seconds = mean_std(wall);

    if (!options.trace_dir.empty()) {
        for (const RunRecord& r : runs) {
            if (!r.ok) continue;
            char name[32];
            std::snprintf(name, sizeof name, "run_%04d.csv", r.index);
            emit_traces(r.report, r.truth, options.trace_dir / name);
        }
    }
    if (row.failures * 10 > repeats) {
        throw ExperimentFailure(config.name + ": " + std::to_string(row.failures) + " of " + std::to_string(repeats) +
                                " runs failed");
    }
    result.runs = std::move(runs);
    return result;
}

std::string table_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "method,init,weight,ACC_mean,ACC_std,Homo_mean,Homo_std,NMI_mean,NMI_std,ARI_mean,ARI_std,"
           "em_steps_mean,em_steps_std,experiment,family,runs,failures\n";
    for (const ResultRow& r : rows) {
        out << r.method << ',' << r.init << ',' << r.weight;
        for (const Stat* s : {&r.acc, &r.homo, &r.nmi, &r.ari, &r.em_steps}) {
            out << ',' << fmt(s->mean, "%.4f") << ',' << fmt(s->std, "%.4f");
        }
        out << ',' << r.experiment << ',' << r.family << ',' << r.runs << ',' << r.failures << '\n';
    }
    return out.str();
}

void emit_table(const std::vector<ResultRow>& rows, TableFormat format, const std::filesystem::path& path) {
    if (rows.empty()) throw std::invalid_argument("emit_table: no rows");
    std::ofstream out = open_out(path);
    if (format == TableFormat::Csv) {
        out << table_csv(rows);
    } else {
        json arr = json::array();
        for (const ResultRow& r : rows) {
            arr.push_back({{"experiment", r.experiment},
                           {"method", r.method},
                           {"init", r.init},
                           {"weight", r.weight},
                           {"family", r.family},
                           {"ACC", stat_json(r.acc)},
                           {"Homo", stat_json(r.homo)},
                           {"NMI", stat_json(r.nmi)},
                           {"ARI", stat_json(r.ari)},
                           {"em_steps", stat_json(r.em_steps)},
                           {"runs", r.runs},
                           {"failures", r.failures}});
        }
        out << arr.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<ResultRow> read_table_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    const json arr = json::parse(in);
    std::vector<ResultRow> rows;
    for (const json& j : arr) {
        ResultRow r;
        r.experiment = j.at("experiment").get<std::string>();
        r.method = j.at("method").get<std::string>();
        r.init = j.at("init").get<std::string>();
        r.weight = j.at("weight").get<std::string>();
        r.family = j.at("family").get<std::string>();
        r.acc = stat_from(j.at("ACC"));
        r.homo = stat_from(j.at("Homo"));
        r.nmi = stat_from(j.at("NMI"));
        r.ari = stat_from(j.at("ARI"));
        r.em_steps = stat_from(j.at("em_steps"));
        r.runs = j.at("runs").get<int>();
        r.failures = j.at("failures").get<int>();
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_wall_times(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "experiment,method,init,weight,runs,wall_seconds_mean,wall_seconds_std\n";
    for (const ResultRow& r : rows) {
        out << r.experiment << ',' << r.method << ',' << r.init << ',' << r.weight << ',' << r.runs << ','
            << fmt(r.wall_seconds.mean, "%.4f") << ',' << fmt(r.wall_seconds.std, "%.4f") << '\n';
    }
}

void emit_traces(const FitReport& report, const Labels& truth, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "iteration,cluster_index,cluster_size,complete_data_loglik,temperature,purity\n";
    const bool have_purity = !truth.empty() && report.label_trace.size() == report.size_trace.size();
    for (std::size_t t = 0; t < report.size_trace.size(); ++t) {
        std::string purity;
        if (have_purity) purity = fmt(purity_of(truth, report.label_trace[t]), "%.6f");
        const std::string ll = t < report.loglik_trace.size() ? fmt(report.loglik_trace[t], "%.10g") : "";
        const std::string temp = t < report.temp_trace.size() ? fmt(report.temp_trace[t], "%.10g") : "";
        for (std::size_t k = 0; k < report.size_trace[t].size(); ++k) {
            out << t + 1 << ',' << k << ',' << report.size_trace[t][k] << ',' << ll << ',' << temp << ',' << purity << '\n';
        }
    }
}

ExperimentResult run_and_write(const ExperimentConfig& config, const std::filesystem::path& outdir, RunOptions options) {
    options.trace_dir = outdir / "traces" / config.name;
    ExperimentResult result = run_experiment(config, options);
    emit_table({result.row}, TableFormat::Csv, outdir / (config.name + ".csv"));
    emit_table({result.row}, TableFormat::Json, outdir / (config.name + ".json"));
    emit_wall_times({result.row}, outdir / (config.name + "_wall_time.csv"));
    return result;
}

}  // namespace beem::bench
