#include "beem/bench/suite.hpp"

#include "beem/log.hpp"
#include "beem/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace beem::bench {
namespace {

constexpr double kNoSd = -1.0;

ExperimentConfig base(const std::string& name, Method m, ModelFamily f, InitKey init, std::size_t k) {
    ExperimentConfig c;
    c.name = name;
    c.method = m;
    c.family = f;
    c.init = init;
    c.k = k;
    if (m == Method::Beem) c.weight_mode = WeightMode::UniformFixed;
    return c;
}

ExperimentConfig with_weight(ExperimentConfig c, WeightMode w) {
    c.weight_mode = w;
    return c;
}

// The six vector-data rows shared by rainbow and iris.
std::vector<SuiteEntry> vector_rows(const std::string& prefix, const DatasetSpec& d, std::size_t k,
                                    const std::array<Reference, 6>& ref) {
    std::vector<SuiteEntry> rows{
        {base(prefix + "_em_B", Method::Em, ModelFamily::Gmm, InitKey::B, k), ref[0]},
        {base(prefix + "_beem_B", Method::Beem, ModelFamily::Gmm, InitKey::B, k), ref[1]},
        {base(prefix + "_em100_A", Method::EmRestarts, ModelFamily::Gmm, InitKey::A, k), ref[2]},
        {base(prefix + "_em_A", Method::Em, ModelFamily::Gmm, InitKey::A, k), ref[3]},
        {base(prefix + "_beem_A", Method::Beem, ModelFamily::Gmm, InitKey::A, k), ref[4]},
        {base(prefix + "_daem_A", Method::Daem, ModelFamily::Gmm, InitKey::A, k), ref[5]},
    };
    for (auto& e : rows) e.config.dataset = d;
    return rows;
}

std::vector<SuiteEntry> hmm_rows(const std::string& prefix, const DatasetSpec& d, std::size_t k,
                                 const std::array<Reference, 3>& ref) {
    std::vector<SuiteEntry> rows{
        {base(prefix + "_em_A", Method::Em, ModelFamily::Mhmm, InitKey::A, k), ref[0]},
        {base(prefix + "_em_Smyth", Method::Em, ModelFamily::Mhmm, InitKey::Smyth, k), ref[1]},
        {base(prefix + "_beem_A", Method::Beem, ModelFamily::Mhmm, InitKey::A, k), ref[2]},
    };
    for (auto& e : rows) e.config.dataset = d;
    return rows;
}

std::string fmt(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void write_gp_outputs(const ExperimentConfig& c, const ExperimentResult& r, const std::filesystem::path& outdir,
                      std::ostream& log) {
    std::size_t longest = 0;
    for (const RunRecord& run : r.runs) longest = std::max(longest, run.purity_trace.size());
    {
        std::ofstream out(outdir / (c.name + "_purity.csv"));
        out << "update,purity_mean,purity_std,runs\n";
        for (std::size_t t = 0; t < longest; ++t) {
            std::vector<double> v;
            for (const RunRecord& run : r.runs) {
                if (run.ok && t < run.purity_trace.size()) v.push_back(run.purity_trace[t]);
            }
            const Stat s = mean_std(v);
            out << t + 1 << ',' << fmt(s.mean) << ',' << fmt(s.std) << ',' << v.size() << '\n';
        }
    }
    std::vector<double> aurocs;
    for (const RunRecord& run : r.runs) {
        if (run.ok && run.auroc) aurocs.push_back(*run.auroc);
    }
    for (const RunRecord& run : r.runs) {
        if (!run.ok || run.class1_scores.empty()) continue;
        std::vector<int> positive(run.truth.size());
        for (std::size_t i = 0; i < run.truth.size(); ++i) positive[i] = run.truth[i] == 1;
        const RocCurve roc = roc_auroc(run.class1_scores, positive);
        std::ofstream out(outdir / (c.name + "_roc.csv"));
        out << "false_positive_rate,true_positive_rate\n";
        for (std::size_t i = 0; i < roc.false_positive_rate.size(); ++i) {
            out << fmt(roc.false_positive_rate[i], "%.6f") << ',' << fmt(roc.true_positive_rate[i], "%.6f") << '\n';
        }
        break;
    }
    const Stat a = mean_std(aurocs);
    std::ofstream out(outdir / (c.name + "_auroc.csv"));
    out << "experiment,AUROC_mean,AUROC_std,runs\n" << c.name << ',' << fmt(a.mean) << ',' << fmt(a.std) << ',' << aurocs.size() << '\n';

    double first = 0.0, last = 0.0;
    int n = 0;
    for (const RunRecord& run : r.runs) {
        if (!run.ok || run.purity_trace.empty()) continue;
        first += run.purity_trace.front();
        last += run.purity_trace.back();
        ++n;
    }
    if (n > 0) {
        log << "  " << c.name << ": final purity " << fmt(r.row.acc.mean) << " (" << fmt(r.row.acc.std)
            << "), purity at first update " << fmt(first / n) << ", at last update " << fmt(last / n) << ", AUROC "
            << fmt(a.mean) << '\n';
    }
}

}  // namespace

int SuiteSummary::flagged() const {
    int n = 0;
    for (const SuiteCell& c : cells) n += c.flagged;
    return n;
}

double tolerance(double reference_sd) { return reference_sd < 0.0 ? kToleranceFloor : std::max(2.0 * reference_sd, kToleranceFloor); }

std::vector<SuiteTable> suite_tables(const std::filesystem::path& data_dir) {
    std::vector<SuiteTable> tables;

    DatasetSpec square;
    square.kind = DatasetKind::Square;
    tables.push_back({"unbalanced_square",
                      {
                          {base("unbalanced_square_beem_A_I", Method::Beem, ModelFamily::Gmm, InitKey::A, 4),
                           {0.99, 0.02, 0.96, 0.05, 0.96, 0.07, 0.94, 0.11}},
                          {with_weight(base("unbalanced_square_beem_A_II", Method::Beem, ModelFamily::Gmm, InitKey::A, 4),
                                       WeightMode::Learned),
                           {0.85, 0.11, 0.76, 0.18, 0.85, 0.12, 0.72, 0.22}},
                          {base("unbalanced_square_em100_A", Method::EmRestarts, ModelFamily::Gmm, InitKey::A, 4),
                           {1.00, 0.00, 1.00, 0.00, 1.00, 0.00, 1.00, 0.00}},
                          {base("unbalanced_square_em_A", Method::Em, ModelFamily::Gmm, InitKey::A, 4),
                           {0.86, 0.11, 0.76, 0.18, 0.86, 0.11, 0.75, 0.21}},
                          {base("unbalanced_square_daem_A", Method::Daem, ModelFamily::Gmm, InitKey::A, 4),
                           {0.85, 0.12, 0.76, 0.19, 0.84, 0.12, 0.73, 0.22}},
                      },
                      {}});
    for (auto& e : tables.back().entries) e.config.dataset = square;

    DatasetSpec balanced = square;
    balanced.counts = {50, 50, 50, 50};
    tables.push_back({"balanced_square",
                      {
                          {base("balanced_square_beem_A_I", Method::Beem, ModelFamily::Gmm, InitKey::A, 4),
                           {0.91, 0.12, 0.90, 0.13, 0.93, 0.10, 0.87, 0.18}},
                          {with_weight(base("balanced_square_beem_A_II", Method::Beem, ModelFamily::Gmm, InitKey::A, 4),
                                       WeightMode::Learned),
                           {0.75, 0.09, 0.74, 0.09, 0.85, 0.07, 0.71, 0.09}},
                      },
                      {}});
    for (auto& e : tables.back().entries) e.config.dataset = balanced;

    DatasetSpec rainbow;
    rainbow.kind = DatasetKind::Rainbow;
    tables.push_back({"rainbow",
                      vector_rows("rainbow", rainbow, 8,
                                  {{{0.93, 0.05, 0.89, 0.04, 0.89, 0.04, 0.87, 0.08},
                                    {0.96, 0.00, 0.91, 0.01, 0.91, 0.01, 0.91, 0.01},
                                    {0.49, 0.14, 0.51, 0.14, 0.62, 0.10, 0.41, 0.14},
                                    {0.43, 0.05, 0.46, 0.06, 0.61, 0.05, 0.33, 0.07},
                                    {0.93, 0.05, 0.89, 0.04, 0.89, 0.04, 0.87, 0.06},
                                    {0.75, 0.08, 0.75, 0.06, 0.79, 0.06, 0.66, 0.09}}}),
                      {}});

    DatasetSpec iris;
    iris.kind = DatasetKind::Csv;
    iris.path = data_dir / "iris.csv";
    iris.label_column = "species";
    tables.push_back({"iris",
                      vector_rows("iris", iris, 3,
                                  {{{0.97, 0.02, 0.90, 0.03, 0.90, 0.03, 0.91, 0.04},
                                    {0.97, 0.03, 0.90, 0.01, 0.90, 0.02, 0.90, 0.04},
                                    {0.81, 0.13, 0.72, 0.14, 0.76, 0.10, 0.68, 0.16},
                                    {0.76, 0.05, 0.61, 0.06, 0.62, 0.06, 0.55, 0.06},
                                    {0.87, 0.07, 0.72, 0.10, 0.73, 0.10, 0.69, 0.11},
                                    {0.78, 0.02, 0.61, 0.01, 0.62, 0.01, 0.55, 0.01}}}),
                      "iris.csv"});

    DatasetSpec short_hmm;
    short_hmm.kind = DatasetKind::RandomHmm;
    short_hmm.hmm.len_lo = 5;
    short_hmm.hmm.len_hi = 10;
    tables.push_back({"random_hmm_L5-10",
                      hmm_rows("random_hmm_L5-10", short_hmm, 3,
                               {{{0.51, 0.07, 0.13, 0.07, 0.13, 0.08, 0.09, 0.07},
                                 {0.47, 0.07, 0.09, 0.07, 0.11, 0.08, 0.05, 0.07},
                                 {0.49, 0.06, 0.09, 0.06, 0.10, 0.07, 0.07, 0.07}}}),
                      {}});
    DatasetSpec long_hmm = short_hmm;
    long_hmm.hmm.len_lo = 20;
    long_hmm.hmm.len_hi = 50;
    tables.push_back({"random_hmm_L20-50",
                      hmm_rows("random_hmm_L20-50", long_hmm, 3,
                               {{{0.80, 0.15, 0.64, 0.22, 0.67, 0.20, 0.60, 0.24},
                                 {0.71, 0.13, 0.51, 0.18, 0.56, 0.18, 0.49, 0.20},
                                 {0.87, 0.11, 0.68, 0.19, 0.69, 0.19, 0.68, 0.21}}}),
                      {}});

    DatasetSpec chars_ab;
    chars_ab.kind = DatasetKind::Corpus;
    chars_ab.path = data_dir / "characters";
    chars_ab.classes = {"A", "B"};
    DatasetSpec chars_ae = chars_ab;
    chars_ae.classes = {"A", "B", "C", "D", "E"};
    tables.push_back({"characters_AB",
                      hmm_rows("characters_AB", chars_ab, 2,
                               {{{1.0, kNoSd, 1.0, kNoSd, 1.0, kNoSd, 1.0, kNoSd},
                                 {1.0, kNoSd, 1.0, kNoSd, 1.0, kNoSd, 1.0, kNoSd},
                                 {1.0, kNoSd, 1.0, kNoSd, 1.0, kNoSd, 1.0, kNoSd}}}),
                      "characters"});
    tables.push_back({"characters_AE",
                      hmm_rows("characters_AE", chars_ae, 5,
                               {{{0.96, kNoSd, 0.90, kNoSd, 0.91, kNoSd, 0.90, kNoSd},
                                 {0.96, kNoSd, 0.90, kNoSd, 0.91, kNoSd, 0.89, kNoSd},
                                 {0.98, kNoSd, 0.95, kNoSd, 0.95, kNoSd, 0.96, kNoSd}}}),
                      "characters"});
    for (auto* name : {"characters_AB", "characters_AE"}) {
        for (auto& t : tables) {
            if (t.name != name) continue;
            for (auto& e : t.entries) {
                e.config.repeats = 1;
                e.config.hyper.best_of = 3;
            }
        }
    }
    for (auto& t : tables) {
        for (auto& e : t.entries) e.config.validate();
    }
    return tables;
}

std::vector<ExperimentConfig> suite_gp_configs() {
    ExperimentConfig simple = base("gp_simple", Method::Beem, ModelFamily::Mgp, InitKey::A, 2);
    simple.dataset.kind = DatasetKind::Sinusoid;
    simple.dataset.variant = SinusoidVariant::Simple;
    simple.hyper.max_iters = 15;
    simple.hyper.gp_budget = 10;
    simple.hyper.gp_noise = 0.01;

    ExperimentConfig complex = base("gp_complex", Method::Beem, ModelFamily::Mgp, InitKey::A, 2);
    complex.dataset.kind = DatasetKind::Sinusoid;
    complex.dataset.variant = SinusoidVariant::Complex;
    complex.hyper.max_iters = 15;
    complex.hyper.tau0 = 1.1;
    complex.hyper.alpha = 0.97;
    complex.hyper.termination = Termination::ParameterChange;
    complex.hyper.epsilon = 1.0;
    complex.hyper.gp_kernel = "periodic";
    complex.hyper.gp_output_variance = 0.1;
    complex.hyper.gp_period = 1.0;
    complex.hyper.gp_budget = 10;
    complex.hyper.gp_noise = 0.01;

    simple.validate();
    complex.validate();
    return {simple, complex};
}

SuiteSummary paper_suite(const SuiteOptions& options, std::ostream& log) {
    SuiteSummary summary;
    std::filesystem::create_directories(options.outdir);
    RunOptions ro;
    ro.jobs = options.jobs;

    for (const SuiteTable& table : suite_tables(options.data_dir)) {
        if (!table.requires_file.empty() && !std::filesystem::exists(options.data_dir / table.requires_file)) {
            const std::string msg = table.name + ": skipped, " + (options.data_dir / table.requires_file).string() + " not found";
            warn(msg);
            summary.skipped.push_back(msg);
            continue;
        }
        log << table.name << '\n';
        std::vector<ResultRow> rows;
        for (const SuiteEntry& e : table.entries) {
            RunOptions r = ro;
            // Single-shot protocols keep their own repeat count.
            if (e.config.repeats != 1 || e.config.hyper.best_of == 1) r.repeats = options.repeats;
            r.trace_dir = options.outdir / "traces" / e.config.name;
            const ExperimentResult res = run_experiment(e.config, r);
            rows.push_back(res.row);

            const ResultRow& row = res.row;
            const std::pair<const char*, std::array<double, 3>> metrics[] = {
                {"ACC", {row.acc.mean, e.reference.acc, e.reference.acc_sd}},
                {"Homo", {row.homo.mean, e.reference.homo, e.reference.homo_sd}},
                {"NMI", {row.nmi.mean, e.reference.nmi, e.reference.nmi_sd}},
                {"ARI", {row.ari.mean, e.reference.ari, e.reference.ari_sd}},
            };
            log << "  " << row.method << '/' << row.init << '/' << row.weight << " (" << row.runs << " runs, "
                << fmt(row.wall_seconds.mean * row.runs, "%.1f") << "s)";
            for (const auto& [metric, v] : metrics) {
                SuiteCell cell{table.name, row.method, row.init, row.weight, metric, v[0], v[1], tolerance(v[2]), false};
                cell.flagged = std::abs(cell.computed - cell.reference) > cell.tolerance;
                log << "  " << metric << ' ' << fmt(cell.computed) << " ref " << fmt(cell.reference, "%.2f") << " d "
                    << fmt(cell.computed - cell.reference, "%+.3f") << (cell.flagged ? " *" : "");
                summary.cells.push_back(cell);
            }
            log << '\n';
        }
        emit_table(rows, TableFormat::Csv, options.outdir / (table.name + ".csv"));
        emit_table(rows, TableFormat::Json, options.outdir / (table.name + ".json"));
        emit_wall_times(rows, options.outdir / (table.name + "_wall_time.csv"));
    }

    log << "gp_association\n";
    std::vector<ResultRow> gp_rows;
    for (const ExperimentConfig& c : suite_gp_configs()) {
        RunOptions r = ro;
        r.repeats = options.repeats;
        r.trace_dir = options.outdir / "traces" / c.name;
        const ExperimentResult res = run_experiment(c, r);
        gp_rows.push_back(res.row);
        write_gp_outputs(c, res, options.outdir, log);
    }
    emit_table(gp_rows, TableFormat::Csv, options.outdir / "gp_association.csv");
    emit_table(gp_rows, TableFormat::Json, options.outdir / "gp_association.json");
    emit_wall_times(gp_rows, options.outdir / "gp_association_wall_time.csv");

    std::ofstream out(options.outdir / "summary.csv");
    out << "table,method,init,weight,metric,computed,reference,delta,tolerance,flagged\n";
    for (const SuiteCell& c : summary.cells) {
        out << c.table << ',' << c.method << ',' << c.init << ',' << c.weight << ',' << c.metric << ',' << fmt(c.computed)
            << ',' << fmt(c.reference, "%.2f") << ',' << fmt(c.computed - c.reference) << ',' << fmt(c.tolerance, "%.2f")
            << ',' << (c.flagged ? 1 : 0) << '\n';
    }
    log << summary.flagged() << " of " << summary.cells.size() << " cells outside tolerance (marked *)";
    if (!summary.skipped.empty()) log << "; " << summary.skipped.size() << " table(s) skipped";
    log << '\n';
    return summary;
}

}  // namespace beem::bench
