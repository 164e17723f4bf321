#include "beem/bench/config.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace beem::bench {
namespace {

using nlohmann::json;

// Pulls typed fields out of one JSON object; whatever is left over at
// finish() is an unknown key.
class Section {
public:
    Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    bool get(const std::string& key, T& out) {
        if (!j_.contains(key)) return false;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where_ + "." + key + ": wrong type (" + std::string(j_.at(key).type_name()) + ")");
        }
        return true;
    }

    const json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }

    // Keys that exist but are not allowed here get a specific message.
    void forbid(const std::string& key, const std::string& why) const {
        if (j_.contains(key)) throw ConfigError(where_ + "." + key + ": " + why);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

template <class T>
void require_positive(T v, const std::string& what) {
    if (!(v > T{0})) throw ConfigError(what + " must be positive");
}

Method parse_method(const std::string& s) {
    if (s == "BEEM") return Method::Beem;
    if (s == "EM") return Method::Em;
    if (s == "EM_RESTARTS") return Method::EmRestarts;
    if (s == "DAEM") return Method::Daem;
    throw ConfigError("method: expected BEEM, EM, EM_RESTARTS or DAEM, got '" + s + "'");
}

ModelFamily parse_family(const std::string& s) {
    if (s == "GMM") return ModelFamily::Gmm;
    if (s == "MHMM") return ModelFamily::Mhmm;
    if (s == "MGP") return ModelFamily::Mgp;
    throw ConfigError("model_family: expected GMM, MHMM or MGP, got '" + s + "'");
}

InitKey parse_init(const std::string& s) {
    if (s == "A") return InitKey::A;
    if (s == "B") return InitKey::B;
    if (s == "Smyth") return InitKey::Smyth;
    throw ConfigError("init: expected A, B or Smyth, got '" + s + "'");
}

WeightMode parse_weight(const std::string& s) {
    if (s == "I") return WeightMode::UniformFixed;
    if (s == "II") return WeightMode::Learned;
    throw ConfigError("weight_mode: expected I or II, got '" + s + "'");
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (p.is_absolute() || base.empty()) return p;
    return base / p;
}

DatasetSpec parse_dataset(const json& j, const std::filesystem::path& base_dir) {
    Section s(j, "dataset");
    DatasetSpec d;
    const int sources = int(s.has("generator")) + int(s.has("csv")) + int(s.has("corpus"));
    if (sources != 1) throw ConfigError("dataset: give exactly one of 'generator', 'csv' or 'corpus'");

    std::uint64_t seed = 0;
    if (s.get("seed", seed)) d.seed = seed;

    std::string path;
    if (s.get("csv", path)) {
        d.kind = DatasetKind::Csv;
        d.path = resolve(path, base_dir);
        if (s.has("label_column")) {
            const json& lc = s.raw("label_column");
            if (lc.is_string()) {
                d.label_column = lc.get<std::string>();
            } else if (lc.is_number_unsigned()) {
                d.label_column = std::to_string(lc.get<std::size_t>());
            } else {
                throw ConfigError("dataset.label_column: expected a column name or a nonnegative index");
            }
        } else {
            throw ConfigError("dataset: 'csv' needs 'label_column'");
        }
        s.forbid("classes", "only valid with 'corpus'");
        s.forbid("params", "only valid with 'generator'");
        s.finish();
        return d;
    }
    if (s.get("corpus", path)) {
        d.kind = DatasetKind::Corpus;
        d.path = resolve(path, base_dir);
        if (!s.get("classes", d.classes)) throw ConfigError("dataset: 'corpus' needs 'classes'");
        if (d.classes.empty()) throw ConfigError("dataset.classes: empty class filter");
        s.forbid("label_column", "only valid with 'csv'");
        s.forbid("params", "only valid with 'generator'");
        s.finish();
        return d;
    }

    std::string gen;
    s.get("generator", gen);
    s.forbid("label_column", "only valid with 'csv'");
    s.forbid("classes", "only valid with 'corpus'");
    static const json kEmpty = json::object();
    const json& pj = s.has("params") ? s.raw("params") : kEmpty;
    Section p(pj, "dataset.params");

    if (gen == "square") {
        d.kind = DatasetKind::Square;
        p.get("counts", d.counts);
        p.get("side", d.side);
        p.get("var", d.var);
        for (int c : d.counts) require_positive(c, "dataset.params.counts entries");
        require_positive(d.side, "dataset.params.side");
        require_positive(d.var, "dataset.params.var");
    } else if (gen == "rainbow") {
        d.kind = DatasetKind::Rainbow;
        p.get("n", d.n);
        p.get("radius", d.radius);
        p.get("clusters", d.clusters);
        if (d.clusters < 2) throw ConfigError("dataset.params.clusters must be at least 2");
        if (d.n < d.clusters) throw ConfigError("dataset.params.n must be at least clusters");
    } else if (gen == "random_hmm") {
        d.kind = DatasetKind::RandomHmm;
        p.get("clusters", d.hmm.k);
        p.get("states", d.hmm.n_states);
        p.get("state_means", d.hmm.state_means);
        p.get("state_std", d.hmm.state_std);
        p.get("seqs_per_cluster", d.hmm.seqs_per_cluster);
        p.get("len_lo", d.hmm.len_lo);
        p.get("len_hi", d.hmm.len_hi);
        require_positive(d.hmm.k, "dataset.params.clusters");
        require_positive(d.hmm.seqs_per_cluster, "dataset.params.seqs_per_cluster");
        require_positive(d.hmm.state_std, "dataset.params.state_std");
        if (static_cast<std::size_t>(d.hmm.n_states) != d.hmm.state_means.size()) {
            throw ConfigError("dataset.params: states must equal the number of state_means");
        }
        if (d.hmm.len_lo < 1 || d.hmm.len_lo > d.hmm.len_hi) throw ConfigError("dataset.params: need 1 <= len_lo <= len_hi");
    } else if (gen == "sinusoid") {
        d.kind = DatasetKind::Sinusoid;
        std::string variant = "simple";
        p.get("variant", variant);
        if (variant == "simple") {
            d.variant = SinusoidVariant::Simple;
        } else if (variant == "complex") {
            d.variant = SinusoidVariant::Complex;
        } else {
            throw ConfigError("dataset.params.variant: expected simple or complex");
        }
        p.get("noise", d.sinusoid.noise);
        p.get("subsample", d.sinusoid.subsample);
    } else {
        throw ConfigError("dataset.generator: expected square, rainbow, random_hmm or sinusoid, got '" + gen + "'");
    }
    p.finish();
    s.finish();
    return d;
}

void parse_hyper(const json& j, const ExperimentConfig& c, Hyperparams& h) {
    Section s(j, "method_hyperparams");
    const bool beem = c.method == Method::Beem;
    const bool em_family = !beem;

    const std::string not_beem = "only valid for method BEEM";
    const std::string not_em = "only valid for EM, EM_RESTARTS and DAEM";
    for (const char* key : {"tau0", "alpha", "patience", "max_iters", "termination", "epsilon"}) {
        if (!beem) s.forbid(key, not_beem);
    }
    for (const char* key : {"em_tol", "em_max_iters"}) {
        if (!em_family) s.forbid(key, not_em);
    }
    if (c.method != Method::EmRestarts) s.forbid("restarts", "only valid for method EM_RESTARTS");
    if (c.method != Method::Daem) {
        s.forbid("beta_schedule", "only valid for method DAEM");
        s.forbid("inner_iters", "only valid for method DAEM");
    }
    if (c.family != ModelFamily::Mhmm) {
        for (const char* key : {"hmm_states", "hmm_fit_iters", "smyth_iters"}) s.forbid(key, "only valid for model_family MHMM");
    }
    if (c.family != ModelFamily::Mgp) {
        for (const char* key : {"gp_kernel", "gp_output_variance", "gp_lengthscale", "gp_period", "gp_noise",
                                "gp_fit_noise", "gp_budget", "gp_score"}) {
            s.forbid(key, "only valid for model_family MGP");
        }
    }

    s.get("tau0", h.tau0);
    s.get("alpha", h.alpha);
    s.get("patience", h.patience);
    s.get("max_iters", h.max_iters);
    std::string term;
    if (s.get("termination", term)) {
        if (term == "patience") {
            h.termination = Termination::LikelihoodPatience;
        } else if (term == "parameter_change") {
            h.termination = Termination::ParameterChange;
        } else {
            throw ConfigError("method_hyperparams.termination: expected patience or parameter_change");
        }
    }
    s.get("epsilon", h.epsilon);
    double tol = 0.0;
    if (s.get("em_tol", tol)) h.em_tol = tol;
    int iters = 0;
    if (s.get("em_max_iters", iters)) h.em_max_iters = iters;
    s.get("restarts", h.restarts);
    s.get("beta_schedule", h.beta_schedule);
    s.get("inner_iters", h.inner_iters);
    s.get("hmm_states", h.hmm_states);
    s.get("hmm_fit_iters", h.hmm_fit_iters);
    s.get("smyth_iters", h.smyth_iters);
    s.get("gp_kernel", h.gp_kernel);
    s.get("gp_output_variance", h.gp_output_variance);
    s.get("gp_lengthscale", h.gp_lengthscale);
    s.get("gp_period", h.gp_period);
    s.get("gp_noise", h.gp_noise);
    s.get("gp_fit_noise", h.gp_fit_noise);
    s.get("gp_budget", h.gp_budget);
    s.get("gp_score", h.gp_score);
    s.get("best_of", h.best_of);
    s.finish();
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::Beem: return "BEEM";
        case Method::Em: return "EM";
        case Method::EmRestarts: return "EM_RESTARTS";
        case Method::Daem: return "DAEM";
    }
    return "?";
}

std::string_view family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::Gmm: return "GMM";
        case ModelFamily::Mhmm: return "MHMM";
        case ModelFamily::Mgp: return "MGP";
    }
    return "?";
}

std::string_view init_name(InitKey i) {
    switch (i) {
        case InitKey::A: return "A";
        case InitKey::B: return "B";
        case InitKey::Smyth: return "Smyth";
    }
    return "?";
}

std::string_view weight_name(const ExperimentConfig& c) {
    if (!c.weight_mode) return "-";
    return *c.weight_mode == WeightMode::UniformFixed ? "I" : "II";
}

void ExperimentConfig::validate() const {
    if (name.empty()) throw ConfigError("name: must be nonempty");
    for (char ch : name) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.')) {
            throw ConfigError("name: only letters, digits, '_', '-' and '.' are allowed");
        }
    }
    if (k < 1) throw ConfigError("k must be at least 1");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    if (hyper.best_of < 1) throw ConfigError("method_hyperparams.best_of must be at least 1");

    const std::string combo = std::string(method_name(method)) + "/" + std::string(family_name(family)) + "/" +
                              std::string(init_name(init));
    switch (family) {
        case ModelFamily::Gmm:
            if (dataset.is_sequences() || dataset.is_gp()) throw ConfigError("model_family GMM needs a vector dataset (square, rainbow or csv)");
            if (init == InitKey::Smyth) throw ConfigError(combo + ": Smyth initialisation needs sequence data (model_family MHMM)");
            break;
        case ModelFamily::Mhmm:
            if (!dataset.is_sequences()) throw ConfigError("model_family MHMM needs a sequence dataset (random_hmm or corpus)");
            if (method == Method::EmRestarts || method == Method::Daem) throw ConfigError(combo + ": MHMM supports only BEEM and EM");
            if (init == InitKey::B) throw ConfigError(combo + ": init B (k-means) is for vector data");
            if (method == Method::Beem && init != InitKey::A) throw ConfigError(combo + ": BEEM on MHMM starts from a random partition (init A)");
            break;
        case ModelFamily::Mgp:
            if (!dataset.is_gp()) throw ConfigError("model_family MGP needs the sinusoid dataset");
            if (method != Method::Beem) throw ConfigError(combo + ": MGP supports only BEEM");
            if (init != InitKey::A) throw ConfigError(combo + ": MGP starts from a random partition (init A)");
            break;
    }
    if (method == Method::Beem) {
        if (!weight_mode) throw ConfigError("weight_mode: required for BEEM (I or II)");
        BeemConfig b;
        b.tau0 = hyper.tau0;
        b.alpha = hyper.alpha;
        b.patience = hyper.patience;
        b.max_iters = hyper.max_iters;
        b.epsilon = hyper.epsilon;
        b.termination = hyper.termination;
        try {
            b.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("method_hyperparams: ") + e.what());
        }
    } else {
        if (weight_mode) throw ConfigError("weight_mode: only valid for BEEM; EM-family methods always learn mixing weights");
        if (hyper.em_tol && !(*hyper.em_tol > 0.0)) throw ConfigError("method_hyperparams.em_tol must be positive");
        if (hyper.em_max_iters && *hyper.em_max_iters < 1) throw ConfigError("method_hyperparams.em_max_iters must be at least 1");
    }
    if (method == Method::EmRestarts && hyper.restarts < 1) throw ConfigError("method_hyperparams.restarts must be at least 1");
    if (method == Method::Daem) {
        const auto& b = hyper.beta_schedule;
        if (b.empty() || b.back() != 1.0) throw ConfigError("method_hyperparams.beta_schedule must end at 1.0");
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!(b[i] > 0.0) || (i > 0 && !(b[i] > b[i - 1]))) {
                throw ConfigError("method_hyperparams.beta_schedule must be strictly increasing in (0, 1]");
            }
        }
        if (hyper.inner_iters < 1) throw ConfigError("method_hyperparams.inner_iters must be at least 1");
    }
    if (family == ModelFamily::Mhmm) {
        if (hyper.hmm_states < 1) throw ConfigError("method_hyperparams.hmm_states must be at least 1");
        if (hyper.hmm_fit_iters < 1 || hyper.smyth_iters < 1) throw ConfigError("method_hyperparams: HMM iteration budgets must be at least 1");
    }
    if (family == ModelFamily::Mgp) {
        if (hyper.gp_kernel != "rbf" && hyper.gp_kernel != "periodic") throw ConfigError("method_hyperparams.gp_kernel: expected rbf or periodic");
        if (hyper.gp_score != "leave_in" && hyper.gp_score != "leave_one_out") {
            throw ConfigError("method_hyperparams.gp_score: expected leave_in or leave_one_out");
        }
        if (!(hyper.gp_output_variance > 0.0) || !(hyper.gp_lengthscale > 0.0) || !(hyper.gp_period > 0.0) || !(hyper.gp_noise > 0.0)) {
            throw ConfigError("method_hyperparams: GP hyperparameters must be positive");
        }
        if (hyper.gp_budget < 0) throw ConfigError("method_hyperparams.gp_budget must be nonnegative");
    }
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Section s(j, "config");
    ExperimentConfig c;
    std::string text;

    s.get("name", c.name);
    if (!s.has("dataset")) throw ConfigError("config: missing 'dataset'");
    c.dataset = parse_dataset(s.raw("dataset"), base_dir);
    if (!s.get("method", text)) throw ConfigError("config: missing 'method'");
    c.method = parse_method(text);
    if (!s.get("model_family", text)) throw ConfigError("config: missing 'model_family'");
    c.family = parse_family(text);
    if (!s.get("init", text)) throw ConfigError("config: missing 'init'");
    c.init = parse_init(text);
    if (s.get("weight_mode", text)) c.weight_mode = parse_weight(text);
    if (!s.get("k", c.k)) throw ConfigError("config: missing 'k'");
    s.get("repeats", c.repeats);
    s.get("base_seed", c.base_seed);
    if (s.has("method_hyperparams")) parse_hyper(s.raw("method_hyperparams"), c, c.hyper);
    s.finish();
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

}  // namespace beem::bench
