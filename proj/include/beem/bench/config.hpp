#pragma once

// Declarative experiment description, read from a JSON document. Unknown
// keys and incompatible combinations are rejected with ConfigError.

#include "beem/core/beem.hpp"
#include "beem/datagen.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace beem::bench {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Method { Beem, Em, EmRestarts, Daem };
enum class ModelFamily { Gmm, Mhmm, Mgp };
enum class InitKey { A, B, Smyth };

enum class DatasetKind {
    Square,
    Rainbow,
    RandomHmm,
    Sinusoid,
    Csv,
    Corpus,
};

struct DatasetSpec {
    DatasetKind kind = DatasetKind::Square;

    // square
    std::array<int, 4> counts{100, 50, 50, 10};
    double side = 10.0;
    double var = 0.3;
    // rainbow
    std::size_t n = 1000;
    double radius = 9.0;
    std::size_t clusters = 8;
    // random_hmm (clusters lives in hmm.k)
    RandomHmmSpec hmm;
    // sinusoid
    SinusoidVariant variant = SinusoidVariant::Simple;
    SinusoidOptions sinusoid;
    // csv / corpus
    std::filesystem::path path;
    std::string label_column;
    std::vector<std::string> classes;

    // Fixed data seed. Without it every run draws fresh data from its own seed.
    std::optional<std::uint64_t> seed;

    bool is_sequences() const { return kind == DatasetKind::RandomHmm || kind == DatasetKind::Corpus; }
    bool is_gp() const { return kind == DatasetKind::Sinusoid; }
    bool is_file() const { return kind == DatasetKind::Csv || kind == DatasetKind::Corpus; }
};

struct Hyperparams {
    // BEEM
    double tau0 = 1.5;
    double alpha = 0.97;
    int patience = 10;
    int max_iters = 500;
    Termination termination = Termination::LikelihoodPatience;
    double epsilon = 0.0;
    // EM family; unset means the family default (GMM 1e-6 / 500, MHMM 1e-4 / 100)
    std::optional<double> em_tol;
    std::optional<int> em_max_iters;
    int restarts = 100;
    std::vector<double> beta_schedule{0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
    int inner_iters = 15;
    // MHMM
    int hmm_states = 4;
    int hmm_fit_iters = 10;
    int smyth_iters = 10;
    // MGP
    std::string gp_kernel = "rbf";
    double gp_output_variance = 1.0;
    double gp_lengthscale = 1.0;
    double gp_period = 1.0;
    double gp_noise = 0.01;
    bool gp_fit_noise = true;
    int gp_budget = 10;
    std::string gp_score = "leave_in";
    // Each run keeps the best (by ACC) of this many initialisations.
    int best_of = 1;
};

struct ExperimentConfig {
    std::string name;
    DatasetSpec dataset;
    Method method = Method::Beem;
    ModelFamily family = ModelFamily::Gmm;
    InitKey init = InitKey::A;
    std::optional<WeightMode> weight_mode;  // BEEM only
    std::size_t k = 2;
    int repeats = 100;
    std::uint64_t base_seed = 0;
    Hyperparams hyper;

    // Throws ConfigError naming the offending combination.
    void validate() const;
};

// `base_dir` resolves relative dataset paths.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::string_view method_name(Method m);     // BEEM, EM, EM_RESTARTS, DAEM
std::string_view family_name(ModelFamily f); // GMM, MHMM, MGP
std::string_view init_name(InitKey i);      // A, B, Smyth
std::string_view weight_name(const ExperimentConfig& c);  // I, II or -

}  // namespace beem::bench
