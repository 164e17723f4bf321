#include "beem/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace beem {
namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

LabeledVectors gen_square(const std::array<int, 4>& counts, double side, double var, std::uint64_t seed) {
    for (int c : counts) {
        if (c <= 0) throw std::invalid_argument("gen_square: counts must be positive");
    }
    const double h = side / 2.0;
    const std::array<std::array<double, 2>, 4> corners{{{-h, h}, {h, h}, {h, -h}, {-h, -h}}};
    const double sd = std::sqrt(var);
    Rng rng(seed);
    LabeledVectors out;
    out.num_classes = 4;
    out.class_names = {"top_left", "top_right", "bottom_right", "bottom_left"};
    for (std::size_t c = 0; c < 4; ++c) {
        for (int i = 0; i < counts[c]; ++i) {
            Vector p(2);
            p[0] = rng.normal(corners[c][0], sd);
            p[1] = rng.normal(corners[c][1], sd);
            out.points.push_back(std::move(p));
            out.labels.push_back(static_cast<int>(c));
        }
    }
    std::ostringstream prov;
    prov << "square counts=[" << counts[0] << ',' << counts[1] << ',' << counts[2] << ',' << counts[3] << "] side=" << side
         << " var=" << var << " seed=" << seed;
    out.provenance = prov.str();
    return out;
}

std::vector<Vector> rainbow_means(double radius, std::size_t k) {
    std::vector<Vector> means;
    for (std::size_t i = 0; i < k; ++i) {
        const double w = k > 1 ? static_cast<double>(i) * std::numbers::pi / static_cast<double>(k - 1) : 0.0;
        Vector m(2);
        m[0] = radius * std::cos(w);
        m[1] = radius * std::sin(w);
        means.push_back(std::move(m));
    }
    return means;
}

LabeledVectors gen_rainbow(std::size_t n, double radius, std::size_t k, std::uint64_t seed) {
    if (k == 0 || n < k) throw std::invalid_argument("gen_rainbow: need 1 <= k <= n");
    const auto means = rainbow_means(radius, k);
    Rng rng(seed);
    LabeledVectors out;
    out.num_classes = k;
    for (std::size_t i = 0; i < k; ++i) out.class_names.push_back("arc" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1));
        Vector p(2);
        p[0] = rng.normal(means[c][0], 1.0);
        p[1] = rng.normal(means[c][1], 1.0);
        out.points.push_back(std::move(p));
        out.labels.push_back(static_cast<int>(c));
    }
    out.provenance = "rainbow n=" + std::to_string(n) + " radius=" + std::to_string(radius) + " k=" + std::to_string(k) +
                     " seed=" + std::to_string(seed);
    return out;
}

LabeledSequences gen_random_hmms(const RandomHmmSpec& spec, std::uint64_t seed) {
    if (spec.len_lo > spec.len_hi || spec.len_lo < 1) throw std::invalid_argument("gen_random_hmms: bad length range");
    if (static_cast<Eigen::Index>(spec.state_means.size()) != spec.n_states) {
        throw std::invalid_argument("gen_random_hmms: state_means must have n_states entries");
    }
    Rng rng(seed);
    Matrix means(spec.n_states, 1), vars(spec.n_states, 1);
    for (Eigen::Index s = 0; s < spec.n_states; ++s) {
        means(s, 0) = spec.state_means[static_cast<std::size_t>(s)];
        vars(s, 0) = spec.state_std * spec.state_std;
    }
    LabeledSequences out;
    out.num_classes = spec.k;
    for (std::size_t c = 0; c < spec.k; ++c) {
        out.class_names.push_back("hmm" + std::to_string(c));
        const HmmComponent hmm = random_hmm(means, vars, rng);
        for (std::size_t i = 0; i < spec.seqs_per_cluster; ++i) {
            const auto len = rng.uniform_int(spec.len_lo, spec.len_hi);
            Sequence seq = sample_hmm(hmm, len, rng);
            out.lengths.push_back(static_cast<std::size_t>(len));
            out.sequences.push_back(std::move(seq));
            out.labels.push_back(static_cast<int>(c));
        }
    }
    out.provenance = "random_hmm k=" + std::to_string(spec.k) + " states=" + std::to_string(spec.n_states) +
                     " len=[" + std::to_string(spec.len_lo) + "," + std::to_string(spec.len_hi) + "] seed=" + std::to_string(seed);
    return out;
}

LabeledVectors gen_sinusoid_association(SinusoidVariant variant, std::uint64_t seed, const SinusoidOptions& options) {
    Rng rng(seed);
    LabeledVectors out;
    out.num_classes = 2;
    auto push = [&out](double x, double y, int label) {
        Vector p(2);
        p[0] = x;
        p[1] = y;
        out.points.push_back(std::move(p));
        out.labels.push_back(label);
    };

    if (variant == SinusoidVariant::Simple) {
        out.class_names = {"sin", "shifted_sin"};
        constexpr int kPerCurve = 125;
        constexpr double kNoiseVar = 0.01;
        for (int c = 0; c < 2; ++c) {
            const double phase = c == 0 ? 0.0 : std::numbers::pi / 2.0;
            for (int i = 0; i < kPerCurve; ++i) {
                const double x = options.subsample ? rng.uniform() : static_cast<double>(i) / (kPerCurve - 1);
                double y = std::sin(std::numbers::pi * x + phase);
                if (options.noise) y += rng.normal(0.0, std::sqrt(kNoiseVar));
                push(x, y, c);
            }
        }
        out.provenance = "sinusoid simple (reconstruction: sin(pi x) and sin(pi x + pi/2) on [0,1], one crossing, "
                         "125+125, noise var 0.01) seed=" + std::to_string(seed);
        return out;
    }

    out.class_names = {"positive_sin", "negative_sin"};
    constexpr int kGrid = 100;
    const std::array<double, 2> noise_var{0.3, 0.2};
    const std::array<std::size_t, 2> keep{75, 60};
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> idx(kGrid);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (options.subsample) {
            rng.shuffle(idx.begin(), idx.end());
            idx.resize(keep[static_cast<std::size_t>(c)]);
            std::sort(idx.begin(), idx.end());
        }
        const double sign = c == 0 ? 1.0 : -1.0;
        for (std::size_t i : idx) {
            const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / (kGrid - 1);
            double y = sign * std::sin(x);
            if (options.noise) y += rng.normal(0.0, std::sqrt(noise_var[static_cast<std::size_t>(c)]));
            push(x, y, c);
        }
    }
    if (options.noise || options.subsample) {
        // Inputs to [0, 1]; outputs to zero mean, unit variance.
        double mean = 0.0;
        for (const auto& p : out.points) mean += p[1];
        mean /= static_cast<double>(out.points.size());
        double var = 0.0;
        for (const auto& p : out.points) var += (p[1] - mean) * (p[1] - mean);
        const double sd = std::sqrt(var / static_cast<double>(out.points.size()));
        for (auto& p : out.points) {
            p[0] /= 2.0 * std::numbers::pi;
            p[1] = (p[1] - mean) / sd;
        }
    }
    out.provenance = "sinusoid complex (+sin/-sin, noise var 0.3/0.2, kept 75/60) seed=" + std::to_string(seed);
    return out;
}

std::vector<GpPoint> to_gp_points(const LabeledVectors& data) {
    std::vector<GpPoint> out;
    out.reserve(data.points.size());
    for (const auto& p : data.points) {
        if (p.size() != 2) throw std::invalid_argument("to_gp_points: expected (x, y) pairs");
        out.push_back({p[0], p[1]});
    }
    return out;
}

LabeledVectors load_labeled_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const std::vector<std::string> header = split_csv(line);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        double as_number = 0.0;
        if (parse_double(label_column, as_number) && as_number >= 0 && as_number == std::floor(as_number) &&
            static_cast<std::size_t>(as_number) < header.size()) {
            label_idx = static_cast<std::size_t>(as_number);
        } else {
            throw std::runtime_error(path.string() + ": no label column '" + label_column + "'");
        }
    }

    LabeledVectors out;
    std::map<std::string, int> names;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()));
        }
        Vector p(static_cast<Eigen::Index>(header.size() - 1));
        Eigen::Index j = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == label_idx) continue;
            if (!parse_double(cells[i], p[j])) {
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" + cells[i] +
                                         "' in column '" + header[i] + "'");
            }
            ++j;
        }
        const auto [it, inserted] = names.emplace(cells[label_idx], static_cast<int>(names.size()));
        if (inserted) out.class_names.push_back(cells[label_idx]);
        out.points.push_back(std::move(p));
        out.labels.push_back(it->second);
    }
    out.num_classes = names.size();
    out.provenance = "csv " + path.string() + " label=" + header[label_idx];
    return out;
}

LabeledSequences load_sequence_corpus(const std::filesystem::path& dir, const std::vector<std::string>& classes) {
    if (classes.empty()) throw std::invalid_argument("load_sequence_corpus: empty class filter");
    if (!std::filesystem::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::set<std::string> available;
    std::map<std::string, int> wanted;
    for (std::size_t i = 0; i < classes.size(); ++i) wanted.emplace(classes[i], static_cast<int>(i));

    LabeledSequences out;
    out.class_names = classes;
    out.num_classes = classes.size();
    for (const auto& file : files) {
        const std::string name = file.filename().string();
        const auto cut = name.find('_');
        if (cut == std::string::npos || cut == 0) continue;
        const std::string tag = name.substr(0, cut);
        available.insert(tag);
        const auto it = wanted.find(tag);
        if (it == wanted.end()) continue;

        std::ifstream in(file);
        std::vector<std::vector<double>> rows;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::istringstream ss(line);
            std::vector<double> row;
            std::string tok;
            while (ss >> tok) {
                double v;
                if (!parse_double(tok, v)) {
                    throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": non-numeric value '" + tok + "'");
                }
                row.push_back(v);
            }
            if (row.empty()) continue;
            if (!rows.empty() && row.size() != rows.front().size()) {
                throw std::runtime_error(file.string() + ":" + std::to_string(line_no) + ": inconsistent column count");
            }
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw std::runtime_error(file.string() + ": empty sequence");
        Sequence seq(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t t = 0; t < rows.size(); ++t) {
            for (std::size_t j = 0; j < rows[t].size(); ++j) seq(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
        }
        out.lengths.push_back(rows.size());
        out.sequences.push_back(std::move(seq));
        out.labels.push_back(it->second);
    }

    std::vector<std::string> missing;
    for (const auto& c : classes) {
        if (!available.contains(c)) missing.push_back(c);
    }
    if (!missing.empty()) {
        std::string msg = "load_sequence_corpus: missing classes {";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? "," : "") + missing[i];
        msg += "}; available {";
        std::size_t i = 0;
        for (const auto& a : available) msg += (i++ ? "," : "") + a;
        msg += "}";
        throw std::runtime_error(msg);
    }
    out.provenance = "sequence corpus " + dir.string();
    return out;
}

}  // namespace beem
