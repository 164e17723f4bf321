#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "beem/datagen.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace beem;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("beem_datagen_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("square generator") {
    const LabeledVectors u = gen_square({100, 50, 50, 10}, 10.0, 0.3, 1);
    CHECK(u.points.size() == 210);
    CHECK(u.num_classes == 4);
    CHECK(std::count(u.labels.begin(), u.labels.end(), 3) == 10);
    CHECK(gen_square({50, 50, 50, 50}, 10.0, 0.3, 1).points.size() == 200);

    const LabeledVectors tight = gen_square({5, 5, 5, 5}, 10.0, 1e-12, 2);
    const double cx[4] = {-5, 5, 5, -5}, cy[4] = {5, 5, -5, -5};
    for (std::size_t i = 0; i < tight.points.size(); ++i) {
        const auto c = static_cast<std::size_t>(tight.labels[i]);
        CHECK(std::abs(tight.points[i][0] - cx[c]) < 1e-5);
        CHECK(std::abs(tight.points[i][1] - cy[c]) < 1e-5);
    }

    const LabeledVectors again = gen_square({100, 50, 50, 10}, 10.0, 0.3, 1);
    CHECK(again.points == u.points);
    CHECK(gen_square({100, 50, 50, 10}, 10.0, 0.3, 2).points != u.points);
    CHECK_THROWS(gen_square({0, 1, 1, 1}, 10.0, 0.3, 1));
}

TEST_CASE("rainbow generator") {
    const auto means = rainbow_means(9.0, 8);
    REQUIRE(means.size() == 8);
    CHECK(means.front()[0] == doctest::Approx(9.0));
    CHECK(std::abs(means.front()[1]) < 1e-12);
    CHECK(means.back()[0] == doctest::Approx(-9.0));
    CHECK(std::abs(means.back()[1]) < 1e-12);
    for (const Vector& m : means) CHECK(m.norm() == doctest::Approx(9.0));

    const LabeledVectors d = gen_rainbow(1000, 9.0, 8, 3);
    CHECK(d.points.size() == 1000);
    CHECK(d.num_classes == 8);
    CHECK(gen_rainbow(1000, 9.0, 8, 3).points == d.points);
}

TEST_CASE("random HMM generator") {
    RandomHmmSpec spec;
    const LabeledSequences d = gen_random_hmms(spec, 5);
    CHECK(d.sequences.size() == 60);
    for (std::size_t i = 0; i < d.sequences.size(); ++i) {
        CHECK(d.lengths[i] >= 20);
        CHECK(d.lengths[i] <= 50);
        CHECK(static_cast<std::size_t>(d.sequences[i].rows()) == d.lengths[i]);
    }

    spec.len_lo = 5;
    spec.len_hi = 10;
    spec.state_std = 1e-12;
    const LabeledSequences s = gen_random_hmms(spec, 6);
    for (const Sequence& seq : s.sequences) {
        CHECK(seq.rows() >= 5);
        CHECK(seq.rows() <= 10);
        for (Eigen::Index t = 0; t < seq.rows(); ++t) {
            double best = 1e9;
            for (double m : spec.state_means) best = std::min(best, std::abs(seq(t, 0) - m));
            CHECK(best < 1e-6);
        }
    }
    spec.len_lo = 11;
    CHECK_THROWS(gen_random_hmms(spec, 1));
}

TEST_CASE("sinusoid association data") {
    CHECK(gen_sinusoid_association(SinusoidVariant::Simple, 1).points.size() == 250);
    const LabeledVectors c = gen_sinusoid_association(SinusoidVariant::Complex, 1);
    CHECK(c.points.size() == 135);
    CHECK(std::count(c.labels.begin(), c.labels.end(), 1) == 60);

    const SinusoidOptions clean{false, false};
    const LabeledVectors s = gen_sinusoid_association(SinusoidVariant::Simple, 1, clean);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const double phase = s.labels[i] == 0 ? 0.0 : std::numbers::pi / 2;
        CHECK(s.points[i][1] == std::sin(std::numbers::pi * s.points[i][0] + phase));
    }
    const LabeledVectors cc = gen_sinusoid_association(SinusoidVariant::Complex, 1, clean);
    CHECK(cc.points.size() == 200);
    for (std::size_t i = 0; i < cc.points.size(); ++i) {
        const double sign = cc.labels[i] == 0 ? 1.0 : -1.0;
        CHECK(cc.points[i][1] == sign * std::sin(cc.points[i][0]));
    }
    CHECK(to_gp_points(s).size() == 250);
}

TEST_CASE("CSV loader") {
    const fs::path iris = fs::path(BEEM_SOURCE_DIR) / "data" / "iris.csv";
    if (fs::exists(iris)) {
        const LabeledVectors d = load_labeled_csv(iris, "species");
        CHECK(d.points.size() == 150);
        CHECK(d.points.front().size() == 4);
        CHECK(d.num_classes == 3);
        for (int k = 0; k < 3; ++k) CHECK(std::count(d.labels.begin(), d.labels.end(), k) == 50);
    }

    const fs::path dir = scratch("csv");
    write(dir / "one.csv", "a,b,cls\n1.5,2,x\n");
    const LabeledVectors one = load_labeled_csv(dir / "one.csv", "cls");
    CHECK(one.points.size() == 1);
    CHECK(one.points[0][0] == 1.5);
    const LabeledVectors by_index = load_labeled_csv(dir / "one.csv", "2");
    CHECK(by_index.points == one.points);
    CHECK_THROWS(load_labeled_csv(dir / "one.csv", "0"));

    write(dir / "ragged.csv", "a,b,cls\n1,2,x\n1,x\n");
    write(dir / "text.csv", "a,b,cls\n1,two,x\n");
    write(dir / "empty.csv", "");
    CHECK_THROWS(load_labeled_csv(dir / "one.csv", "nope"));
    CHECK_THROWS(load_labeled_csv(dir / "ragged.csv", "cls"));
    CHECK_THROWS(load_labeled_csv(dir / "text.csv", "cls"));
    CHECK_THROWS(load_labeled_csv(dir / "empty.csv", "cls"));
    CHECK_THROWS(load_labeled_csv(dir / "missing.csv", "cls"));
}

TEST_CASE("sequence corpus loader") {
    const fs::path dir = scratch("corpus");
    write(dir / "a_01.txt", "0.1 0.2 0.3\n0.2 0.3 0.4\n");
    write(dir / "a_02.txt", "1 1 1\n");
    write(dir / "b_01.txt", "2 2 2\n3 3 3\n4 4 4\n");
    write(dir / "c_01.txt", "5 5 5\n");

    const LabeledSequences ab = load_sequence_corpus(dir, {"b", "a"});
    CHECK(ab.sequences.size() == 3);
    CHECK(ab.num_classes == 2);
    CHECK(std::count(ab.labels.begin(), ab.labels.end(), 1) == 2);
    CHECK(std::count(ab.labels.begin(), ab.labels.end(), 0) == 1);

    CHECK_THROWS(load_sequence_corpus(dir, {}));
    CHECK_THROWS(load_sequence_corpus(dir, {"a", "z"}));
    CHECK_THROWS(load_sequence_corpus(dir / "nowhere", {"a"}));

    write(dir / "c_02.txt", "1 2\n1 2 3\n");
    CHECK_THROWS(load_sequence_corpus(dir, {"c"}));
}
