#include "rfddl/io.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace rfddl;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("rfddl_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << contents;
}

}  // namespace

TEST_CASE("csv matrices") {
    TempDir dir;
    SUBCASE("orientation contract") {
        spit(dir.file("m.csv"), "1,2\n3,4\n");
        const Matrix by_rows =
            io::load_matrix(dir.file("m.csv"), io::MatrixFormat::kCsv,
                            io::Orientation::kSamplesAsRows);
        CHECK(by_rows(0, 0) == 1.0);
        CHECK(by_rows(1, 0) == 2.0);  // first file row becomes the first column
        CHECK(by_rows(0, 1) == 3.0);
        const Matrix by_cols =
            io::load_matrix(dir.file("m.csv"), io::MatrixFormat::kCsv,
                            io::Orientation::kSamplesAsColumns);
        CHECK(by_cols(0, 1) == 2.0);
    }
    SUBCASE("round trip preserves values") {
        const Matrix m = oracles::random_matrix(7, 5, 3);
        io::save_matrix_csv(dir.file("m.csv"), m);
        const Matrix back = io::load_matrix(dir.file("m.csv"), io::MatrixFormat::kCsv);
        CHECK((m - back).cwiseAbs().maxCoeff() == 0.0);  // %.17g round-trips doubles
    }
    SUBCASE("ragged rows name the line") {
        spit(dir.file("bad.csv"), "1,2\n3\n");
        CHECK_THROWS_WITH_AS(io::load_matrix(dir.file("bad.csv"), io::MatrixFormat::kCsv),
                             doctest::Contains("bad.csv:2"), FormatError);
    }
    SUBCASE("non-numeric tokens name the line") {
        spit(dir.file("bad.csv"), "1,2\nx,4\n");
        CHECK_THROWS_WITH_AS(io::load_matrix(dir.file("bad.csv"), io::MatrixFormat::kCsv),
                             doctest::Contains("bad.csv:2"), FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(io::load_matrix(dir.file("nope.csv"), io::MatrixFormat::kCsv), InputError);
    }
}

TEST_CASE("binary matrices") {
    TempDir dir;
    SUBCASE("round trip is bit exact") {
        Matrix m = oracles::random_matrix(9, 4, 5);
        m(0, 0) = -0.0;
        m(1, 1) = 1e-308;  // subnormal-adjacent values must survive
        io::save_matrix_binary(dir.file("m.rfdm"), m);
        const Matrix back = io::load_matrix(dir.file("m.rfdm"), io::MatrixFormat::kBinary);
        CHECK(std::memcmp(m.data(), back.data(), sizeof(double) * 36) == 0);
    }
    SUBCASE("truncated payload is rejected without a partial result") {
        const Matrix m = oracles::random_matrix(6, 6, 7);
        io::save_matrix_binary(dir.file("m.rfdm"), m);
        const std::string bytes = slurp(dir.file("m.rfdm"));
        spit(dir.file("cut.rfdm"), bytes.substr(0, bytes.size() - 11));
        CHECK_THROWS_AS(io::load_matrix(dir.file("cut.rfdm"), io::MatrixFormat::kBinary),
                        FormatError);
    }
    SUBCASE("bad magic is rejected") {
        spit(dir.file("bad.rfdm"), "NOPE++++++++++++++++");
        CHECK_THROWS_WITH_AS(io::load_matrix(dir.file("bad.rfdm"), io::MatrixFormat::kBinary),
                             doctest::Contains("bad magic"), FormatError);
    }
    SUBCASE("row orientation transposes binary loads too") {
        const Matrix m = oracles::random_matrix(3, 5, 9);
        io::save_matrix_binary(dir.file("m.rfdm"), m);
        const Matrix back = io::load_matrix(dir.file("m.rfdm"), io::MatrixFormat::kBinary,
                                            io::Orientation::kSamplesAsRows);
        CHECK((back - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("label files") {
    TempDir dir;
    SUBCASE("basic parse") {
        spit(dir.file("l.txt"), "0\n1\n1\n");
        CHECK(io::load_labels(dir.file("l.txt")) == std::vector<int>{0, 1, 1});
    }
    SUBCASE("round trip") {
        const std::vector<int> labels = {3, 0, 2, 2, 1};
        io::save_labels(dir.file("l.txt"), labels);
        CHECK(io::load_labels(dir.file("l.txt")) == labels);
    }
    SUBCASE("empty file rejected") {
        spit(dir.file("l.txt"), "");
        CHECK_THROWS_AS(io::load_labels(dir.file("l.txt")), InputError);
    }
    SUBCASE("negative label rejected") {
        spit(dir.file("l.txt"), "0\n-2\n");
        CHECK_THROWS_AS(io::load_labels(dir.file("l.txt")), InputError);
    }
    SUBCASE("non-integer line rejected with its number") {
        spit(dir.file("l.txt"), "0\n1.5\n");
        CHECK_THROWS_WITH_AS(io::load_labels(dir.file("l.txt")), doctest::Contains("l.txt:2"),
                             FormatError);
    }
}

TEST_CASE("model container") {
    TempDir dir;
    RfddlModel model;
    model.dictionary = oracles::random_matrix(6, 4, 11);
    model.codes = oracles::random_matrix(4, 10, 13);
    model.laplacian = oracles::random_matrix(4, 4, 15);
    model.classifier = oracles::random_matrix(2, 4, 17);
    model.atom_labels = {0, 0, 1, 1};
    model.params.alpha = 12.5;
    model.params.seed = 0xDEADBEEFu;
    model.params.dict_init = DictInit::kRandom;

    SUBCASE("round trip is bit exact") {
        io::save_model(dir.file("m.rfml"), model);
        const RfddlModel back = io::load_model(dir.file("m.rfml"));
        CHECK(std::memcmp(model.dictionary.data(), back.dictionary.data(), 6 * 4 * 8) == 0);
        CHECK(std::memcmp(model.codes.data(), back.codes.data(), 4 * 10 * 8) == 0);
        CHECK(std::memcmp(model.laplacian.data(), back.laplacian.data(), 4 * 4 * 8) == 0);
        CHECK(std::memcmp(model.classifier.data(), back.classifier.data(), 2 * 4 * 8) == 0);
        CHECK(back.atom_labels == model.atom_labels);
        CHECK(back.params.alpha == model.params.alpha);
        CHECK(back.params.seed == model.params.seed);
        CHECK(back.params.dict_init == DictInit::kRandom);
        // Saving the loaded model reproduces the file byte for byte.
        io::save_model(dir.file("m2.rfml"), back);
        CHECK(slurp(dir.file("m.rfml")) == slurp(dir.file("m2.rfml")));
    }
    SUBCASE("version mismatch rejected") {
        io::save_model(dir.file("m.rfml"), model);
        std::string bytes = slurp(dir.file("m.rfml"));
        bytes[4] = 99;  // bump the version field
        spit(dir.file("v.rfml"), bytes);
        CHECK_THROWS_WITH_AS(io::load_model(dir.file("v.rfml")),
                             doctest::Contains("version"), FormatError);
    }
    SUBCASE("truncation rejected") {
        io::save_model(dir.file("m.rfml"), model);
        const std::string bytes = slurp(dir.file("m.rfml"));
        spit(dir.file("cut.rfml"), bytes.substr(0, bytes.size() / 2));
        CHECK_THROWS_AS(io::load_model(dir.file("cut.rfml")), FormatError);
    }
}

TEST_CASE("report serialization") {
    SweepConfig cfg;
    cfg.axis = SweepAxis::kVariance;
    cfg.values = {50.0, 100.0};
    cfg.methods = {Method::kRfddlR, Method::kRidge};
    cfg.repeats = 1;
    ExperimentReport report;
    report.config = cfg;
    report.cells.resize(2);
    report.cells[0].axis_value = 50.0;
    report.cells[0].mean_accuracy[Method::kRfddlR] = 0.9;
    report.cells[0].mean_accuracy[Method::kRidge] = 0.8;
    report.cells[0].per_repeat_accuracy[Method::kRfddlR] = {0.9};
    report.cells[1].axis_value = 100.0;
    report.cells[1].skipped = true;
    report.cells[1].skip_reason = "too few samples, honestly";

    SUBCASE("csv has a header and one row per cell") {
        const std::string csv = io::report_to_csv(report);
        const auto lines = std::count(csv.begin(), csv.end(), '\n');
        CHECK(lines == 3);
        CHECK(csv.find("variance,rfddl_r_accuracy,ridge_accuracy") == 0);
        // Commas inside the skip reason must not add columns.
        const std::size_t header_cols =
            static_cast<std::size_t>(std::count(csv.begin(), csv.begin() + static_cast<long>(csv.find('\n')), ',')) + 1;
        std::istringstream ss(csv);
        std::string line;
        std::getline(ss, line);
        while (std::getline(ss, line))
            CHECK(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1 ==
                  header_cols);
    }
    SUBCASE("json carries the skip reason") {
        const std::string json = io::report_to_json(report);
        CHECK(json.find("too few samples") != std::string::npos);
        CHECK(json.find("\"rfddl_r\"") != std::string::npos);
    }
}

TEST_CASE("atomic text write") {
    TempDir dir;
    io::write_text_atomic(dir.file("a.txt"), "hello\n");
    CHECK(slurp(dir.file("a.txt")) == "hello\n");
    CHECK_FALSE(std::filesystem::exists(dir.file("a.txt.tmp")));
}
