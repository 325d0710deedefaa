#include "sppca/io.hpp"
#include "sppca/rng.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace sppca;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sppca_test_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST_CASE("seeded rng is deterministic") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}

TEST_CASE("different seeds give different streams") {
    Rng a(1), b(2);
    bool differ = false;
    for (int i = 0; i < 10; ++i) differ = differ || a.next_u64() != b.next_u64();
    CHECK(differ);
}

TEST_CASE("normal draws have the right first moments") {
    Rng rng(7);
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform stays in [0,1)") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("derive_seed is stable under extension") {
    CHECK(derive_seed(5, 0) == derive_seed(5, 0));
    CHECK(derive_seed(5, 0) != derive_seed(5, 1));
    CHECK(derive_seed(5, 3) != derive_seed(6, 3));
}

TEST_CASE("load_csv parses a plain file") {
    TempDir dir;
    const auto path = dir.file("d.csv");
    write_file(path, "0,0\n2,2\n100,100\n");
    const DataMatrix m = load_csv(path, false);
    CHECK(m.rows() == 3);
    CHECK(m.cols() == 2);
    CHECK(m.values(2, 1) == 100.0);
}

TEST_CASE("load_csv rejects empty files") {
    TempDir dir;
    const auto path = dir.file("empty.csv");
    write_file(path, "");
    CHECK_THROWS_WITH_AS(load_csv(path, false), doctest::Contains("no rows"), DataError);
}

TEST_CASE("load_csv names the ragged row") {
    TempDir dir;
    const auto path = dir.file("ragged.csv");
    write_file(path, "1,2\n3\n");
    CHECK_THROWS_WITH_AS(load_csv(path, false), doctest::Contains("row 2"), DataError);
}

TEST_CASE("load_csv names the bad cell") {
    TempDir dir;
    const auto path = dir.file("bad.csv");
    write_file(path, "1,2\n3,abc\n");
    CHECK_THROWS_AS(load_csv(path, false), DataError);
    try {
        load_csv(path, false);
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column 2") != std::string::npos);
    }
}

TEST_CASE("load_csv keeps header names") {
    TempDir dir;
    const auto path = dir.file("h.csv");
    write_file(path, "x,y\n1,2\n");
    const DataMatrix m = load_csv(path, true);
    CHECK(m.rows() == 1);
    REQUIRE(m.column_names.size() == 2);
    CHECK(m.column_names[1] == "y");
}

TEST_CASE("csv round-trip is bitwise") {
    TempDir dir;
    Matrix v(2, 2);
    v << 1.0 / 3.0, -2.5e-13, 3.141592653589793, 1e300;
    const DataMatrix original(v);
    const auto path = dir.file("rt.csv");
    save_csv(original, path);
    const DataMatrix loaded = load_csv(path, false);
    CHECK(loaded.values == original.values);
}

TEST_CASE("save_csv writes a single scalar as one line") {
    TempDir dir;
    Matrix v(1, 1);
    v << 3.5;
    const auto path = dir.file("one.csv");
    save_csv(DataMatrix(v), path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "3.5");
    CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("save_csv reports unwritable paths") {
    Matrix v(1, 1);
    v << 1.0;
    CHECK_THROWS_AS(save_csv(DataMatrix(v), "/nonexistent_dir/x.csv"), DataError);
}

TEST_CASE("model round-trip preserves every field") {
    TempDir dir;
    ModelParams p;
    p.latent_dim = 1;
    p.mu = Vector::Zero(2);
    p.w.resize(2, 1);
    p.w << 1.0, 0.0;
    p.sigma2 = 1.0;
    const auto path = dir.file("m.json");
    save_model(p, path);
    const ModelParams q = load_model(path);
    CHECK(q.mu == p.mu);
    CHECK(q.w == p.w);
    CHECK(q.sigma2 == p.sigma2);
    CHECK(q.latent_dim == p.latent_dim);
}

TEST_CASE("model round-trip is bitwise for awkward values") {
    TempDir dir;
    Rng rng(11);
    ModelParams p;
    p.latent_dim = 2;
    p.mu.resize(3);
    p.w.resize(3, 2);
    for (Eigen::Index i = 0; i < 3; ++i) {
        p.mu(i) = rng.normal() * 1e-7;
        for (Eigen::Index k = 0; k < 2; ++k) p.w(i, k) = rng.normal();
    }
    p.sigma2 = 0.123456789012345678;
    const auto path = dir.file("m2.json");
    save_model(p, path);
    const ModelParams q = load_model(path);
    CHECK(q.mu == p.mu);
    CHECK(q.w == p.w);
    CHECK(q.sigma2 == p.sigma2);
}

TEST_CASE("load_model validates contents") {
    TempDir dir;
    const auto path = dir.file("bad.json");

    SUBCASE("negative sigma2") {
        write_file(path, R"({"format_version":1,"latent_dim":1,"sigma2":-1,"mu":[0,0],"w":[[1],[0]]})");
        CHECK_THROWS_AS(load_model(path), DataError);
    }
    SUBCASE("ragged w") {
        write_file(path, R"({"format_version":1,"latent_dim":1,"sigma2":1,"mu":[0,0],"w":[[1],[0,1]]})");
        CHECK_THROWS_AS(load_model(path), DataError);
    }
    SUBCASE("missing key") {
        write_file(path, R"({"format_version":1,"latent_dim":1,"sigma2":1,"mu":[0,0]})");
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("missing key"), DataError);
    }
    SUBCASE("unknown version") {
        write_file(path, R"({"format_version":99,"latent_dim":1,"sigma2":1,"mu":[0],"w":[[1]]})");
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("format_version"), DataError);
    }
}

TEST_CASE("DataMatrix rejects non-finite entries") {
    Matrix v(1, 2);
    v << 1.0, std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(DataMatrix{v}, DataError);
}
