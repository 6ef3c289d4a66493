#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mlrate/data.hpp"
#include "mlrate/errors.hpp"

using namespace mlrate;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& contents)
        : path("mlrate_test_" + name) {
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_csv parses a small file") {
    TempFile f("smoke.csv",
               "y,t,x1,x2\n"
               "1.5,0,0.1,2\n"
               "2.5,1,0.2,3\n"
               "3.5,0,0.3,4\n"
               "4.5,1,0.4,5\n");
    const auto ds = load_csv(f.path, "y", "t", {"x1", "x2"});
    CHECK(ds.n == 4);
    CHECK(ds.outcome[2] == 3.5);
    CHECK(ds.treatment[1] == 1);
    CHECK(ds.covariates(3, 1) == 5.0);
    CHECK(validate(ds).empty());
}

TEST_CASE("load_csv reports schema, parse, and validation errors") {
    TempFile f("errs.csv",
               "y,t,x1\n"
               "1,0,0.1\n"
               "2,1,0.2\n"
               "3,2,0.3\n"
               "4,1,0.4\n");
    CHECK_THROWS_AS(load_csv(f.path, "y", "t", {"missing"}), SchemaError);
    CHECK_THROWS_AS(load_csv("no_such_file.csv", "y", "t", {"x1"}), SchemaError);
    // treatment = 2 sits on data row 3
    try {
        load_csv(f.path, "y", "t", {"x1"});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }

    TempFile g("parse.csv", "y,t,x1\n1,0,0.1\n2,1,oops\n");
    try {
        load_csv(g.path, "y", "t", {"x1"});
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("x1") != std::string::npos);
    }

    TempFile h("onearm.csv", "y,t,x1\n1,1,0.1\n2,1,0.2\n");
    CHECK_THROWS_AS(load_csv(h.path, "y", "t", {"x1"}), ValidationError);
}

TEST_CASE("csv round-trip preserves every value bit for bit") {
    TempFile f("round.csv",
               "y,t,a,b\n"
               "0.1,0,-1.25,3.333333333333333\n"
               "2e-7,1,1e300,-0.0\n"
               "123456.75,0,0.30000000000000004,7\n"
               "-9.5,1,2,8\n");
    const auto ds = load_csv(f.path, "y", "t", {"a", "b"});
    write_csv("mlrate_test_round_out.csv", ds, "y", "t");
    const auto ds2 = load_csv("mlrate_test_round_out.csv", "y", "t", {"a", "b"});
    std::remove("mlrate_test_round_out.csv");
    REQUIRE(ds2.n == ds.n);
    CHECK(ds2.outcome == ds.outcome);
    CHECK(ds2.treatment == ds.treatment);
    CHECK(ds2.covariates.entries() == ds.covariates.entries());
    CHECK(ds2.column_names == ds.column_names);
}

TEST_CASE("validate reports machine-readable violations") {
    ExperimentDataset ds;
    ds.n = 3;
    ds.outcome = {1.0, std::nan(""), 3.0};
    ds.treatment = {1, 1, 1};
    ds.covariates = DenseMatrix(3, 1);
    ds.column_names = {"x1"};
    const auto violations = validate(ds);
    bool saw_nonfinite = false, saw_degenerate = false;
    for (const auto& v : violations) {
        if (v.code == "non-finite") {
            saw_nonfinite = true;
            CHECK(v.row == 1);
        }
        if (v.code == "degenerate-arm") saw_degenerate = true;
    }
    CHECK(saw_nonfinite);
    CHECK(saw_degenerate);

    ds.outcome[1] = 2.0;
    ds.treatment = {0, 1, 0};
    CHECK(validate(ds).empty());
}

TEST_CASE("split_folds produces balanced deterministic folds") {
    RandomStream s1(11, 0);
    const auto folds10 = split_folds(10, 2, s1);
    CHECK(std::count(folds10.begin(), folds10.end(), 0u) == 5);
    CHECK(std::count(folds10.begin(), folds10.end(), 1u) == 5);

    RandomStream s2(11, 0);
    CHECK(split_folds(10, 2, s2) == folds10);

    RandomStream s3(11, 1);
    const auto folds7 = split_folds(7, 2, s3);
    CHECK(std::count(folds7.begin(), folds7.end(), 0u) == 4);
    CHECK(std::count(folds7.begin(), folds7.end(), 1u) == 3);

    RandomStream s4(11, 2);
    CHECK_THROWS_AS(split_folds(5, 1, s4), std::invalid_argument);
    CHECK_THROWS_AS(split_folds(5, 6, s4), std::invalid_argument);
}

TEST_CASE("split_folds covers every index exactly once") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (std::size_t n : {5ul, 12ul, 97ul}) {
            for (std::size_t k : {2ul, 3ul, 5ul}) {
                RandomStream s(seed, 9);
                const auto folds = split_folds(n, k, s);
                REQUIRE(folds.size() == n);
                std::vector<std::size_t> counts(k, 0);
                for (auto f : folds) {
                    REQUIRE(f < k);
                    ++counts[f];
                }
                std::size_t total = 0;
                for (auto c : counts) {
                    CHECK(c >= n / k);
                    CHECK(c <= n / k + 1);
                    total += c;
                }
                CHECK(total == n);
            }
        }
    }
}

TEST_CASE("fold membership is marginally uniform across seeds") {
    const std::size_t n = 100;
    std::vector<std::size_t> in_fold0(n, 0);
    const int seeds = 1000;
    for (int seed = 0; seed < seeds; ++seed) {
        RandomStream s(static_cast<std::uint64_t>(seed), 0);
        const auto folds = split_folds(n, 2, s);
        for (std::size_t i = 0; i < n; ++i) in_fold0[i] += folds[i] == 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double freq = static_cast<double>(in_fold0[i]) / seeds;
        CHECK(std::abs(freq - 0.5) < 0.06);
    }
}
