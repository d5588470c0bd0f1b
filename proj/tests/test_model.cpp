#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include <sublqg/io.hpp>
#include <sublqg/model.hpp>

#include "support/oracles.hpp"

namespace sublqg {
namespace {

bool has_code(const std::vector<Violation>& v, const std::string& code) {
    for (const auto& x : v)
        if (x.code == code) return true;
    return false;
}

TEST(ValidateModel, AcceptsSumExample) {
    const auto m = testing::sum_example();
    EXPECT_TRUE(model_violations(m).empty());
    EXPECT_NO_THROW((void)validate_model(m));
}

TEST(ValidateModel, RejectsNegativeEigenvalue) {
    auto m = testing::sum_example();
    m.sigma_w = (Mat(2, 2) << 1.0, 0.0, 0.0, -0.5).finished();
    const auto v = model_violations(m);
    ASSERT_TRUE(has_code(v, "NotPSD"));
    try {
        (void)validate_model(m);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.violations().front().field, "Sigma_w");
        EXPECT_EQ(e.code(), "NotPSD");
    }
}

TEST(ValidateModel, AcceptsRoundoffNegativeEigenvalue) {
    auto m = testing::sum_example();
    // G^T G with a tiny negative perturbation well inside -1e-10 |Sigma|_2.
    m.sigma_x = (Mat(2, 2) << 1.0, 1.0, 1.0, 1.0 - 1e-13).finished();
    EXPECT_TRUE(model_violations(m).empty());
}

TEST(ValidateModel, RejectsAsymmetricCovariance) {
    auto m = testing::sum_example();
    m.sigma_x(0, 1) += 1e-6;
    EXPECT_TRUE(has_code(model_violations(m), "NotSymmetric"));
}

TEST(ValidateModel, PartitionArity) {
    auto m = testing::sum_example();
    m.n = 3;
    EXPECT_TRUE(has_code(model_violations(m), "PartitionArity"));
}

TEST(ValidateModel, DimensionMismatch) {
    auto m = testing::sum_example();
    m.controller_partition = Partition({1, 2});
    EXPECT_TRUE(has_code(model_violations(m), "DimensionMismatch"));

    auto m2 = testing::sum_example();
    m2.N = Mat::Zero(2, 3);
    EXPECT_TRUE(has_code(model_violations(m2), "DimensionMismatch"));
}

TEST(ValidateModel, MixedModesRejected) {
    auto m = testing::sum_example();
    m.sigma_v = Mat::Identity(2, 2);
    EXPECT_TRUE(has_code(model_violations(m), "ModeMismatch"));

    auto m2 = testing::sum_example(5, true);
    m2.observation_partition.reset();
    EXPECT_TRUE(has_code(model_violations(m2), "ModeMismatch"));
}

TEST(ValidateModel, SingularSigmaXAllowed) {
    auto m = testing::sum_example();
    m.sigma_x = Mat::Zero(2, 2);
    EXPECT_TRUE(model_violations(m).empty());
}

TEST(ValidateModel, IdempotentOnRandomModels) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto m = testing::random_model(seed, 3, 2, 4, 2);
        const auto once = validate_model(m);
        const auto twice = validate_model(once);
        EXPECT_TRUE(once == twice);
        EXPECT_TRUE(once == m);
    }
}

TEST(ValidateModel, PartitionSums) {
    const auto m = testing::sum_example(5, true);
    EXPECT_EQ(m.controller_partition.total(), m.du());
    EXPECT_EQ(m.observation_partition->total(), m.dy());
    EXPECT_EQ(m.state_partition->total(), m.dx());
}

TEST(Partition, OffsetsAndSizes) {
    const Partition p({2, 1, 3});
    EXPECT_EQ(p.blocks(), 3);
    EXPECT_EQ(p.total(), 6);
    EXPECT_EQ(p.offset(0), 0);
    EXPECT_EQ(p.offset(2), 3);
    EXPECT_EQ(p.size(2), 3);
}

TEST(ProfileKind, NamesRoundTrip) {
    for (auto k : {ProfileKind::CentralizedSF, ProfileKind::DecentralizedSF, ProfileKind::CentralizedOF,
                   ProfileKind::DecentralizedOF, ProfileKind::Zero}) {
        EXPECT_EQ(parse_profile_kind(to_string(k)), k);
    }
    EXPECT_FALSE(parse_profile_kind("optimal").has_value());
}

// ---------------------------------------------------------------------------

const std::string kDataDir = SUBLQG_TEST_DATA_DIR;

TEST(LoadScenario, MinimalScalar) {
    const auto cfg = io::load_scenario(kDataDir + "/scalar_minimal.json");
    EXPECT_EQ(cfg.model.horizon, 2);
    EXPECT_EQ(cfg.model.n, 1);
    EXPECT_EQ(cfg.model.mode(), Mode::StateFeedback);
    EXPECT_EQ(cfg.num_runs, 1u);
}

TEST(LoadScenario, MissingSigmaVNamesField) {
    try {
        (void)io::load_scenario(kDataDir + "/missing_sigma_v.json");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("Sigma_v"), std::string::npos);
    }
}

TEST(LoadScenario, MissingFile) {
    EXPECT_THROW((void)io::load_scenario(kDataDir + "/does_not_exist.json"), ParseError);
}

TEST(LoadScenario, MalformedRowNamesFieldAndRow) {
    try {
        (void)io::parse_scenario(R"({"A": [[1.0], [2.0, 3.0]]})");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("'A'"), std::string::npos);
        EXPECT_NE(msg.find("row 2"), std::string::npos);
    }
    EXPECT_THROW((void)io::parse_scenario("{ not json"), ParseError);
}

TEST(LoadScenario, ValidationDelegated) {
    auto doc = io::model_to_json(testing::sum_example());
    doc["Sigma_w"] = io::matrix_to_json((Mat(2, 2) << 1.0, 0.0, 0.0, -0.5).finished());
    EXPECT_THROW((void)io::parse_scenario(doc.dump()), ValidationError);
}

TEST(SaveScenario, RoundTripIsExact) {
    const auto path = (std::filesystem::temp_directory_path() / "sublqg_roundtrip.json").string();
    for (bool observed : {false, true}) {
        ScenarioConfig cfg;
        cfg.model = testing::sum_example(5, observed);
        cfg.model.A(0, 1) = 0.1 + 0.2;  // not exactly representable as short decimal
        cfg.model.sigma_x(0, 0) = 1.0 / 3.0;
        cfg.seed = 0xfedcba9876543210ULL;
        cfg.num_runs = 17;
        cfg.profiles = {ProfileKind::CentralizedSF, ProfileKind::Zero};
        cfg.trace_path = "trace.csv";
        io::save_scenario(cfg, path);
        const auto back = io::load_scenario(path);
        EXPECT_TRUE(back == cfg);
        // Saving again yields identical bytes.
        const std::string first = io::read_file(path);
        io::save_scenario(back, path);
        EXPECT_EQ(first, io::read_file(path));
    }
    std::remove(path.c_str());
}

}  // namespace
}  // namespace sublqg
