#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"
#include "swistab/errors.hpp"
#include "swistab_tools/io.hpp"

using namespace swistab;
using namespace swistab::io;
using swistab::testing::mat2;
using swistab::testing::sys_a;
using swistab::testing::vec;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("swistab_io_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(SystemJson, RoundTrip) {
    const SwitchedLinearSystem sys({mat2(-1.0, 0.1, 1.0 / 3.0, 0.5), mat2(0.5, -2e-17, 0.0, -1.0)});
    const SwitchedLinearSystem back = system_from_json(json::parse(system_to_json(sys).dump()));
    ASSERT_EQ(back.num_modes(), 2u);
    EXPECT_EQ(back.mode(0), sys.mode(0));
    EXPECT_EQ(back.mode(1), sys.mode(1));
}

TEST(SystemJson, ParsesSpecLayout) {
    const json j = json::parse(R"({"n": 2, "M": 2, "modes": [[[-1, 0], [0, 0.5]], [[0.5, 0], [0, -1]]]})");
    const SwitchedLinearSystem sys = system_from_json(j);
    EXPECT_EQ(sys.mode(0), sys_a().mode(0));
    EXPECT_EQ(sys.mode(1), sys_a().mode(1));
}

TEST(SystemJson, Errors) {
    EXPECT_THROW(system_from_json(json::parse(R"({"n": 2, "modes": []})")), InputError);
    EXPECT_THROW(system_from_json(json::parse(R"({"n": 2, "M": 1, "modes": [[[1, 0, 0], [0, 1, 0]]]})")),
                 DimensionError);
    EXPECT_THROW(system_from_json(json::parse(R"({"n": 2, "M": 1, "modes": [[[1, "x"], [0, 1]]]})")),
                 InputError);
    EXPECT_THROW(system_from_json(json::parse(R"({"n": 2, "M": 0, "modes": []})")), Error);
}

TEST(ClfJson, RoundTripAndErrors) {
    const pmq::PmPqf v({SymMatrix(mat2(1.0, 0.25, 0.25, 2.0)), SymMatrix::identity(2)});
    const pmq::PmPqf back = clf_from_json(json::parse(clf_to_json(v).dump()));
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back.piece(0), v.piece(0));
    EXPECT_THROW(clf_from_json(json::parse(R"({"n": 3, "matrices": [[[1, 0], [0, 1]]]})")),
                 DimensionError);
    EXPECT_THROW(clf_from_json(json::parse(R"({"n": 2, "matrices": []})")), InputError);
}

TEST(RelaxedJson, Parses) {
    const RelaxedSignal s = relaxed_from_json(
        json::parse(R"({"breakpoints": [0, 1, 2], "weights": [[0.5, 0.5], [1, 0]]})"));
    EXPECT_EQ(s.num_intervals(), 2u);
    EXPECT_EQ(s.weights()[1], vec({1.0, 0.0}));
    EXPECT_THROW(relaxed_from_json(json::parse(R"({"breakpoints": [0, 1]})")), InputError);
}

TEST(ParseRealList, Values) {
    EXPECT_EQ(parse_real_list("1,-2.5, 3e-2", "z"), (std::vector<double>{1.0, -2.5, 0.03}));
    EXPECT_THROW(parse_real_list("1,abc", "z"), InputError);
    EXPECT_THROW(parse_real_list("1,2x", "z"), InputError);
    EXPECT_THROW(parse_real_list("", "z"), InputError);
    EXPECT_THROW(parse_real_list("nan", "z"), InputError);
}

TEST(FormatReal, SeventeenDigitsRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567}) {
        EXPECT_EQ(std::stod(format_real(x)), x);
    }
    EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(TrajectoryCsv, PureAndRelaxed) {
    Trajectory pure;
    pure.z = vec({1.0, 0.0});
    pure.samples = {{0.0, vec({1.0, 0.0}), 0, {}},
                    {0.5, vec({std::exp(-0.5), -0.0}), 1, {}},
                    {1.0, vec({1.0 / 3.0, 2e-300}), 1, {}}};
    const auto pure_path = temp_path("pure.csv");
    write_trajectory_csv(pure_path, pure);
    EXPECT_EQ(slurp(pure_path),
              "t,x1,x2,mode\n"
              "0,1,0,1\n"
              "0.5,0.60653065971263342,-0,2\n"
              "1,0.33333333333333331,2.0000000000000001e-300,2\n");

    const Trajectory relaxed = propagate_relaxed(
        sys_a(), RelaxedSignal::constant(vec({0.25, 0.75}), 1.0), vec({1.0, 1.0}), 1.0, 0.5);
    const auto rel_path = temp_path("relaxed.csv");
    const auto w_path = temp_path("weights.csv");
    write_trajectory_csv(rel_path, relaxed);
    write_weights_csv(w_path, relaxed);
    std::istringstream rows(slurp(rel_path));
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, "t,x1,x2,mode");
    while (std::getline(rows, line)) {
        EXPECT_EQ(line.substr(line.rfind(',')), ",-1");
    }
    EXPECT_EQ(slurp(w_path), "t,a1,a2\n0,0.25,0.75\n0.5,0.25,0.75\n1,0.25,0.75\n");
}

TEST(Sha256, KnownDigest) {
    const auto p = temp_path("abc.txt");
    std::ofstream(p) << "abc";
    EXPECT_EQ(sha256_file(p), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_THROW(sha256_file(temp_path("missing.txt")), InputError);
}

TEST(ReadJson, Errors) {
    EXPECT_THROW(read_json(temp_path("missing.json")), InputError);
    const auto p = temp_path("bad.json");
    std::ofstream(p) << "{not json";
    EXPECT_THROW(read_json(p), InputError);
}
