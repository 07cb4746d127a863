#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "swistab/errors.hpp"
#include "swistab/model.hpp"
#include "swistab/pmq.hpp"

namespace swistab::io {

using nlohmann::json;

/// Input problems (unreadable file, malformed JSON, wrong shape).
class InputError : public Error {
public:
    using Error::Error;
};

json read_json(const std::filesystem::path& path);
/// Writes `j.dump(2)` plus a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

/// {"n": int, "M": int, "modes": [[[row-major reals]]]}; unknown keys ignored.
SwitchedLinearSystem system_from_json(const json& j);
json system_to_json(const SwitchedLinearSystem& sys);

/// {"n": int, "matrices": [[[row-major reals]]]}; unknown keys ignored.
pmq::PmPqf clf_from_json(const json& j);
json clf_to_json(const pmq::PmPqf& v);

/// {"breakpoints": [...], "weights": [[...]]}.
RelaxedSignal relaxed_from_json(const json& j);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);
json vector_to_json(const Vector& v);

/// Comma-separated reals, e.g. "1,0.5,-2".
std::vector<double> parse_real_list(const std::string& text, const std::string& what);

/// printf("%.17g"); round-trips every double.
std::string format_real(double x);

/// Trajectory CSV "t,x1,...,xn,mode" with 1-based modes (-1 for relaxed runs).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
/// Weights CSV "t,a1,...,aM" for relaxed runs.
void write_weights_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Lowercase hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace swistab::io
