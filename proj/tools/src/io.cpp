#include "swistab_tools/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

namespace swistab::io {

namespace {

const json& require(const json& j, const char* key, const std::string& what) {
    if (!j.is_object() || !j.contains(key)) {
        throw InputError(what + ": missing key \"" + key + "\"");
    }
    return j.at(key);
}

double real_from_json(const json& j, const std::string& what) {
    if (!j.is_number()) {
        throw InputError(what + ": expected a number");
    }
    return j.get<double>();
}

long long int_from_json(const json& j, const std::string& what) {
    if (!j.is_number_integer()) {
        throw InputError(what + ": expected an integer");
    }
    return j.get<long long>();
}

std::vector<double> reals_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) {
        throw InputError(what + ": expected an array");
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const json& e : j) {
        out.push_back(real_from_json(e, what));
    }
    return out;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) {
        throw InputError(what + ": expected a nonempty list of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().is_array() ? j.front().size() : 0);
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::vector<double> row = reals_from_json(j[static_cast<std::size_t>(r)], what);
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw DimensionError(what + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)];
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        out.push_back(std::move(row));
    }
    return out;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

SwitchedLinearSystem system_from_json(const json& j) {
    RawSystem raw;
    raw.n = int_from_json(require(j, "n", "system"), "system n");
    raw.m = int_from_json(require(j, "M", "system"), "system M");
    const json& modes = require(j, "modes", "system");
    if (!modes.is_array()) {
        throw InputError("system modes: expected an array");
    }
    for (const json& mode : modes) {
        if (!mode.is_array()) {
            throw InputError("system mode: expected a list of rows");
        }
        std::vector<std::vector<double>> rows;
        for (const json& row : mode) {
            rows.push_back(reals_from_json(row, "system mode row"));
        }
        raw.modes.push_back(std::move(rows));
    }
    return validate_system(raw);
}

json system_to_json(const SwitchedLinearSystem& sys) {
    json modes = json::array();
    for (const Matrix& a : sys.modes()) {
        modes.push_back(matrix_to_json(a));
    }
    return json{{"n", sys.dim()}, {"M", sys.num_modes()}, {"modes", modes}};
}

pmq::PmPqf clf_from_json(const json& j) {
    const long long n = int_from_json(require(j, "n", "clf"), "clf n");
    const json& mats = require(j, "matrices", "clf");
    if (!mats.is_array() || mats.empty()) {
        throw InputError("clf matrices: expected a nonempty array");
    }
    std::vector<SymMatrix> pieces;
    for (const json& m : mats) {
        const Matrix p = matrix_from_json(m, "clf matrix");
        if (p.rows() != n || p.cols() != n) {
            throw DimensionError("clf matrix is " + std::to_string(p.rows()) + "x" +
                                 std::to_string(p.cols()) + ", declared n = " + std::to_string(n));
        }
        pieces.emplace_back(p);
    }
    return pmq::PmPqf(std::move(pieces));
}

json clf_to_json(const pmq::PmPqf& v) {
    json mats = json::array();
    for (const SymMatrix& p : v.pieces()) {
        mats.push_back(matrix_to_json(p.mat()));
    }
    return json{{"n", v.dim()}, {"matrices", mats}};
}

RelaxedSignal relaxed_from_json(const json& j) {
    std::vector<double> bp = reals_from_json(require(j, "breakpoints", "relaxed signal"),
                                             "relaxed breakpoints");
    const json& w = require(j, "weights", "relaxed signal");
    if (!w.is_array()) {
        throw InputError("relaxed weights: expected an array");
    }
    std::vector<Vector> weights;
    for (const json& row : w) {
        const std::vector<double> a = reals_from_json(row, "relaxed weights");
        weights.push_back(Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size())));
    }
    return RelaxedSignal(std::move(bp), std::move(weights));
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InputError(what + ": cannot parse \"" + item + "\"");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) {
            ++used;
        }
        if (used != item.size() || !std::isfinite(v)) {
            throw InputError(what + ": cannot parse \"" + item + "\"");
        }
        out.push_back(v);
    }
    if (out.empty()) {
        throw InputError(what + ": empty list");
    }
    return out;
}

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    out << "t";
    for (Eigen::Index i = 0; i < traj.z.size(); ++i) {
        out << ",x" << (i + 1);
    }
    out << ",mode\n";
    for (const TrajectorySample& s : traj.samples) {
        out << format_real(s.t);
        for (Eigen::Index i = 0; i < s.x.size(); ++i) {
            out << ',' << format_real(s.x(i));
        }
        out << ',' << (s.mode < 0 ? -1 : s.mode + 1) << '\n';
    }
}

void write_weights_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path.string());
    }
    const Eigen::Index m = traj.samples.empty() ? 0 : traj.samples.front().weights.size();
    out << "t";
    for (Eigen::Index i = 0; i < m; ++i) {
        out << ",a" << (i + 1);
    }
    out << '\n';
    for (const TrajectorySample& s : traj.samples) {
        out << format_real(s.t);
        for (Eigen::Index i = 0; i < s.weights.size(); ++i) {
            out << ',' << format_real(s.weights(i));
        }
        out << '\n';
    }
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

}  // namespace swistab::io
