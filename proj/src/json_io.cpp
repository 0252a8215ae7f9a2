#include "pcstage/json_io.hpp"

#include "pcstage/error.hpp"

namespace pcstage {

nlohmann::json matrix_to_json(const Matrix& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    try {
        const auto rows = j.at("rows").get<Eigen::Index>();
        const auto cols = j.at("cols").get<Eigen::Index>();
        const auto& data = j.at("data");
        if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
            throw Error(Errc::Schema, "matrix payload size does not match its shape");
        }
        Matrix m(rows, cols);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Schema, std::string("malformed matrix: ") + e.what());
    }
}

nlohmann::json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const nlohmann::json& j) {
    try {
        const auto values = j.get<std::vector<double>>();
        return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::Schema, std::string("malformed vector: ") + e.what());
    }
}

void check_format(const nlohmann::json& j, std::string_view format, int version) {
    if (!j.is_object() || !j.contains("format") || j["format"] != format) {
        throw Error(Errc::Schema, "expected a '" + std::string(format) + "' document");
    }
    if (!j.contains("version") || j["version"] != version) {
        throw Error(Errc::Schema, "unsupported '" + std::string(format) + "' version");
    }
}

} // namespace pcstage
