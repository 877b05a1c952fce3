#pragma once

#include <fstream>
#include <string>

#include "json.hpp"

#include "inae/model.hpp"

namespace inae {

inline constexpr int model_format_version = 1;

namespace detail {

inline nlohmann::json row_major(const Matrix& m) {
    auto arr = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            arr.push_back(m(r, c));
        }
    }
    return arr;
}

inline Matrix from_row_major(const nlohmann::json& arr, Index rows, Index cols, const char* name) {
    if (!arr.is_array() || static_cast<Index>(arr.size()) != rows * cols) {
        throw format_error(std::string("model array '") + name + "' has the wrong length", 0);
    }
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            m(r, c) = arr[static_cast<std::size_t>(r * cols + c)].get<double>();
        }
    }
    return m;
}

} // namespace detail

/// {format_version, D, K, loss, W1, b1, W2, b2}; matrices as row-major number lists.
/// Numbers are written in shortest round-trip form, so load(save(p)) == p bitwise.
inline nlohmann::json model_to_json(const ModelParams& p, LossKind loss) {
    return nlohmann::json{{"format_version", model_format_version},
                          {"D", p.input_dim()},
                          {"K", p.hidden_dim()},
                          {"loss", to_string(loss)},
                          {"W1", detail::row_major(p.W1)},
                          {"b1", detail::row_major(p.b1)},
                          {"W2", detail::row_major(p.W2)},
                          {"b2", detail::row_major(p.b2)}};
}

struct StoredModel {
    ModelParams params;
    LossKind loss = LossKind::squared;
};

inline StoredModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != model_format_version) {
            throw format_error("unsupported model format_version", 0);
        }
        const auto D = j.at("D").get<Index>();
        const auto K = j.at("K").get<Index>();
        StoredModel out;
        out.loss = loss_from_string(j.at("loss").get<std::string>());
        out.params.W1 = detail::from_row_major(j.at("W1"), K, D, "W1");
        out.params.b1 = detail::from_row_major(j.at("b1"), K, 1, "b1");
        out.params.W2 = detail::from_row_major(j.at("W2"), D, K, "W2");
        out.params.b2 = detail::from_row_major(j.at("b2"), D, 1, "b2");
        out.params.validate();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("malformed model JSON: ") + e.what(), 0);
    }
}

inline void save_model(const ModelParams& p, LossKind loss, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw invalid_argument("cannot write '" + path + "'");
    }
    out << model_to_json(p, loss).dump() << '\n';
}

inline StoredModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw format_error("cannot open '" + path + "'", 0);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw format_error(std::string("model JSON parse error: ") + e.what(), e.byte);
    }
    return model_from_json(j);
}

} // namespace inae
