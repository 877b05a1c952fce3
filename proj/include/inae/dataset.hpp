#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "inae/common.hpp"

namespace inae {

/// Column-major sample collection: each column of `samples` is one D-dimensional point.
///
/// A corrupted dataset carries `copies_per_sample = m > 0` and an `origin_index`
/// mapping column `i*m + j` back to clean column `i`.
struct Dataset {
    Matrix samples;
    std::optional<std::vector<int>> labels;
    std::size_t copies_per_sample = 0;
    std::optional<std::vector<Index>> origin_index;

    Index feature_dim() const { return samples.rows(); }
    Index size() const { return samples.cols(); }

    int num_classes() const {
        if (!labels || labels->empty()) {
            return 0;
        }
        return *std::max_element(labels->begin(), labels->end()) + 1;
    }

    void validate() const {
        detail::require(samples.allFinite(), "dataset contains non-finite entries");
        if (labels) {
            detail::require(static_cast<Index>(labels->size()) == size(), "label count does not match sample count");
            detail::require(std::all_of(labels->begin(), labels->end(), [](int l) { return l >= 0; }),
                            "labels must be non-negative");
        }
        if (copies_per_sample > 0) {
            detail::require(origin_index && static_cast<Index>(origin_index->size()) == size(),
                            "corrupted dataset needs a total origin index");
        }
    }
};

enum class CorruptionKind { gaussian, salt_pepper, masking };

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::gaussian;
    double level = 0.0; // gaussian: std; salt_pepper/masking: fraction of entries
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(std::isfinite(level) && level >= 0.0, "corruption level must be >= 0");
        if (kind != CorruptionKind::gaussian) {
            detail::require(level <= 1.0, "corruption fraction must lie in [0, 1]");
        }
    }
};

inline std::string to_string(CorruptionKind kind) {
    switch (kind) {
    case CorruptionKind::gaussian: return "gaussian";
    case CorruptionKind::salt_pepper: return "salt_pepper";
    case CorruptionKind::masking: return "masking";
    }
    return "?";
}

inline CorruptionKind corruption_kind_from_string(const std::string& s) {
    if (s == "gaussian") return CorruptionKind::gaussian;
    if (s == "salt_pepper") return CorruptionKind::salt_pepper;
    if (s == "masking") return CorruptionKind::masking;
    throw invalid_argument("unknown corruption kind '" + s + "'");
}

/// Lifts 2-D curve coordinates into `ambient_dim` dimensions.
///
/// The first two rows are the identity and the lift has orthonormal columns, so
/// the remaining rows are zero: distances and arc equations carry over exactly.
/// Ambient noise is what populates the extra dimensions.
inline Matrix two_moons_embedding(Index ambient_dim) {
    Matrix lift = Matrix::Zero(ambient_dim, 2);
    lift(0, 0) = 1.0;
    lift(1, 1) = 1.0;
    return lift;
}

/// Noise-free two-moons points in the plane, 2 x (2 n_per_class); class 0 first.
inline Matrix two_moons_curve(Index n_per_class) {
    Matrix curve(2, 2 * n_per_class);
    for (Index i = 0; i < n_per_class; ++i) {
        const double u = n_per_class == 1 ? 0.0 : std::numbers::pi * static_cast<double>(i)
                                                      / static_cast<double>(n_per_class - 1);
        curve(0, i) = std::cos(u);
        curve(1, i) = std::sin(u);
        curve(0, n_per_class + i) = 1.0 - std::cos(u);
        curve(1, n_per_class + i) = 0.5 - std::sin(u);
    }
    return curve;
}

/// Two interlocking half circles, lifted to `ambient_dim` and perturbed by N(0, noise_std^2 I).
///
/// Arc positions are evenly spaced in u over [0, pi]; the seed drives the noise only.
inline Dataset gen_two_moons(Index n_per_class, Index ambient_dim, double noise_std, std::uint64_t seed) {
    detail::require(n_per_class >= 1, "n_per_class must be >= 1");
    detail::require(ambient_dim >= 2, "ambient_dim must be >= 2");
    detail::require(std::isfinite(noise_std) && noise_std >= 0.0, "noise_std must be >= 0");

    Dataset ds;
    ds.samples = two_moons_embedding(ambient_dim) * two_moons_curve(n_per_class);
    if (noise_std > 0.0) {
        auto rng = detail::make_rng(seed, detail::stream_noise);
        std::normal_distribution<double> normal(0.0, noise_std);
        for (Index c = 0; c < ds.samples.cols(); ++c) {
            for (Index r = 0; r < ambient_dim; ++r) {
                ds.samples(r, c) += normal(rng);
            }
        }
    }
    std::vector<int> labels(static_cast<std::size_t>(2 * n_per_class), 0);
    std::fill(labels.begin() + n_per_class, labels.end(), 1);
    ds.labels = std::move(labels);
    return ds;
}

namespace detail {

// Picks `count` distinct entries of [0, n) by a partial Fisher-Yates shuffle.
inline std::vector<Index> choose_entries(Index n, Index count, std::mt19937_64& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        idx[static_cast<std::size_t>(i)] = i;
    }
    for (Index i = 0; i < count; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(count));
    return idx;
}

} // namespace detail

/// Builds m corrupted copies of every column: output column `i*m + j` is the j-th
/// draw of rho(x_i). Each output column has its own random stream derived from
/// (spec.seed, column), so results do not depend on evaluation order.
///
/// Fraction-based corruptions touch exactly floor(level * D) entries per column.
inline Dataset corrupt(const Dataset& ds, const CorruptionSpec& spec, Index m) {
    detail::require(m >= 1, "number of corrupted copies must be >= 1");
    spec.validate();
    const Index n = ds.size();
    const Index dim = ds.feature_dim();

    Vector feature_min;
    Vector feature_max;
    if (spec.kind == CorruptionKind::salt_pepper && n > 0) {
        feature_min = ds.samples.rowwise().minCoeff();
        feature_max = ds.samples.rowwise().maxCoeff();
    }
    const auto touched = static_cast<Index>(std::floor(spec.level * static_cast<double>(dim)));

    Dataset out;
    out.samples.resize(dim, n * m);
    out.copies_per_sample = static_cast<std::size_t>(m);
    std::vector<Index> origin(static_cast<std::size_t>(n * m));
    if (ds.labels) {
        out.labels = std::vector<int>(static_cast<std::size_t>(n * m));
    }

    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
            const Index col = i * m + j;
            origin[static_cast<std::size_t>(col)] = i;
            if (ds.labels) {
                (*out.labels)[static_cast<std::size_t>(col)] = (*ds.labels)[static_cast<std::size_t>(i)];
            }
            auto x = out.samples.col(col);
            x = ds.samples.col(i);
            auto rng = detail::make_rng(spec.seed, detail::stream_corruption + static_cast<std::uint64_t>(col));
            switch (spec.kind) {
            case CorruptionKind::gaussian:
                if (spec.level > 0.0) {
                    std::normal_distribution<double> normal(0.0, spec.level);
                    for (Index r = 0; r < dim; ++r) {
                        x(r) += normal(rng);
                    }
                }
                break;
            case CorruptionKind::salt_pepper: {
                std::bernoulli_distribution coin(0.5);
                for (Index r : detail::choose_entries(dim, touched, rng)) {
                    x(r) = coin(rng) ? feature_max(r) : feature_min(r);
                }
                break;
            }
            case CorruptionKind::masking:
                for (Index r : detail::choose_entries(dim, touched, rng)) {
                    x(r) = 0.0;
                }
                break;
            }
        }
    }
    out.origin_index = std::move(origin);
    return out;
}

/// Columns `indices` of `ds`, keeping labels. Copy bookkeeping is dropped.
inline Dataset select_columns(const Dataset& ds, const std::vector<Index>& indices) {
    Dataset out;
    out.samples.resize(ds.feature_dim(), static_cast<Index>(indices.size()));
    std::vector<int> labels;
    for (std::size_t c = 0; c < indices.size(); ++c) {
        detail::require(indices[c] >= 0 && indices[c] < ds.size(), "column index out of range");
        out.samples.col(static_cast<Index>(c)) = ds.samples.col(indices[c]);
        if (ds.labels) {
            labels.push_back((*ds.labels)[static_cast<std::size_t>(indices[c])]);
        }
    }
    if (ds.labels) {
        out.labels = std::move(labels);
    }
    return out;
}

/// Seeded shuffle, then the first `n_train` columns form the training split and the
/// next `n_test` the test split.
inline std::pair<Dataset, Dataset> shuffled_split(const Dataset& ds, Index n_train, Index n_test, std::uint64_t seed) {
    detail::require(n_train >= 1 && n_test >= 0 && n_train + n_test <= ds.size(),
                    "split sizes exceed the dataset");
    std::vector<Index> order(static_cast<std::size_t>(ds.size()));
    for (Index i = 0; i < ds.size(); ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    auto rng = detail::make_rng(seed, detail::stream_split);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Index> train(order.begin(), order.begin() + n_train);
    std::vector<Index> test(order.begin() + n_train, order.begin() + n_train + n_test);
    return {select_columns(ds, train), select_columns(ds, test)};
}

// ---------------------------------------------------------------------------
// IDX files (big-endian header, raw unsigned bytes)
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw format_error("cannot open '" + path + "'", 0);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& path) {
    if (bytes.size() < offset + 4) {
        throw format_error("truncated IDX header in '" + path + "'", offset);
    }
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16)
           | (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                static_cast<char>(v)};
    out.write(b.data(), 4);
}

} // namespace detail

inline constexpr std::uint32_t idx_images_magic = 0x00000803;
inline constexpr std::uint32_t idx_labels_magic = 0x00000801;

/// Reads an IDX image/label file pair. Pixels are scaled to [0, 1] by 1/255 and each
/// image is flattened row-major into one column.
inline Dataset load_idx(const std::string& path_images, const std::string& path_labels) {
    const auto img = detail::read_file(path_images);
    const auto lab = detail::read_file(path_labels);

    if (detail::read_be32(img, 0, path_images) != idx_images_magic) {
        throw format_error("bad IDX image magic in '" + path_images + "'", 0);
    }
    if (detail::read_be32(lab, 0, path_labels) != idx_labels_magic) {
        throw format_error("bad IDX label magic in '" + path_labels + "'", 0);
    }
    const std::size_t count = detail::read_be32(img, 4, path_images);
    const std::size_t rows = detail::read_be32(img, 8, path_images);
    const std::size_t cols = detail::read_be32(img, 12, path_images);
    const std::size_t label_count = detail::read_be32(lab, 4, path_labels);
    if (count != label_count) {
        throw format_error("image count " + std::to_string(count) + " does not match label count "
                               + std::to_string(label_count),
                           4);
    }
    const std::size_t dim = rows * cols;
    constexpr std::size_t image_header = 16;
    constexpr std::size_t label_header = 8;
    if (img.size() < image_header + count * dim) {
        throw format_error("truncated IDX image data in '" + path_images + "'", img.size());
    }
    if (lab.size() < label_header + count) {
        throw format_error("truncated IDX label data in '" + path_labels + "'", lab.size());
    }

    Dataset ds;
    ds.samples.resize(static_cast<Index>(dim), static_cast<Index>(count));
    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned char* px = img.data() + image_header + i * dim;
        for (std::size_t p = 0; p < dim; ++p) {
            ds.samples(static_cast<Index>(p), static_cast<Index>(i)) = px[p] / 255.0;
        }
        labels[i] = lab[label_header + i];
    }
    ds.labels = std::move(labels);
    return ds;
}

/// Writes `ds` as an IDX pair; values are mapped back to bytes by round(255 x).
inline void save_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols, const std::string& path_images,
                     const std::string& path_labels) {
    detail::require(static_cast<Index>(rows) * cols == ds.feature_dim(), "rows*cols must equal feature_dim");
    detail::require(ds.labels.has_value(), "IDX export needs labels");
    std::ofstream img(path_images, std::ios::binary);
    std::ofstream lab(path_labels, std::ios::binary);
    if (!img || !lab) {
        throw invalid_argument("cannot write IDX output");
    }
    detail::write_be32(img, idx_images_magic);
    detail::write_be32(img, static_cast<std::uint32_t>(ds.size()));
    detail::write_be32(img, rows);
    detail::write_be32(img, cols);
    std::vector<char> buffer(static_cast<std::size_t>(ds.feature_dim()));
    for (Index c = 0; c < ds.size(); ++c) {
        for (Index r = 0; r < ds.feature_dim(); ++r) {
            const double v = std::clamp(std::round(ds.samples(r, c) * 255.0), 0.0, 255.0);
            buffer[static_cast<std::size_t>(r)] = static_cast<char>(static_cast<unsigned char>(v));
        }
        img.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    }
    detail::write_be32(lab, idx_labels_magic);
    detail::write_be32(lab, static_cast<std::uint32_t>(ds.size()));
    for (int l : *ds.labels) {
        lab.put(static_cast<char>(static_cast<unsigned char>(l)));
    }
}

// ---------------------------------------------------------------------------
// CSV: one sample per row, features then an optional integer label.
// ---------------------------------------------------------------------------

inline void write_csv(const Dataset& ds, std::ostream& out) {
    out << std::setprecision(17);
    for (Index c = 0; c < ds.size(); ++c) {
        for (Index r = 0; r < ds.feature_dim(); ++r) {
            if (r > 0) {
                out << ',';
            }
            out << ds.samples(r, c);
        }
        if (ds.labels) {
            out << ',' << (*ds.labels)[static_cast<std::size_t>(c)];
        }
        out << '\n';
    }
}

inline void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw invalid_argument("cannot write '" + path + "'");
    }
    write_csv(ds, out);
}

/// Parses CSV rows; a first row that does not parse as numbers is treated as a header.
/// `labeled` selects whether the last column is an integer label. Offsets in errors are line numbers.
inline Dataset read_csv(std::istream& in, bool labeled) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> values;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                numeric = false;
                break;
            }
            values.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && line_no == 1) {
                continue; // header
            }
            throw format_error("non-numeric CSV cell", line_no);
        }
        if (!rows.empty() && values.size() != rows.front().size()) {
            throw format_error("ragged CSV row", line_no);
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw format_error("empty CSV input", line_no);
    }
    const auto width = static_cast<Index>(rows.front().size());
    const Index dim = labeled ? width - 1 : width;
    if (dim < 1) {
        throw format_error("CSV has no feature columns", 1);
    }
    Dataset ds;
    ds.samples.resize(dim, static_cast<Index>(rows.size()));
    std::vector<int> labels;
    for (std::size_t c = 0; c < rows.size(); ++c) {
        for (Index r = 0; r < dim; ++r) {
            ds.samples(r, static_cast<Index>(c)) = rows[c][static_cast<std::size_t>(r)];
        }
        if (labeled) {
            const double l = rows[c].back();
            if (l != std::floor(l) || l < 0) {
                throw format_error("label is not a non-negative integer", c + 1);
            }
            labels.push_back(static_cast<int>(l));
        }
    }
    if (labeled) {
        ds.labels = std::move(labels);
    }
    ds.validate();
    return ds;
}

inline Dataset read_csv(const std::string& path, bool labeled) {
    std::ifstream in(path);
    if (!in) {
        throw format_error("cannot open '" + path + "'", 0);
    }
    return read_csv(in, labeled);
}

} // namespace inae
