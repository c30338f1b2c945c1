#include "kmn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "kmn/rng.hpp"

namespace kmn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
    unsigned char buf[4];
    if (!in.read(reinterpret_cast<char*>(buf), 4))
        throw FormatError("truncated file while reading " + what);
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(buf), 4);
}

std::string hex_magic(std::uint32_t m) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", m);
    return buf;
}

// Dense re-encoding in first-appearance order.
std::vector<int> reencode(const std::vector<double>& raw) {
    std::vector<int> out(raw.size());
    std::map<double, int> seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto [it, inserted] = seen.emplace(raw[i], static_cast<int>(seen.size()));
        out[i] = it->second;
    }
    return out;
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot open image file " + images_path);
    const std::uint32_t img_magic = read_be32(img, "image magic");
    if (img_magic != kImageMagic)
        throw FormatError("bad image magic in " + images_path + ": expected " +
                          hex_magic(kImageMagic) + ", found " + hex_magic(img_magic));
    const std::uint32_t count = read_be32(img, "image count");
    const std::uint32_t rows = read_be32(img, "image rows");
    const std::uint32_t cols = read_be32(img, "image cols");
    const std::size_t d = std::size_t(rows) * cols;

    Matrix features(count, d);
    std::vector<unsigned char> buf(d);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d)))
            throw FormatError("truncated image payload in " + images_path + " at image " +
                              std::to_string(i));
        double* out = features.row(i);
        for (std::size_t t = 0; t < d; ++t) out[t] = buf[t] / 255.0;
    }

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot open label file " + labels_path);
    const std::uint32_t lab_magic = read_be32(lab, "label magic");
    if (lab_magic != kLabelMagic)
        throw FormatError("bad label magic in " + labels_path + ": expected " +
                          hex_magic(kLabelMagic) + ", found " + hex_magic(lab_magic));
    const std::uint32_t lab_count = read_be32(lab, "label count");
    if (lab_count != count)
        throw FormatError("image/label count mismatch: " + std::to_string(count) +
                          " images vs " + std::to_string(lab_count) + " labels");
    std::vector<unsigned char> raw(lab_count);
    if (!lab.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(lab_count)))
        throw FormatError("truncated label payload in " + labels_path);

    // Keep byte labels as-is when already dense in [0, max]; otherwise
    // re-encode in first-appearance order.
    int max_label = 0;
    std::vector<bool> present(256, false);
    for (unsigned char c : raw) {
        present[c] = true;
        max_label = std::max(max_label, static_cast<int>(c));
    }
    bool dense = true;
    for (int v = 0; v <= max_label; ++v) dense = dense && present[v];
    std::vector<int> labels(raw.size());
    if (dense) {
        for (std::size_t i = 0; i < raw.size(); ++i) labels[i] = raw[i];
    } else {
        std::vector<double> as_double(raw.begin(), raw.end());
        labels = reencode(as_double);
    }

    LabeledDataset ds;
    ds.features = DataMatrix(std::move(features));
    ds.labels = std::move(labels);
    ds.source = images_path;
    return ds;
}

void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path) {
    if (!dataset.labels) throw DomainError("write_idx requires labels");
    const std::size_t n = dataset.features.rows(), d = dataset.features.cols();
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("cannot create " + images_path);
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(n));
    write_be32(img, 1);
    write_be32(img, static_cast<std::uint32_t>(d));
    std::vector<unsigned char> buf(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = dataset.features.row(i);
        for (std::size_t t = 0; t < d; ++t) {
            const long v = std::lround(row[t] * 255.0);
            buf[t] = static_cast<unsigned char>(std::clamp(v, 0L, 255L));
        }
        img.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(d));
    }
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("cannot create " + labels_path);
    write_be32(lab, kLabelMagic);
    write_be32(lab, static_cast<std::uint32_t>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char c = static_cast<unsigned char>((*dataset.labels)[i]);
        lab.write(reinterpret_cast<const char*>(&c), 1);
    }
}

LabeledDataset load_csv(const std::string& path, bool has_labels, char delimiter) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t start = 0, col = 0;
        while (true) {
            const std::size_t end = line.find(delimiter, start);
            const std::string cell = line.substr(
                start, end == std::string::npos ? std::string::npos : end - start);
            ++col;
            try {
                std::size_t used = 0;
                const double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                row.push_back(v);
            } catch (const std::exception&) {
                throw FormatError("non-numeric cell at row " + std::to_string(line_no) +
                                  ", column " + std::to_string(col) + ": '" + cell + "'");
            }
            if (end == std::string::npos) break;
            start = end + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("ragged row " + std::to_string(line_no) + ": expected " +
                              std::to_string(rows.front().size()) + " cells, found " +
                              std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("empty table in " + path);
    const std::size_t width = rows.front().size();
    if (has_labels && width < 2)
        throw FormatError("labelled table needs at least 2 columns, found " +
                          std::to_string(width));

    const std::size_t d = has_labels ? width - 1 : width;
    Matrix features(rows.size(), d);
    std::vector<double> raw_labels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy(rows[i].begin(), rows[i].begin() + static_cast<std::ptrdiff_t>(d),
                  features.row(i));
        if (has_labels) raw_labels.push_back(rows[i][d]);
    }
    LabeledDataset ds;
    ds.features = DataMatrix(std::move(features));
    if (has_labels) ds.labels = reencode(raw_labels);
    ds.source = path;
    return ds;
}

DataMatrix normalize_l2(const DataMatrix& data, std::size_t* zero_rows) {
    Matrix out = data.values();
    const std::size_t n = out.rows(), d = out.cols();
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double norm = std::sqrt(data.row_squared_norm(i));
        if (norm == 0.0) {
            ++zeros;
            continue;
        }
        double* row = out.row(i);
        for (std::size_t t = 0; t < d; ++t) row[t] /= norm;
    }
    if (zero_rows) *zero_rows = zeros;
    return DataMatrix(std::move(out), true);
}

LabeledDataset make_blobs(std::size_t k, std::size_t per_cluster, std::size_t d,
                          double separation, double sigma, std::uint64_t seed) {
    if (k < 2) throw DomainError("make_blobs requires k >= 2");
    if (per_cluster < 1 || d < 1) throw DomainError("make_blobs requires n >= 1 and d >= 1");
    if (!(sigma > 0.0)) throw DomainError("make_blobs requires sigma > 0");

    SplitMix64 rng(seed);
    // Rejection-sample centers in a box wide enough that a valid placement
    // is easy to hit; give up after a bounded number of attempts.
    const double side =
        separation * std::max(2.0, 1.5 * std::pow(static_cast<double>(k),
                                                  1.0 / static_cast<double>(d)));
    Matrix centers(k, d);
    constexpr int kMaxAttempts = 20000;
    int attempts = 0;
    for (std::size_t c = 0; c < k;) {
        if (++attempts > kMaxAttempts)
            throw CapacityError("make_blobs could not place " + std::to_string(k) +
                                " centers at separation " + std::to_string(separation));
        double* row = centers.row(c);
        for (std::size_t t = 0; t < d; ++t) row[t] = rng.uniform(0.0, side);
        bool ok = true;
        for (std::size_t p = 0; p < c && ok; ++p)
            ok = squared_distance(row, centers.row(p), d) >= separation * separation;
        if (ok) ++c;
    }

    const std::size_t n = k * per_cluster;
    Matrix points(n, d);
    std::vector<int> labels(n);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < per_cluster; ++i) {
            const std::size_t r = c * per_cluster + i;
            double* row = points.row(r);
            for (std::size_t t = 0; t < d; ++t)
                row[t] = centers(c, t) + sigma * rng.normal();
            labels[r] = static_cast<int>(c);
        }
    }
    LabeledDataset ds;
    ds.features = DataMatrix(std::move(points));
    ds.labels = std::move(labels);
    ds.source = "blobs(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ",d=" +
                std::to_string(d) + ")";
    return ds;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
    if (a.features.cols() != b.features.cols())
        throw ShapeError("cannot concatenate datasets of different dimensions");
    if (a.labels.has_value() != b.labels.has_value())
        throw ShapeError("cannot concatenate labelled with unlabelled data");
    const std::size_t d = a.features.cols();
    Matrix values(a.features.rows() + b.features.rows(), d);
    std::copy(a.features.values().data().begin(), a.features.values().data().end(),
              values.data().begin());
    std::copy(b.features.values().data().begin(), b.features.values().data().end(),
              values.data().begin() + static_cast<std::ptrdiff_t>(a.features.rows() * d));
    LabeledDataset out;
    out.features = DataMatrix(std::move(values));
    if (a.labels) {
        out.labels = *a.labels;
        out.labels->insert(out.labels->end(), b.labels->begin(), b.labels->end());
    }
    out.source = a.source + "+" + b.source;
    return out;
}

}  // namespace kmn
