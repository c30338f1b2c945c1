#ifndef KMN_DATA_HPP
#define KMN_DATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kmn/core.hpp"

namespace kmn {

struct LabeledDataset {
    DataMatrix features;
    std::optional<std::vector<int>> labels;
    std::string source;
};

// IDX container (big-endian): images under magic 0x00000803 with dims
// (count, rows, cols) and unsigned bytes scaled to [0,1]; labels under magic
// 0x00000801 with (count) and one byte per label.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);
void write_idx(const LabeledDataset& dataset, const std::string& images_path,
               const std::string& labels_path);

// Rectangular numeric table; when has_labels, the last column is the label,
// re-encoded densely in first-appearance order. No quoting support.
LabeledDataset load_csv(const std::string& path, bool has_labels, char delimiter = ',');

// Each nonzero row divided by its l2 norm; zero rows pass through unchanged
// (counted in *zero_rows when given).
DataMatrix normalize_l2(const DataMatrix& data, std::size_t* zero_rows = nullptr);

// k isotropic Gaussian clusters of per_cluster points each, centers mutually
// at least `separation` apart; labels name the generating cluster.
LabeledDataset make_blobs(std::size_t k, std::size_t per_cluster, std::size_t d,
                          double separation, double sigma, std::uint64_t seed);

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

}  // namespace kmn

#endif  // KMN_DATA_HPP
