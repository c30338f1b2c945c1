#ifndef KMN_MODEL_IO_HPP
#define KMN_MODEL_IO_HPP

#include <string>

#include "kmn/core.hpp"

namespace kmn {

// Versioned little-endian container:
//   magic "KMNMODEL" | u32 version (1) | u32 k | u32 d | u8 normalized
//   | f64 alpha | k*d f64 W row-major | k f64 b
void save_model(const ClusterModel& model, bool normalized_input, const std::string& path);

struct LoadedModel {
    ClusterModel model;
    bool normalized_input = false;
};

LoadedModel load_model(const std::string& path);

}  // namespace kmn

#endif  // KMN_MODEL_IO_HPP
