#pragma once

// Flat binary tensor file: one ASCII header line "dims: d1 d2 ... dk\n"
// followed by the values as little-endian 32-bit floats in row-major order.

#include <cstdint>
#include <string>
#include <vector>

namespace stereoshape {

struct Tensor {
    std::vector<std::size_t> dims;
    std::vector<float> values;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (std::size_t d : dims) n *= d;
        return dims.empty() ? 0 : n;
    }
};

// Throws ParseError (with the source label) on any malformed header or a
// payload whose byte count does not match the dims product.
Tensor parse_tensor(const std::string& bytes, const std::string& source_label);

Tensor load_tensor(const std::string& path);
void save_tensor(const Tensor& tensor, const std::string& path);

}  // namespace stereoshape
