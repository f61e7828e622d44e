#include "stereoshape/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stereoshape/errors.hpp"

namespace stereoshape {

static_assert(std::endian::native == std::endian::little,
              "tensor payload I/O assumes a little-endian host");

Tensor parse_tensor(const std::string& bytes, const std::string& source_label) {
    const std::size_t eol = bytes.find('\n');
    if (eol == std::string::npos)
        throw ParseError(source_label, 1, "missing header line terminator");
    const std::string header = bytes.substr(0, eol);

    const std::string prefix = "dims:";
    if (header.rfind(prefix, 0) != 0)
        throw ParseError(source_label, 1, "header must start with \"dims:\"");

    Tensor t;
    std::istringstream iss(header.substr(prefix.size()));
    std::string tok;
    while (iss >> tok) {
        std::size_t d = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || d == 0)
            throw ParseError(source_label, 1, "bad dimension \"" + tok + "\"");
        t.dims.push_back(d);
    }
    if (t.dims.empty()) throw ParseError(source_label, 1, "header lists no dimensions");

    const std::size_t n = t.element_count();
    const std::size_t payload = bytes.size() - (eol + 1);
    if (payload != n * sizeof(float))
        throw ParseError(source_label, 0,
                         "payload holds " + std::to_string(payload / sizeof(float)) +
                             " floats, header expects " + std::to_string(n));

    t.values.resize(n);
    std::memcpy(t.values.data(), bytes.data() + eol + 1, n * sizeof(float));
    return t;
}

Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_tensor(buf.str(), path);
}

void save_tensor(const Tensor& tensor, const std::string& path) {
    if (tensor.dims.empty()) throw IoFailure("tensor has no dimensions");
    if (tensor.values.size() != tensor.element_count())
        throw IoFailure("tensor value count does not match dims");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot create " + path);
    out << "dims:";
    for (std::size_t d : tensor.dims) out << ' ' << d;
    out << '\n';
    out.write(reinterpret_cast<const char*>(tensor.values.data()),
              static_cast<std::streamsize>(tensor.values.size() * sizeof(float)));
    if (!out) throw IoFailure("cannot write " + path);
}

}  // namespace stereoshape
