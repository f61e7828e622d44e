#pragma once

#include <stdexcept>
#include <string>

namespace stereoshape {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Geometry / numeric domain violations.
class NonPositiveDepth : public Error {
public:
    NonPositiveDepth() : Error("depth must be positive") {}
    explicit NonPositiveDepth(const std::string& what) : Error(what) {}
};

class NonPositiveDisparity : public Error {
public:
    NonPositiveDisparity() : Error("disparity must be positive") {}
    explicit NonPositiveDisparity(const std::string& what) : Error(what) {}
};

class IndexOutOfGrid : public Error {
public:
    explicit IndexOutOfGrid(const std::string& what) : Error(what) {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& what) : Error(what) {}
};

class DegenerateBox : public Error {
public:
    explicit DegenerateBox(const std::string& what) : Error(what) {}
};

class EmptyMask : public Error {
public:
    EmptyMask() : Error("foreground mask has no pixels") {}
};

class EmptyCloud : public Error {
public:
    EmptyCloud() : Error("point cloud has no usable points") {}
    explicit EmptyCloud(const std::string& what) : Error(what) {}
};

class EmptyLibrary : public Error {
public:
    EmptyLibrary() : Error("template library is empty") {}
};

class EmptyMesh : public Error {
public:
    EmptyMesh() : Error("mesh has no triangles") {}
};

class MissingCloud : public Error {
public:
    explicit MissingCloud(const std::string& what) : Error(what) {}
};

class InvalidPartition : public Error {
public:
    explicit InvalidPartition(const std::string& what) : Error(what) {}
};

class UnknownShape : public Error {
public:
    explicit UnknownShape(const std::string& what) : Error(what) {}
};

// Strict-parser failure with location. `line` is 1-based; 0 means the error is
// not tied to a specific line (e.g. a truncated binary payload).
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& reason)
        : Error(format(source, line, reason)), source_(std::move(source)), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& source, std::size_t line,
                              const std::string& reason) {
        if (line == 0) return source + ": " + reason;
        return source + ":" + std::to_string(line) + ": " + reason;
    }
    std::string source_;
    std::size_t line_;
};

class MalformedLine : public ParseError {
public:
    using ParseError::ParseError;
};

class MissingKey : public ParseError {
public:
    MissingKey(std::string source, const std::string& key)
        : ParseError(std::move(source), 0, "missing key \"" + key + "\"") {}
};

class MalformedMatrix : public ParseError {
public:
    using ParseError::ParseError;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

class IoFailure : public Error {
public:
    explicit IoFailure(const std::string& what) : Error(what) {}
};

}  // namespace stereoshape
