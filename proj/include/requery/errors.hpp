#pragma once

#include <stdexcept>
#include <string>

namespace requery {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class CatalogError : public Error {
public:
    using Error::Error;
};

class EmbeddingError : public Error {
public:
    using Error::Error;
};

class LlmError : public Error {
public:
    using Error::Error;
};

// Replay-mode lookup failure; carries the digest of the missing prompt.
class ReplayMissError : public LlmError {
public:
    ReplayMissError(const std::string& what, std::string digest)
        : LlmError(what), digest_(std::move(digest)) {}

    const std::string& digest() const { return digest_; }

private:
    std::string digest_;
};

class PackagingError : public Error {
public:
    using Error::Error;
};

class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

} // namespace requery
