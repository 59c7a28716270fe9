#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace covaudit {

enum class ErrorKind {
    EmptyDocument,
    InvalidChunkParams,
    DuplicateDocument,
    EmbeddingBackendError,
    DuplicateControl,
    SchemaError,
    EmptyIndex,
    EmbedderMismatch,
    TemplateError,
    BackendUnavailable,
    TransientBackend,
    TokenBudgetExceeded,
    ReplayMiss,
    MalformedOutput,
    UndefinedScore,
    MissingPrediction,
    UndefinedMetrics,
    UndefinedKappa,
    RunDegraded,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Base for every error the library throws. `kind()` lets callers (and the
/// CLI exit-code mapping) branch without a dynamic_cast ladder.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class SchemaError : public Error {
public:
    SchemaError(std::size_t record_index, const std::string& detail);

    std::size_t record_index() const noexcept { return record_index_; }

private:
    std::size_t record_index_;
};

class EmbeddingBackendError : public Error {
public:
    EmbeddingBackendError(std::string chunk_id, const std::string& detail);

    const std::string& chunk_id() const noexcept { return chunk_id_; }

private:
    std::string chunk_id_;
};

class MissingPrediction : public Error {
public:
    explicit MissingPrediction(std::vector<std::string> ids);

    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

}  // namespace covaudit
