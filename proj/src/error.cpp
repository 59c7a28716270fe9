#include "covaudit/error.hpp"

namespace covaudit {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptyDocument: return "EmptyDocument";
        case ErrorKind::InvalidChunkParams: return "InvalidChunkParams";
        case ErrorKind::DuplicateDocument: return "DuplicateDocument";
        case ErrorKind::EmbeddingBackendError: return "EmbeddingBackendError";
        case ErrorKind::DuplicateControl: return "DuplicateControl";
        case ErrorKind::SchemaError: return "SchemaError";
        case ErrorKind::EmptyIndex: return "EmptyIndex";
        case ErrorKind::EmbedderMismatch: return "EmbedderMismatch";
        case ErrorKind::TemplateError: return "TemplateError";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::TransientBackend: return "TransientBackend";
        case ErrorKind::TokenBudgetExceeded: return "TokenBudgetExceeded";
        case ErrorKind::ReplayMiss: return "ReplayMiss";
        case ErrorKind::MalformedOutput: return "MalformedOutput";
        case ErrorKind::UndefinedScore: return "UndefinedScore";
        case ErrorKind::MissingPrediction: return "MissingPrediction";
        case ErrorKind::UndefinedMetrics: return "UndefinedMetrics";
        case ErrorKind::UndefinedKappa: return "UndefinedKappa";
        case ErrorKind::RunDegraded: return "RunDegraded";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

SchemaError::SchemaError(std::size_t record_index, const std::string& detail)
    : Error(ErrorKind::SchemaError,
            "record " + std::to_string(record_index) + ": " + detail),
      record_index_(record_index) {}

EmbeddingBackendError::EmbeddingBackendError(std::string chunk_id, const std::string& detail)
    : Error(ErrorKind::EmbeddingBackendError, "chunk " + chunk_id + ": " + detail),
      chunk_id_(std::move(chunk_id)) {}

namespace {
std::string list_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i == 10) {
            out += ", ... (" + std::to_string(ids.size()) + " total)";
            break;
        }
        if (i) out += ", ";
        out += ids[i];
    }
    return out;
}
}  // namespace

MissingPrediction::MissingPrediction(std::vector<std::string> ids)
    : Error(ErrorKind::MissingPrediction, "ids present in only one set: " + list_ids(ids)),
      ids_(std::move(ids)) {}

}  // namespace covaudit
