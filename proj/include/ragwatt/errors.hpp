#pragma once

#include <stdexcept>
#include <string>

namespace ragwatt {

/// Base class for every error the harness raises on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// corpus
struct ParseError : Error {
    size_t line = 0;
    ParseError(const std::string& msg, size_t line_no = 0)
        : Error(line_no ? "line " + std::to_string(line_no) + ": " + msg : msg), line(line_no) {}
};
struct SchemaError : Error {
    std::string field;
    SchemaError(const std::string& field_name, size_t line_no = 0)
        : Error(line_no ? "line " + std::to_string(line_no) + ": missing or invalid field '" + field_name + "'"
                        : "missing or invalid field '" + field_name + "'"),
          field(field_name) {}
};
struct IoError : Error {
    using Error::Error;
};
struct EmptyCorpus : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

// retrieval
struct EmptyInput : Error {
    using Error::Error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct EmptyIndex : Error {
    using Error::Error;
};
struct EmbedServiceError : Error {
    bool retryable;
    EmbedServiceError(const std::string& msg, bool can_retry = true) : Error(msg), retryable(can_retry) {}
};
struct IndexMismatch : Error {
    using Error::Error;
};

// promptbuilder
struct QueryTooLarge : Error {
    using Error::Error;
};
struct BudgetOverflow : Error {
    using Error::Error;
};

// inference
struct TimeoutError : Error {
    double elapsed_s;
    TimeoutError(const std::string& msg, double elapsed) : Error(msg), elapsed_s(elapsed) {}
};
struct BackendError : Error {
    int status;
    std::string body_excerpt;
    BackendError(const std::string& msg, int http_status, std::string body = {})
        : Error(msg), status(http_status), body_excerpt(std::move(body)) {}
};
struct ContextOverflow : Error {
    using Error::Error;
};

// energymeter
struct MeterUnavailable : Error {
    using Error::Error;
};

// runner
struct ResumeConflict : Error {
    using Error::Error;
};

// analysis
struct DomainError : Error {
    using Error::Error;
};
struct ReportError : Error {
    using Error::Error;
};

}  // namespace ragwatt
