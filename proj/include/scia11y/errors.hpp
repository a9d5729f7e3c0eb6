#pragma once

#include <stdexcept>
#include <string>

namespace scia11y {

// Base class for all library errors. `code()` is a stable machine-readable
// identifier, suitable for exit-code mapping and structured logs.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class MalformedInputError : public Error {
public:
    explicit MalformedInputError(const std::string& message)
        : Error("malformed_input", message) {}
};

class EmptyDocumentError : public Error {
public:
    explicit EmptyDocumentError(const std::string& message)
        : Error("empty_document", message) {}
};

class PaperIdMismatchError : public Error {
public:
    explicit PaperIdMismatchError(const std::string& message)
        : Error("paper_id_mismatch", message) {}
};

class ReportUnreadableError : public Error {
public:
    explicit ReportUnreadableError(const std::string& message)
        : Error("report_unreadable", message) {}
};

class EmptyInputError : public Error {
public:
    explicit EmptyInputError(const std::string& message)
        : Error("empty_input", message) {}
};

class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& message)
        : Error("degenerate_input", message) {}
};

class InvalidRecordError : public Error {
public:
    explicit InvalidRecordError(const std::string& message)
        : Error("invalid_record", message) {}
};

class LengthMismatchError : public Error {
public:
    explicit LengthMismatchError(const std::string& message)
        : Error("length_mismatch", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message) : Error("io_error", message) {}
};

} // namespace scia11y
