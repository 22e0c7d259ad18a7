#ifndef AUDIT_ERROR_HPP
#define AUDIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace audit {

// All contract violations surface as AuditError with a stable machine
// code plus a human message. CLI maps codes to exit status.
class AuditError : public std::runtime_error {
public:
    AuditError(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

}  // namespace audit

#endif
