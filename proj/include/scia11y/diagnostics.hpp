#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace scia11y {

struct Warning {
    std::string code;
    std::string message;
    std::string context; // usually a paper id or file path; may be empty
};

// Collects structured warnings produced while processing one document.
// Warnings never abort processing; callers decide where to emit them.
class Diagnostics {
public:
    void warn(std::string code, std::string message, std::string context = {}) {
        warnings_.push_back({std::move(code), std::move(message), std::move(context)});
    }

    const std::vector<Warning>& warnings() const noexcept { return warnings_; }
    std::size_t count() const noexcept { return warnings_.size(); }
    bool empty() const noexcept { return warnings_.empty(); }
    void clear() { warnings_.clear(); }

    void set_default_context(std::string context) { default_context_ = std::move(context); }
    const std::string& default_context() const noexcept { return default_context_; }

    void warn_here(std::string code, std::string message) {
        warn(std::move(code), std::move(message), default_context_);
    }

    // One JSON object per warning, newline-delimited.
    void write_json_lines(std::ostream& out) const {
        for (const auto& w : warnings_) {
            nlohmann::json j{{"warning", w.code}, {"message", w.message}};
            if (!w.context.empty()) {
                j["context"] = w.context;
            }
            out << j.dump() << '\n';
        }
    }

private:
    std::vector<Warning> warnings_;
    std::string default_context_;
};

} // namespace scia11y
