#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "permlim/errors.hpp"

namespace testing {

// Collects messages sent through the warning channel while in scope.
class WarningCapture {
public:
    WarningCapture() { previous_ = permlim::Warnings::set_handler(&WarningCapture::record); messages().clear(); }
    ~WarningCapture() { permlim::Warnings::set_handler(previous_); }
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    const std::vector<std::string>& seen() const { return messages(); }
    bool contains(const std::string& needle) const {
        for (const auto& m : messages())
            if (m.find(needle) != std::string::npos) return true;
        return false;
    }

private:
    static std::vector<std::string>& messages() {
        static std::vector<std::string> store;
        return store;
    }
    static void record(const std::string& msg) { messages().push_back(msg); }
    permlim::Warnings::Handler previous_;
};

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace testing
