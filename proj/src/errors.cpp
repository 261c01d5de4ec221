#include "permlim/errors.hpp"

#include <atomic>
#include <iostream>

namespace permlim {

namespace {

void to_stderr(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

std::atomic<Warnings::Handler> g_handler{&to_stderr};

}  // namespace

void Warnings::emit(const std::string& message) { g_handler.load()(message); }

Warnings::Handler Warnings::set_handler(Handler handler) {
    return g_handler.exchange(handler ? handler : &to_stderr);
}

}  // namespace permlim
