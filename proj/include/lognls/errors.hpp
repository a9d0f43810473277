#pragma once

#include <stdexcept>
#include <string>

namespace lognls {

enum class Errc {
  invalid_parameter,
  graph_mismatch,
  not_equivariant,
  group_inhomogeneous,
  no_convergence,
  tracking_lost,
  count_changed,
  bound_violated,
  no_growth_window,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_parameter:   return "invalid-parameter";
    case Errc::graph_mismatch:      return "graph-mismatch";
    case Errc::not_equivariant:     return "not-equivariant";
    case Errc::group_inhomogeneous: return "group-inhomogeneous";
    case Errc::no_convergence:      return "no-convergence";
    case Errc::tracking_lost:       return "tracking-lost";
    case Errc::count_changed:       return "count-changed";
    case Errc::bound_violated:      return "bound-violated";
    case Errc::no_growth_window:    return "no-growth-window";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, Errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace lognls
