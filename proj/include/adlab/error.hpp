#pragma once
#include <stdexcept>
#include <string>

namespace adlab {

enum class ErrorKind {
  InvalidParameter,
  InvalidNode,
  Io,
  Parse,
  Unsupported,
  InvalidSnapshot,
  WrongProtocol,
  ImpossibleObservation,
  Config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind_(k) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool ok, ErrorKind k, const std::string& msg) {
  if (!ok) throw Error(k, msg);
}

}  // namespace adlab
