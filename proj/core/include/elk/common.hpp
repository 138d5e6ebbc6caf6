#ifndef ELK_COMMON_HPP
#define ELK_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace elk {

struct SourceLoc {
  int line = 0;
  int col = 0;
  bool valid() const { return line > 0; }
};

/// Error carrying an optional source position. Frontend errors are printed
/// as "file:line:col: message".
class Error : public std::runtime_error {
public:
  explicit Error(std::string msg, SourceLoc loc = {})
      : std::runtime_error(std::move(msg)), loc(loc) {}
  SourceLoc loc;
};

inline std::string formatDiag(const std::string &file, const Error &e) {
  if (!e.loc.valid())
    return file + ": " + e.what();
  return file + ":" + std::to_string(e.loc.line) + ":" +
         std::to_string(e.loc.col) + ": " + e.what();
}

} // namespace elk

#endif
