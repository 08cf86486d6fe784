#ifndef MFPB_ERRORS_HPP
#define MFPB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfpb {

// Every error carries the module that raised it so the CLI can report
// "module: message" without extra bookkeeping.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Bad caller input: wrong lengths, out-of-range fractions, negative preferences.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Schema document or CSV header does not match what the loader needs.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A single CSV record could not be interpreted.
class RowError : public Error {
 public:
  RowError(const std::string& module, std::size_t line, const std::string& what)
      : Error(module, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Data that is well-formed but cannot support the requested computation,
// e.g. a class with no instances.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Boosting could not produce even a single useful round.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Malformed JSON document; `path` is a JSON pointer to the offending node.
class ParseError : public Error {
 public:
  ParseError(const std::string& module, std::string path, const std::string& what)
      : Error(module, (path.empty() ? std::string("/") : path) + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfpb

#endif  // MFPB_ERRORS_HPP
