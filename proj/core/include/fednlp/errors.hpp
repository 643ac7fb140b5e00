#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fednlp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input record. For corpus files `record` is the 0-based array
// index; for line-oriented files it is the 1-based line number.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t record, std::string field, const std::string& detail)
      : Error("record " + std::to_string(record) + ", field \"" + field + "\": " + detail),
        record_(record),
        field_(std::move(field)) {}

  std::size_t record() const noexcept { return record_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t record_;
  std::string field_;
};

class VersionError : public Error {
 public:
  VersionError(unsigned found, unsigned expected) : VersionError("model artifact", found, expected) {}
  VersionError(const std::string& artifact, unsigned found, unsigned expected)
      : Error(artifact + " format version " + std::to_string(found) +
              " is not supported (this build reads version " + std::to_string(expected) + ")"),
        found_(found),
        expected_(expected) {}

  unsigned found() const noexcept { return found_; }
  unsigned expected() const noexcept { return expected_; }

 private:
  unsigned found_;
  unsigned expected_;
};

class EmptyDocument : public Error {
 public:
  EmptyDocument() : Error("document has no tokens") {}
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus has no documents") {}
  using Error::Error;
};

class InsufficientLabels : public Error {
 public:
  using Error::Error;
};

class DegenerateCorpus : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace fednlp
