#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace loopsim {

// Dense integer identifier tagged by id space. Values in a loaded store form
// the contiguous range [0, n) for each tag.
template <typename Tag>
struct Id {
  std::uint32_t value{0};

  constexpr Id() = default;
  constexpr explicit Id(std::uint32_t v) : value(v) {}
  constexpr explicit Id(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit Id(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(Id, Id) = default;
};

struct ItemTag {};
struct SessionTag {};
struct UserTag {};
struct ArtistTag {};

using ItemId = Id<ItemTag>;
using SessionId = Id<SessionTag>;
using UserId = Id<UserTag>;
using ArtistId = Id<ArtistTag>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

// Raised when a quantity has no defined value for the given input
// (e.g. the Gini index of an all-zero vector).
class Undefined : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace loopsim

template <typename Tag>
struct std::hash<loopsim::Id<Tag>> {
  std::size_t operator()(loopsim::Id<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
