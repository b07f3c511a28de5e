#pragma once

#include <stdexcept>
#include <string>

namespace credal {

// Shape/length mismatches between related containers.
class dimension_error : public std::invalid_argument {
public:
  explicit dimension_error(const std::string& what) : std::invalid_argument(what) {}
};

// Inputs outside an operation's mathematical domain (negative alpha, empty data, ...).
class domain_error : public std::domain_error {
public:
  explicit domain_error(const std::string& what) : std::domain_error(what) {}
};

// Malformed or inconsistent external data (CSV rows, simplex violations past tolerance).
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (Cholesky breakdown, non-finite loss).
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid command-line / config combinations.
class usage_error : public std::runtime_error {
public:
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace credal
