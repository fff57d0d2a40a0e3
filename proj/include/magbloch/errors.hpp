#pragma once

#include <stdexcept>
#include <string>

namespace magbloch {

// Base class; exit_code() is what the CLI returns for this error class.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, int code = 5) : std::runtime_error(what), code_(code) {}
    int exit_code() const { return code_; }

private:
    int code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, int lower, int upper)
        : Error(what, 3), lower_(lower), upper_(upper) {}
    int lower() const { return lower_; }
    int upper() const { return upper_; }

private:
    int lower_;
    int upper_;
};

class GapError : public Error {
public:
    explicit GapError(const std::string& what) : Error(what, 3) {}
};

class AdmissibilityError : public Error {
public:
    explicit AdmissibilityError(const std::string& what) : Error(what, 4) {}
};

class DegenerateFormError : public Error {
public:
    explicit DegenerateFormError(const std::string& what) : Error(what, 4) {}
};

class BoundaryProximityError : public Error {
public:
    explicit BoundaryProximityError(const std::string& what) : Error(what, 4) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what, 5) {}
};

class NonFiniteStateError : public Error {
public:
    explicit NonFiniteStateError(const std::string& what) : Error(what, 5) {}
};

class FilterLeakageError : public Error {
public:
    explicit FilterLeakageError(const std::string& what) : Error(what, 5) {}
};

}  // namespace magbloch
