#ifndef AXIOMA_CORE_ERRORS_HPP
#define AXIOMA_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace axioma {

// Process exit codes used by the command line tool.
enum class ExitCode : int {
    ok = 0,
    check_failure = 1,
    config_error = 2,
    numerical_degeneracy = 3,
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config_error, what) {}
};

// Violated operation precondition (bad arguments rather than bad numerics).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(ExitCode::config_error, what) {}
};

class NumericalDegeneracy : public Error {
public:
    explicit NumericalDegeneracy(const std::string& what)
        : Error(ExitCode::numerical_degeneracy, what) {}
};

class CheckFailure : public Error {
public:
    explicit CheckFailure(const std::string& what) : Error(ExitCode::check_failure, what) {}
};

// A hyperbolicity test failed: the field is not Axiom A at the working tolerance.
class NotAxiomA : public CheckFailure {
public:
    explicit NotAxiomA(const std::string& what) : CheckFailure("not Axiom A at tolerance: " + what) {}
};

}  // namespace axioma

#endif
