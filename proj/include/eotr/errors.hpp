#ifndef EOTR_ERRORS_HPP
#define EOTR_ERRORS_HPP

#include <optional>
#include <stdexcept>
#include <string>

namespace eotr
{

// A requested exponent window cannot be certified from the available data.
// When the shortfall is caused by the R-matrix truncation, required_order holds
// the smallest truncation order L that would make the request certifiable.
class window_error : public std::runtime_error
{
public:
    explicit window_error(const std::string &what, std::optional<int> required_order = std::nullopt)
        : std::runtime_error(what), m_required_order(required_order)
    {
    }
    std::optional<int> required_order() const { return m_required_order; }

private:
    std::optional<int> m_required_order;
};

// Two computations that must agree exactly did not (route disagreement, nonzero
// residual, broken reflection invariance...). Always a bug or corrupted input.
class consistency_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Malformed or mathematically invalid input datum.
class validation_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace eotr

#endif
