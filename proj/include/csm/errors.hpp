#pragma once

#include <stdexcept>
#include <string>

namespace csm {

// Every numerical failure in the library derives from Error so callers (the CLI in
// particular) can serialize the kind and message without knowing the subtype.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class PoleError : public Error {
public:
    explicit PoleError(long pole)
        : Error("PoleError", "gamma pole at non-positive integer " + std::to_string(pole)),
          pole_(pole) {}
    long pole() const noexcept { return pole_; }

private:
    long pole_;
};

class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, long iterations, double last_term)
        : Error("NonConvergence", what + " (iterations=" + std::to_string(iterations) +
                                      ", last |term|=" + std::to_string(last_term) + ")"),
          iterations_(iterations), last_term_(last_term) {}
    long iterations() const noexcept { return iterations_; }
    double last_term() const noexcept { return last_term_; }

private:
    long iterations_;
    double last_term_;
};

#define CSM_DEFINE_ERROR(Name)                                                        \
    class Name : public Error {                                                       \
    public:                                                                           \
        explicit Name(const std::string& what) : Error(#Name, what) {}                \
    };

CSM_DEFINE_ERROR(DomainError)
CSM_DEFINE_ERROR(DegenerateIndex)
CSM_DEFINE_ERROR(SingularCoordinate)
CSM_DEFINE_ERROR(NonNormalizable)
CSM_DEFINE_ERROR(EmptyRange)
CSM_DEFINE_ERROR(QuadratureError)
CSM_DEFINE_ERROR(BranchCollision)
CSM_DEFINE_ERROR(StepTooCoarse)
CSM_DEFINE_ERROR(PreconditionViolation)
CSM_DEFINE_ERROR(IllConditionedFit)
CSM_DEFINE_ERROR(ConfigError)

#undef CSM_DEFINE_ERROR

}  // namespace csm
