#pragma once

#include <stdexcept>
#include <string>

namespace entrate {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dist-core
struct OutOfRangeSymbol : Error { using Error::Error; };
struct EmptyCounts : Error { using Error::Error; };

// entropy-est
struct ConvergenceFailure : Error { using Error::Error; };
struct DegreeExceedsSamples : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };

// markov-core
struct NotStochastic : Error { using Error::Error; };
struct NotIrreducible : Error { using Error::Error; };
struct NotReversible : Error { using Error::Error; };
struct GenerationFailure : Error { using Error::Error; };

// rate-est
struct PathTooShort : Error { using Error::Error; };
struct ZeroProbabilityTransition : Error { using Error::Error; };

// corpus
struct InvalidEncoding : Error { using Error::Error; };
struct StreamTooShort : Error { using Error::Error; };
struct EmptyModel : Error { using Error::Error; };
struct SizeExceedsCorpus : Error { using Error::Error; };

// I/O and configuration
struct IoFailure : Error { using Error::Error; };
struct InvalidArgument : Error { using Error::Error; };

} // namespace entrate
