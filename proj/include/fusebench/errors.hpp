#pragma once

#include <stdexcept>
#include <string>

namespace fusebench {

// Base for all harness errors. `code()` is a stable machine-readable name
// (also what the CLI prints in --jsonl mode).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

#define FUSEBENCH_DEFINE_ERROR(Name)                              \
    class Name : public Error {                                   \
    public:                                                       \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

// manifest
FUSEBENCH_DEFINE_ERROR(MissingFile);
FUSEBENCH_DEFINE_ERROR(MalformedRow);
FUSEBENCH_DEFINE_ERROR(UnknownActivity);
FUSEBENCH_DEFINE_ERROR(DuplicateSegmentId);
FUSEBENCH_DEFINE_ERROR(EmptyLabelSet);

// timeline
FUSEBENCH_DEFINE_ERROR(SegmentTooShort);
FUSEBENCH_DEFINE_ERROR(InvalidOverlap);
FUSEBENCH_DEFINE_ERROR(IndexOutOfRange);

// modality
FUSEBENCH_DEFINE_ERROR(UnknownSegment);
FUSEBENCH_DEFINE_ERROR(BundleCountMismatch);
FUSEBENCH_DEFINE_ERROR(MalformedEntry);
FUSEBENCH_DEFINE_ERROR(EmptyMask);
FUSEBENCH_DEFINE_ERROR(MissingActivityRow);

// prompt
FUSEBENCH_DEFINE_ERROR(EmptyObservations);
FUSEBENCH_DEFINE_ERROR(ConfigInvariantViolation);

// llm
FUSEBENCH_DEFINE_ERROR(InvalidConfig);
FUSEBENCH_DEFINE_ERROR(BackendUnavailable);
FUSEBENCH_DEFINE_ERROR(AuthFailure);
FUSEBENCH_DEFINE_ERROR(Timeout);
FUSEBENCH_DEFINE_ERROR(RetriesExhausted);
FUSEBENCH_DEFINE_ERROR(ReplayMiss);

// parse
FUSEBENCH_DEFINE_ERROR(EmptyResponse);

// eval
FUSEBENCH_DEFINE_ERROR(EmptyRecords);
FUSEBENCH_DEFINE_ERROR(EmptyMatrix);
FUSEBENCH_DEFINE_ERROR(TooFewReplicates);

// runner / report
FUSEBENCH_DEFINE_ERROR(EmptyResults);

#undef FUSEBENCH_DEFINE_ERROR

} // namespace fusebench
