#pragma once

#include "leadsheet/error.hpp"

#include <span>
#include <string>
#include <vector>

namespace leadsheet::metrics {

class EmptyReferenceError : public Error {
public:
    using Error::Error;
};

struct EditCounts {
    long long distance = 0;
    long long insertions = 0;
    long long deletions = 0;
    long long substitutions = 0;
};

enum class OpKind { Match, Substitute, Insert, Delete };

struct AlignmentOp {
    OpKind kind;
    size_t ref_index; // position in ref (valid unless Insert)
    size_t hyp_index; // position in hyp (valid unless Delete)
};

/// Minimal unit-cost Levenshtein distance with per-operation counts.
EditCounts edit_distance(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Full optimal alignment trace (quadratic memory; intended for diffs).
std::vector<AlignmentOp> edit_alignment(std::span<const std::string> ref,
                                        std::span<const std::string> hyp);

/// Splitters used by the three metrics. Line endings are normalized first.
std::vector<std::string> graphemes(const std::string& text);
std::vector<std::string> words(const std::string& text);
std::vector<std::string> lines(const std::string& text);

struct MetricResult {
    double rate = 0.0;
    EditCounts counts;
    long long ref_length = 0;
};

MetricResult cer(const std::string& ref, const std::string& hyp);
MetricResult wer(const std::string& ref, const std::string& hyp);
MetricResult ler(const std::string& ref, const std::string& hyp);

struct PairReport {
    MetricResult cer;
    MetricResult wer;
    MetricResult ler;
};

PairReport score_pair(const std::string& ref, const std::string& hyp);

struct CorpusReport {
    std::vector<PairReport> pairs;
    PairReport micro;        // total edits / total reference length
    PairReport macro_mean;   // unweighted mean of per-pair rates
};

CorpusReport corpus_report(std::span<const std::pair<std::string, std::string>> pairs);

} // namespace leadsheet::metrics
