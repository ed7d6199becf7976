#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "synthloop/dataset.hpp"

namespace synthloop {

/// Two-class Gaussian traffic model used to stand in for a real corpus.
///
/// Class means are given in raw feature units. `class_overlap` scales the
/// distance between them: the attack class is centred at
/// benign_mean + class_overlap * (attack_mean - benign_mean), so 0 makes the
/// classes identically distributed and 1 uses attack_mean as given. Both
/// classes share the per-feature standard deviations.
struct CorpusSpec {
    FeatureSchema schema;
    std::string attack_name;
    std::vector<double> benign_mean;
    std::vector<double> attack_mean;
    std::vector<double> stddev;
    double class_overlap = 1.0;
    int n_per_class = 100;
    std::uint64_t seed = 0;

    // Throws ValidationError on any broken invariant.
    void validate() const;
    std::vector<double> effective_attack_mean() const;
};

inline constexpr int kTruncationAttempts = 1000;

// 2 * n_per_class Real records, benign and attack interleaved. Each value is
// drawn from its class Gaussian and resampled until it lands in the schema
// range (clamped after 1000 attempts); count features are rounded.
Dataset generate_corpus(const CorpusSpec& spec);

// ---------------------------------------------------------------------------
// Bundled desk corpus

inline constexpr double kDeskClassOverlap = 0.7;

struct DeskCorpusOptions {
    std::string attack_name = "tcp_ack_flood";
    double class_overlap = kDeskClassOverlap;
    int n_train_per_class = 10;
    int n_test_per_class = 100;
    std::uint64_t seed = 2024;
};

// Desk-schema class model for one of its attacks.
CorpusSpec desk_corpus_spec(const std::string& attack_name, double class_overlap, int n_per_class, std::uint64_t seed);

struct DeskCorpus {
    Dataset train;
    Dataset test;
};

// Train and test sets drawn independently (distinct derived seeds) from the
// same class model.
DeskCorpus make_desk_corpus(const DeskCorpusOptions& options = {});

}  // namespace synthloop
