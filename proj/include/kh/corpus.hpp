#pragma once

#include "kh/search.hpp"

namespace kh {

/// A bundled example: a diagram (usually a braid closure), movies, chains,
/// band factorizations, rewrite scripts, and machine-checked expectations.
struct CorpusEntry {
    std::string name;
    std::string dir;
    std::shared_ptr<const Diagram> diagram;
    std::optional<BraidWord> braid;
    std::map<std::string, BandFactorization> bands;
    std::map<std::string, Movie> movies;
    std::map<std::string, Chain> chains;
    struct Rewrite {
        BraidWord target_word;           // script rewrites the entry word to this
        std::vector<RewriteStep> steps;
        std::vector<int> marks;
    };
    std::map<std::string, Rewrite> rewrites;
    std::vector<std::string> expectations;  // raw expectation lines
};

CorpusEntry load_corpus_entry(const std::string& dir);
std::vector<std::string> list_corpus_entries(const std::string& corpus_dir);

struct ExpectationResult {
    std::string text;
    bool passed = false;
    std::string detail;
};

std::vector<ExpectationResult> run_expectations(const CorpusEntry& e);

/// Runs every entry; returns false if any expectation failed. jobs > 1
/// verifies entries in parallel.
bool verify_corpus(const std::string& corpus_dir, int jobs, std::ostream& out);

}  // namespace kh
