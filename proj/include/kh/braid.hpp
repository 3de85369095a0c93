#pragma once

#include "kh/cobordism.hpp"

namespace kh {

/// Letters are signed generator indices: +i = sigma_i, -i = sigma_i^{-1}.
struct BraidWord {
    int strands = 1;
    std::vector<int> letters;

    int writhe() const {
        int w = 0;
        for (int l : letters) w += (l > 0) ? 1 : -1;
        return w;
    }
    void validate() const {
        for (int l : letters) {
            int i = l > 0 ? l : -l;
            if (i < 1 || i >= strands) throw parse_error("letter index out of range");
        }
        if (strands < 1) throw parse_error("strand count must be positive");
    }
    bool operator==(const BraidWord&) const = default;
};

BraidWord parse_braid(const std::string& text);
std::string emit_braid(const BraidWord& w);

/// Closure diagram; crossing order = letter order. Arc ids are assigned
/// column by column.
Diagram closure(const BraidWord& w);

/// Plamenevskaya's generator: oriented smoothing of the closure (the n
/// concentric circles), every loop labeled x. Lives at (0, writhe - strands).
Chain psi(const BraidWord& w, std::shared_ptr<const Diagram> closure_diagram = nullptr);

BraidWord positive_stabilize(const BraidWord& w);

struct Band {
    BraidWord conjugator;  // same strand count
    int core_index = 1;
    int core_sign = +1;

    std::vector<int> expansion() const;  // w . core . w^{-1}
};

struct BandFactorization {
    int strands = 1;
    std::vector<Band> bands;

    BraidWord expansion() const;
    /// positions (0-based, in the expansion) of each band's core letter
    std::vector<int> core_positions() const;
    /// conjugator letter pairs (p, q): q is p's formal inverse
    std::vector<std::pair<int, int>> conjugate_pairs() const;
    int chi() const { return strands - int(bands.size()); }
};

BandFactorization parse_bands(const std::string& text);
std::string emit_bands(const BandFactorization& f);

/// Movie from closure(expansion) to the empty diagram: resolve each core (in
/// band order), cancel each conjugator against its paired inverse innermost
/// first, then kill the remaining crossingless loops.
Movie compile_braided_surface(const BandFactorization& f);

/// Clause (i): every core crossing carries its oriented smoothing; clause
/// (ii): paired conjugator letters are jointly oriented or jointly
/// disoriented.
bool is_compatible(const Gen& g, const BandFactorization& f);

struct RewriteStep {
    enum Kind { Comm, Cancel, InsertPair, YB, Conj } kind;
    int pos = 0;     // 0-based position in the current word
    int letter = 0;  // InsertPair only
};

struct RewriteResult {
    BraidWord word;
    std::map<int, int> tracking;  // original position -> final position
};

/// Word-level rewriting with position tracking. Throws when a step does not
/// match the word.
RewriteResult rewrite_tracked(const BraidWord& w, const std::vector<RewriteStep>& steps,
                              const std::vector<int>& marks = {});

/// The same rewriting realized as a movie of isotopies, R2 pairs and
/// triangle moves on the closure diagram. Crossing indices stay aligned with
/// word positions throughout.
Movie rewrite_movie(const BraidWord& w, const std::vector<RewriteStep>& steps);

std::vector<RewriteStep> parse_rewrite_script(const std::string& text, std::vector<int>& marks);

}  // namespace kh
