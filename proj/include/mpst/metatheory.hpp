#pragma once

// Executable checks of subject reduction, session fidelity, lock-freedom and
// the participant lemmas on concrete typed sessions.

#include <cstdint>
#include <string>
#include <vector>

#include "mpst/frontend.hpp"
#include "mpst/terms.hpp"
#include "mpst/typing.hpp"

namespace mpst {

struct Violation {
  std::string property;  // "subject-reduction", "session-fidelity", ...
  std::string detail;
};

struct MetaOptions {
  std::uint64_t seed = 1;
  /// Typed configurations visited per root. Global steps can keep growing the
  /// type (a later independent step fires while an earlier one stays pending),
  /// so the configuration space need not be finite.
  std::size_t max_triples = 256;
};

struct MetaCounts {
  std::size_t triples = 0;  // typed configurations visited
  std::size_t subject_reduction = 0;
  std::size_t session_fidelity = 0;
  std::size_t lock_freedom = 0;
  std::size_t participants_lemma = 0;
  std::size_t top_partner = 0;
  std::size_t replacement = 0;
};

struct MetaReport {
  MetaCounts counts;
  std::vector<Violation> violations;
  bool truncated = false;  // stopped at max_triples with configurations left
  bool ok() const { return violations.empty(); }
};

/// Some P' ⊆ ignored with (g, m, P') accepted, smallest first.
std::optional<ParticipantSet> typable_within(const GlobalGraph& g, const Session& m,
                                             const ParticipantSet& ignored);

/// All checks, starting from an accepted triple and following every session
/// and global step through the typed configurations they lead to.
MetaReport check_metatheory(const GlobalGraph& g, const Session& m, const ParticipantSet& ignored,
                            const MetaOptions& options = {});

struct FileTriple {
  std::string global, session, ignored;  // names in the file
  bool accepted = false;
  std::optional<Rejection> rejection;
  MetaReport report;
};

struct FileMetaReport {
  std::vector<FileTriple> triples;
  bool ok() const;
};

/// Every (global, session, ignored set) combination defined in the file.
FileMetaReport check_file(const SpecFile& spec, const MetaOptions& options = {});

}  // namespace mpst
