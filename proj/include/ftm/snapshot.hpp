#pragma once

#include <filesystem>

#include "ftm/graph.hpp"

namespace ftm {

/// Binary index snapshot: magic "FTMSNAP1" followed by the sections DICT, TRPL, LABL and STAT.
/// Each section is a u32 tag, a u64 payload length, the payload and a CRC-32 of the payload.
/// All integers are little-endian.
void snapshot_save(const KnowledgeGraph& kg, const std::filesystem::path& path);

/// Throws SnapshotError: Version for a different format version, Checksum for truncated or
/// corrupted data (including an empty file), Format for anything that is not a snapshot.
KnowledgeGraph snapshot_load(const std::filesystem::path& path);

}  // namespace ftm
