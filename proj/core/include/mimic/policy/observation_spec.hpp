#pragma once

#include <string>
#include <vector>

namespace mimic::policy {

enum class EmbeddingMode { Basic, GroupedV2 };

/// Ordered named groups of observation terms. The flat observation vector
/// concatenates the groups; a group with history depth h contributes
/// h * dim columns laid out oldest-first.
struct ObservationSpec {
  struct Group {
    std::string name;
    int dim = 0;
    int history = 1;

    int flat_dim() const { return dim * history; }
  };

  std::vector<Group> groups;
  EmbeddingMode mode = EmbeddingMode::Basic;
  int basic_seq_len = 8;  // token count in basic mode

  int flat_dim() const {
    int n = 0;
    for (const auto& g : groups) n += g.flat_dim();
    return n;
  }
  int seq_len() const {
    return mode == EmbeddingMode::Basic ? basic_seq_len
                                        : static_cast<int>(groups.size());
  }
  void validate() const;
};

}  // namespace mimic::policy
