#pragma once

#include <filesystem>
#include <vector>

#include "dhan/graph.hpp"
#include "dhan/tasks.hpp"

namespace dhan {

struct Dataset {
  BMHGraph graph;
  std::vector<TaskSpec> tasks;

  const TaskSpec& task(std::string_view name) const;
};

// Directory layout, one record per line, '#' lines are comments:
//   relations.tsv  name  klass  src_type  dst_type  symmetric(0|1)
//   nodes.tsv      node_id  type  feat...
//   edges.tsv      relation_name  src  dst
//   tasks.tsv      name  kind  target_type  num_classes
//   labels.tsv     node  task  comma-separated labels
//   splits.tsv     node  task  split
//   groups.tsv     node  task  group          (link tasks only)
void export_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset import_dataset(const std::filesystem::path& dir);

}  // namespace dhan
