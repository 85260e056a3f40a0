#pragma once

#include <filesystem>

#include "dhan/model.hpp"
#include "dhan/tasks.hpp"

namespace dhan {

// attention.tsv: layer stage target relation reverse node neighbor alpha
// fusion.json:   relation-level weights per layer, stage and target type
void write_attention(const ForwardResult& forward, const std::filesystem::path& dir);

// First two principal components of the rows of x (centered), with each
// component's sign fixed so its largest-magnitude loading is positive.
Matrix pca2(const Matrix& x);

// embeddings.tsv: node_id type emb...; pca.tsv: node_id type pc1 pc2 (both
// types projected jointly).
void write_embeddings(const TypeEmbeddings& embeddings, const std::filesystem::path& dir);

}  // namespace dhan
