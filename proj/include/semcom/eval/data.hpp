#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semcom/textcorpus.hpp"

namespace semcom::eval {

using Sentences = std::vector<std::vector<std::string>>;

// Filtered, split corpus with the vocabulary built on the training side.
struct PreparedData {
    text::Vocabulary vocab;
    Sentences train;
    Sentences test;
};

PreparedData prepare_data(const std::vector<std::string>& lines, const text::CorpusConfig& cfg);

// <dir>/train.txt, <dir>/test.txt (one tokenized sentence per line) and <dir>/vocab.json.
void save_prepared(const std::filesystem::path& dir, const PreparedData& data);
PreparedData load_prepared(const std::filesystem::path& dir);

Sentences read_tokenized(const std::filesystem::path& path);
void write_tokenized(const std::filesystem::path& path, const Sentences& sentences);

std::vector<std::string> joined(const Sentences& sentences);

}  // namespace semcom::eval
