#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ftm/graph.hpp"
#include "ftm/rdf_parser.hpp"

namespace ftm::test {

inline KnowledgeGraph graph_from_nt(const std::string& text) {
  std::istringstream in(text);
  GraphBuilder builder;
  parse_ntriples(in, [&](Triple&& t) { builder.add(t); });
  return std::move(builder).build();
}

inline KnowledgeGraph graph_from_ttl(const std::string& text) {
  std::istringstream in(text);
  GraphBuilder builder;
  parse_turtle(in, [&](Triple&& t) { builder.add(t); });
  return std::move(builder).build();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("ftm_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string data_path(const std::string& name) { return std::string(FTM_TEST_DATA_DIR) + "/" + name; }

}  // namespace ftm::test
