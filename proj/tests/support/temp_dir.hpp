#pragma once

#include "stlconf/io/config.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace stlconf::fixtures {

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("stlconf_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_config(const std::filesystem::path& p, const io::Json& j) {
  std::ofstream(p) << j.dump(2);
}

inline io::Json config_json(const std::string& name) {
  return io::read_json_file(std::string(STLCONF_CONFIG_DIR) + "/" + name);
}

/// Case-study configuration shrunk so a full verify takes well under a second.
inline io::Json tiny_config() {
  io::Json j = config_json("case_study_posterior.json");
  j["mc"]["samples"] = 2000;
  j["posterior_samples"] = 2000;
  j["pwa"]["per_axis"] = 2;
  j["pwa"]["per_cell_samples"] = 200;
  j["contour"]["per_axis"] = 6;
  j["data"]["n_exp"] = 5;
  return j;
}

/// Runs the CLI with `args`; returns its exit status.
inline int run_cli(const std::string& args) {
  const std::string cmd = std::string(STLCONF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace stlconf::fixtures
