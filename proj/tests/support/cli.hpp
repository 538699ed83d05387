#pragma once

// Runs the qpn executable through the shell and captures its stdout.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace cli {

struct Output {
  int status = -1;
  std::string out;
};

inline Output run(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string("\"") + QPN_CLI_PATH + "\" " + args;
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  Output res;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return res;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
  const int raw = pclose(pipe);
  res.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return res;
}

inline std::string data_file(const std::string& name) {
  return std::string(QPN_TEST_DATA_DIR) + "/" + name;
}

}  // namespace cli
