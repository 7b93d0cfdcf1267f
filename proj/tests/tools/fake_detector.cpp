// Scripted protocol peer for the external-detector tests.
//
//   fake_detector MODE [ARG]
//
// Modes: echo-false, fixed, inspect, invalid, crash, hang, no-ready,
// bad-ready, wrong-id, bad-version, error-frame, token-without-line,
// location-without-bug, score-range, flaky FILE (crashes on the first
// request when FILE does not exist yet, creating it).

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

using json = nlohmann::ordered_json;

namespace {

void send(const json& frame) {
  std::cout << frame.dump() << "\n" << std::flush;
}

void sleep_forever() {
  for (;;) std::this_thread::sleep_for(std::chrono::hours(1));
}

int lines_of(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: fake_detector MODE [ARG]\n";
    return 2;
  }
  const std::string mode = argv[1];
  const std::string arg = argc > 2 ? argv[2] : "";

  if (mode == "no-ready") sleep_forever();
  if (mode == "bad-ready") {
    send({{"v", 2}, {"ready", true}});
    sleep_forever();
  }
  send({{"v", 1}, {"ready", true}});

  std::string line;
  while (std::getline(std::cin, line)) {
    const json req = json::parse(line);
    const std::string id = req.at("id").get<std::string>();
    json resp = {{"v", 1}, {"id", id}, {"has_bug", false}, {"line", nullptr}, {"token_index", nullptr},
                 {"score", nullptr}};
    if (mode == "echo-false") {
    } else if (mode == "fixed") {
      resp["has_bug"] = true;
      resp["line"] = 8;
      resp["token_index"] = 41;
      resp["score"] = 0.75;
    } else if (mode == "inspect") {
      // Flags requests that carry exactly v, id, source and meta (with
      // repo, file_path, function_signature); reports the line count.
      const auto& meta = req.at("meta");
      const bool shape = req.size() == 4 && req.contains("source") && meta.size() == 3 &&
                         meta.contains("repo") && meta.contains("file_path") &&
                         meta.contains("function_signature");
      resp["has_bug"] = shape;
      if (shape) resp["line"] = std::max(1, lines_of(req.at("source").get<std::string>()));
    } else if (mode == "invalid") {
      std::cout << "this is not json\n" << std::flush;
      continue;
    } else if (mode == "crash") {
      return 1;
    } else if (mode == "flaky") {
      if (!std::ifstream(arg)) {
        std::ofstream(arg) << "x";
        return 1;
      }
    } else if (mode == "hang") {
      sleep_forever();
    } else if (mode == "wrong-id") {
      resp["id"] = id + "-other";
    } else if (mode == "bad-version") {
      resp["v"] = 2;
    } else if (mode == "error-frame") {
      resp = {{"v", 1}, {"id", id}, {"error", "model failed"}};
    } else if (mode == "token-without-line") {
      resp["has_bug"] = true;
      resp["token_index"] = 3;
    } else if (mode == "location-without-bug") {
      resp["line"] = 2;
    } else if (mode == "score-range") {
      resp["score"] = 1.5;
    } else {
      std::cerr << "unknown mode " << mode << "\n";
      return 2;
    }
    send(resp);
  }
  return 0;
}
