// Client side of the line-delimited JSON detector protocol. Each child runs
// under /bin/sh -c with stdin and stdout joined to one end of a socketpair.
#include "typegate/detect.hpp"
#include "typegate/error.hpp"

#include "json.hpp"

#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <mutex>

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace typegate {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

class Child {
 public:
  Child(const std::string& command, std::chrono::milliseconds timeout) {
    int sv[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
      throw Error(ErrorCode::Io, std::string("socketpair: ") + std::strerror(errno));
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, sv[1], 0);
    posix_spawn_file_actions_adddup2(&actions, sv[1], 1);
    // A process group of its own, so a forced stop also reaches whatever
    // the shell started.
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
    const char* argv[] = {"sh", "-c", command.c_str(), nullptr};
    int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, const_cast<char* const*>(argv), environ);
    posix_spawnattr_destroy(&attr);
    posix_spawn_file_actions_destroy(&actions);
    ::close(sv[1]);
    if (rc != 0) {
      ::close(sv[0]);
      throw Error(ErrorCode::DetectorCrashed, std::string("cannot start detector: ") + std::strerror(rc));
    }
    fd_ = sv[0];
    try {
      handshake(timeout);
    } catch (...) {
      // A constructor that throws gets no destructor call.
      shutdown();
      throw;
    }
  }

  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  ~Child() { shutdown(); }

  void handshake(std::chrono::milliseconds timeout) {
    std::string line = read_line(Clock::now() + timeout);
    json frame;
    try {
      frame = json::parse(line);
    } catch (const json::exception&) {
      throw Error(ErrorCode::Protocol, "malformed ready frame: " + line);
    }
    if (!frame.is_object() || frame.value("v", json()) != 1 || frame.value("ready", json()) != true)
      throw Error(ErrorCode::Protocol, "expected ready frame, got: " + line);
  }

  void shutdown() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    if (pid_ <= 0) return;
    // EOF on stdin asks the child to exit; give it a moment, then force it.
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }

  void write_line(const std::string& line) {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::DetectorCrashed, std::string("detector input closed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(Clock::time_point deadline) {
    for (;;) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
      if (left <= 0) throw Error(ErrorCode::Timeout, "detector did not answer in time");
      pollfd p{fd_, POLLIN, 0};
      int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(left, 1 << 30)));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));
      }
      if (r == 0) continue;
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw Error(ErrorCode::DetectorCrashed, std::string("detector output failed: ") + std::strerror(errno));
      }
      if (n == 0) throw Error(ErrorCode::DetectorCrashed, "detector closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  pid_t pid_ = -1;
  int fd_ = -1;
  std::string buffer_;
};

std::optional<long long> optional_int(const json& frame, const char* key, const std::string& line) {
  auto it = frame.find(key);
  if (it == frame.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw Error(ErrorCode::Protocol, std::string("'") + key + "' is not an integer: " + line);
  return it->get<long long>();
}

DetectorOutcome decode_response(const std::string& line, const std::string& id) {
  json frame;
  try {
    frame = json::parse(line);
  } catch (const json::exception&) {
    throw Error(ErrorCode::Protocol, "malformed response frame: " + line);
  }
  if (!frame.is_object()) throw Error(ErrorCode::Protocol, "response is not an object: " + line);
  if (frame.value("v", json()) != 1) throw Error(ErrorCode::Protocol, "unsupported protocol version: " + line);
  auto fid = frame.find("id");
  if (fid == frame.end() || !fid->is_string() || fid->get<std::string>() != id)
    throw Error(ErrorCode::Protocol, "response id does not match request '" + id + "': " + line);
  if (auto err = frame.find("error"); err != frame.end())
    throw Error(ErrorCode::Protocol, "detector reported an error: " + err->dump());
  auto has_bug = frame.find("has_bug");
  if (has_bug == frame.end() || !has_bug->is_boolean())
    throw Error(ErrorCode::Protocol, "'has_bug' missing or not a boolean: " + line);

  DetectorOutcome out;
  out.has_bug = has_bug->get<bool>();
  auto l = optional_int(frame, "line", line);
  auto t = optional_int(frame, "token_index", line);
  if (t && !l) throw Error(ErrorCode::Protocol, "'token_index' without 'line': " + line);
  if (l) {
    if (*l < 1 || (t && *t < 0)) throw Error(ErrorCode::Protocol, "location out of range: " + line);
    if (!out.has_bug) throw Error(ErrorCode::Protocol, "location reported without a bug: " + line);
    out.location = Location{static_cast<int>(*l), t ? std::optional<std::size_t>(static_cast<std::size_t>(*t)) : std::nullopt};
  }
  if (auto s = frame.find("score"); s != frame.end() && !s->is_null()) {
    if (!s->is_number()) throw Error(ErrorCode::Protocol, "'score' is not a number: " + line);
    double v = s->get<double>();
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::Protocol, "'score' outside [0, 1]: " + line);
    out.score = v;
  }
  return out;
}

class ExternalDetector : public Detector {
 public:
  explicit ExternalDetector(ExternalDetectorConfig config) : config_(std::move(config)) {
    if (config_.command.empty()) throw Error(ErrorCode::InvalidArgument, "external detector needs a command");
    if (config_.processes == 0) config_.processes = 1;
    slots_.resize(config_.processes);
    for (std::size_t i = 0; i < slots_.size(); ++i) free_.push_back(i);
  }

  std::string name() const override { return config_.label.empty() ? "external:" + config_.command : config_.label; }

  DetectorOutcome run(const ProgramSample& sample) override {
    std::size_t slot = acquire();
    struct Release {
      ExternalDetector* self;
      std::size_t slot;
      ~Release() { self->release(slot); }
    } release{this, slot};

    std::unique_ptr<Child>& child = slots_[slot];
    try {
      if (!child) child = std::make_unique<Child>(config_.command, config_.timeout);
      nlohmann::ordered_json request;
      request["v"] = 1;
      request["id"] = sample.id;
      request["source"] = sample.source;
      request["meta"] = {{"repo", sample.repo},
                         {"file_path", sample.file_path},
                         {"function_signature", sample.function_signature}};
      child->write_line(request.dump());
      return decode_response(child->read_line(Clock::now() + config_.timeout), sample.id);
    } catch (const Error&) {
      // The child's state is unknown after any failure; start afresh next time.
      child.reset();
      throw;
    } catch (const nlohmann::json::exception& e) {
      child.reset();
      throw Error(ErrorCode::Protocol, std::string("cannot encode request: ") + e.what());
    }
  }

 private:
  std::size_t acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return !free_.empty(); });
    std::size_t slot = free_.back();
    free_.pop_back();
    return slot;
  }

  void release(std::size_t slot) {
    {
      std::lock_guard lock(mutex_);
      free_.push_back(slot);
    }
    cv_.notify_one();
  }

  ExternalDetectorConfig config_;
  std::vector<std::unique_ptr<Child>> slots_;
  std::vector<std::size_t> free_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

}  // namespace

std::unique_ptr<Detector> make_external_detector(ExternalDetectorConfig config) {
  return std::make_unique<ExternalDetector>(std::move(config));
}

}  // namespace typegate
