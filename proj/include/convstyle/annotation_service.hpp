#pragma once

#include "convstyle/human_eval.hpp"

#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace convstyle {

enum class SubmitStatus { Accepted, Duplicate, UnknownTask, Invalid };

struct SubmitOutcome {
    SubmitStatus status = SubmitStatus::Accepted;
    std::string message;
};

/// Task set plus an append-only annotation log. All mutations go through one mutex, so the log
/// is written by a single writer; reads of aggregate state work on a copied snapshot.
class AnnotationStore {
public:
    /// Replays `log_path` if it exists. Truncated, unparseable, duplicate, or unknown-task lines are
    /// skipped and counted.
    AnnotationStore(std::vector<AnnotationTask> tasks, std::filesystem::path log_path, std::size_t quorum = 3);
    ~AnnotationStore();

    AnnotationStore(const AnnotationStore&) = delete;
    AnnotationStore& operator=(const AnnotationStore&) = delete;

    /// First task (file order) of `kind` the annotator has not done and that is still below quorum.
    std::optional<AnnotationTask> next_task(const std::string& annotator_id, std::optional<TaskKind> kind) const;

    SubmitOutcome submit(const Annotation& annotation);

    [[nodiscard]] bool quorum_met() const;
    [[nodiscard]] Json progress() const;
    [[nodiscard]] std::vector<Annotation> snapshot() const;
    [[nodiscard]] const std::vector<AnnotationTask>& tasks() const noexcept { return tasks_; }
    [[nodiscard]] std::size_t quorum() const noexcept { return quorum_; }
    [[nodiscard]] std::size_t replay_skipped() const noexcept { return replay_skipped_; }

private:
    void replay();
    bool record(Annotation a);

    std::vector<AnnotationTask> tasks_;
    std::map<std::string, std::size_t> task_pos_;
    std::filesystem::path log_path_;
    std::size_t quorum_;
    std::size_t replay_skipped_ = 0;

    mutable std::mutex mu_;
    std::vector<Annotation> annotations_;
    std::set<std::pair<std::string, std::string>> seen_;
    std::vector<std::size_t> counts_;
    std::FILE* log_ = nullptr;
};

struct ServerOptions {
    std::string host = "127.0.0.1";
    /// 0 binds an ephemeral port.
    int port = 0;
    std::optional<std::filesystem::path> static_dir;
};

/// HTTP front end over an AnnotationStore:
///   GET  /api/tasks/next?annotator=<id>&kind=<kind>   task payload or 204
///   POST /api/annotations                             201, 400, 404 or 409
///   GET  /api/progress
///   GET  /api/results                                 412 until every task meets quorum
class AnnotationServer {
public:
    AnnotationServer(AnnotationStore& store, ServerOptions options = {});
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds and serves on a background thread; returns the bound port. Throws Error(IoError).
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();
    [[nodiscard]] int port() const noexcept { return port_; }

private:
    void install_routes();
    int bind();

    AnnotationStore& store_;
    ServerOptions options_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace convstyle
