#include "convstyle/annotation_service.hpp"

#include "convstyle/error.hpp"

#include <httplib.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

namespace convstyle {

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks, std::filesystem::path log_path,
                                 std::size_t quorum)
    : tasks_(std::move(tasks)), log_path_(std::move(log_path)), quorum_(quorum == 0 ? 1 : quorum) {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        if (!task_pos_.emplace(tasks_[i].task_id, i).second) {
            throw Error(ErrorKind::DuplicateId, "duplicate task id " + tasks_[i].task_id);
        }
    }
    counts_.assign(tasks_.size(), 0);
    replay();
    log_ = std::fopen(log_path_.c_str(), "ab");
    if (log_ == nullptr) throw Error(ErrorKind::IoError, "cannot open annotation log " + log_path_.string());
}

AnnotationStore::~AnnotationStore() {
    if (log_ != nullptr) std::fclose(log_);
}

void AnnotationStore::replay() {
    std::error_code ec;
    if (!std::filesystem::exists(log_path_, ec)) return;
    const auto text = read_file(log_path_);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            // A torn final write: drop it so the next append starts on a clean line.
            ++replay_skipped_;
            std::filesystem::resize_file(log_path_, pos);
            break;
        }
        const std::string_view line(text.data() + pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            auto a = Annotation::from_json(parse_record(line, line_no));
            if (!record(std::move(a))) ++replay_skipped_;
        } catch (const Error&) {
            ++replay_skipped_;
        }
    }
}

bool AnnotationStore::record(Annotation a) {
    const auto it = task_pos_.find(a.task_id);
    if (it == task_pos_.end()) return false;
    try {
        validate_annotation(a, tasks_[it->second]);
    } catch (const Error&) {
        return false;
    }
    if (!seen_.emplace(a.task_id, a.annotator_id).second) return false;
    ++counts_[it->second];
    annotations_.push_back(std::move(a));
    return true;
}

std::optional<AnnotationTask> AnnotationStore::next_task(const std::string& annotator_id,
                                                         std::optional<TaskKind> kind) const {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        const auto& t = tasks_[i];
        if (kind && t.kind != *kind) continue;
        if (counts_[i] >= quorum_) continue;
        if (seen_.contains({t.task_id, annotator_id})) continue;
        return t;
    }
    return std::nullopt;
}

SubmitOutcome AnnotationStore::submit(const Annotation& annotation) {
    std::lock_guard lock(mu_);
    const auto it = task_pos_.find(annotation.task_id);
    if (it == task_pos_.end()) return {SubmitStatus::UnknownTask, "unknown task " + annotation.task_id};
    try {
        validate_annotation(annotation, tasks_[it->second]);
    } catch (const Error& e) {
        return {SubmitStatus::Invalid, e.what()};
    }
    if (seen_.contains({annotation.task_id, annotation.annotator_id})) {
        return {SubmitStatus::Duplicate, "annotation already recorded"};
    }
    const auto line = dump_line(annotation.to_json());
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0) {
        throw Error(ErrorKind::IoError, "annotation log write failed");
    }
    ::fsync(::fileno(log_));
    record(annotation);
    return {};
}

bool AnnotationStore::quorum_met() const {
    std::lock_guard lock(mu_);
    for (auto c : counts_) {
        if (c < quorum_) return false;
    }
    return true;
}

Json AnnotationStore::progress() const {
    std::lock_guard lock(mu_);
    Json by_kind = Json::object();
    bool complete = true;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
        auto& k = by_kind[std::string(to_string(tasks_[i].kind))];
        if (k.is_null()) k = Json{{"tasks", 0}, {"annotations", 0}, {"tasks_at_quorum", 0}};
        k["tasks"] = k["tasks"].get<std::size_t>() + 1;
        k["annotations"] = k["annotations"].get<std::size_t>() + counts_[i];
        if (counts_[i] >= quorum_) {
            k["tasks_at_quorum"] = k["tasks_at_quorum"].get<std::size_t>() + 1;
        } else {
            complete = false;
        }
    }
    std::map<std::string, std::map<std::string, std::size_t>> per_annotator;
    for (const auto& a : annotations_) {
        ++per_annotator[a.annotator_id][std::string(to_string(tasks_[task_pos_.at(a.task_id)].kind))];
    }
    return Json{{"tasks", tasks_.size()},
                {"annotations", annotations_.size()},
                {"quorum", quorum_},
                {"complete", complete},
                {"by_kind", std::move(by_kind)},
                {"by_annotator", per_annotator}};
}

std::vector<Annotation> AnnotationStore::snapshot() const {
    std::lock_guard lock(mu_);
    return annotations_;
}

// ---------------------------------------------------------------------------

namespace {

void reply_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

Json error_body(std::string_view code, std::string_view message) {
    return Json{{"error", code}, {"message", message}};
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
    auto& srv = *server_;

    srv.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
        const auto annotator = req.get_param_value("annotator");
        if (annotator.empty()) {
            reply_json(res, 400, error_body("invalid_request", "annotator is required"));
            return;
        }
        std::optional<TaskKind> kind;
        if (req.has_param("kind") && !req.get_param_value("kind").empty()) {
            kind = parse_task_kind(req.get_param_value("kind"));
            if (!kind) {
                reply_json(res, 400, error_body("invalid_request", "unknown kind"));
                return;
            }
        }
        if (auto task = store_.next_task(annotator, kind)) {
            reply_json(res, 200, task->to_public_json());
        } else {
            res.status = 204;
        }
    });

    srv.Post("/api/annotations", [this](const httplib::Request& req, httplib::Response& res) {
        Annotation a;
        try {
            a = Annotation::from_json(Json::parse(req.body));
        } catch (const Json::exception& e) {
            reply_json(res, 400, error_body("invalid_annotation", e.what()));
            return;
        } catch (const Error& e) {
            reply_json(res, 400, error_body("invalid_annotation", e.what()));
            return;
        }
        const auto outcome = store_.submit(a);
        switch (outcome.status) {
            case SubmitStatus::Accepted:
                reply_json(res, 201, Json{{"status", "accepted"}});
                break;
            case SubmitStatus::Duplicate:
                reply_json(res, 409, error_body("duplicate", outcome.message));
                break;
            case SubmitStatus::UnknownTask:
                reply_json(res, 404, error_body("unknown_task", outcome.message));
                break;
            case SubmitStatus::Invalid:
                reply_json(res, 400, error_body("invalid_annotation", outcome.message));
                break;
        }
    });

    srv.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
        reply_json(res, 200, store_.progress());
    });

    srv.Get("/api/results", [this](const httplib::Request&, httplib::Response& res) {
        if (!store_.quorum_met()) {
            reply_json(res, 412, error_body("quorum_not_met", "some tasks have fewer annotations than the quorum"));
            return;
        }
        const auto annotations = store_.snapshot();
        reply_json(res, 200, summarize_results(annotations, store_.tasks()));
    });

    srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        reply_json(res, 500, error_body("internal", what));
    });

    if (options_.static_dir) srv.set_mount_point("/", options_.static_dir->string());
}

int AnnotationServer::bind() {
    port_ = options_.port == 0 ? server_->bind_to_any_port(options_.host)
                               : (server_->bind_to_port(options_.host, options_.port) ? options_.port : -1);
    if (port_ < 0) {
        throw Error(ErrorKind::IoError, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
    }
    return port_;
}

int AnnotationServer::start() {
    bind();
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port_;
}

void AnnotationServer::run() {
    bind();
    server_->listen_after_bind();
}

void AnnotationServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace convstyle
