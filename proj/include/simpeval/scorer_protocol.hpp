#pragma once

// Model-scorer wire protocol: request identity, line-delimited JSON subprocess
// transport, fixture replay and recording, and a content-addressed disk cache.
//
// Wire format, one JSON object per line in both directions:
//   request:  {"id": str, "task": str, "payload": {...}}
//   response: {"id": str, "ok": true, "result": {...}}
//             {"id": str, "ok": false, "error": str}
// Fixture file: JSON Lines of {"id": str, "response": {...}} sorted by id.

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "simpeval/errors.hpp"
#include "simpeval/score_matrix.hpp"
#include "simpeval/textcore.hpp"

namespace simpeval {

using json = nlohmann::json;

enum class Task { nli, sle, ner, qg, qa, lerc, filter };

inline const char* to_string(Task t) {
    switch (t) {
    case Task::nli: return "nli";
    case Task::sle: return "sle";
    case Task::ner: return "ner";
    case Task::qg: return "qg";
    case Task::qa: return "qa";
    case Task::lerc: return "lerc";
    case Task::filter: return "filter";
    }
    return "?";
}

inline Task parse_task(std::string_view s) {
    for (Task t : {Task::nli, Task::sle, Task::ner, Task::qg, Task::qa, Task::lerc, Task::filter}) {
        if (s == to_string(t)) return t;
    }
    throw ValidationError("unknown task \"" + std::string(s) + "\"");
}

// ---------------------------------------------------------------------------
// Canonical payloads and request ids

inline std::string nfc(std::string_view s) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
    const auto in = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
    const auto out = norm->normalize(in, status);
    if (U_FAILURE(status)) throw ValidationError("cannot NFC-normalize payload string");
    std::string utf8;
    out.toUTF8String(utf8);
    return utf8;
}

/// NFC-normalizes every string and key. Keys come out sorted because json
/// objects are ordered maps.
inline json canonicalize(const json& j) {
    if (j.is_string()) return nfc(j.get_ref<const std::string&>());
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(canonicalize(e));
        return out;
    }
    if (j.is_object()) {
        json out = json::object();
        for (const auto& [k, v] : j.items()) out[nfc(k)] = canonicalize(v);
        return out;
    }
    return j;
}

inline std::string canonical_dump(const json& j) { return canonicalize(j).dump(); }

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

struct ScorerRequest {
    std::string id;
    Task task = Task::nli;
    json payload;

    /// Canonical form hashed into the id.
    std::string canonical() const { return std::string(to_string(task)) + "\n" + canonical_dump(payload); }

    json to_json() const { return {{"id", id}, {"task", to_string(task)}, {"payload", payload}}; }
};

inline ScorerRequest make_request(Task task, json payload) {
    ScorerRequest r;
    r.task = task;
    r.payload = canonicalize(payload);
    r.id = sha256_hex(r.canonical());
    return r;
}

struct ScorerResponse {
    std::string id;
    bool ok = false;
    json result;       ///< present iff ok
    std::string error; ///< present iff !ok

    json to_json() const {
        if (ok) return {{"id", id}, {"ok", true}, {"result", result}};
        return {{"id", id}, {"ok", false}, {"error", error}};
    }

    static ScorerResponse from_json(const json& j) {
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("ok") ||
            !j["ok"].is_boolean()) {
            throw ValidationError("response needs string \"id\" and boolean \"ok\"");
        }
        ScorerResponse r;
        r.id = j["id"].get<std::string>();
        r.ok = j["ok"].get<bool>();
        const bool has_result = j.contains("result");
        const bool has_error = j.contains("error");
        if (r.ok && (!has_result || has_error)) throw ValidationError("ok response " + r.id + " needs exactly \"result\"");
        if (!r.ok && (has_result || !has_error || !j["error"].is_string())) {
            throw ValidationError("failed response " + r.id + " needs exactly a string \"error\"");
        }
        if (r.ok) {
            r.result = j["result"];
        } else {
            r.error = j["error"].get<std::string>();
        }
        return r;
    }
};

// ---------------------------------------------------------------------------
// Transports

class Transport {
public:
    virtual ~Transport() = default;
    /// One response per request, aligned with the input order. Request ids are unique.
    virtual std::vector<ScorerResponse> send(std::span<const ScorerRequest> requests) = 0;
};

/// Runs `/bin/sh -c command` once and exchanges JSON lines over its stdin/stdout.
/// At most `max_in_flight` requests are outstanding; responses may arrive in any order.
class SubprocessTransport final : public Transport {
public:
    explicit SubprocessTransport(std::string command, std::size_t max_in_flight = 4)
        : command_(std::move(command)), max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {}

    SubprocessTransport(const SubprocessTransport&) = delete;
    SubprocessTransport& operator=(const SubprocessTransport&) = delete;

    ~SubprocessTransport() override { stop(); }

    std::vector<ScorerResponse> send(std::span<const ScorerRequest> requests) override {
        if (requests.empty()) return {};
        if (broken_) throw TransportError("worker is no longer usable after an earlier failure");
        if (pid_ < 0) start();
        try {
            return exchange(requests);
        } catch (...) {
            broken_ = true;
            throw;
        }
    }

private:
    void start() {
        std::signal(SIGPIPE, SIG_IGN);
        int in_pipe[2];
        int out_pipe[2];
        if (::pipe(in_pipe) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno));
        if (::pipe(out_pipe) != 0) {
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            throw TransportError(std::string("pipe: ") + std::strerror(errno));
        }
        const pid_t pid = ::fork();
        if (pid < 0) throw TransportError(std::string("fork: ") + std::strerror(errno));
        if (pid == 0) {
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(out_pipe[1]);
            ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
        ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
        ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
        ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
        ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
        pid_ = pid;
    }

    void stop() {
        if (to_child_ >= 0) ::close(to_child_);
        if (from_child_ >= 0) ::close(from_child_);
        to_child_ = from_child_ = -1;
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
        pid_ = -1;
    }

    std::vector<ScorerResponse> exchange(std::span<const ScorerRequest> requests) {
        std::unordered_map<std::string, std::size_t> pending;
        std::vector<std::optional<ScorerResponse>> got(requests.size());
        std::size_t next = 0;
        std::size_t received = 0;
        std::size_t in_flight = 0;
        std::string outbuf;

        while (received < requests.size()) {
            while (next < requests.size() && in_flight < max_in_flight_) {
                outbuf += requests[next].to_json().dump() + "\n";
                pending.emplace(requests[next].id, next);
                ++next;
                ++in_flight;
            }
            pollfd fds[2] = {{from_child_, POLLIN, 0}, {to_child_, static_cast<short>(outbuf.empty() ? 0 : POLLOUT), 0}};
            const int nfds = outbuf.empty() ? 1 : 2;
            if (::poll(fds, nfds, -1) < 0) {
                if (errno == EINTR) continue;
                throw TransportError(std::string("poll: ") + std::strerror(errno));
            }
            if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
                const ssize_t w = ::write(to_child_, outbuf.data(), outbuf.size());
                if (w < 0 && errno != EAGAIN && errno != EINTR) {
                    throw TransportError("worker closed its input while request " + first_pending(pending) +
                                         " was pending");
                }
                if (w > 0) outbuf.erase(0, static_cast<std::size_t>(w));
            }
            if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
                char chunk[65536];
                const ssize_t r = ::read(from_child_, chunk, sizeof chunk);
                if (r == 0) {
                    throw TransportError("worker exited before answering request " + first_pending(pending));
                }
                if (r < 0) {
                    if (errno == EAGAIN || errno == EINTR) continue;
                    throw TransportError(std::string("read: ") + std::strerror(errno));
                }
                readbuf_.append(chunk, static_cast<std::size_t>(r));
                std::size_t nl;
                while ((nl = readbuf_.find('\n')) != std::string::npos) {
                    std::string line = readbuf_.substr(0, nl);
                    readbuf_.erase(0, nl + 1);
                    if (line.empty()) continue;
                    ScorerResponse resp;
                    try {
                        resp = ScorerResponse::from_json(json::parse(line));
                    } catch (const std::exception& e) {
                        throw TransportError("malformed line from worker: " + line.substr(0, 200));
                    }
                    const auto it = pending.find(resp.id);
                    if (it == pending.end()) throw TransportError("response for unknown request id " + resp.id);
                    got[it->second] = std::move(resp);
                    pending.erase(it);
                    ++received;
                    --in_flight;
                }
            }
        }
        std::vector<ScorerResponse> out;
        out.reserve(got.size());
        for (auto& g : got) out.push_back(std::move(*g));
        return out;
    }

    static std::string first_pending(const std::unordered_map<std::string, std::size_t>& pending) {
        std::string best;
        std::size_t best_idx = SIZE_MAX;
        for (const auto& [id, idx] : pending) {
            if (idx < best_idx) {
                best_idx = idx;
                best = id;
            }
        }
        return best.empty() ? "<none>" : best;
    }

    std::string command_;
    std::size_t max_in_flight_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    bool broken_ = false;
    std::string readbuf_;
};

/// Loads a fixture file into id -> response. Duplicate ids are rejected.
inline std::map<std::string, json> load_fixture(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open fixture file " + path);
    std::map<std::string, json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": malformed fixture line");
        }
        if (!j.contains("id") || !j["id"].is_string() || !j.contains("response")) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": fixture line needs id and response");
        }
        const auto id = j["id"].get<std::string>();
        ScorerResponse::from_json(j["response"]);
        if (!out.emplace(id, j["response"]).second) throw ValidationError("duplicate fixture id " + id);
    }
    return out;
}

/// Replays recorded responses; never starts a worker.
class FixtureTransport final : public Transport {
public:
    explicit FixtureTransport(std::map<std::string, json> entries) : entries_(std::move(entries)) {}
    static FixtureTransport from_file(const std::string& path) { return FixtureTransport(load_fixture(path)); }

    std::vector<ScorerResponse> send(std::span<const ScorerRequest> requests) override {
        std::vector<ScorerResponse> out;
        out.reserve(requests.size());
        for (const auto& req : requests) {
            const auto it = entries_.find(req.id);
            if (it == entries_.end()) throw FixtureMiss(req.id);
            out.push_back(ScorerResponse::from_json(it->second));
        }
        return out;
    }

    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, json> entries_;
};

// ---------------------------------------------------------------------------
// Cache and recorder

/// Content-addressed store: `<dir>/<id[0:2]>/<id>.json`. Writes go through a
/// temporary file and rename so readers never see partial entries.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IOError("cannot create cache directory " + dir_.string());
    }

    std::optional<ScorerResponse> get(const std::string& id) const {
        std::ifstream in(path_for(id), std::ios::binary);
        if (!in) return std::nullopt;
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            auto resp = ScorerResponse::from_json(json::parse(ss.str()));
            if (resp.id != id || !resp.ok) return std::nullopt;
            return resp;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    void put(const ScorerResponse& resp) const {
        const auto path = path_for(resp.id);
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        auto tmp = path;
        tmp += ".tmp." + std::to_string(::getpid());
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IOError("cannot write cache entry " + tmp.string());
            out << resp.to_json().dump();
        }
        std::filesystem::rename(tmp, path, ec);
        if (ec) throw IOError("cannot finalize cache entry " + path.string());
    }

private:
    std::filesystem::path path_for(const std::string& id) const {
        return dir_ / id.substr(0, 2) / (id + ".json");
    }

    std::filesystem::path dir_;
};

/// Collects (id, response) pairs and writes them as a sorted fixture file.
class FixtureRecorder {
public:
    void append(const std::string& id, json response) {
        std::lock_guard lock(mu_);
        entries_.emplace_back(id, std::move(response));
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return entries_.size();
    }

    /// Sorted fixture text. Throws ValidationError on duplicate ids.
    std::string render() const {
        std::lock_guard lock(mu_);
        auto sorted = entries_;
        std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        std::string out;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (i > 0 && sorted[i].first == sorted[i - 1].first) {
                throw ValidationError("duplicate fixture id " + sorted[i].first);
            }
            out += json{{"id", sorted[i].first}, {"response", sorted[i].second}}.dump() + "\n";
        }
        return out;
    }

    void finalize(const std::string& path) const {
        const auto text = render();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IOError("cannot write fixture file " + path);
        out << text;
        if (!out) throw IOError("failed writing fixture file " + path);
    }

private:
    mutable std::mutex mu_;
    std::vector<std::pair<std::string, json>> entries_;
};

// ---------------------------------------------------------------------------
// Client

struct TransportConfig {
    enum class Kind { subprocess_lines, fixture_file };
    Kind kind = Kind::fixture_file;
    std::string command;      ///< subprocess_lines
    std::string fixture_path; ///< fixture_file
    std::size_t max_in_flight = 4;
};

struct ClientStats {
    std::size_t transport_calls = 0;    ///< batches handed to a live worker
    std::size_t transport_requests = 0; ///< requests handed to a live worker
    std::size_t cache_hits = 0;
    std::size_t fixture_hits = 0;
};

/// Shareable scorer front end. Deduplicates by id, consults the cache before the
/// transport, caches successful responses and feeds an optional recorder.
class ScorerClient {
public:
    ScorerClient(std::unique_ptr<Transport> transport, bool is_fixture)
        : transport_(std::move(transport)), is_fixture_(is_fixture) {}

    static std::shared_ptr<ScorerClient> from_config(const TransportConfig& cfg) {
        if (cfg.kind == TransportConfig::Kind::fixture_file) {
            return std::make_shared<ScorerClient>(
                std::make_unique<FixtureTransport>(FixtureTransport::from_file(cfg.fixture_path)), true);
        }
        if (cfg.command.empty()) throw ConfigError("subprocess transport needs a command");
        return std::make_shared<ScorerClient>(std::make_unique<SubprocessTransport>(cfg.command, cfg.max_in_flight),
                                              false);
    }

    void set_cache(std::shared_ptr<DiskCache> cache) { cache_ = std::move(cache); }
    void set_recorder(std::shared_ptr<FixtureRecorder> rec) { recorder_ = std::move(rec); }

    std::vector<ScorerResponse> score_batch(std::span<const ScorerRequest> requests) {
        std::lock_guard lock(mu_);
        std::map<std::string, ScorerResponse> resolved;
        std::vector<ScorerRequest> to_send;
        std::set<std::string> queued;
        for (const auto& req : requests) {
            check_collision(req);
            if (resolved.contains(req.id) || queued.contains(req.id)) continue;
            if (!is_fixture_ && cache_) {
                if (auto hit = cache_->get(req.id)) {
                    ++stats_.cache_hits;
                    resolved.emplace(req.id, std::move(*hit));
                    continue;
                }
            }
            queued.insert(req.id);
            to_send.push_back(req);
        }
        if (!to_send.empty()) {
            auto responses = transport_->send(to_send);
            if (is_fixture_) {
                stats_.fixture_hits += responses.size();
            } else {
                ++stats_.transport_calls;
                stats_.transport_requests += to_send.size();
            }
            for (std::size_t i = 0; i < responses.size(); ++i) {
                if (responses[i].id != to_send[i].id) {
                    throw TransportError("response id " + responses[i].id + " does not echo " + to_send[i].id);
                }
                if (responses[i].ok && cache_ && !is_fixture_) cache_->put(responses[i]);
                resolved.emplace(to_send[i].id, std::move(responses[i]));
            }
        }
        std::vector<ScorerResponse> out;
        out.reserve(requests.size());
        for (const auto& req : requests) {
            const auto& resp = resolved.at(req.id);
            if (recorder_ && resp.ok && recorded_.insert(req.id).second) recorder_->append(req.id, resp.to_json());
            out.push_back(resp);
        }
        return out;
    }

    /// Scores payloads of one task and returns their results; a failed response
    /// raises ScorerError naming the request id.
    std::vector<json> run(Task task, const std::vector<json>& payloads) {
        std::vector<ScorerRequest> reqs;
        reqs.reserve(payloads.size());
        for (const auto& p : payloads) reqs.push_back(make_request(task, p));
        auto responses = score_batch(reqs);
        std::vector<json> out;
        out.reserve(responses.size());
        for (auto& r : responses) {
            if (!r.ok) throw ScorerError(std::string(to_string(task)) + " request " + r.id + " failed: " + r.error);
            out.push_back(std::move(r.result));
        }
        return out;
    }

    ClientStats stats() const {
        std::lock_guard lock(mu_);
        return stats_;
    }

    bool is_fixture() const { return is_fixture_; }

private:
    void check_collision(const ScorerRequest& req) {
        auto canon = req.canonical();
        const auto [it, inserted] = seen_.emplace(req.id, canon);
        if (!inserted && it->second != canon) throw ValidationError("request id collision on " + req.id);
    }

    mutable std::mutex mu_;
    std::unique_ptr<Transport> transport_;
    bool is_fixture_;
    std::shared_ptr<DiskCache> cache_;
    std::shared_ptr<FixtureRecorder> recorder_;
    std::unordered_map<std::string, std::string> seen_;
    std::set<std::string> recorded_;
    ClientStats stats_;
};

// ---------------------------------------------------------------------------
// Task helpers

namespace detail {

template <typename T>
T result_field(const json& result, const char* key, Task task) {
    if (!result.is_object() || !result.contains(key)) {
        throw ScorerError(std::string(to_string(task)) + " result lacks \"" + key + "\"");
    }
    try {
        return result[key].get<T>();
    } catch (const json::exception&) {
        throw ScorerError(std::string(to_string(task)) + " result field \"" + key + "\" has the wrong type");
    }
}

} // namespace detail

/// values(i, j) = entailment of output sentence j given input sentence i.
inline ScoreMatrix nli_matrix(const Document& source, const Document& output, ScorerClient& scorer) {
    const std::size_t m = source.sentence_count();
    const std::size_t n = output.sentence_count();
    std::vector<json> payloads;
    payloads.reserve(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        const auto premise = source.sentence_text(i);
        for (std::size_t j = 0; j < n; ++j) {
            payloads.push_back({{"premise", premise}, {"hypothesis", output.sentence_text(j)}});
        }
    }
    const auto results = scorer.run(Task::nli, payloads);
    std::vector<double> values;
    values.reserve(results.size());
    for (const auto& r : results) values.push_back(detail::result_field<double>(r, "entailment", Task::nli));
    try {
        return ScoreMatrix(m, n, std::move(values));
    } catch (const MetricError& e) {
        throw ScorerError(std::string("nli scores invalid: ") + e.what());
    }
}

/// One reading-level estimate per sentence, in sentence order.
inline std::vector<double> sentence_sle_scores(const Document& doc, ScorerClient& scorer) {
    std::vector<json> payloads;
    for (std::size_t i = 0; i < doc.sentence_count(); ++i) payloads.push_back({{"sentence", doc.sentence_text(i)}});
    std::vector<double> out;
    for (const auto& r : scorer.run(Task::sle, payloads)) out.push_back(detail::result_field<double>(r, "sle", Task::sle));
    return out;
}

inline std::vector<std::string> ner_entities(const Document& doc, ScorerClient& scorer) {
    const auto results = scorer.run(Task::ner, {json{{"text", doc.text()}}});
    return detail::result_field<std::vector<std::string>>(results.front(), "entities", Task::ner);
}

} // namespace simpeval
