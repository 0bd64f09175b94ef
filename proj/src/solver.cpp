#include "fdc/solver.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <poll.h>
#include <spawn.h>
#include <sstream>
#include <sys/stat.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

extern char** environ;

namespace fdc {

std::string to_string(SolverAnswer a) {
    switch (a) {
    case SolverAnswer::Sat:
        return "sat";
    case SolverAnswer::Unsat:
        return "unsat";
    case SolverAnswer::Unknown:
        return "unknown";
    case SolverAnswer::Timeout:
        return "timeout";
    case SolverAnswer::Error:
        return "error";
    }
    return "?";
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kCaptureLimit = std::size_t{16} << 20;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool executable(const std::string& path) {
    struct stat st {};
    return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) &&
           ::access(path.c_str(), X_OK) == 0;
}

// Temp file removed on scope exit.
struct TempScript {
    std::string path;
    explicit TempScript(const std::string& text) {
        const char* dir = std::getenv("TMPDIR");
        std::string tmpl = std::string(dir && *dir ? dir : "/tmp") + "/fdcheck-XXXXXX.smt2";
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        int fd = ::mkstemps(buf.data(), 5);
        if (fd < 0)
            throw std::runtime_error(std::string("cannot create temp file: ") +
                                     std::strerror(errno));
        path = buf.data();
        std::size_t off = 0;
        while (off < text.size()) {
            ssize_t n = ::write(fd, text.data() + off, text.size() - off);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                ::close(fd);
                throw std::runtime_error("cannot write temp file");
            }
            off += static_cast<std::size_t>(n);
        }
        ::close(fd);
    }
    ~TempScript() {
        if (!path.empty())
            ::unlink(path.c_str());
    }
};

struct Pipe {
    int fd[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fd, O_CLOEXEC) != 0)
            throw std::runtime_error("pipe failed");
    }
    ~Pipe() {
        for (int f : fd)
            if (f >= 0)
                ::close(f);
    }
    void close_end(int i) {
        if (fd[i] >= 0)
            ::close(fd[i]);
        fd[i] = -1;
    }
};

void classify(const SolverConfig& cfg, SolverOutcome& o, bool killed) {
    std::istringstream lines(o.out);
    std::string line;
    while (std::getline(lines, line)) {
        auto it = cfg.answers.find(trim(line));
        if (it != cfg.answers.end()) {
            o.answer = it->second;
            return;
        }
    }
    if (killed) {
        o.answer = SolverAnswer::Timeout;
        return;
    }
    o.answer = SolverAnswer::Error;
    std::string first_err = trim(o.err.substr(0, o.err.find('\n')));
    if (first_err.empty())
        first_err = trim(o.out.substr(0, o.out.find('\n')));
    if (o.exit_status < 0)
        o.detail = "terminated by signal " + std::to_string(-o.exit_status);
    else
        o.detail = "no answer (exit status " + std::to_string(o.exit_status) + ")";
    std::string lower = o.err;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower.find("out of memory") != std::string::npos ||
        lower.find("bad_alloc") != std::string::npos)
        o.detail = "out of memory";
    if (!first_err.empty())
        o.detail += ": " + first_err;
}

} // namespace

std::optional<std::string> SolverConfig::resolve() const {
    if (command.empty() || command.front().empty())
        return std::nullopt;
    const std::string& prog = command.front();
    if (prog.find('/') != std::string::npos)
        return executable(prog) ? std::optional<std::string>(prog) : std::nullopt;
    const char* path = std::getenv("PATH");
    std::istringstream dirs(path ? path : "/usr/local/bin:/usr/bin:/bin");
    std::string dir;
    while (std::getline(dirs, dir, ':')) {
        std::string cand = (dir.empty() ? "." : dir) + "/" + prog;
        if (executable(cand))
            return cand;
    }
    return std::nullopt;
}

SolverOutcome run_solver(const SolverConfig& cfg, const std::string& script,
                         std::chrono::milliseconds limit) {
    SolverOutcome o;
    try {
        auto program = cfg.resolve();
        if (!program) {
            o.detail = "backend unavailable: " + cfg.name;
            return o;
        }
        TempScript file(script);
        std::vector<std::string> args;
        for (const auto& a : cfg.command) {
            std::string s = a;
            for (auto p = s.find("{file}"); p != std::string::npos; p = s.find("{file}", p))
                s.replace(p, 6, file.path);
            args.push_back(std::move(s));
        }
        std::vector<char*> argv;
        for (auto& a : args)
            argv.push_back(a.data());
        argv.push_back(nullptr);

        Pipe out, err;
        posix_spawn_file_actions_t fa;
        posix_spawn_file_actions_init(&fa);
        posix_spawn_file_actions_addopen(&fa, 0, "/dev/null", O_RDONLY, 0);
        posix_spawn_file_actions_adddup2(&fa, out.fd[1], 1);
        posix_spawn_file_actions_adddup2(&fa, err.fd[1], 2);
        posix_spawnattr_t attr;
        posix_spawnattr_init(&attr);
        posix_spawnattr_setpgroup(&attr, 0);
        sigset_t defaults;
        sigemptyset(&defaults);
        sigaddset(&defaults, SIGPIPE);
        posix_spawnattr_setsigdefault(&attr, &defaults);
        posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGDEF);

        pid_t pid = -1;
        auto start = Clock::now();
        int rc = ::posix_spawn(&pid, program->c_str(), &fa, &attr, argv.data(), environ);
        posix_spawn_file_actions_destroy(&fa);
        posix_spawnattr_destroy(&attr);
        if (rc != 0) {
            o.detail = std::string("spawn failed: ") + std::strerror(rc);
            return o;
        }
        o.pid = pid;
        out.close_end(1);
        err.close_end(1);

        auto deadline = start + limit;
        bool killed = false;
        pollfd fds[2] = {{out.fd[0], POLLIN, 0}, {err.fd[0], POLLIN, 0}};
        std::string* sinks[2] = {&o.out, &o.err};
        int open = 2;
        char buf[65536];
        while (open > 0) {
            auto now = Clock::now();
            if (now >= deadline) {
                ::kill(-pid, SIGKILL);
                killed = true;
                break;
            }
            auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
            int n = ::poll(fds, 2, static_cast<int>(std::max<long long>(1, wait.count())));
            if (n < 0 && errno != EINTR)
                break;
            for (int i = 0; i < 2; ++i) {
                if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR)))
                    continue;
                ssize_t r = ::read(fds[i].fd, buf, sizeof buf);
                if (r > 0) {
                    if (sinks[i]->size() < kCaptureLimit)
                        sinks[i]->append(buf, static_cast<std::size_t>(r));
                } else if (r == 0 || errno != EINTR) {
                    fds[i].fd = -1;
                    --open;
                }
            }
        }
        // The pipes are closed: the solver has exited or is about to. Wait
        // for it, but never past the deadline.
        int status = 0;
        while (true) {
            pid_t w = ::waitpid(pid, &status, killed ? 0 : WNOHANG);
            if (w == pid || (w < 0 && errno != EINTR))
                break;
            if (w == 0) {
                if (Clock::now() >= deadline) {
                    ::kill(-pid, SIGKILL);
                    killed = true;
                } else {
                    std::this_thread::sleep_for(std::chrono::milliseconds(1));
                }
            }
        }
        auto end = Clock::now();
        // Leftover descendants go with the group.
        ::kill(-pid, SIGKILL);
        o.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
        if (WIFEXITED(status))
            o.exit_status = WEXITSTATUS(status);
        else if (WIFSIGNALED(status))
            o.exit_status = -WTERMSIG(status);
        classify(cfg, o, killed);
        if (o.answer == SolverAnswer::Timeout)
            o.detail = "killed after " + std::to_string(limit.count()) + " ms";
    } catch (const std::exception& e) {
        o.answer = SolverAnswer::Error;
        o.detail = e.what();
    }
    return o;
}

std::vector<std::string> split_command(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    bool in_word = false;
    char quote = 0;
    for (char c : s) {
        if (quote) {
            if (c == quote)
                quote = 0;
            else
                cur += c;
        } else if (c == '\'' || c == '"') {
            quote = c;
            in_word = true;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (in_word)
                out.push_back(std::move(cur));
            cur.clear();
            in_word = false;
        } else {
            cur += c;
            in_word = true;
        }
    }
    if (quote)
        throw ConfigError("unterminated quote in command: " + s);
    if (in_word)
        out.push_back(std::move(cur));
    return out;
}

std::vector<SolverConfig> parse_solver_configs(const std::string& text) {
    std::vector<SolverConfig> out;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw ConfigError("solver config line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos)
            line.erase(h);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail("expected ']'");
            SolverConfig c;
            c.name = trim(line.substr(1, line.size() - 2));
            if (c.name.empty())
                fail("empty section name");
            out.push_back(std::move(c));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            fail("expected key = value");
        if (out.empty())
            fail("key outside a [solver] section");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        SolverConfig& c = out.back();
        if (key == "command") {
            c.command = split_command(value);
        } else if (key == "quantifiers") {
            if (value == "true" || value == "yes" || value == "1")
                c.supports_quantifiers = true;
            else if (value == "false" || value == "no" || value == "0")
                c.supports_quantifiers = false;
            else
                fail("quantifiers must be true or false");
        } else if (key.rfind("answer.", 0) == 0) {
            std::string a = key.substr(7);
            SolverAnswer ans;
            if (a == "sat")
                ans = SolverAnswer::Sat;
            else if (a == "unsat")
                ans = SolverAnswer::Unsat;
            else if (a == "unknown")
                ans = SolverAnswer::Unknown;
            else
                fail("unknown answer kind '" + a + "'");
            c.answers[value] = ans;
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    for (const auto& c : out)
        if (c.command.empty())
            throw ConfigError("solver '" + c.name + "' has no command");
    return out;
}

std::vector<SolverConfig> load_solver_configs(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read solver config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_solver_configs(ss.str());
}

std::vector<SolverConfig> default_solver_configs() {
    return parse_solver_configs(R"(
[boolector]
command = boolector --smt2 {file}
quantifiers = false

[cvc4]
command = cvc4 --lang smt2 {file}

[cvc5]
command = cvc5 --lang smt2 {file}

[yices]
command = yices-smt2 {file}
quantifiers = false

[z3]
command = z3 -smt2 {file}
)");
}

std::vector<SolverConfig> solver_configs(const std::optional<std::string>& path) {
    if (path)
        return load_solver_configs(*path);
    if (const char* env = std::getenv(kSolversEnv); env && *env)
        return load_solver_configs(env);
    return default_solver_configs();
}

const SolverConfig* find_solver(const std::vector<SolverConfig>& cfgs,
                                const std::string& name) {
    for (const auto& c : cfgs) {
        if (c.name.size() != name.size())
            continue;
        if (std::equal(c.name.begin(), c.name.end(), name.begin(), [](char a, char b) {
                return std::tolower(static_cast<unsigned char>(a)) ==
                       std::tolower(static_cast<unsigned char>(b));
            }))
            return &c;
    }
    return nullptr;
}

SolverPool::SolverPool(unsigned size) : size_(std::max(1u, size)) {}

SolverPool& SolverPool::global() {
    static SolverPool pool(std::max(1u, std::thread::hardware_concurrency()));
    return pool;
}

void SolverPool::resize(unsigned size) {
    std::lock_guard lk(mu_);
    size_ = std::max(1u, size);
    cv_.notify_all();
}

unsigned SolverPool::size() const {
    std::lock_guard lk(mu_);
    return size_;
}

void SolverPool::acquire() {
    std::unique_lock lk(mu_);
    cv_.wait(lk, [&] { return used_ < size_; });
    ++used_;
}

void SolverPool::release() {
    std::lock_guard lk(mu_);
    --used_;
    cv_.notify_one();
}

Decision decide(const Model& m, const FormulaPtr& goal, const SolverConfig& cfg,
                const TranslateOptions& opts, std::chrono::milliseconds limit,
                const std::string& goal_name) {
    Decision d;
    auto error = [&](const std::string& why) {
        d.verdict.kind = VerdictKind::Error;
        d.verdict.reason = why;
        d.outcome.answer = SolverAnswer::Error;
        d.outcome.detail = why;
        return d;
    };
    if (opts.mode == QuantifierMode::Preserve && !cfg.supports_quantifiers)
        return error("configuration error: " + cfg.name +
                     " does not support quantified formulas");
    if (!cfg.available())
        return error("backend unavailable: " + cfg.name);
    std::string script;
    auto t0 = Clock::now();
    try {
        script = emit_smtlib(translate(m, goal, opts, goal_name));
    } catch (const TranslationError& e) {
        d.translate_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        return error(std::string("translation error: ") + e.what());
    }
    d.translate_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    SolverPool::global().acquire();
    d.outcome = run_solver(cfg, script, limit);
    SolverPool::global().release();

    switch (d.outcome.answer) {
    case SolverAnswer::Unsat:
        d.verdict.kind = VerdictKind::Valid;
        break;
    case SolverAnswer::Sat:
        d.verdict.kind = VerdictKind::Invalid;
        break;
    case SolverAnswer::Unknown:
        d.verdict.kind = VerdictKind::Undecided;
        d.verdict.reason = cfg.name + " answered unknown";
        break;
    case SolverAnswer::Timeout:
        d.verdict.kind = VerdictKind::Undecided;
        d.verdict.reason = "timeout after " + std::to_string(limit.count()) + " ms";
        break;
    case SolverAnswer::Error:
        d.verdict.kind = VerdictKind::Undecided;
        d.verdict.reason = cfg.name + " error: " + d.outcome.detail;
        break;
    }
    return d;
}

} // namespace fdc
