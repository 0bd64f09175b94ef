#include "fdc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace fdc {

std::vector<Quantifier> QuantPattern::prefix() const {
    Quantifier first = exists_first ? Quantifier::Exists : Quantifier::Forall;
    Quantifier second = exists_first ? Quantifier::Forall : Quantifier::Exists;
    std::vector<Quantifier> out(4, second);
    std::fill_n(out.begin(), std::min(leading, 4u), first);
    return out;
}

std::string QuantPattern::label() const {
    std::string lead = exists_first ? "e" : "a";
    std::string rest = exists_first ? "a" : "e";
    return lead + std::to_string(leading) + rest + std::to_string(4 - leading);
}

unsigned QuantPattern::index() const { return (exists_first ? 0 : 4) + (4 - leading); }

std::optional<QuantPattern> parse_pattern(const std::string& s) {
    for (const auto& p : all_patterns())
        if (p.label() == s)
            return p;
    return std::nullopt;
}

const std::vector<QuantPattern>& all_patterns() {
    static const std::vector<QuantPattern> ps = [] {
        std::vector<QuantPattern> v;
        for (bool e : {true, false})
            for (unsigned i = 4; i >= 1; --i)
                v.push_back({e, i});
        return v;
    }();
    return ps;
}

namespace {

const char* const kFamilyNames[] = {
    "cycle4-valid",   "cycle4-unsat",   "cycle4-sat1",    "cycle4-sat2",
    "contract-f-eq1", "contract-f-eq0", "contract-g-eq1", "contract-g-eq0",
};

std::string xname(int i) { return "x" + std::to_string(i); }

TypeDef domain_def(unsigned n) {
    TypeDef d;
    d.name = "D";
    auto num = [](Value v) {
        return std::make_shared<BoundExpr>(BoundExpr{BoundExpr::Op::Num, v, {}, {}, {}});
    };
    auto pow = std::make_shared<BoundExpr>(BoundExpr{
        BoundExpr::Op::Pow, 0, {}, num(2),
        std::make_shared<BoundExpr>(BoundExpr{BoundExpr::Op::Param, 0, "N", {}, {}})});
    d.bound = std::make_shared<BoundExpr>(BoundExpr{BoundExpr::Op::Sub, 0, {}, pow, num(1)});
    d.type = FiniteType::nat((Value{1} << n) - 1);
    return d;
}

TypeRef domain_ref(unsigned n) { return TypeRef{FiniteType::nat((Value{1} << n) - 1), "D"}; }

FormulaPtr quantify(const QuantPattern& p, unsigned n, FormulaPtr body) {
    auto prefix = p.prefix();
    for (int i = 4; i >= 1; --i)
        body = build::quant(prefix[i - 1], Binder{xname(i), domain_ref(n)}, body);
    return body;
}

TermPtr x(int i) { return build::var(xname(i)); }

// x1 < x2 /\ x2 < x3 /\ x3 < x4 /\ x4 < last
FormulaPtr chain(TermPtr last) {
    return build::conj({build::lt(x(1), x(2)), build::lt(x(2), x(3)),
                        build::lt(x(3), x(4)), build::lt(x(4), std::move(last))});
}

FormulaPtr formula_if(FormulaPtr c, FormulaPtr a, FormulaPtr b) {
    return build::land(build::implies(c, std::move(a)),
                       build::implies(build::lnot(c), std::move(b)));
}

Model base_model(unsigned n) {
    Model m;
    m.params.push_back(Param{"N", n, {}});
    m.types.push_back(domain_def(n));
    return m;
}

} // namespace

std::string to_string(Family f) { return kFamilyNames[static_cast<int>(f)]; }

std::optional<Family> parse_family(const std::string& s) {
    for (Family f : all_families())
        if (to_string(f) == s)
            return f;
    return std::nullopt;
}

const std::vector<Family>& all_families() {
    static const std::vector<Family> fs = {
        Family::Cycle4Valid,  Family::Cycle4Unsat,  Family::Cycle4Sat1,
        Family::Cycle4Sat2,   Family::ContractFEq1, Family::ContractFEq0,
        Family::ContractGEq1, Family::ContractGEq0,
    };
    return fs;
}

bool is_contract_family(Family f) { return static_cast<int>(f) >= 4; }

unsigned default_n(Family f) { return is_contract_family(f) ? 5 : 6; }

FormulaPtr gen_cycle4(Family family, const QuantPattern& p, unsigned n) {
    if (is_contract_family(family))
        throw std::invalid_argument(to_string(family) + " is not a cycle family");
    if (n == 0 || n > 24)
        throw std::invalid_argument("N must be between 1 and 24");
    FormulaPtr body;
    switch (family) {
    case Family::Cycle4Valid:
        body = build::lnot(chain(x(1)));
        break;
    case Family::Cycle4Unsat:
        body = build::lnot(build::lnot(chain(x(1))));
        break;
    case Family::Cycle4Sat1:
        body = build::lnot(chain(build::add_const(x(1), 4)));
        break;
    default:
        body = build::lnot(build::lnot(chain(build::add_const(x(1), 4))));
        break;
    }
    return quantify(p, n, body);
}

Model gen_contract_bench(Family family, const QuantPattern& p, unsigned n) {
    if (!is_contract_family(family))
        throw std::invalid_argument(to_string(family) + " is not a contract family");
    if (n == 0 || n > 24)
        throw std::invalid_argument("N must be between 1 and 24");
    bool uses_f = family == Family::ContractFEq1 || family == Family::ContractFEq0;
    Value expected =
        family == Family::ContractFEq1 || family == Family::ContractGEq1 ? 1 : 0;

    Model m = base_model(n);
    FuncDecl fn;
    fn.name = uses_f ? "f" : "g";
    for (int i = 1; i <= 4; ++i)
        fn.params.push_back(Binder{xname(i), domain_ref(n)});
    fn.result = domain_ref(n);
    FormulaPtr cond = uses_f ? chain(x(1))
                             : build::land(build::eq(x(1), x(2)), build::eq(x(3), x(4)));
    auto result = build::var(kResultVar);
    fn.ensures = formula_if(cond, build::eq(result, build::lit(0)),
                            build::eq(result, build::lit(1)));
    m.funcs.push_back(std::move(fn));

    auto app = build::apply(uses_f ? "f" : "g", {x(1), x(2), x(3), x(4)});
    m.theorems.push_back(
        Theorem{to_string(family), quantify(p, n, build::eq(app, build::lit(expected))), {}});
    return m;
}

Model bench_model(const BenchCase& c) {
    if (is_contract_family(c.family))
        return gen_contract_bench(c.family, c.pattern, c.n);
    Model m = base_model(c.n);
    m.theorems.push_back(
        Theorem{to_string(c.family), gen_cycle4(c.family, c.pattern, c.n), {}});
    return m;
}

std::string Mechanism::label() const {
    if (kind == Kind::Evaluator)
        return "RISCAL";
    std::string name = solver;
    static const std::map<std::string, std::string> pretty = {
        {"z3", "Z3"}, {"cvc4", "CVC4"}, {"cvc5", "CVC5"}, {"yices", "Yices"},
        {"boolector", "Boolector"}, {"bitwuzla", "Bitwuzla"}};
    if (auto it = pretty.find(name); it != pretty.end())
        name = it->second;
    const char* suffix = mode == QuantifierMode::Eliminate  ? "-S"
                         : mode == QuantifierMode::Preserve ? "-Q"
                                                            : "-E";
    return name + suffix;
}

std::optional<Mechanism> parse_mechanism(const std::string& label) {
    std::string lower = label;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "riscal" || lower == "evaluator")
        return Mechanism{};
    auto dash = label.rfind('-');
    if (dash == std::string::npos || dash == 0 || dash + 2 != label.size())
        return std::nullopt;
    Mechanism m;
    m.kind = Mechanism::Kind::Solver;
    m.solver = lower.substr(0, dash);
    switch (std::toupper(static_cast<unsigned char>(label.back()))) {
    case 'S':
        m.mode = QuantifierMode::Eliminate;
        break;
    case 'Q':
        m.mode = QuantifierMode::Preserve;
        break;
    case 'E':
        m.mode = QuantifierMode::ExpandAll;
        break;
    default:
        return std::nullopt;
    }
    return m;
}

BenchRecord run_cell(const BenchCase& c, const Mechanism& mech, unsigned repeat,
                     const SuiteOptions& opts) {
    using Clock = std::chrono::steady_clock;
    BenchRecord r;
    r.bcase = c;
    r.mechanism = mech.label();
    r.repeat = repeat;
    r.limit_ms = static_cast<double>(opts.limit.count());
    Model m = bench_model(c);
    const FormulaPtr& goal = m.theorems.front().formula;

    if (mech.kind == Mechanism::Kind::Evaluator) {
        EvalOptions eo;
        auto t0 = Clock::now();
        eo.deadline = t0 + opts.limit;
        CheckResult res = check_validity(m, goal, eo);
        r.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        r.verdict = res.verdict.kind;
        r.body_evals = res.stats.body_evals;
        r.detail = res.verdict.reason;
        switch (res.verdict.kind) {
        case VerdictKind::Valid:
        case VerdictKind::Invalid:
            r.outcome = "decided";
            break;
        case VerdictKind::Undecided:
            r.outcome = "timeout";
            r.timed_out = true;
            r.wall_ms = r.limit_ms;
            break;
        case VerdictKind::Error:
            r.outcome = "error";
            break;
        }
        return r;
    }

    const SolverConfig* cfg = find_solver(opts.solvers, mech.solver);
    if (!cfg || !cfg->available()) {
        r.outcome = "skipped";
        r.detail = "backend unavailable: " + mech.solver;
        return r;
    }
    if (mech.mode == QuantifierMode::Preserve && !cfg->supports_quantifiers) {
        r.outcome = "skipped";
        r.detail = cfg->name + " does not support quantified formulas";
        return r;
    }
    TranslateOptions to = opts.translate;
    to.mode = mech.mode;
    Decision d = decide(m, goal, *cfg, to, opts.limit, m.theorems.front().name);
    r.verdict = d.verdict.kind;
    r.translate_ms = d.translate_ms;
    r.wall_ms = d.outcome.wall_ms;
    r.detail = d.outcome.detail;
    switch (d.outcome.answer) {
    case SolverAnswer::Sat:
    case SolverAnswer::Unsat:
        r.outcome = "decided";
        break;
    case SolverAnswer::Timeout:
        r.outcome = "timeout";
        r.timed_out = true;
        r.wall_ms = r.limit_ms;
        break;
    case SolverAnswer::Unknown:
        r.outcome = "unknown";
        break;
    case SolverAnswer::Error:
        r.outcome = "error";
        break;
    }
    return r;
}

namespace {

auto sort_key(const BenchRecord& r) {
    return std::make_tuple(static_cast<int>(r.bcase.family), r.bcase.n, r.bcase.pattern.index(),
                           r.mechanism, r.repeat);
}

} // namespace

std::vector<BenchRecord> run_suite(const std::vector<BenchCase>& cases,
                                   const std::vector<Mechanism>& mechanisms,
                                   const SuiteOptions& opts) {
    struct Task {
        const BenchCase* c;
        const Mechanism* m;
        unsigned repeat;
    };
    std::vector<Task> tasks;
    for (const auto& c : cases)
        for (const auto& m : mechanisms)
            for (unsigned r = 0; r < std::max(1u, opts.repeats); ++r)
                tasks.push_back({&c, &m, r});

    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    if (opts.shuffle_seed) {
        std::mt19937_64 rng(*opts.shuffle_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }

    std::vector<BenchRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mu;
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < tasks.size();) {
            std::size_t i = order[k];
            records[i] = run_cell(*tasks[i].c, *tasks[i].m, tasks[i].repeat, opts);
            if (opts.progress) {
                std::lock_guard lk(progress_mu);
                opts.progress(records[i]);
            }
        }
    };
    unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, tasks.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (unsigned j = 0; j < jobs; ++j)
            threads.emplace_back(worker);
        for (auto& t : threads)
            t.join();
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const BenchRecord& a, const BenchRecord& b) {
                         return sort_key(a) < sort_key(b);
                     });
    return records;
}

double median(std::vector<double> xs) {
    if (xs.empty())
        return 0;
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : (xs[n / 2 - 1] + xs[n / 2]) / 2;
}

namespace {

std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string verdict_text(const BenchRecord& r) {
    if (r.outcome != "decided")
        return "";
    return r.verdict == VerdictKind::Valid ? "valid" : "invalid";
}

using CellKey = std::tuple<int, unsigned, unsigned, std::string>;

CellKey cell_key(const BenchRecord& r) {
    return {static_cast<int>(r.bcase.family), r.bcase.n, r.bcase.pattern.index(), r.mechanism};
}

// Median wall time of the plottable repeats of each cell.
std::map<CellKey, double> medians(const std::vector<BenchRecord>& records) {
    std::map<CellKey, std::vector<double>> by;
    for (const auto& r : records)
        if (r.outcome == "decided" || r.outcome == "timeout")
            by[cell_key(r)].push_back(r.wall_ms);
    std::map<CellKey, double> out;
    for (auto& [k, v] : by)
        out[k] = median(v);
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
        case '<':
            o += "&lt;";
            break;
        case '>':
            o += "&gt;";
            break;
        case '&':
            o += "&amp;";
            break;
        case '"':
            o += "&quot;";
            break;
        default:
            o += c;
        }
    }
    return o;
}

} // namespace

std::string render_chart(const std::string& title, const std::vector<BenchRecord>& records,
                         double limit_ms) {
    const double W = 720, H = 440, left = 70, right = 150, top = 40, bottom = 50;
    const double pw = W - left - right, ph = H - top - bottom;
    const double top_value = std::max(limit_ms, 10.0);
    const double decades = std::log10(top_value);
    auto ypos = [&](double ms) {
        double v = std::clamp(ms, 1.0, top_value);
        return top + ph - std::log10(v) / decades * ph;
    };
    const auto& patterns = all_patterns();
    auto xpos = [&](unsigned idx) { return left + pw * (idx + 0.5) / patterns.size(); };

    static const char* const colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                         "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
    // Decade grid lines and the limit line on top.
    for (double v = 1; v < top_value * 0.999; v *= 10) {
        double y = ypos(v);
        s << "<line x1=\"" << left << "\" y1=\"" << fmt(y, 1) << "\" x2=\"" << left + pw
          << "\" y2=\"" << fmt(y, 1) << "\" stroke=\"#ddd\"/>\n";
        s << "<text x=\"" << left - 6 << "\" y=\"" << fmt(y + 4, 1)
          << "\" text-anchor=\"end\">" << fmt(v, 0) << "</text>\n";
    }
    s << "<line class=\"limit\" x1=\"" << left << "\" y1=\"" << fmt(ypos(top_value), 1)
      << "\" x2=\"" << left + pw << "\" y2=\"" << fmt(ypos(top_value), 1)
      << "\" stroke=\"#000\" stroke-dasharray=\"4 3\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << fmt(ypos(top_value) + 4, 1)
      << "\" text-anchor=\"end\">" << fmt(top_value, 0) << "</text>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw
      << "\" y2=\"" << top + ph << "\" stroke=\"#000\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << top + ph << "\" stroke=\"#000\"/>\n";
    for (const auto& p : patterns)
        s << "<text x=\"" << fmt(xpos(p.index()), 1) << "\" y=\"" << top + ph + 18
          << "\" text-anchor=\"middle\">" << p.label() << "</text>\n";
    s << "<text x=\"16\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 16 "
      << top + ph / 2 << ")\" text-anchor=\"middle\">ms (log)</text>\n";

    auto med = medians(records);
    std::vector<std::string> mechs;
    for (const auto& r : records)
        if (std::find(mechs.begin(), mechs.end(), r.mechanism) == mechs.end())
            mechs.push_back(r.mechanism);
    std::sort(mechs.begin(), mechs.end());

    for (std::size_t mi = 0; mi < mechs.size(); ++mi) {
        const char* color = colors[mi % 8];
        std::vector<std::pair<double, double>> pts;
        std::vector<bool> timeouts;
        for (const auto& p : patterns) {
            auto it = std::find_if(records.begin(), records.end(), [&](const BenchRecord& r) {
                return r.mechanism == mechs[mi] && r.bcase.pattern == p;
            });
            if (it == records.end())
                continue;
            auto m = med.find(cell_key(*it));
            if (m == med.end())
                continue;
            // A median at the limit is a timeout: drawn on the top line.
            bool to = m->second >= limit_ms && limit_ms > 0;
            pts.emplace_back(xpos(p.index()), to ? ypos(top_value) : ypos(m->second));
            timeouts.push_back(to);
        }
        if (pts.size() > 1) {
            s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i)
                s << (i ? " " : "") << fmt(pts[i].first, 1) << "," << fmt(pts[i].second, 1);
            s << "\"/>\n";
        }
        for (std::size_t i = 0; i < pts.size(); ++i)
            s << "<circle" << (timeouts[i] ? " class=\"timeout\"" : "") << " cx=\""
              << fmt(pts[i].first, 1) << "\" cy=\"" << fmt(pts[i].second, 1)
              << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
        double ly = top + 14 + 18.0 * static_cast<double>(mi);
        s << "<line x1=\"" << left + pw + 14 << "\" y1=\"" << ly - 4 << "\" x2=\""
          << left + pw + 34 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly << "\">"
          << xml_escape(mechs[mi]) << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

Report emit_report(const std::vector<BenchRecord>& records, double limit_ms) {
    Report rep;
    std::ostringstream csv;
    csv << kCsvHeader << "\n";
    auto med = medians(records);
    for (const auto& r : records) {
        auto m = med.find(cell_key(r));
        csv << to_string(r.bcase.family) << "," << r.bcase.pattern.label() << ","
            << r.bcase.n << "," << r.mechanism << "," << r.repeat << "," << r.outcome << ","
            << verdict_text(r) << "," << fmt(r.wall_ms) << "," << fmt(r.translate_ms) << ","
            << (r.timed_out ? "true" : "false") << ","
            << (m == med.end() ? std::string() : fmt(m->second)) << "\n";
    }
    rep.csv = csv.str();
    if (records.empty())
        return rep;

    if (limit_ms <= 0)
        for (const auto& r : records)
            limit_ms = std::max(limit_ms, r.limit_ms);

    std::map<Family, std::set<unsigned>> ns;
    for (const auto& r : records)
        ns[r.bcase.family].insert(r.bcase.n);
    for (const auto& [family, sizes] : ns) {
        for (unsigned n : sizes) {
            std::vector<BenchRecord> sel;
            for (const auto& r : records)
                if (r.bcase.family == family && r.bcase.n == n)
                    sel.push_back(r);
            std::string file = to_string(family);
            if (sizes.size() > 1)
                file += "-N" + std::to_string(n);
            rep.charts[file + ".svg"] =
                render_chart(to_string(family) + " (N=" + std::to_string(n) + ")", sel,
                             limit_ms);
        }
    }
    return rep;
}

} // namespace fdc
