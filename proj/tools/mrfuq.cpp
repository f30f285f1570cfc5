#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrfuq/diagnostics.hpp"
#include "mrfuq/ising.hpp"
#include "mrfuq/model_io.hpp"

using namespace mrfuq;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return detail::fmt_real(v == 0.0 ? 0.0 : v);
}

/// start:stop:step with inclusive endpoints, or a single value.
std::vector<double> parse_grid(const std::string& s) {
    auto bad = [&] { return InputError("bad grid '" + s + "' (expected start:stop:step)"); };
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw bad();
        } catch (const std::logic_error&) {
            throw bad();
        }
    }
    for (double v : parts)
        if (!std::isfinite(v)) throw bad();
    if (parts.size() == 1) return parts;
    if (parts.size() != 3) throw bad();
    double a = parts[0], b = parts[1], st = parts[2];
    if (!(st > 0.0) || b < a) throw InputError("grid '" + s + "' needs step > 0 and stop >= start");
    auto n = static_cast<std::size_t>(std::floor((b - a) / st + 1e-9)) + 1;
    if (n > 10'000'000) throw InputError("grid '" + s + "' is too large");
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = a + st * static_cast<double>(k);
    if (std::abs(g.back() - b) < 1e-9 * st) g.back() = b;
    return g;
}

struct Qoi {
    std::string spec;
    std::vector<double> values;
};

// indicator:node=state,...  or  state:node
Qoi parse_qoi(const std::string& spec, const LogLinearModel& m) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw InputError("bad qoi '" + spec + "'");
    std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    auto to_idx = [&](const std::string& t) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(t, &used);
        } catch (const std::logic_error&) {
            throw InputError("bad qoi '" + spec + "'");
        }
        if (used != t.size()) throw InputError("bad qoi '" + spec + "'");
        return static_cast<std::size_t>(v);
    };
    std::size_t n = m.node_count();
    StateSpace sp = m.state_space();
    Qoi q{spec, {}};
    if (kind == "state") {
        std::size_t node = to_idx(rest);
        if (node >= n) throw InputError("qoi node out of range");
        q.values = observe(sp, [&](const Configuration& x) { return static_cast<double>(x[node]); });
        return q;
    }
    if (kind != "indicator") throw InputError("unknown qoi kind '" + kind + "'");
    std::vector<std::pair<std::size_t, std::size_t>> conds;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("bad qoi term '" + item + "'");
        std::size_t node = to_idx(item.substr(0, eq)), st = to_idx(item.substr(eq + 1));
        if (node >= n || st >= m.cardinalities()[node]) throw InputError("qoi term '" + item + "' out of range");
        conds.emplace_back(node, st);
    }
    if (conds.empty()) throw InputError("empty indicator qoi");
    q.values = observe(sp, [&](const Configuration& x) {
        for (auto [v, s] : conds)
            if (x[v] != s) return 0.0;
        return 1.0;
    });
    return q;
}

const char* endpoint_name(Endpoint e) {
    switch (e) {
    case Endpoint::none: return "interior";
    case Endpoint::zero: return "zero";
    case Endpoint::infinity: return "infinity";
    }
    return "?";
}

ordered_json bound_json(const BoundReport& r) {
    return {{"value", r.value}, {"lambda_star", r.lambda_star}, {"endpoint", endpoint_name(r.endpoint)}};
}

// Output plumbing shared by all subcommands.
struct Run {
    std::vector<std::string> argv;
    std::string out;  // empty: stdout, no manifest
    std::string svg;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::pair<std::string, std::string>> outputs;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void add_input(const std::string& path, const std::string& content) {
        inputs.emplace_back(path, sha256_hex(content));
    }

    void emit(const std::string& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InputError("cannot write '" + path + "'");
        f << content;
        if (!f) throw InputError("write failed for '" + path + "'");
        outputs.emplace_back(path, sha256_hex(content));
    }

    void primary(const std::string& content) {
        if (out.empty()) {
            std::cout << content;
            return;
        }
        emit(out, content);
    }

    void finish() {
        if (out.empty()) return;
        ordered_json m;
        m["command"] = argv;
        m["version"] = kVersion;
        m["seed"] = seed;
        m["inputs"] = ordered_json::array();
        for (auto& [p, d] : inputs) m["inputs"].push_back({{"path", p}, {"sha256", d}});
        m["outputs"] = ordered_json::array();
        for (auto& [p, d] : outputs) m["outputs"].push_back({{"path", p}, {"sha256", d}});
        m["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream f(out + ".manifest.json", std::ios::binary);
        if (!f) throw InputError("cannot write manifest");
        f << m.dump(2) << "\n";
    }
};

struct Series {
    std::string name, colour;
    std::vector<double> x, y;
};

// Minimal line chart; NaN breaks a line.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::vector<Series>& ss) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : ss)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
    double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const double W = 640, H = 420, ml = 60, mr = 20, mt = 30, mb = 50;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    std::ostringstream o;
    char buf[64];
    auto f = [&](double v) { std::snprintf(buf, sizeof buf, "%.2f", v); return std::string(buf); };
    auto g = [&](double v) { std::snprintf(buf, sizeof buf, "%.3g", v); return std::string(buf); };
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        o << "<text x=\"" << f(px(xv)) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << g(xv) << "</text>\n";
        o << "<text x=\"" << ml - 4 << "\" y=\"" << f(py(yv) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
          << g(yv) << "</text>\n";
    }
    o << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
      << "</text>\n";
    int row = 0;
    for (const auto& s : ss) {
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                o << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\" points=\"" << pts
                  << "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) { flush(); continue; }
            pts += f(px(s.x[i])) + "," + f(py(s.y[i])) + " ";
        }
        flush();
        o << "<text x=\"" << ml + 8 << "\" y=\"" << mt + 14 + 14 * row++ << "\" font-size=\"11\" fill=\"" << s.colour
          << "\">" << s.name << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

// ---------------------------------------------------------------- bound

struct BoundArgs {
    std::string model, alt, qoi;
    double eta = -1.0;
};

void cmd_bound(const BoundArgs& a, Run& run) {
    std::string text = read_file(a.model);
    run.add_input(a.model, text);
    LogLinearModel base = parse_model(text);
    Qoi f = parse_qoi(a.qoi, base);
    Measure q = enumerate(base);

    ordered_json j;
    j["qoi"] = f.spec;
    j["baseline"] = expectation(q, f.values);
    BoundReport up, lo;
    if (!a.alt.empty()) {
        std::string at = read_file(a.alt);
        run.add_input(a.alt, at);
        LogLinearModel alt = parse_model(at);
        PerturbationReport rep = classify(base, alt);
        if (rep.ptype == PerturbationType::TypeIII)
            throw UnsupportedPerturbation("Type III perturbation: " + rep.reason);
        ExcessFactor ef = excess_factor(base, alt, rep);
        std::vector<double> lp = log_phi_vector(base, ef);
        up = uq_bound_model(q, f.values, lp, Direction::upper);
        lo = uq_bound_model(q, f.values, lp, Direction::lower);
        j["mode"] = "model";
        j["perturbation"] = to_string(rep.ptype);
        j["alt_expectation"] = alt_expectation(q, lp, f.values);
    } else {
        up = uq_bound_eta(q, f.values, a.eta, Direction::upper);
        lo = uq_bound_eta(q, f.values, a.eta, Direction::lower);
        j["mode"] = "eta";
    }
    j["kl"] = up.kl;
    j["lower"] = bound_json(lo);
    j["upper"] = bound_json(up);
    j["inputs"] = ordered_json::array();
    for (auto& [p, d] : run.inputs) j["inputs"].push_back({{"path", p}, {"sha256", d}});
    j["version"] = kVersion;
    run.primary(j.dump(2) + "\n");
}

// ---------------------------------------------------------------- medical

struct MedicalArgs {
    DiagnosticsScenario s;
    int type = 1;
    std::string sweep = "a";
    std::string grid = "-1:1:0.1";
};

void cmd_medical(const MedicalArgs& a, Run& run) {
    if (a.sweep != "a" && a.sweep != "p_II") throw InputError("--sweep must be a or p_II");
    if (a.type != 1 && a.type != 2) throw InputError("--type must be 1 or 2");
    std::vector<double> xs = parse_grid(a.grid);
    std::ostringstream csv;
    csv << "parameter,kl,lower,upper,baseline\n";
    Series lo{"lower", "#1f77b4", {}, {}}, up{"upper", "#d62728", {}, {}}, ba{"baseline", "black", {}, {}};
    for (double x : xs) {
        DiagnosticsScenario s = a.s;
        (a.sweep == "a" ? s.a : s.p_II) = x;
        s.validate();
        double kl;
        BoundReport u, l;
        if (a.type == 1) {
            kl = type1_kl(s);
            u = type1_bounds(s, Direction::upper);
            l = type1_bounds(s, Direction::lower);
        } else {
            kl = type2_kl(s);
            u = type2_bounds_overlap(s, Direction::upper);
            l = type2_bounds_overlap(s, Direction::lower);
        }
        csv << num(x) << ',' << num(kl) << ',' << num(l.value) << ',' << num(u.value) << ',' << num(s.pA) << '\n';
        for (Series* p : {&lo, &up, &ba}) p->x.push_back(x);
        lo.y.push_back(l.value);
        up.y.push_back(u.value);
        ba.y.push_back(s.pA);
    }
    run.primary(csv.str());
    if (!run.svg.empty())
        run.emit(run.svg, svg_plot("Type " + std::to_string(a.type) + " bounds on P(A)", a.sweep, {lo, up, ba}));
}

// ---------------------------------------------------------------- ising

using namespace mrfuq::ising;

struct BandArgs {
    double beta = 1.1, J = 1.0, a = 0.1, eps = 0.05, gamma = 0.1, h_offset = 0.0, J_sup = 1.0;
    std::string h = "-2:2:0.02";
    std::string method = "theorem";
    bool truncation = false, long_range = false;
    unsigned threads = 0;
};

std::vector<BandMethod> methods(const std::string& m) {
    if (m == "theorem") return {BandMethod::theorem};
    if (m == "norm1") return {BandMethod::norm1};
    if (m == "both") return {BandMethod::theorem, BandMethod::norm1};
    throw InputError("--method must be theorem, norm1 or both");
}

void cmd_band(const BandArgs& a, Run& run) {
    if (a.truncation && a.long_range) throw InputError("--truncation and --long-range are exclusive");
    PhasePerturbation p;
    p.a = a.a;
    if (a.truncation) {
        p.kind = PhasePerturbationKind::truncation;
        p.epsilon = a.eps;
        p.J_sup = a.J_sup;
        if (!(a.eps > 0.0 && a.eps < 1.0)) throw InputError("--eps must lie in (0,1)");
    } else if (a.long_range) {
        p.kind = PhasePerturbationKind::long_range;
        p.gamma = a.gamma;
    }
    std::vector<double> hs = parse_grid(a.h);
    auto ms = methods(a.method);
    for (BandMethod m : ms)
        if (m == BandMethod::theorem && !(a.beta * a.h_offset < 1.0))
            throw PreconditionError("theorem band needs beta*(h~ - h) < 1");

    std::ostringstream csv;
    csv << "h,m_baseline,m_baseline_minus,m_baseline_plus,lower,upper,method,lambda_star,lambda_star_lower\n";
    std::vector<Series> series;
    const char* colours[] = {"#d62728", "#1f77b4"};
    int ci = 0;
    Series mb{"baseline", "black", {}, {}};
    for (BandMethod m : ms) {
        PhaseBand b = phase_band(a.beta, hs, a.J, p, a.h_offset, m, a.threads);
        Series lo{std::string(to_string(m)) + " lower", colours[ci], {}, {}};
        Series up{std::string(to_string(m)) + " upper", colours[ci++], {}, {}};
        for (const auto& pt : b.points) {
            double mid = 0.5 * (pt.m_minus + pt.m_plus);
            csv << num(pt.h) << ',' << num(mid) << ',' << num(pt.m_minus) << ',' << num(pt.m_plus) << ','
                << num(pt.lower) << ',' << num(pt.upper) << ',' << to_string(m) << ',' << num(pt.lambda_upper)
                << ',' << num(pt.lambda_lower) << '\n';
            lo.x.push_back(pt.h);
            lo.y.push_back(pt.lower);
            up.x.push_back(pt.h);
            up.y.push_back(pt.upper);
            if (m == ms.front()) {
                mb.x.push_back(pt.h);
                mb.y.push_back(pt.m_plus);
            }
        }
        series.push_back(lo);
        series.push_back(up);
    }
    series.push_back(mb);
    run.primary(csv.str());
    if (!run.svg.empty())
        run.emit(run.svg, svg_plot(std::string("Magnetization band (") + to_string(p.kind) + ")", "h", series));
}

Profile profile_by_name(const std::string& n) {
    if (n == "bump") return bump_profile();
    if (n == "pwc") return pwc_profile();
    throw InputError("--profile must be bump or pwc");
}

Boundary boundary_by_name(const std::string& n) {
    if (n == "plus") return Boundary::plus();
    if (n == "minus") return Boundary::minus();
    if (n == "free") return Boundary::free();
    throw InputError("--bc must be plus, minus or free");
}

struct FiniteArgs {
    int d = 1;
    long L = 12;
    double gamma = 0.25, beta = 1.1, h = 0.0, a = 0.1, eps = 0.0;
    double h_tilde = NAN;
    std::string bc = "plus", profile = "pwc", method = "both";
    bool mc = false;
    MetropolisOptions mco;
};

void cmd_finite(const FiniteArgs& a, Run& run) {
    LatticeSystem sys;
    sys.box = {a.d, a.L};
    sys.boundary = boundary_by_name(a.bc);
    sys.kernel = kac_kernel(a.d, profile_by_name(a.profile), a.gamma);
    sys.beta = a.beta;
    sys.h = a.h;
    sys.validate();
    double ht = std::isnan(a.h_tilde) ? a.h : a.h_tilde;
    Kernel F = a.eps > 0.0 ? difference(truncated_kernel(sys.kernel, a.eps), sys.kernel) : scaled(sys.kernel, a.a);
    LatticeSystem alt = sys;
    alt.kernel = combine(sys.kernel, F, 1.0);
    alt.h = ht;
    run.seed = a.mco.seed;

    std::ostringstream csv;
    csv << "method,source,d,L,gamma,beta,h,h_tilde,baseline,perturbed,lower,upper,inside,lambda_star,"
           "lambda_star_lower,offset\n";
    auto head = [&](const char* m, const char* src) {
        csv << m << ',' << src << ',' << a.d << ',' << a.L << ',' << num(a.gamma) << ',' << num(a.beta) << ','
            << num(a.h) << ',' << num(ht) << ',';
    };
    double truth;
    try {
        truth = mean_magnetization(alt);
    } catch (const CapacityError&) {
        if (!a.mc) throw;
        // bounds need the enumerated baseline; report sampled magnetizations only
        double base = metropolis(sys, a.mco).mean_magnetization;
        double pert = metropolis(alt, a.mco).mean_magnetization;
        head("none", "mc");
        csv << num(base) << ',' << num(pert) << ",nan,nan,,nan,nan,nan\n";
        run.primary(csv.str());
        return;
    }
    for (BandMethod m : methods(a.method)) {
        FiniteBand b = finite_size_band(sys, F, ht, m);
        bool inside = b.lower.value <= truth + 1e-12 && truth <= b.upper.value + 1e-12;
        head(to_string(m), "exact");
        csv << num(b.baseline) << ',' << num(truth) << ',' << num(b.lower.value) << ',' << num(b.upper.value) << ','
            << (inside ? "true" : "false") << ',' << num(b.upper.lambda_star) << ',' << num(b.lower.lambda_star)
            << ',' << num(b.offset) << '\n';
    }
    run.primary(csv.str());
}

struct CoarseArgs {
    std::vector<double> gammas{0.25, 1.0 / 16, 1.0 / 64};
    long L = 0;
    std::size_t samples = 20;
    std::string profile = "bump";
};

void cmd_coarse(const CoarseArgs& a, Run& run) {
    std::ostringstream csv;
    csv << "gamma,block,L,delta1,max_offblock_dev,delta1_holds,delta2,max_inblock_dev,delta2_holds,max_ratio,"
           "ratio_bound,pairs_checked\n";
    Profile p = profile_by_name(a.profile);
    for (double g : a.gammas) {
        long l = std::lround(1.0 / std::sqrt(g));
        CoarseReport r = coarse_grain_check(g, p, a.L > 0 ? a.L : 64 * l, a.samples, run.seed);
        csv << num(g) << ',' << r.block << ',' << r.L << ',' << num(r.delta1) << ',' << num(r.max_offblock_dev)
            << ',' << (r.delta1_holds() ? "true" : "false") << ',' << num(r.delta2) << ','
            << num(r.max_inblock_dev) << ',' << (r.delta2_holds() ? "true" : "false") << ',' << num(r.max_ratio)
            << ',' << num(r.ratio_bound) << ',' << r.pairs_checked << '\n';
    }
    run.primary(csv.str());
}

struct LongRangeArgs {
    double a = 1.0, beta = 1.1, h = 0.0;
    std::vector<double> gammas{0.25, 0.125};
    long L = 10;
    std::string bc = "plus";
};

void cmd_longrange(const LongRangeArgs& a, Run& run) {
    std::ostringstream csv;
    csv << "gamma,tail,constant,kappa_bound,max_abs_kappa,kappa_ok,baseline,perturbed,lower,upper,inside\n";
    for (double g : a.gammas) {
        LatticeSystem sys;
        sys.box = {1, a.L};
        sys.boundary = boundary_by_name(a.bc);
        sys.kernel = pwc_kac_kernel(1, g);
        sys.beta = a.beta;
        sys.h = a.h;
        sys.validate();
        Kernel F = long_range_perturbation(a.a, g);
        TailConstant t = long_range_tail_constant(a.a, g);
        double kb = long_range_kappa_bound(sys, a.a, g);
        QoILinearForm lf = ising_linear_form(excess_factor_ising(sys, F, a.h));
        double mk = 0.0;
        for (double k : lf.kappa) mk = std::max(mk, std::abs(k));
        double truth = perturbed_magnetization(sys, F, a.h);
        FiniteBand b = long_range_finite_band(sys, a.a, g, a.h);
        bool inside = b.lower.value <= truth + 1e-12 && truth <= b.upper.value + 1e-12;
        csv << num(g) << ',' << num(t.tail) << ',' << num(t.constant) << ',' << num(kb) << ',' << num(mk) << ','
            << (mk <= kb + 1e-12 ? "true" : "false") << ',' << num(b.baseline) << ',' << num(truth) << ','
            << num(b.lower.value) << ',' << num(b.upper.value) << ',' << (inside ? "true" : "false") << '\n';
    }
    run.primary(csv.str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uncertainty bounds for discrete Markov random fields"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Run run;
    for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);
    auto common = [&](CLI::App* c) {
        c->add_option("-o,--out", run.out, "Output file (stdout when omitted; manifest written beside it)");
    };
    auto with_svg = [&](CLI::App* c) { c->add_option("--svg", run.svg, "Optional SVG plot"); };

    BoundArgs ba;
    auto* b = app.add_subcommand("bound", "Bound E[f] under an alternative model or a divergence level");
    b->add_option("--model", ba.model, "Baseline model file")->required();
    auto* alt = b->add_option("--alt", ba.alt, "Alternative model file");
    auto* eta = b->add_option("--eta", ba.eta, "Divergence level")->check(CLI::NonNegativeNumber);
    alt->excludes(eta);
    b->add_option("--qoi", ba.qoi, "indicator:node=state,... or state:node")->required();
    common(b);

    MedicalArgs ma;
    auto* m = app.add_subcommand("medical", "Closed-form bound curves of the four-node diagnostics example");
    m->add_option("--p-I", ma.s.p_I, "Base probability of B_c")->capture_default_str();
    m->add_option("--p-II", ma.s.p_II, "Base probability of the new-edge event")->capture_default_str();
    m->add_option("--pA", ma.s.pA, "Base probability of the event of interest")->capture_default_str();
    m->add_option("--w-c", ma.s.w_c, "Clique weight")->capture_default_str();
    m->add_option("--a", ma.s.a, "Relative weight change when not swept")->capture_default_str();
    m->add_option("--pU", ma.s.pU, "Probability of the overlap of the two events")->capture_default_str();
    m->add_option("--type", ma.type, "Perturbation type (1 or 2)")->capture_default_str();
    m->add_option("--sweep", ma.sweep, "Swept parameter: a or p_II")->capture_default_str();
    m->add_option("--grid", ma.grid, "start:stop:step")->capture_default_str();
    common(m);
    with_svg(m);

    auto* is = app.add_subcommand("ising", "Ising-Kac experiments");
    is->require_subcommand(1);

    BandArgs bd;
    auto* band = is->add_subcommand("band", "Mean-field limit magnetization band");
    band->add_option("--beta", bd.beta)->capture_default_str();
    band->add_option("--J", bd.J, "Total interaction strength")->capture_default_str();
    band->add_option("--a", bd.a, "Relative Kac strength change")->capture_default_str();
    band->add_option("--h", bd.h, "Field grid start:stop:step")->capture_default_str();
    band->add_option("--h-offset", bd.h_offset, "Field shift of the alternative")->capture_default_str();
    band->add_option("--method", bd.method, "theorem, norm1 or both")->capture_default_str();
    band->add_flag("--truncation", bd.truncation, "Truncated-kernel perturbation");
    band->add_option("--eps", bd.eps, "Truncation fraction")->capture_default_str();
    band->add_option("--J-sup", bd.J_sup, "Sup norm of the profile (truncation)")->capture_default_str();
    band->add_flag("--long-range", bd.long_range, "Inverse-square perturbation");
    band->add_option("--gamma", bd.gamma, "Kac scale (long-range)")->capture_default_str();
    band->add_option("--threads", bd.threads, "Worker threads (0 = hardware)")->capture_default_str();
    common(band);
    with_svg(band);

    FiniteArgs fa;
    auto* fin = is->add_subcommand("finite", "Finite-volume band checked against enumeration");
    fin->add_option("--d", fa.d)->capture_default_str();
    fin->add_option("--L", fa.L)->capture_default_str();
    fin->add_option("--gamma", fa.gamma)->capture_default_str();
    fin->add_option("--beta", fa.beta)->capture_default_str();
    fin->add_option("--h", fa.h)->capture_default_str();
    fin->add_option("--h-tilde", fa.h_tilde, "Field of the alternative (defaults to --h)");
    fin->add_option("--a", fa.a, "Kac perturbation F = a J")->capture_default_str();
    fin->add_option("--eps", fa.eps, "Use a truncation perturbation instead of --a");
    fin->add_option("--bc", fa.bc, "plus, minus or free")->capture_default_str();
    fin->add_option("--profile", fa.profile, "bump or pwc")->capture_default_str();
    fin->add_option("--method", fa.method, "theorem, norm1 or both")->capture_default_str();
    fin->add_flag("--mc", fa.mc, "Fall back to Metropolis sampling above the enumeration cap");
    fin->add_option("--sweeps", fa.mco.sweeps)->capture_default_str();
    fin->add_option("--seed", fa.mco.seed)->capture_default_str();
    common(fin);

    CoarseArgs ca;
    auto* co = is->add_subcommand("coarse", "Block coarse-graining checks");
    co->add_option("--gamma", ca.gammas, "Kac scales; gamma^{-1/2} must be an integer")->capture_default_str();
    co->add_option("--L", ca.L, "Box side (default 64 blocks)");
    co->add_option("--samples", ca.samples)->capture_default_str();
    co->add_option("--profile", ca.profile)->capture_default_str();
    co->add_option("--seed", run.seed)->capture_default_str();
    common(co);

    LongRangeArgs la;
    auto* lr = is->add_subcommand("longrange", "Inverse-square tail perturbation of the 1-D Kac model");
    lr->add_option("--a", la.a)->capture_default_str();
    lr->add_option("--gamma", la.gammas)->capture_default_str();
    lr->add_option("--L", la.L)->capture_default_str();
    lr->add_option("--beta", la.beta)->capture_default_str();
    lr->add_option("--h", la.h)->capture_default_str();
    lr->add_option("--bc", la.bc)->capture_default_str();
    common(lr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::input);
    }

    try {
        if (*b) {
            if (ba.alt.empty() && ba.eta < 0.0) throw InputError("bound needs --alt or --eta");
            cmd_bound(ba, run);
        } else if (*m) {
            cmd_medical(ma, run);
        } else if (*band) {
            cmd_band(bd, run);
        } else if (*fin) {
            cmd_finite(fa, run);
        } else if (*co) {
            cmd_coarse(ca, run);
        } else if (*lr) {
            cmd_longrange(la, run);
        }
        run.finish();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::internal);
    }
    return 0;
}
