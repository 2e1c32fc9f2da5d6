// Command-line driver: exact q-expansions, certified Poincare coefficients
// with optional rational recognition and on-disk caching, and the
// verification suite.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "maassq/maassq.hpp"

namespace {

struct GlobalOpts {
    long precision_bits = 128;
    double target_abs_error = 5.421010862427522e-20;  // 2^-64
    long c_max = -1;                                  // <0: automatic truncation
    std::string cache_dir;
    int threads = 1;
};

maassq::PrecisionConfig make_precision(const GlobalOpts& g) {
    maassq::PrecisionConfig pc;
    pc.working_bits = static_cast<mpfr_prec_t>(g.precision_bits);
    pc.target_abs_error = g.target_abs_error;
    pc.validate();
    return pc;
}

/// Low weights have slowly decaying modulus-sum tails (the proven bound falls
/// off like C^(2-k)), so the requested absolute error is not reachable within
/// the modulus cap at k <= 6; the automatic policy then aims for 1e-4 and the
/// printed radii stay honest about it.
double default_tail_target(const GlobalOpts& g, long k) {
    return (k <= 6) ? std::max(g.target_abs_error, 1e-4) : g.target_abs_error;
}

maassq::EtaQuotientSpec parse_eta_spec(const std::string& s) {
    maassq::EtaQuotientSpec spec;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        unsigned long d;
        long r;
        if (std::sscanf(part.c_str(), "%lu:%ld", &d, &r) != 2)
            throw std::invalid_argument("bad eta factor `" + part +
                                        "`; expected <divisor>:<exponent>");
        spec.factors.emplace_back(d, r);
    }
    if (spec.factors.empty()) throw std::invalid_argument("empty eta quotient specification");
    return spec;
}

int run_qexp(const std::string& what, const std::string& arg, long terms,
             const std::string& out_path) {
    using namespace maassq;
    if (terms < 2) throw std::invalid_argument("--terms must be at least 2");
    LaurentQSeries s = [&]() {
        if (what == "eta") {
            if (arg.empty()) throw std::invalid_argument("eta requires a quotient spec argument");
            return eta_quotient(parse_eta_spec(arg), terms);
        }
        if (what == "eisenstein") {
            if (arg.empty()) throw std::invalid_argument("eisenstein requires a weight argument");
            return eisenstein(std::stol(arg), terms);
        }
        if (what == "j") return j_series(terms);
        if (what == "jm") {
            if (arg.empty()) throw std::invalid_argument("jm requires an index argument");
            return faber_jm(std::stol(arg), terms);
        }
        if (what == "delta") return delta_series(terms);
        if (what == "m-series") return m_series(terms);
        if (what == "g-series") return g_series(terms);
        throw std::invalid_argument("unknown expansion `" + what +
                                    "`; expected eta|eisenstein|j|jm|delta|m-series|g-series");
    }();
    if (out_path.empty()) {
        s.serialize(std::cout);
    } else {
        std::ofstream os(out_path);
        if (!os) throw std::runtime_error("cannot open " + out_path + " for writing");
        s.serialize(os);
    }
    return 0;
}

struct PoincareJob {
    long n;
    std::string line;
    bool certified = true;
};

int run_poincare(const GlobalOpts& g, long m, long k, long level, long n_max, bool maass,
                 bool nonholo, const std::string& sign, bool rationalize) {
    using namespace maassq;
    PoincareParams params{m, k, level};
    params.validate();
    if (n_max < 0) throw std::invalid_argument("--n-max must be >= 0");
    PoincareKind kind;
    if (maass) {
        kind = nonholo ? PoincareKind::maass_nonholo : PoincareKind::maass_holo;
    } else {
        if (nonholo) throw std::invalid_argument("--nonholo requires --maass");
        if (sign == "+") kind = PoincareKind::cusp;
        else if (sign == "-") kind = PoincareKind::weak;
        else throw std::invalid_argument("either --maass or --sign +/- is required");
    }
    if (rationalize && kind != PoincareKind::maass_holo)
        throw std::invalid_argument("--rationalize applies to the --maass holomorphic part");
    if (g.c_max >= 0 && g.c_max < level)
        throw std::invalid_argument("--c-max must be at least the level");

    PrecisionConfig pc = make_precision(g);
    TruncationPolicy base = (g.c_max >= 0)
                                ? TruncationPolicy::fixed(g.c_max, pc)
                                : TruncationPolicy::automatic(default_tail_target(g, k), pc);

    std::vector<long> ns;
    switch (kind) {
        case PoincareKind::cusp:
        case PoincareKind::weak:
            for (long n = 1; n <= n_max; ++n) ns.push_back(n);
            break;
        case PoincareKind::maass_holo:
            for (long n = 0; n <= n_max; ++n) ns.push_back(n);
            break;
        case PoincareKind::maass_nonholo:
            for (long n = 1; n <= n_max; ++n) ns.push_back(-n);
            break;
    }

    // On-disk cache: only for plain (non-rationalized) runs, where every row
    // shares one policy string.
    const bool use_cache = !g.cache_dir.empty() && !rationalize;
    PoincareCacheData cache_data;
    cache_data.params = params;
    cache_data.kind = kind;
    cache_data.prec_bits = g.precision_bits;
    cache_data.policy = base.policy_string();
    std::string cache_path;
    std::map<long, std::string> cached_rows;
    if (use_cache) {
        cache_path = g.cache_dir + "/" + poincare_cache_filename(cache_data);
        if (auto existing = load_poincare_cache_file(cache_path)) {
            if (existing->params.m == m && existing->params.k == k &&
                existing->params.level == level && existing->kind == kind &&
                existing->prec_bits == g.precision_bits && existing->policy == cache_data.policy) {
                cached_rows = existing->rows;
            }
        }
    }

    KloostermanCache kcache;
    std::vector<PoincareJob> jobs(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) jobs[i].n = ns[i];

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                const long n = jobs[i].n;
                auto it = cached_rows.find(n);
                if (it != cached_rows.end()) {
                    jobs[i].line = it->second;
                    jobs[i].certified = true;  // cache only stores finished rows
                    continue;
                }
                TruncationPolicy t = base;
                if (rationalize && n != 0 && base.mode == TruncationPolicy::Mode::auto_target) {
                    double dpow = std::pow(static_cast<double>(n), static_cast<double>(k - 1));
                    t = TruncationPolicy::automatic(
                        std::min({base.target_tail, 1e-4, 1.0 / (4.0 * dpow)}), pc);
                }
                CertifiedBall cb;
                switch (kind) {
                    case PoincareKind::cusp: cb = cusp_poincare_coeff(params, n, t, kcache); break;
                    case PoincareKind::weak:
                        cb = weakly_holo_poincare_coeff(params, n, t, kcache);
                        break;
                    case PoincareKind::maass_holo:
                        cb = maass_poincare_holo_coeff(params, n, t, kcache);
                        break;
                    case PoincareKind::maass_nonholo:
                        cb = maass_poincare_nonholo_coeff(params, n, t, kcache);
                        break;
                }
                std::string line = cb.value.to_string();
                if (rationalize) {
                    mpz_class D(1);
                    if (n != 0) {
                        mpz_class base_n(std::labs(n));
                        mpz_pow_ui(D.get_mpz_t(), base_n.get_mpz_t(),
                                   static_cast<unsigned long>(k - 1));
                    }
                    auto rec = cb.value.recognize_rational(D);
                    if (rec)
                        line += " = " + rec->first.get_str() + "/" + rec->second.get_str();
                    else
                        line += " = ?";
                }
                jobs[i].line = line;
                jobs[i].certified = cb.certified;
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(jobs.size());
                return;
            }
        }
    };

    int nthreads = std::max(1, g.threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    bool any_uncertified = false;
    for (const auto& j : jobs) {
        std::cout << j.n << " " << j.line << "\n";
        if (!j.certified) any_uncertified = true;
    }

    if (use_cache) {
        for (const auto& j : jobs) {
            // Strip any rationalization suffix before storing (none when caching).
            cache_data.rows[j.n] = j.line;
        }
        CacheUpdateStatus st = update_poincare_cache_file(cache_path, cache_data);
        if (st == CacheUpdateStatus::refused_lower_precision)
            std::cerr << "warning: cache file " << cache_path
                      << " holds higher-precision data; not overwritten\n";
    }
    if (any_uncertified)
        std::cerr << "warning: weight-2 truncation tails are heuristic; radii are not certified\n";
    return 0;
}

int finish_verify(const maassq::VerificationReport& rep, const std::string& report_path) {
    rep.print_human(std::cout);
    if (!report_path.empty()) {
        std::ofstream os(report_path);
        if (!os) throw std::runtime_error("cannot open " + report_path + " for writing");
        rep.print_machine(os);
    }
    if (rep.has_fail()) return 1;
    if (rep.has_uncertified())
        std::cerr << "warning: some checks are uncertified (see report)\n";
    return 0;
}

int run_cache_info(const std::string& path) {
    using namespace maassq;
    auto d = load_poincare_cache_file(path);
    if (!d) {
        std::cerr << "error: no cache file at " << path << "\n";
        return 1;
    }
    std::cout << "cache " << path << "\n"
              << "  series: kind=" << to_string(d->kind) << " m=" << d->params.m
              << " k=" << d->params.k << " level=" << d->params.level << "\n"
              << "  precision: " << d->prec_bits << " bits, policy " << d->policy << "\n"
              << "  rows: " << d->rows.size();
    if (!d->rows.empty())
        std::cout << " (n from " << d->rows.begin()->first << " to " << d->rows.rbegin()->first
                  << ")";
    std::cout << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace maassq;
    CLI::App app{"Fourier coefficients of Poincare series with certified error bounds, exact "
                 "q-expansions, and identity verification"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--precision-bits", g.precision_bits, "working precision in bits (default 128)")
        ->check(CLI::Range(53L, 65536L));
    app.add_option("--target-abs-error", g.target_abs_error,
                   "requested absolute error for automatic truncation (default 2^-64)");
    app.add_option("--c-max", g.c_max, "fixed modulus truncation point (default: automatic)");
    app.add_option("--cache-dir", g.cache_dir, "directory for coefficient cache files")
        ->envname("MAASSQ_CACHE_DIR");
    app.add_option("--threads", g.threads, "worker threads for independent coefficients")
        ->check(CLI::Range(1, 256));

    // ---- qexp ----
    auto* qexp = app.add_subcommand("qexp", "print an exact q-expansion");
    std::string qexp_what, qexp_arg, qexp_out;
    long qexp_terms = 100;
    qexp->add_option("what", qexp_what, "eta|eisenstein|j|jm|delta|m-series|g-series")->required();
    qexp->add_option("arg", qexp_arg, "eta spec (e.g. 1:3,9:-3), eisenstein weight, or jm index");
    qexp->add_option("--terms", qexp_terms, "number of expansion terms (default 100)");
    qexp->add_option("--out", qexp_out, "write to file instead of stdout");

    // ---- poincare ----
    auto* poin = app.add_subcommand("poincare", "certified Poincare series coefficients");
    long p_m = 1, p_k = 4, p_level = 1, p_nmax = 10;
    bool p_maass = false, p_nonholo = false, p_rat = false;
    std::string p_sign;
    poin->add_option("--m", p_m, "series index (principal exponent -m or seed q^m)")->required();
    poin->add_option("--k", p_k, "even weight of the dual side")->required();
    poin->add_option("--level", p_level, "moduli run over multiples of this level");
    poin->add_option("--n-max", p_nmax, "largest coefficient index")->required();
    poin->add_option("--sign", p_sign, "+ for the cuspidal series, - for the weakly holomorphic one")
        ->check(CLI::IsMember({"+", "-"}));
    poin->add_flag("--maass", p_maass, "harmonic series: holomorphic-part coefficients");
    poin->add_flag("--nonholo", p_nonholo, "with --maass: non-holomorphic-part coefficients");
    poin->add_flag("--rationalize", p_rat,
                   "append recognized rational p/n^(k-1) to each coefficient");

    // ---- verify ----
    auto* ver = app.add_subcommand("verify", "recompute and check the library's core identities");
    ver->require_subcommand(1);
    std::string report_path;

    auto* vge = ver->add_subcommand("good-example",
                                    "exact series vs certified coefficients for the running example");
    long vge_nmax = 11;
    vge->add_option("--n-max", vge_nmax, "largest index to cross-check (default 11)");
    vge->add_option("--report", report_path, "write machine-readable CHECK lines to this file");

    auto* vbx = ver->add_subcommand("bol-xi", "coefficient-level differential identities");
    long vbx_m = 1, vbx_k = 4, vbx_level = 9, vbx_nmax = 11;
    vbx->add_option("--m", vbx_m);
    vbx->add_option("--k", vbx_k);
    vbx->add_option("--level", vbx_level);
    vbx->add_option("--n-max", vbx_nmax);
    vbx->add_option("--report", report_path, "write machine-readable CHECK lines to this file");

    auto* vle = ver->add_subcommand("lehmer", "prime-indexed coefficient relation at weight -10");
    long vle_p = 2, vle_nlo = 0, vle_nhi = 4;
    vle->add_option("--p", vle_p, "prime (default 2)");
    vle->add_option("--n-lo", vle_nlo, "lowest index (default -p)");
    vle->add_option("--n-hi", vle_nhi, "highest index (default 4)");
    vle->add_option("--report", report_path, "write machine-readable CHECK lines to this file");

    auto* vcm = ver->add_subcommand("cm", "coefficient vanishing on inert classes");
    long vcm_D = -3, vcm_X = 200;
    std::string vcm_series = "g";
    vcm->add_option("--D", vcm_D, "fundamental discriminant (default -3)");
    vcm->add_option("--X", vcm_X, "check 1 <= n <= X (default 200)");
    vcm->add_option("--series", vcm_series, "g (eta cube) or e4 (negative control)")
        ->check(CLI::IsMember({"g", "e4"}));
    vcm->add_option("--report", report_path, "write machine-readable CHECK lines to this file");

    auto* vhe = ver->add_subcommand("hecke", "eigenform prime-power recursion");
    long vhe_p = 2, vhe_jmax = 6;
    vhe->add_option("--p", vhe_p, "prime (default 2)");
    vhe->add_option("--j-max", vhe_jmax, "check powers through p^(j_max+1) (default 6)");
    vhe->add_option("--report", report_path, "write machine-readable CHECK lines to this file");

    auto* vpa = ver->add_subcommand("padic", "vanishing at prime powers and density decay");
    long vpa_terms = 19683;
    vpa->add_option("--terms", vpa_terms, "exact-series length (default 19683)");
    vpa->add_option("--report", report_path, "write machine-readable CHECK lines to this file");

    // ---- cache ----
    auto* cac = app.add_subcommand("cache", "describe a coefficient cache file");
    std::string cache_file;
    cac->add_option("path", cache_file, "cache file to describe")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*qexp) return run_qexp(qexp_what, qexp_arg, qexp_terms, qexp_out);
        if (*poin)
            return run_poincare(g, p_m, p_k, p_level, p_nmax, p_maass, p_nonholo, p_sign, p_rat);
        if (*cac) return run_cache_info(cache_file);
        if (*ver) {
            PrecisionConfig pc = make_precision(g);
            KloostermanCache kcache;
            auto policy_for = [&](long k) {
                return (g.c_max >= 0) ? TruncationPolicy::fixed(g.c_max, pc)
                                      : TruncationPolicy::automatic(default_tail_target(g, k), pc);
            };
            if (*vge)
                return finish_verify(verify_good_example(vge_nmax, policy_for(4), kcache),
                                     report_path);
            if (*vbx)
                return finish_verify(
                    verify_bol_xi(PoincareParams{vbx_m, vbx_k, vbx_level}, vbx_nmax,
                                  policy_for(vbx_k), kcache),
                    report_path);
            if (*vle) {
                if (vle->count("--n-lo") == 0) vle_nlo = -vle_p;
                return finish_verify(
                    verify_lehmer_identity(vle_p, vle_nlo, vle_nhi, policy_for(12), kcache),
                    report_path);
            }
            if (*vcm) {
                LaurentQSeries s = (vcm_series == "g") ? g_series(vcm_X + 2)
                                                       : eisenstein(4, vcm_X + 2);
                return finish_verify(
                    verify_cm_vanishing(s, vcm_D, vcm_X,
                                        vcm_series == "g" ? "eta-cube-level-9" : "eisenstein-4"),
                    report_path);
            }
            if (*vhe) {
                long need = 1;
                for (long j = 0; j <= vhe_jmax + 1; ++j) need *= vhe_p;
                LaurentQSeries s = g_series(need + 2);
                return finish_verify(
                    verify_hecke_recursion(s, vhe_p, 4, DirichletCharacterSpec::trivial(1),
                                           vhe_jmax, "eta-cube-level-9"),
                    report_path);
            }
            if (*vpa) return finish_verify(verify_padic(vpa_terms), report_path);
        }
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
