// SPDX-License-Identifier: Apache-2.0
//
// Seeded experiment driver: secrecy rate versus SNR, per-realization SR
// samples for empirical CDFs, iteration-count distributions and analytic
// complexity curves. Every table is a pure function of (config, seed).
//
// SNR is P_t / sigma^2 with P_t = 1 and sigma_b^2 = sigma_e^2 = sigma^2;
// P1 = power_split * P_t and P2 = P_t - P1.

#pragma once

#include "ssm/flop_model.hpp"
#include "ssm/precoder_opt.hpp"
#include "ssm/secrecy_metrics.hpp"
#include "ssm/sm_model.hpp"
#include "ssm/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ssm
{

enum class Method
{
    None,
    MaxAsrGd,
    MaxSrGd,
    MaxAsrSca
};

inline std::string to_string(Method m)
{
    switch (m)
    {
    case Method::None: return "None";
    case Method::MaxAsrGd: return "MaxAsrGd";
    case Method::MaxSrGd: return "MaxSrGd";
    case Method::MaxAsrSca: return "MaxAsrSca";
    }
    throw ConfigError("unknown method");
}

inline Method method_from_string(const std::string& s)
{
    for (Method m : {Method::None, Method::MaxAsrGd, Method::MaxSrGd, Method::MaxAsrSca})
        if (to_string(m) == s)
            return m;
    throw ConfigError("unknown method: " + s);
}

struct ExperimentConfig
{
    int n_tx = 4;
    int n_b = 2;
    int n_e = 2;
    int order = 2;
    Scheme scheme = Scheme::Psk;
    std::vector<double> snr_db_grid{-10, -5, 0, 5, 10, 15, 20};
    int n_channels = 50;
    int n_samp = 500;
    double power_split = 0.5;
    std::vector<Method> methods{Method::None, Method::MaxAsrGd, Method::MaxSrGd, Method::MaxAsrSca};
    std::uint64_t seed = 1;
    GDParams gd;
    SCAParams sca;

    /// Eavesdropper channel forced equal to the legitimate one.
    bool eve_equals_bob = false;
    /// SNR of the iteration-count study.
    double iters_snr_db = 5.0;
    /// Worker threads; 0 = hardware concurrency. Results do not depend on it.
    int threads = 0;

    std::vector<int> flops_n_tx_grid{4, 8, 16, 32, 64};
    flops::ComplexityInputs flops_inputs{};

    void validate() const
    {
        if (n_tx < 1 || n_b < 1 || n_e < 1)
            throw ConfigError("antenna counts must be positive");
        if (n_channels < 1 || n_samp < 1)
            throw ConfigError("n_channels and n_samp must be positive");
        if (!(power_split > 0.0) || power_split > 1.0)
            throw ConfigError("power_split must lie in (0, 1]");
        if (power_split < 1.0 && n_tx <= n_b)
            throw ConfigError("artificial noise needs n_tx > n_b; set power_split = 1 to disable it");
        if (eve_equals_bob && n_e != n_b)
            throw ConfigError("eve_equals_bob requires n_e == n_b");
        if (snr_db_grid.empty())
            throw ConfigError("snr_db_grid must not be empty");
        if (methods.empty())
            throw ConfigError("methods must not be empty");
        if (threads < 0)
            throw ConfigError("threads must be nonnegative");
        gd.validate();
        sca.validate();
        (void)make_codebook(order, scheme, n_tx);
    }
};

namespace detail
{

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v)
{
    try
    {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    }
    catch (const std::exception&)
    {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long long to_int(const std::string& key, const std::string& v)
{
    try
    {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return i;
    }
    catch (const std::exception&)
    {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

} // namespace detail

/// Parses `key = value` lines ('#' starts a comment). Lists are comma separated.
inline ExperimentConfig parse_config(std::istream& in)
{
    using namespace detail;
    ExperimentConfig c;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "n_tx")
            c.n_tx = static_cast<int>(to_int(key, val));
        else if (key == "n_b")
            c.n_b = static_cast<int>(to_int(key, val));
        else if (key == "n_e")
            c.n_e = static_cast<int>(to_int(key, val));
        else if (key == "M" || key == "order")
            c.order = static_cast<int>(to_int(key, val));
        else if (key == "scheme")
        {
            if (val == "PSK" || val == "psk")
                c.scheme = Scheme::Psk;
            else if (val == "QAM" || val == "qam")
                c.scheme = Scheme::Qam;
            else
                throw ConfigError("scheme must be PSK or QAM");
        }
        else if (key == "snr_db_grid")
        {
            c.snr_db_grid.clear();
            for (const auto& s : split_list(val))
                c.snr_db_grid.push_back(to_double(key, s));
        }
        else if (key == "n_channels")
            c.n_channels = static_cast<int>(to_int(key, val));
        else if (key == "n_samp")
            c.n_samp = static_cast<int>(to_int(key, val));
        else if (key == "power_split")
            c.power_split = to_double(key, val);
        else if (key == "methods")
        {
            c.methods.clear();
            for (const auto& s : split_list(val))
                c.methods.push_back(method_from_string(s));
        }
        else if (key == "seed")
            c.seed = static_cast<std::uint64_t>(to_int(key, val));
        else if (key == "gd.step_init")
            c.gd.step_init = to_double(key, val);
        else if (key == "gd.step_min")
            c.gd.step_min = to_double(key, val);
        else if (key == "gd.max_iters")
            c.gd.max_iters = static_cast<int>(to_int(key, val));
        else if (key == "gd.tol")
            c.gd.tol = to_double(key, val);
        else if (key == "sca.tol")
            c.sca.tol = to_double(key, val);
        else if (key == "sca.max_outer")
            c.sca.max_outer = static_cast<int>(to_int(key, val));
        else if (key == "sca.inner_tol")
            c.sca.inner_tol = to_double(key, val);
        else if (key == "sca.inner_max")
            c.sca.inner_max = static_cast<int>(to_int(key, val));
        else if (key == "sca.rank_tol")
            c.sca.rank_tol = to_double(key, val);
        else if (key == "sca.n_randomizations")
            c.sca.n_randomizations = static_cast<int>(to_int(key, val));
        else if (key == "eve_equals_bob")
            c.eve_equals_bob = to_bool(key, val);
        else if (key == "iters_snr_db")
            c.iters_snr_db = to_double(key, val);
        else if (key == "threads")
            c.threads = static_cast<int>(to_int(key, val));
        else if (key == "flops.n_tx_grid")
        {
            c.flops_n_tx_grid.clear();
            for (const auto& s : split_list(val))
                c.flops_n_tx_grid.push_back(static_cast<int>(to_int(key, s)));
        }
        else if (key == "flops.d1")
            c.flops_inputs.d1 = static_cast<int>(to_int(key, val));
        else if (key == "flops.d2")
            c.flops_inputs.d2 = static_cast<int>(to_int(key, val));
        else if (key == "flops.d3")
            c.flops_inputs.d3 = static_cast<int>(to_int(key, val));
        else if (key == "flops.solver_accuracy")
            c.flops_inputs.solver_accuracy = to_double(key, val);
        else
            throw ConfigError("unknown config key '" + key + "'");
    }
    // the complexity study follows the link dimensions unless set otherwise
    c.flops_inputs.n_b = c.n_b;
    c.flops_inputs.n_e = c.n_e;
    c.flops_inputs.order = c.order;
    c.flops_inputs.n_samp = c.n_samp;
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

namespace stream
{
inline constexpr std::uint64_t kChannel = 1;
inline constexpr std::uint64_t kSrGd = 2;
inline constexpr std::uint64_t kExtract = 3;
inline constexpr std::uint64_t kEval = 4;
} // namespace stream

inline PowerConfig powers_at(const ExperimentConfig& c, double snr_db)
{
    PowerConfig p;
    p.p_total = 1.0;
    p.p1 = c.power_split * p.p_total;
    p.p2 = p.p_total - p.p1;
    const double sigma2 = std::pow(10.0, -snr_db / 10.0);
    p.sigma2_b = sigma2;
    p.sigma2_e = sigma2;
    return p;
}

/// Channel realization of a trial; shared by every SNR point and method.
inline ChannelPair trial_channels(const ExperimentConfig& c, int trial)
{
    Rng rng(derive_seed(c.seed, static_cast<std::uint64_t>(trial), stream::kChannel));
    ChannelPair ch;
    ch.H = sample_channel(rng, c.n_b, c.n_tx);
    ch.G = c.eve_equals_bob ? ch.H : sample_channel(rng, c.n_e, c.n_tx);
    return ch;
}

inline QuadFormCache trial_cache(const ExperimentConfig& c, const ChannelPair& ch, double snr_db)
{
    const PowerConfig p = powers_at(c, snr_db);
    const SMCodebook cb = make_codebook(c.order, c.scheme, c.n_tx);
    ANProjector proj;
    if (p.p2 > 0.0)
        proj = an_projector(ch.H);
    else
        proj.t_an = CMat::Zero(c.n_tx, c.n_tx); // unused when p2 = 0
    return build_cache(ch, proj, p, cb);
}

struct MethodOutcome
{
    Method method = Method::None;
    double sr_mc = 0.0;        ///< clamped Monte-Carlo secrecy rate of the final precoder
    double sr_std_error = 0.0;
    double asr = 0.0;          ///< clamped approximated secrecy rate
    int iterations = 0;
    bool converged = true;
    CVec precoder;
};

/// Runs every configured method on one (trial, SNR point).
inline std::vector<MethodOutcome> evaluate_trial(const ExperimentConfig& c, int trial, int snr_index,
                                                 double snr_db)
{
    const ChannelPair ch = trial_channels(c, trial);
    const QuadFormCache cache = trial_cache(c, ch, snr_db);
    const CVec v0 = normalize_power(identity_precoder(c.n_tx), c.n_tx);
    const auto t = static_cast<std::uint64_t>(trial);
    const auto s = static_cast<std::uint64_t>(snr_index);
    auto sub_seed = [&](std::uint64_t tag) { return derive_seed(derive_seed(c.seed, t, tag), s); };

    std::vector<MethodOutcome> out;
    out.reserve(c.methods.size());
    for (Method m : c.methods)
    {
        MethodOutcome o;
        o.method = m;
        switch (m)
        {
        case Method::None: o.precoder = v0; break;
        case Method::MaxAsrGd:
        {
            const OptTrace tr = max_asr_gd(cache, v0, c.gd);
            o.precoder = tr.final_vector;
            o.iterations = tr.iterations;
            o.converged = tr.converged;
            break;
        }
        case Method::MaxSrGd:
        {
            Rng rng(sub_seed(stream::kSrGd));
            const OptTrace tr = max_sr_gd(cache, v0, c.gd, c.n_samp, rng);
            o.precoder = tr.final_vector;
            o.iterations = tr.iterations;
            o.converged = tr.converged;
            break;
        }
        case Method::MaxAsrSca:
        {
            const ScaResult res = max_asr_sca(cache, v0, c.sca);
            Rng rng(sub_seed(stream::kExtract));
            o.precoder = extract_precoder(cache, res.w_star, c.sca, rng);
            o.iterations = res.trace.iterations;
            o.converged = res.trace.converged;
            break;
        }
        }
        // every method is scored on the same evaluation noise
        Rng eval(sub_seed(stream::kEval));
        const SecrecyEstimate sr = secrecy_rate_mc(cache, o.precoder, c.n_samp, eval);
        o.sr_mc = sr.rate;
        o.sr_std_error = sr.std_error;
        o.asr = asr(cache, o.precoder, true);
        out.push_back(std::move(o));
    }
    return out;
}

/// Runs fn(i) for i in [0, n) on `threads` workers; callers store results by index.
template <class Fn>
void parallel_for(int n, int threads, Fn&& fn)
{
    int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, std::max(n, 1));
    if (workers <= 1)
    {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
    {
        pool.emplace_back([&, w] {
            try
            {
                for (int i = w; i < n; i += workers)
                    fn(i);
            }
            catch (...)
            {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

struct SrVsSnrRow
{
    double snr_db = 0.0;
    Method method = Method::None;
    double mean_sr_mc = 0.0;
    double mean_asr = 0.0;
    double std_err = 0.0; ///< standard error of mean_sr_mc across channels
};

/// All outcomes of one SNR point, indexed [trial][method].
inline std::vector<std::vector<MethodOutcome>> run_snr_point(const ExperimentConfig& c, int snr_index)
{
    std::vector<std::vector<MethodOutcome>> res(static_cast<std::size_t>(c.n_channels));
    const double snr = c.snr_db_grid[static_cast<std::size_t>(snr_index)];
    parallel_for(c.n_channels, c.threads,
                 [&](int t) { res[static_cast<std::size_t>(t)] = evaluate_trial(c, t, snr_index, snr); });
    return res;
}

inline std::vector<SrVsSnrRow> run_sr_vs_snr(const ExperimentConfig& c)
{
    c.validate();
    std::vector<SrVsSnrRow> rows;
    for (int si = 0; si < static_cast<int>(c.snr_db_grid.size()); ++si)
    {
        const auto res = run_snr_point(c, si);
        for (std::size_t mi = 0; mi < c.methods.size(); ++mi)
        {
            std::vector<double> sr;
            double asr_sum = 0.0;
            for (const auto& trial : res)
            {
                sr.push_back(trial[mi].sr_mc);
                asr_sum += trial[mi].asr;
            }
            const MIEstimate s = summarize(sr);
            rows.push_back({c.snr_db_grid[static_cast<std::size_t>(si)], c.methods[mi], s.value,
                            asr_sum / static_cast<double>(res.size()), s.std_error});
        }
    }
    return rows;
}

struct CdfRow
{
    double snr_db = 0.0;
    Method method = Method::None;
    int trial = 0;
    double sr = 0.0;
};

inline std::vector<CdfRow> run_cdf(const ExperimentConfig& c, const std::vector<double>& snr_db_points)
{
    c.validate();
    ExperimentConfig local = c;
    local.snr_db_grid = snr_db_points;
    std::vector<CdfRow> rows;
    for (int si = 0; si < static_cast<int>(snr_db_points.size()); ++si)
    {
        const auto res = run_snr_point(local, si);
        for (std::size_t mi = 0; mi < c.methods.size(); ++mi)
            for (int t = 0; t < c.n_channels; ++t)
                rows.push_back({snr_db_points[static_cast<std::size_t>(si)], c.methods[mi], t,
                                res[static_cast<std::size_t>(t)][mi].sr_mc});
    }
    return rows;
}

struct IterationRow
{
    Method method = Method::None;
    int trial = 0;
    int iterations = 0;
    bool converged = true;
};

/// Iteration counts of the iterative methods at config.iters_snr_db.
inline std::vector<IterationRow> run_iteration_pmf(const ExperimentConfig& c)
{
    c.validate();
    ExperimentConfig local = c;
    local.methods.clear();
    for (Method m : c.methods)
        if (m != Method::None)
            local.methods.push_back(m);
    if (local.methods.empty())
        throw ConfigError("iteration study needs at least one iterative method");
    local.snr_db_grid = {c.iters_snr_db};

    std::vector<std::vector<MethodOutcome>> res(static_cast<std::size_t>(c.n_channels));
    parallel_for(c.n_channels, c.threads, [&](int t) {
        const ChannelPair ch = trial_channels(local, t);
        const QuadFormCache cache = trial_cache(local, ch, local.iters_snr_db);
        const CVec v0 = normalize_power(identity_precoder(local.n_tx), local.n_tx);
        auto& row = res[static_cast<std::size_t>(t)];
        for (Method m : local.methods)
        {
            MethodOutcome o;
            o.method = m;
            OptTrace tr;
            if (m == Method::MaxAsrGd)
                tr = max_asr_gd(cache, v0, local.gd);
            else if (m == Method::MaxSrGd)
            {
                Rng rng(derive_seed(derive_seed(local.seed, static_cast<std::uint64_t>(t), stream::kSrGd), 0));
                tr = max_sr_gd(cache, v0, local.gd, local.n_samp, rng);
            }
            else
                tr = max_asr_sca(cache, v0, local.sca).trace;
            o.iterations = tr.iterations;
            o.converged = tr.converged;
            row.push_back(o);
        }
    });

    std::vector<IterationRow> rows;
    for (std::size_t mi = 0; mi < local.methods.size(); ++mi)
        for (int t = 0; t < c.n_channels; ++t)
        {
            const auto& o = res[static_cast<std::size_t>(t)][mi];
            rows.push_back({local.methods[mi], t, o.iterations, o.converged});
        }
    return rows;
}

struct ComplexityRow
{
    int n_tx = 0;
    Method method = Method::None;
    double flops = 0.0;
};

inline std::vector<ComplexityRow> run_complexity_curve(const std::vector<int>& n_tx_grid,
                                                       const flops::ComplexityInputs& inputs)
{
    if (n_tx_grid.empty())
        throw ConfigError("n_tx grid must not be empty");
    std::vector<ComplexityRow> rows;
    for (int nt : n_tx_grid)
    {
        flops::ComplexityInputs in = inputs;
        in.n_tx = nt;
        rows.push_back({nt, Method::MaxAsrGd, flops::count(flops::Method::MaxAsrGd, in)});
        rows.push_back({nt, Method::MaxAsrSca, flops::count(flops::Method::MaxAsrSca, in)});
        rows.push_back({nt, Method::MaxSrGd, flops::count(flops::Method::MaxSrGd, in)});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV and plot scripts
// ---------------------------------------------------------------------------

inline std::string format_real(double x)
{
    std::ostringstream os;
    os << std::setprecision(9) << x;
    return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<SrVsSnrRow>& rows)
{
    os << "snr_db,method,mean_sr_mc,mean_asr,std_err\n";
    for (const auto& r : rows)
        os << format_real(r.snr_db) << ',' << to_string(r.method) << ',' << format_real(r.mean_sr_mc) << ','
           << format_real(r.mean_asr) << ',' << format_real(r.std_err) << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<CdfRow>& rows)
{
    os << "snr_db,method,trial,sr\n";
    for (const auto& r : rows)
        os << format_real(r.snr_db) << ',' << to_string(r.method) << ',' << r.trial << ',' << format_real(r.sr)
           << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<IterationRow>& rows)
{
    os << "method,trial,iterations\n";
    for (const auto& r : rows)
        os << to_string(r.method) << ',' << r.trial << ',' << r.iterations << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<ComplexityRow>& rows)
{
    os << "n_tx,method,flops\n";
    for (const auto& r : rows)
        os << r.n_tx << ',' << to_string(r.method) << ',' << format_real(r.flops) << '\n';
}

/// matplotlib script that renders `csv` next to itself.
inline std::string plot_script(const std::string& study, const std::string& csv)
{
    std::ostringstream py;
    py << "# generated plotting script\n"
          "import csv, collections, os\n"
          "import matplotlib\n"
          "matplotlib.use('Agg')\n"
          "import matplotlib.pyplot as plt\n\n"
          "here = os.path.dirname(os.path.abspath(__file__))\n"
       << "rows = list(csv.DictReader(open(os.path.join(here, '" << csv << "'))))\n"
       << "series = collections.defaultdict(list)\n";
    if (study == "sr-vs-snr")
        py << "for r in rows:\n"
              "    series[r['method']].append((float(r['snr_db']), float(r['mean_sr_mc']), float(r['mean_asr'])))\n"
              "for m, pts in series.items():\n"
              "    pts.sort()\n"
              "    plt.plot([p[0] for p in pts], [p[1] for p in pts], 'o-', label=m + ' (Sim-SR)')\n"
              "    plt.plot([p[0] for p in pts], [p[2] for p in pts], '--', label=m + ' (ASR)')\n"
              "plt.xlabel('SNR (dB)'); plt.ylabel('SR (bits/channel use)')\n";
    else if (study == "cdf")
        py << "for r in rows:\n"
              "    series[(r['method'], r['snr_db'])].append(float(r['sr']))\n"
              "for (m, snr), xs in sorted(series.items()):\n"
              "    xs.sort()\n"
              "    plt.step(xs, [(i + 1) / len(xs) for i in range(len(xs))], where='post', label=f'{m} {snr} dB')\n"
              "plt.xlabel('SR (bits/channel use)'); plt.ylabel('CDF')\n";
    else if (study == "iters")
        py << "for r in rows:\n"
              "    series[r['method']].append(int(r['iterations']))\n"
              "for m, xs in series.items():\n"
              "    plt.hist(xs, bins=range(0, max(xs) + 2), density=True, alpha=0.5, label=m)\n"
              "plt.xlabel('iterations'); plt.ylabel('PMF')\n";
    else
        py << "for r in rows:\n"
              "    series[r['method']].append((int(r['n_tx']), float(r['flops'])))\n"
              "for m, pts in series.items():\n"
              "    pts.sort()\n"
              "    plt.semilogy([p[0] for p in pts], [p[1] for p in pts], 'o-', label=m)\n"
              "plt.xlabel('N_t'); plt.ylabel('FLOPs')\n";
    py << "plt.legend(); plt.grid(True, which='both', alpha=0.3)\n"
       << "plt.savefig(os.path.join(here, '" << csv.substr(0, csv.rfind('.')) << ".png'), dpi=150)\n";
    return py.str();
}

} // namespace ssm
