#include "firenet/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <nlohmann/json.hpp>

#include "firenet/numeric.hpp"
#include "firenet/reconstruct.hpp"

namespace firenet {

namespace {

using nlohmann::json;

constexpr double kProductCap = 1.0 - 1e-12;  // phi_n xi_k stays below this
constexpr double kLogClamp = 700.0;          // |ln psi|, |ln gamma| bound

// --- entry-level building blocks -----------------------------------------

struct EntryFuncs {
    // mean and edge probability of one entry plus log-derivatives, for
    // t = phi xi, u = psi gamma.
    static double mean(double t, double u) {
        double d = (1.0 - t) + t * u;
        return t * u / ((1.0 - t) * d);
    }
    static double ppos(double t, double u) {
        double d = (1.0 - t) + t * u;
        return t * u / d;
    }
    static double mean_forced(double t) { return 1.0 / (1.0 - t); }

    static double dmean_dlnt(double t, double u) {
        double d = (1.0 - t) + t * u;
        double g = 1.0 / ((1.0 - t) * d);
        double dgdt = (d - (1.0 - t) * (u - 1.0)) * g * g;
        return t * (u * g + t * u * dgdt);
    }
    static double dmean_dlnu(double t, double u) {
        double d = (1.0 - t) + t * u;
        return u * t / (d * d);
    }
    static double dppos_dlnt(double t, double u) {
        double d = (1.0 - t) + t * u;
        return t * u / (d * d);
    }
    static double dppos_dlnu(double t, double u) {
        double d = (1.0 - t) + t * u;
        return u * t * (1.0 - t) / (d * d);
    }
    static double dmean_forced_dlnt(double t) {
        double om = 1.0 - t;
        return t / (om * om);
    }
};

void require_positive_strengths(const StrengthSequences& s) {
    for (Eigen::Index n = 0; n < s.n_banks(); ++n)
        if (!(s.bank_sizes[n] > 0.0))
            throw InvalidStrengthError("bank " + std::to_string(n) +
                                       " has zero strength; remove zero nodes before fitting");
    for (Eigen::Index k = 0; k < s.n_assets(); ++k)
        if (!(s.asset_caps[k] > 0.0))
            throw InvalidStrengthError("asset " + std::to_string(k) +
                                       " has zero strength; remove zero nodes before fitting");
}

void check_sheet_against_strengths(const StrengthSequences& s, const BankSheet& sheet) {
    if (sheet.n_banks() != s.n_banks())
        throw InconsistentSheetError("sheet bank count does not match strengths");
    for (Eigen::Index n = 0; n < s.n_banks(); ++n) {
        double scale = std::max({std::abs(sheet.sizes[n]), std::abs(s.bank_sizes[n]), 1.0});
        if (std::abs(sheet.sizes[n] - s.bank_sizes[n]) > kSheetRelTol * scale)
            throw InconsistentSheetError("bank " + std::to_string(n) +
                                         " sheet size does not match strength sequence");
    }
}

// Uniform shock value and the common non-cash illiquidity; cash columns
// are those with l_k == 0.
struct UniformMarket {
    double eps;
    double ell;  // 0 when every asset is cash
    std::vector<Eigen::Index> non_cash;
};

UniformMarket uniform_market(const MarketParams& mkt) {
    UniformMarket um{};
    um.eps = mkt.shock[0];
    for (Eigen::Index k = 1; k < mkt.n_assets(); ++k)
        if (rel_diff(mkt.shock[k], um.eps) > 1e-12)
            throw NonUniformShockError("closed-form expectations need a uniform shock vector");
    um.ell = 0.0;
    for (Eigen::Index k = 0; k < mkt.n_assets(); ++k) {
        double l = mkt.illiquidity[k];
        if (l == 0.0) continue;
        if (um.ell == 0.0)
            um.ell = l;
        else if (rel_diff(l, um.ell) > 1e-12)
            throw NonUniformLiquidityError(
                "closed-form expectations need a single illiquidity value on non-cash assets");
        um.non_cash.push_back(k);
    }
    return um;
}

// --- residual bookkeeping --------------------------------------------------

struct Trace {
    std::vector<double> residuals;
    void push(double r) {
        if (residuals.size() < 4000) residuals.push_back(r);
    }
};

// --- BIPWCM ----------------------------------------------------------------

struct WcmState {
    Vector phi, xi;
    const StrengthSequences& s;
    int clip_events = 0;

    explicit WcmState(const StrengthSequences& seq) : s(seq) {
        double root = std::sqrt(seq.total);
        phi = seq.bank_sizes / root;
        xi = seq.asset_caps / root;
        double prod = phi.maxCoeff() * xi.maxCoeff();
        if (prod > 0.99) {
            double f = std::sqrt(0.99 / prod);
            phi *= f;
            xi *= f;
        }
    }

    double residual() const {
        double r = 0.0;
        for (Eigen::Index n = 0; n < phi.size(); ++n) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < xi.size(); ++k) {
                double t = phi[n] * xi[k];
                sum += t / (1.0 - t);
            }
            r = std::max(r, std::abs(sum - s.bank_sizes[n]) / s.bank_sizes[n]);
        }
        for (Eigen::Index k = 0; k < xi.size(); ++k) {
            double sum = 0.0;
            for (Eigen::Index n = 0; n < phi.size(); ++n) {
                double t = phi[n] * xi[k];
                sum += t / (1.0 - t);
            }
            r = std::max(r, std::abs(sum - s.asset_caps[k]) / s.asset_caps[k]);
        }
        return r;
    }
};

// Solves sum_k (z other_k) / (1 - z other_k) = target for z, given the
// opposite-side multipliers. Monotone in z; safeguarded Newton.
double solve_geometric_coordinate(double z, const Vector& other, double target, bool& clipped) {
    double omax = other.maxCoeff();
    double hi = kProductCap / omax;
    double lo = 0.0;
    z = std::clamp(z, hi * 1e-300, hi);
    for (int it = 0; it < 100; ++it) {
        double f = -target, fp = 0.0;
        for (Eigen::Index k = 0; k < other.size(); ++k) {
            double t = z * other[k];
            double om = 1.0 - t;
            f += t / om;
            fp += other[k] / (om * om);
        }
        if (std::abs(f) <= 1e-13 * std::max(1.0, target)) return z;
        if (f < 0.0)
            lo = z;
        else
            hi = z;
        double zn = z - f / fp;
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (zn == z) break;
        z = zn;
    }
    if (z >= kProductCap / omax * (1.0 - 1e-9)) clipped = true;
    return z;
}

// --- BIPECM ----------------------------------------------------------------

struct EcmState {
    Vector phi, xi, psi, gam;
    std::vector<bool> row_forced, col_forced;
    const StrengthSequences& s;
    const DegreeSequences& d;
    int clip_events = 0;

    EcmState(const StrengthSequences& seq, const DegreeSequences& deg) : s(seq), d(deg) {
        const auto n_banks = seq.n_banks();
        const auto n_assets = seq.n_assets();
        double root = std::sqrt(seq.total);
        phi = seq.bank_sizes / root;
        xi = seq.asset_caps / root;
        double prod = phi.maxCoeff() * xi.maxCoeff();
        if (prod > 0.99) {
            double f = std::sqrt(0.99 / prod);
            phi *= f;
            xi *= f;
        }
        psi.resize(n_banks);
        gam.resize(n_assets);
        row_forced.assign(static_cast<std::size_t>(n_banks), false);
        col_forced.assign(static_cast<std::size_t>(n_assets), false);
        for (Eigen::Index n = 0; n < n_banks; ++n) {
            row_forced[static_cast<std::size_t>(n)] = (deg.bank_degrees[n] == n_assets);
            psi[n] = static_cast<double>(deg.bank_degrees[n]) / static_cast<double>(n_assets);
        }
        for (Eigen::Index k = 0; k < n_assets; ++k) {
            col_forced[static_cast<std::size_t>(k)] = (deg.asset_degrees[k] == n_banks);
            gam[k] = static_cast<double>(deg.asset_degrees[k]) / static_cast<double>(n_banks);
        }
    }

    bool forced(Eigen::Index n, Eigen::Index k) const {
        return row_forced[static_cast<std::size_t>(n)] || col_forced[static_cast<std::size_t>(k)];
    }

    void node_sums(Eigen::Index n, double& strength, double& degree) const {
        strength = 0.0;
        degree = 0.0;
        for (Eigen::Index k = 0; k < xi.size(); ++k) {
            double t = phi[n] * xi[k];
            if (forced(n, k)) {
                strength += EntryFuncs::mean_forced(t);
                degree += 1.0;
            } else {
                double u = psi[n] * gam[k];
                strength += EntryFuncs::mean(t, u);
                degree += EntryFuncs::ppos(t, u);
            }
        }
    }

    void col_node_sums(Eigen::Index k, double& strength, double& degree) const {
        strength = 0.0;
        degree = 0.0;
        for (Eigen::Index n = 0; n < phi.size(); ++n) {
            double t = phi[n] * xi[k];
            if (forced(n, k)) {
                strength += EntryFuncs::mean_forced(t);
                degree += 1.0;
            } else {
                double u = psi[n] * gam[k];
                strength += EntryFuncs::mean(t, u);
                degree += EntryFuncs::ppos(t, u);
            }
        }
    }

    double residual() const {
        double r = 0.0;
        for (Eigen::Index n = 0; n < phi.size(); ++n) {
            double a, dd;
            node_sums(n, a, dd);
            r = std::max(r, std::abs(a - s.bank_sizes[n]) / s.bank_sizes[n]);
            r = std::max(r, std::abs(dd - d.bank_degrees[n]) / d.bank_degrees[n]);
        }
        for (Eigen::Index k = 0; k < xi.size(); ++k) {
            double c, dd;
            col_node_sums(k, c, dd);
            r = std::max(r, std::abs(c - s.asset_caps[k]) / s.asset_caps[k]);
            r = std::max(r, std::abs(dd - d.asset_degrees[k]) / d.asset_degrees[k]);
        }
        return r;
    }
};

// 2x2 damped Newton in (ln phi, ln psi) for one non-forced node. `others`
// supplies the opposite side; `forced_other` marks entries locked positive.
struct TwoByTwoTarget {
    double strength;
    double degree;
};

void solve_node_2x2(double& mult_t, double& mult_u, const Vector& other_t, const Vector& other_u,
                    const std::vector<bool>& forced_other, TwoByTwoTarget target, bool& clipped) {
    double omax = other_t.maxCoeff();
    double x = std::log(mult_t);
    double y = std::clamp(std::log(mult_u), -kLogClamp, kLogClamp);
    const double x_cap = std::log(kProductCap / omax);
    x = std::min(x, x_cap);

    auto eval = [&](double xv, double yv, double& f1, double& f2, double j[4]) {
        double pt = std::exp(xv), pu = std::exp(yv);
        f1 = -target.strength;
        f2 = -target.degree;
        j[0] = j[1] = j[2] = j[3] = 0.0;
        for (Eigen::Index k = 0; k < other_t.size(); ++k) {
            double t = pt * other_t[k];
            if (forced_other[static_cast<std::size_t>(k)]) {
                f1 += EntryFuncs::mean_forced(t);
                f2 += 1.0;
                j[0] += EntryFuncs::dmean_forced_dlnt(t);
            } else {
                double u = pu * other_u[k];
                f1 += EntryFuncs::mean(t, u);
                f2 += EntryFuncs::ppos(t, u);
                j[0] += EntryFuncs::dmean_dlnt(t, u);
                j[1] += EntryFuncs::dmean_dlnu(t, u);
                j[2] += EntryFuncs::dppos_dlnt(t, u);
                j[3] += EntryFuncs::dppos_dlnu(t, u);
            }
        }
    };

    double f1, f2, j[4];
    eval(x, y, f1, f2, j);
    double norm = std::hypot(f1 / std::max(1.0, target.strength),
                             f2 / std::max(1.0, target.degree));
    for (int it = 0; it < 40 && norm > 1e-13; ++it) {
        double det = j[0] * j[3] - j[1] * j[2];
        double dx, dy;
        if (std::abs(det) > 1e-300) {
            dx = (-f1 * j[3] + f2 * j[1]) / det;
            dy = (-f2 * j[0] + f1 * j[2]) / det;
        } else {
            dx = -f1 / std::max(j[0], 1e-300);
            dy = -f2 / std::max(j[3], 1e-300);
        }
        // Trust-region style clamp keeps the log step tame.
        double scale = std::max({1.0, std::abs(dx) / 4.0, std::abs(dy) / 4.0});
        dx /= scale;
        dy /= scale;
        bool improved = false;
        for (double alpha = 1.0; alpha >= 1.0 / 64.0; alpha *= 0.5) {
            double xn = std::min(x + alpha * dx, x_cap);
            double yn = std::clamp(y + alpha * dy, -kLogClamp, kLogClamp);
            double g1, g2, jn[4];
            eval(xn, yn, g1, g2, jn);
            double nn = std::hypot(g1 / std::max(1.0, target.strength),
                                   g2 / std::max(1.0, target.degree));
            if (nn < norm) {
                x = xn;
                y = yn;
                f1 = g1;
                f2 = g2;
                std::memcpy(j, jn, sizeof(jn));
                norm = nn;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (x >= x_cap - 1e-9) clipped = true;
    mult_t = std::exp(x);
    mult_u = std::exp(y);
}

// Solves sum_k 1/(1 - z other_k) = target for a forced node.
double solve_forced_coordinate(double z, const Vector& other, double target, bool& clipped,
                               Eigen::Index node, const std::vector<double>& trace) {
    double count = static_cast<double>(other.size());
    if (target < count)
        throw ConvergenceError("forced-positive node " + std::to_string(node) +
                                   " has strength below its edge count; system unsolvable",
                               trace);
    double omax = other.maxCoeff();
    double hi = kProductCap / omax;
    double lo = 0.0;
    z = std::clamp(z, 0.0, hi);
    for (int it = 0; it < 100; ++it) {
        double f = -target, fp = 0.0;
        for (Eigen::Index k = 0; k < other.size(); ++k) {
            double om = 1.0 - z * other[k];
            f += 1.0 / om;
            fp += other[k] / (om * om);
        }
        if (std::abs(f) <= 1e-13 * std::max(1.0, target)) return z;
        if (f < 0.0)
            lo = z;
        else
            hi = z;
        double zn = z - f / fp;
        if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
        if (zn == z) break;
        z = zn;
    }
    if (z >= kProductCap / omax * (1.0 - 1e-9)) clipped = true;
    return z;
}

double log_blend(double old_value, double solved, double damping) {
    if (!(old_value > 0.0)) return solved;
    if (!(solved > 0.0)) return solved;
    return std::exp((1.0 - damping) * std::log(old_value) + damping * std::log(solved));
}

// --- Levenberg-Marquardt fallback on the full multiplier system ------------

// Generic: residual/Jacobian supplied by the caller over log-variables.
template <typename EvalFn, typename ApplyFn>
bool lm_polish(Eigen::VectorXd& v, EvalFn eval, ApplyFn apply_clamps, int max_rounds,
               double target_residual) {
    Eigen::VectorXd f;
    Eigen::MatrixXd jac;
    eval(v, f, &jac);
    double norm = f.lpNorm<Eigen::Infinity>();
    double mu = 1e-4;
    bool improved_any = false;
    for (int round = 0; round < max_rounds && norm > target_residual; ++round) {
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        Eigen::VectorXd jtf = jac.transpose() * f;
        double diag = std::max(jtj.diagonal().maxCoeff(), 1e-12);
        bool stepped = false;
        for (int tries = 0; tries < 8; ++tries) {
            Eigen::MatrixXd m = jtj + (mu * diag) * Eigen::MatrixXd::Identity(v.size(), v.size());
            Eigen::VectorXd delta = m.ldlt().solve(-jtf);
            Eigen::VectorXd vn = v + delta;
            apply_clamps(vn);
            Eigen::VectorXd fn;
            eval(vn, fn, nullptr);
            if (fn.lpNorm<Eigen::Infinity>() < norm) {
                v = vn;
                eval(v, f, &jac);
                norm = f.lpNorm<Eigen::Infinity>();
                mu = std::max(mu * 0.3, 1e-12);
                stepped = true;
                improved_any = true;
                break;
            }
            mu *= 10.0;
        }
        if (!stepped) break;
    }
    return improved_any;
}

std::string hex64(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t hash_vector(std::uint64_t h, const Vector& v) {
    return v.size() ? fnv1a(h, v.data(), static_cast<std::size_t>(v.size()) * sizeof(double)) : h;
}

}  // namespace

// --- EntryDistribution -------------------------------------------------------

double EntryDistribution::pmf(long long x) const {
    if (x < 0) return 0.0;
    if (forced) {
        if (x == 0) return 0.0;
        return (1.0 - t) * std::pow(t, static_cast<double>(x - 1));
    }
    if (u == 1.0) return (1.0 - t) * std::pow(t, static_cast<double>(x));
    double d = (1.0 - t) + t * u;
    if (x == 0) return (1.0 - t) / d;
    return (1.0 - t) * std::pow(t, static_cast<double>(x)) * u / d;
}

double EntryDistribution::mean() const {
    if (forced) return 1.0 / (1.0 - t);
    if (kind == EnsembleKind::MECAPM) return exact_mean;
    if (u == 1.0) return t / (1.0 - t);
    return EntryFuncs::mean(t, u);
}

double EntryDistribution::variance() const {
    if (forced || u == 1.0) {
        double om = 1.0 - t;
        return t / (om * om);
    }
    double d = (1.0 - t) + t * u;
    double om = 1.0 - t;
    double second = u * t * (1.0 + t) / (d * om * om);
    double m = t * u / (om * d);
    return second - m * m;
}

double EntryDistribution::prob_positive() const {
    if (forced) return 1.0;
    if (u == 1.0) return t;
    return EntryFuncs::ppos(t, u);
}

// --- kind names ---------------------------------------------------------------

std::string to_string(EnsembleKind kind) {
    switch (kind) {
        case EnsembleKind::MECAPM: return "mecapm";
        case EnsembleKind::BIPWCM: return "bipwcm";
        case EnsembleKind::BIPECM: return "bipecm";
    }
    return "?";
}

EnsembleKind ensemble_kind_from_string(const std::string& name) {
    if (name == "mecapm") return EnsembleKind::MECAPM;
    if (name == "bipwcm") return EnsembleKind::BIPWCM;
    if (name == "bipecm") return EnsembleKind::BIPECM;
    throw ValidationError("unknown ensemble kind '" + name + "'");
}

// --- fitting -------------------------------------------------------------------

EnsembleParams fit_mecapm(const StrengthSequences& s) {
    EnsembleParams p{EnsembleKind::MECAPM,
                     capm_matrix(s).entries(),
                     {},
                     {},
                     {},
                     {},
                     {},
                     {},
                     std::vector<bool>(static_cast<std::size_t>(s.n_banks()), true),
                     std::vector<bool>(static_cast<std::size_t>(s.n_assets()), true),
                     0.0,
                     s,
                     std::nullopt};
    return p;
}

EnsembleParams fit_bipwcm(const StrengthSequences& s, const FitOptions& opts) {
    require_positive_strengths(s);
    const double tol = opts.tol > 0.0 ? opts.tol : 1e-8;

    WcmState st(s);
    Trace trace;
    double best = std::numeric_limits<double>::infinity();
    int since_progress = 0;
    double residual = st.residual();

    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        bool clipped = false;
        for (Eigen::Index n = 0; n < st.phi.size(); ++n) {
            double solved = solve_geometric_coordinate(st.phi[n], st.xi, s.bank_sizes[n], clipped);
            st.phi[n] = log_blend(st.phi[n], solved, opts.damping);
        }
        for (Eigen::Index k = 0; k < st.xi.size(); ++k) {
            double solved = solve_geometric_coordinate(st.xi[k], st.phi, s.asset_caps[k], clipped);
            st.xi[k] = log_blend(st.xi[k], solved, opts.damping);
        }
        if (clipped) ++st.clip_events;

        residual = st.residual();
        trace.push(residual);
        if (residual <= tol) {
            EnsembleParams p{EnsembleKind::BIPWCM,
                             {},
                             std::move(st.phi),
                             std::move(st.xi),
                             {},
                             {},
                             {},
                             {},
                             std::vector<bool>(static_cast<std::size_t>(s.n_banks()), true),
                             std::vector<bool>(static_cast<std::size_t>(s.n_assets()), true),
                             residual,
                             s,
                             std::nullopt};
            p.sweeps = sweep;
            p.clip_events = st.clip_events;
            return p;
        }

        if (residual < best * (1.0 - 1e-3)) {
            best = residual;
            since_progress = 0;
        } else if (++since_progress >= 50) {
            // Coordinate iteration is crawling; polish with LM on the full
            // system, then resume.
            since_progress = 0;
            const auto nb = s.n_banks(), na = s.n_assets();
            Eigen::VectorXd v(nb + na);
            for (Eigen::Index n = 0; n < nb; ++n) v[n] = std::log(st.phi[n]);
            for (Eigen::Index k = 0; k < na; ++k) v[nb + k] = std::log(st.xi[k]);
            auto eval = [&](const Eigen::VectorXd& vv, Eigen::VectorXd& f, Eigen::MatrixXd* jac) {
                f.resize(nb + na);
                if (jac) jac->setZero(nb + na, nb + na);
                for (Eigen::Index n = 0; n < nb; ++n) f[n] = -1.0;
                for (Eigen::Index k = 0; k < na; ++k) f[nb + k] = -1.0;
                for (Eigen::Index n = 0; n < nb; ++n)
                    for (Eigen::Index k = 0; k < na; ++k) {
                        double t = std::exp(vv[n] + vv[nb + k]);
                        t = std::min(t, kProductCap);
                        double om = 1.0 - t;
                        double m = t / om;
                        f[n] += m / s.bank_sizes[n];
                        f[nb + k] += m / s.asset_caps[k];
                        if (jac) {
                            double dm = t / (om * om);
                            (*jac)(n, n) += dm / s.bank_sizes[n];
                            (*jac)(n, nb + k) += dm / s.bank_sizes[n];
                            (*jac)(nb + k, nb + k) += dm / s.asset_caps[k];
                            (*jac)(nb + k, n) += dm / s.asset_caps[k];
                        }
                    }
            };
            auto clamp = [&](Eigen::VectorXd& vv) {
                double max_phi = vv.head(nb).maxCoeff();
                double max_xi = vv.tail(na).maxCoeff();
                double excess = max_phi + max_xi - std::log(kProductCap);
                if (excess > 0.0) {
                    for (Eigen::Index n = 0; n < nb; ++n) vv[n] -= excess / 2.0;
                    for (Eigen::Index k = 0; k < na; ++k) vv[nb + k] -= excess / 2.0;
                    ++st.clip_events;
                }
            };
            lm_polish(v, eval, clamp, 60, tol * 0.5);
            for (Eigen::Index n = 0; n < nb; ++n) st.phi[n] = std::exp(v[n]);
            for (Eigen::Index k = 0; k < na; ++k) st.xi[k] = std::exp(v[nb + k]);
            best = std::min(best, st.residual());
        }
    }
    throw ConvergenceError("BIPWCM fit residual " + std::to_string(residual) +
                               " after " + std::to_string(opts.max_iter) + " sweeps",
                           trace.residuals);
}

EnsembleParams fit_bipecm(const StrengthSequences& s, const DegreeSequences& d,
                          const FitOptions& opts) {
    require_positive_strengths(s);
    if (d.n_banks() != s.n_banks() || d.n_assets() != s.n_assets())
        throw ValidationError("degree sequences do not match strength dimensions");
    for (Eigen::Index n = 0; n < d.n_banks(); ++n)
        if (d.bank_degrees[n] < 1 || d.bank_degrees[n] > d.n_assets())
            throw InfeasibleDegreesError("bank degree " + std::to_string(n) + " outside [1, K]");
    for (Eigen::Index k = 0; k < d.n_assets(); ++k)
        if (d.asset_degrees[k] < 1 || d.asset_degrees[k] > d.n_banks())
            throw InfeasibleDegreesError("asset degree " + std::to_string(k) + " outside [1, N]");

    const double tol = opts.tol > 0.0 ? opts.tol : 1e-6;
    EcmState st(s, d);

    // A forced column puts an edge in every row (and vice versa); degrees
    // below that floor cannot be met.
    {
        Eigen::Index forced_cols = 0, forced_rows = 0;
        for (bool f : st.col_forced) forced_cols += f;
        for (bool f : st.row_forced) forced_rows += f;
        for (Eigen::Index n = 0; n < d.n_banks(); ++n)
            if (d.bank_degrees[n] < forced_cols)
                throw InfeasibleDegreesError(
                    "bank " + std::to_string(n) + " has degree " +
                    std::to_string(d.bank_degrees[n]) + " but " + std::to_string(forced_cols) +
                    " assets are held by every bank");
        for (Eigen::Index k = 0; k < d.n_assets(); ++k)
            if (d.asset_degrees[k] < forced_rows)
                throw InfeasibleDegreesError(
                    "asset " + std::to_string(k) + " has degree " +
                    std::to_string(d.asset_degrees[k]) + " but " + std::to_string(forced_rows) +
                    " banks hold every asset");
    }

    Trace trace;
    double best = std::numeric_limits<double>::infinity();
    int since_progress = 0;
    double residual = st.residual();

    const auto nb = s.n_banks(), na = s.n_assets();

    for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
        bool clipped = false;
        for (Eigen::Index n = 0; n < nb; ++n) {
            if (st.row_forced[static_cast<std::size_t>(n)]) {
                double solved = solve_forced_coordinate(st.phi[n], st.xi, s.bank_sizes[n], clipped,
                                                        n, trace.residuals);
                st.phi[n] = log_blend(st.phi[n], solved, opts.damping);
            } else {
                double mt = st.phi[n], mu = st.psi[n];
                solve_node_2x2(mt, mu, st.xi, st.gam, st.col_forced,
                               {s.bank_sizes[n], static_cast<double>(d.bank_degrees[n])}, clipped);
                st.phi[n] = log_blend(st.phi[n], mt, opts.damping);
                st.psi[n] = log_blend(st.psi[n], mu, opts.damping);
            }
        }
        for (Eigen::Index k = 0; k < na; ++k) {
            if (st.col_forced[static_cast<std::size_t>(k)]) {
                double solved = solve_forced_coordinate(st.xi[k], st.phi, s.asset_caps[k], clipped,
                                                        k, trace.residuals);
                st.xi[k] = log_blend(st.xi[k], solved, opts.damping);
            } else {
                double mt = st.xi[k], mu = st.gam[k];
                solve_node_2x2(mt, mu, st.phi, st.psi, st.row_forced,
                               {s.asset_caps[k], static_cast<double>(d.asset_degrees[k])}, clipped);
                st.xi[k] = log_blend(st.xi[k], mt, opts.damping);
                st.gam[k] = log_blend(st.gam[k], mu, opts.damping);
            }
        }
        if (clipped) ++st.clip_events;

        residual = st.residual();
        trace.push(residual);
        if (residual <= tol) {
            EnsembleParams p{EnsembleKind::BIPECM,
                             {},
                             std::move(st.phi),
                             std::move(st.xi),
                             std::move(st.psi),
                             std::move(st.gam),
                             std::move(st.row_forced),
                             std::move(st.col_forced),
                             std::vector<bool>(static_cast<std::size_t>(nb), true),
                             std::vector<bool>(static_cast<std::size_t>(na), true),
                             residual,
                             s,
                             d};
            p.sweeps = sweep;
            p.clip_events = st.clip_events;
            return p;
        }

        if (residual < best * (1.0 - 1e-3)) {
            best = residual;
            since_progress = 0;
        } else if (++since_progress >= 50) {
            since_progress = 0;
            // Variable layout: ln phi | ln psi (free rows) | ln xi | ln gamma
            // (free cols). Forced nodes keep only their strength multiplier.
            std::vector<Eigen::Index> free_rows, free_cols;
            for (Eigen::Index n = 0; n < nb; ++n)
                if (!st.row_forced[static_cast<std::size_t>(n)]) free_rows.push_back(n);
            for (Eigen::Index k = 0; k < na; ++k)
                if (!st.col_forced[static_cast<std::size_t>(k)]) free_cols.push_back(k);
            const auto nfr = static_cast<Eigen::Index>(free_rows.size());
            const auto nfc = static_cast<Eigen::Index>(free_cols.size());
            const Eigen::Index off_psi = nb, off_xi = nb + nfr, off_gam = nb + nfr + na;
            Eigen::VectorXd v(nb + nfr + na + nfc);
            for (Eigen::Index n = 0; n < nb; ++n) v[n] = std::log(st.phi[n]);
            for (Eigen::Index i = 0; i < nfr; ++i)
                v[off_psi + i] = std::clamp(std::log(st.psi[free_rows[static_cast<std::size_t>(i)]]),
                                            -kLogClamp, kLogClamp);
            for (Eigen::Index k = 0; k < na; ++k) v[off_xi + k] = std::log(st.xi[k]);
            for (Eigen::Index i = 0; i < nfc; ++i)
                v[off_gam + i] = std::clamp(std::log(st.gam[free_cols[static_cast<std::size_t>(i)]]),
                                            -kLogClamp, kLogClamp);
            std::vector<Eigen::Index> row_to_free(static_cast<std::size_t>(nb), -1),
                col_to_free(static_cast<std::size_t>(na), -1);
            for (Eigen::Index i = 0; i < nfr; ++i)
                row_to_free[static_cast<std::size_t>(free_rows[static_cast<std::size_t>(i)])] = i;
            for (Eigen::Index i = 0; i < nfc; ++i)
                col_to_free[static_cast<std::size_t>(free_cols[static_cast<std::size_t>(i)])] = i;

            // Residual layout: strengths (rows) | degrees (free rows) |
            // strengths (cols) | degrees (free cols); all relative.
            const Eigen::Index rows_f = nb + nfr + na + nfc;
            auto eval = [&](const Eigen::VectorXd& vv, Eigen::VectorXd& f, Eigen::MatrixXd* jac) {
                f.setZero(rows_f);
                if (jac) jac->setZero(rows_f, vv.size());
                for (Eigen::Index n = 0; n < nb; ++n) f[n] = -1.0;
                for (Eigen::Index i = 0; i < nfr; ++i)
                    f[nb + i] = -1.0;
                for (Eigen::Index k = 0; k < na; ++k) f[nb + nfr + k] = -1.0;
                for (Eigen::Index i = 0; i < nfc; ++i) f[nb + nfr + na + i] = -1.0;
                for (Eigen::Index n = 0; n < nb; ++n) {
                    bool rf = st.row_forced[static_cast<std::size_t>(n)];
                    for (Eigen::Index k = 0; k < na; ++k) {
                        bool cf = st.col_forced[static_cast<std::size_t>(k)];
                        double t = std::min(std::exp(vv[n] + vv[off_xi + k]), kProductCap);
                        double an = s.bank_sizes[n], ck = s.asset_caps[k];
                        double dn = d.bank_degrees[n], dk = d.asset_degrees[k];
                        if (rf || cf) {
                            double m = EntryFuncs::mean_forced(t);
                            double dm = EntryFuncs::dmean_forced_dlnt(t);
                            f[n] += m / an;
                            f[nb + nfr + k] += m / ck;
                            if (!rf) f[nb + row_to_free[static_cast<std::size_t>(n)]] += 1.0 / dn;
                            if (!cf)
                                f[nb + nfr + na + col_to_free[static_cast<std::size_t>(k)]] +=
                                    1.0 / dk;
                            if (jac) {
                                (*jac)(n, n) += dm / an;
                                (*jac)(n, off_xi + k) += dm / an;
                                (*jac)(nb + nfr + k, n) += dm / ck;
                                (*jac)(nb + nfr + k, off_xi + k) += dm / ck;
                            }
                        } else {
                            double u = std::exp(vv[off_psi + row_to_free[static_cast<std::size_t>(n)]] +
                                                vv[off_gam + col_to_free[static_cast<std::size_t>(k)]]);
                            double m = EntryFuncs::mean(t, u);
                            double pp = EntryFuncs::ppos(t, u);
                            Eigen::Index rdeg = nb + row_to_free[static_cast<std::size_t>(n)];
                            Eigen::Index cdeg = nb + nfr + na + col_to_free[static_cast<std::size_t>(k)];
                            f[n] += m / an;
                            f[rdeg] += pp / dn;
                            f[nb + nfr + k] += m / ck;
                            f[cdeg] += pp / dk;
                            if (jac) {
                                double dmt = EntryFuncs::dmean_dlnt(t, u);
                                double dmu = EntryFuncs::dmean_dlnu(t, u);
                                double dpt = EntryFuncs::dppos_dlnt(t, u);
                                double dpu = EntryFuncs::dppos_dlnu(t, u);
                                Eigen::Index vpsi = off_psi + row_to_free[static_cast<std::size_t>(n)];
                                Eigen::Index vgam = off_gam + col_to_free[static_cast<std::size_t>(k)];
                                (*jac)(n, n) += dmt / an;
                                (*jac)(n, off_xi + k) += dmt / an;
                                (*jac)(n, vpsi) += dmu / an;
                                (*jac)(n, vgam) += dmu / an;
                                (*jac)(rdeg, n) += dpt / dn;
                                (*jac)(rdeg, off_xi + k) += dpt / dn;
                                (*jac)(rdeg, vpsi) += dpu / dn;
                                (*jac)(rdeg, vgam) += dpu / dn;
                                (*jac)(nb + nfr + k, n) += dmt / ck;
                                (*jac)(nb + nfr + k, off_xi + k) += dmt / ck;
                                (*jac)(nb + nfr + k, vpsi) += dmu / ck;
                                (*jac)(nb + nfr + k, vgam) += dmu / ck;
                                (*jac)(cdeg, n) += dpt / dk;
                                (*jac)(cdeg, off_xi + k) += dpt / dk;
                                (*jac)(cdeg, vpsi) += dpu / dk;
                                (*jac)(cdeg, vgam) += dpu / dk;
                            }
                        }
                    }
                }
            };
            auto clamp = [&](Eigen::VectorXd& vv) {
                double max_phi = vv.head(nb).maxCoeff();
                double max_xi = vv.segment(off_xi, na).maxCoeff();
                double excess = max_phi + max_xi - std::log(kProductCap);
                if (excess > 0.0) {
                    vv.head(nb).array() -= excess / 2.0;
                    vv.segment(off_xi, na).array() -= excess / 2.0;
                    ++st.clip_events;
                }
                for (Eigen::Index i = 0; i < nfr; ++i)
                    vv[off_psi + i] = std::clamp(vv[off_psi + i], -kLogClamp, kLogClamp);
                for (Eigen::Index i = 0; i < nfc; ++i)
                    vv[off_gam + i] = std::clamp(vv[off_gam + i], -kLogClamp, kLogClamp);
            };
            lm_polish(v, eval, clamp, 60, tol * 0.5);
            for (Eigen::Index n = 0; n < nb; ++n) st.phi[n] = std::exp(v[n]);
            for (Eigen::Index i = 0; i < nfr; ++i)
                st.psi[free_rows[static_cast<std::size_t>(i)]] = std::exp(v[off_psi + i]);
            for (Eigen::Index k = 0; k < na; ++k) st.xi[k] = std::exp(v[off_xi + k]);
            for (Eigen::Index i = 0; i < nfc; ++i)
                st.gam[free_cols[static_cast<std::size_t>(i)]] = std::exp(v[off_gam + i]);
            best = std::min(best, st.residual());
        }
    }
    throw ConvergenceError("BIPECM fit residual " + std::to_string(residual) +
                               " after " + std::to_string(opts.max_iter) + " sweeps",
                           trace.residuals);
}

EnsembleParams fit_ensemble(EnsembleKind kind, const StrengthSequences& s,
                            const std::optional<DegreeSequences>& d, const FitOptions& opts) {
    if (kind == EnsembleKind::MECAPM) return fit_mecapm(s);
    if (kind == EnsembleKind::BIPECM && !d)
        throw ValidationError("BIPECM requires degree sequences");

    const auto nb = s.n_banks(), na = s.n_assets();
    std::vector<bool> row_active(static_cast<std::size_t>(nb)), col_active(static_cast<std::size_t>(na));
    std::vector<Eigen::Index> rows, cols;
    for (Eigen::Index n = 0; n < nb; ++n) {
        bool active = s.bank_sizes[n] > 0.0;
        if (d) {
            if (!active && (*d).bank_degrees[n] > 0)
                throw InfeasibleDegreesError("bank " + std::to_string(n) +
                                             " has positive degree but zero strength");
            if (active && (*d).bank_degrees[n] == 0)
                throw InfeasibleDegreesError("bank " + std::to_string(n) +
                                             " has positive strength but zero degree");
        }
        row_active[static_cast<std::size_t>(n)] = active;
        if (active) rows.push_back(n);
    }
    for (Eigen::Index k = 0; k < na; ++k) {
        bool active = s.asset_caps[k] > 0.0;
        if (d) {
            if (!active && (*d).asset_degrees[k] > 0)
                throw InfeasibleDegreesError("asset " + std::to_string(k) +
                                             " has positive degree but zero strength");
            if (active && (*d).asset_degrees[k] == 0)
                throw InfeasibleDegreesError("asset " + std::to_string(k) +
                                             " has positive strength but zero degree");
        }
        col_active[static_cast<std::size_t>(k)] = active;
        if (active) cols.push_back(k);
    }

    if (rows.size() == static_cast<std::size_t>(nb) && cols.size() == static_cast<std::size_t>(na)) {
        return kind == EnsembleKind::BIPWCM ? fit_bipwcm(s, opts) : fit_bipecm(s, *d, opts);
    }

    Vector a(static_cast<Eigen::Index>(rows.size())), c(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) a[static_cast<Eigen::Index>(i)] = s.bank_sizes[rows[i]];
    for (std::size_t i = 0; i < cols.size(); ++i) c[static_cast<Eigen::Index>(i)] = s.asset_caps[cols[i]];
    StrengthSequences reduced(std::move(a), std::move(c));

    EnsembleParams sub = [&] {
        if (kind == EnsembleKind::BIPWCM) return fit_bipwcm(reduced, opts);
        IntVector dr(static_cast<Eigen::Index>(rows.size())), dc(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            dr[static_cast<Eigen::Index>(i)] = (*d).bank_degrees[rows[i]];
        for (std::size_t i = 0; i < cols.size(); ++i)
            dc[static_cast<Eigen::Index>(i)] = (*d).asset_degrees[cols[i]];
        // Degrees relative to the reduced frame: a full row means holding
        // every *active* asset.
        DegreeSequences dd(std::move(dr), std::move(dc));
        return fit_bipecm(reduced, dd, opts);
    }();

    // Re-embed into the original frame; inactive multipliers are place-holders.
    EnsembleParams p{kind,
                     {},
                     Vector::Zero(nb),
                     Vector::Zero(na),
                     {},
                     {},
                     {},
                     {},
                     row_active,
                     col_active,
                     sub.fit_residual,
                     s,
                     d};
    p.sweeps = sub.sweeps;
    p.clip_events = sub.clip_events;
    if (kind == EnsembleKind::BIPECM) {
        p.psi = Vector::Zero(nb);
        p.gamma = Vector::Zero(na);
        p.row_forced.assign(static_cast<std::size_t>(nb), false);
        p.col_forced.assign(static_cast<std::size_t>(na), false);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        p.phi[rows[i]] = sub.phi[static_cast<Eigen::Index>(i)];
        if (kind == EnsembleKind::BIPECM) {
            p.psi[rows[i]] = sub.psi[static_cast<Eigen::Index>(i)];
            p.row_forced[static_cast<std::size_t>(rows[i])] = sub.row_forced[i];
        }
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
        p.xi[cols[i]] = sub.xi[static_cast<Eigen::Index>(i)];
        if (kind == EnsembleKind::BIPECM) {
            p.gamma[cols[i]] = sub.gamma[static_cast<Eigen::Index>(i)];
            p.col_forced[static_cast<std::size_t>(cols[i])] = sub.col_forced[i];
        }
    }
    return p;
}

EntryDistribution entry_distribution(const EnsembleParams& p, Eigen::Index n, Eigen::Index k) {
    if (n < 0 || n >= p.n_banks() || k < 0 || k >= p.n_assets())
        throw IndexError("entry (" + std::to_string(n) + "," + std::to_string(k) +
                         ") outside " + std::to_string(p.n_banks()) + "x" +
                         std::to_string(p.n_assets()));
    EntryDistribution dist;
    dist.kind = p.kind;
    if (p.kind == EnsembleKind::MECAPM) {
        double mu = p.mecapm_means(n, k);
        dist.exact_mean = mu;
        dist.t = mu / (1.0 + mu);
        dist.u = 1.0;
        return dist;
    }
    bool active = p.row_active[static_cast<std::size_t>(n)] && p.col_active[static_cast<std::size_t>(k)];
    if (!active) return dist;  // point mass at zero
    dist.t = std::min(p.phi[n] * p.xi[k], kProductCap);
    if (p.kind == EnsembleKind::BIPWCM) {
        dist.u = 1.0;
        return dist;
    }
    dist.forced = p.row_forced[static_cast<std::size_t>(n)] || p.col_forced[static_cast<std::size_t>(k)];
    dist.u = dist.forced ? std::numeric_limits<double>::infinity() : p.psi[n] * p.gamma[k];
    return dist;
}

HoldingsMatrix expected_matrix(const EnsembleParams& p) {
    if (p.kind == EnsembleKind::MECAPM) return HoldingsMatrix(p.mecapm_means);
    Matrix m(p.n_banks(), p.n_assets());
    for (Eigen::Index n = 0; n < m.rows(); ++n)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            m(n, k) = entry_distribution(p, n, k).mean();
    return HoldingsMatrix(std::move(m));
}

ExpectedSystemicness mecapm_expected_systemicness(const StrengthSequences& s,
                                                  const BankSheet& sheet,
                                                  const MarketParams& mkt) {
    if (mkt.n_assets() != s.n_assets())
        throw ValidationError("market parameters do not match asset count");
    check_sheet_against_strengths(s, sheet);
    UniformMarket um = uniform_market(mkt);
    const double e_total = sheet.total_equity();
    const double l_total = s.total;

    // sum over non-cash assets of C_k^2 and, per bank, C_k (mu_{n,k} + 1).
    std::vector<double> c2;
    c2.reserve(um.non_cash.size());
    for (auto k : um.non_cash) c2.push_back(s.asset_caps[k] * s.asset_caps[k]);
    const double sum_c2 = pairwise_sum(c2);

    ExpectedSystemicness out;
    out.expected.resize(s.n_banks());
    out.capm_point.resize(s.n_banks());
    out.gap.resize(s.n_banks());
    std::vector<double> terms(um.non_cash.size());
    for (Eigen::Index n = 0; n < s.n_banks(); ++n) {
        double a = s.bank_sizes[n];
        double pref = um.eps * um.ell * (a * sheet.leverages[n]) / (e_total * l_total);
        for (std::size_t i = 0; i < um.non_cash.size(); ++i) {
            double ck = s.asset_caps[um.non_cash[i]];
            double mu = a * ck / l_total;
            terms[i] = ck * (mu + 1.0);
        }
        double gap_sum = pairwise_sum(terms);
        out.capm_point[n] = pref * sum_c2;
        out.gap[n] = pref * gap_sum;
        out.expected[n] = out.capm_point[n] + out.gap[n];
    }
    return out;
}

ExpectedIndirectVulnerability mecapm_expected_indirect_vulnerability(const StrengthSequences& s,
                                                                     const BankSheet& sheet,
                                                                     const MarketParams& mkt) {
    if (mkt.n_assets() != s.n_assets())
        throw ValidationError("market parameters do not match asset count");
    check_sheet_against_strengths(s, sheet);
    UniformMarket um = uniform_market(mkt);
    const double l_total = s.total;

    std::vector<double> ab(static_cast<std::size_t>(s.n_banks()));
    for (Eigen::Index m = 0; m < s.n_banks(); ++m)
        ab[static_cast<std::size_t>(m)] = s.bank_sizes[m] * sheet.leverages[m];
    const double sum_ab = pairwise_sum(ab);

    ExpectedIndirectVulnerability out;
    out.expected.resize(s.n_banks());
    out.capm_point.resize(s.n_banks());
    std::vector<double> terms(um.non_cash.size()), capm_terms(um.non_cash.size());
    for (Eigen::Index n = 0; n < s.n_banks(); ++n) {
        double a = s.bank_sizes[n];
        if (a == 0.0) {
            out.expected[n] = 0.0;
            out.capm_point[n] = 0.0;
            continue;
        }
        double b = sheet.leverages[n];
        double pref = um.eps * um.ell * (1.0 + b) / a;
        for (std::size_t i = 0; i < um.non_cash.size(); ++i) {
            double ck = s.asset_caps[um.non_cash[i]];
            double mu = a * ck / l_total;
            double cross = mu * (ck / l_total) * sum_ab;
            terms[i] = (mu * mu + mu) * b + cross;
            capm_terms[i] = cross;
        }
        out.expected[n] = pref * pairwise_sum(terms);
        out.capm_point[n] = pref * pairwise_sum(capm_terms);
    }
    return out;
}

// --- serialization -----------------------------------------------------------

namespace {

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const json& arr) {
    Vector v(static_cast<Eigen::Index>(arr.size()));
    Eigen::Index i = 0;
    for (const auto& x : arr) v[i++] = x.get<double>();
    return v;
}

json bools_to_json(const std::vector<bool>& v) {
    json arr = json::array();
    for (bool b : v) arr.push_back(b);
    return arr;
}

std::vector<bool> bools_from_json(const json& arr) {
    std::vector<bool> v;
    v.reserve(arr.size());
    for (const auto& x : arr) v.push_back(x.get<bool>());
    return v;
}

}  // namespace

std::string EnsembleParams::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto kind_tag = static_cast<std::uint32_t>(kind);
    h = fnv1a(h, &kind_tag, sizeof(kind_tag));
    std::int64_t dims[2] = {n_banks(), n_assets()};
    h = fnv1a(h, dims, sizeof(dims));
    h = hash_vector(h, provenance.bank_sizes);
    h = hash_vector(h, provenance.asset_caps);
    if (kind == EnsembleKind::MECAPM) {
        h = fnv1a(h, mecapm_means.data(),
                  static_cast<std::size_t>(mecapm_means.size()) * sizeof(double));
    } else {
        h = hash_vector(h, phi);
        h = hash_vector(h, xi);
        h = hash_vector(h, psi);
        h = hash_vector(h, gamma);
    }
    return hex64(h);
}

std::string params_to_json(const EnsembleParams& p) {
    json j;
    j["schema_version"] = 1;
    j["kind"] = to_string(p.kind);
    j["n_banks"] = p.n_banks();
    j["n_assets"] = p.n_assets();
    j["fit_residual"] = p.fit_residual;
    j["provenance"] = {{"bank_sizes", vector_to_json(p.provenance.bank_sizes)},
                       {"asset_caps", vector_to_json(p.provenance.asset_caps)}};
    if (p.provenance_degrees) {
        json dr = json::array(), dc = json::array();
        for (Eigen::Index n = 0; n < p.provenance_degrees->n_banks(); ++n)
            dr.push_back(p.provenance_degrees->bank_degrees[n]);
        for (Eigen::Index k = 0; k < p.provenance_degrees->n_assets(); ++k)
            dc.push_back(p.provenance_degrees->asset_degrees[k]);
        j["provenance_degrees"] = {{"bank_degrees", dr}, {"asset_degrees", dc}};
    }
    if (p.kind == EnsembleKind::MECAPM) {
        json rows = json::array();
        for (Eigen::Index n = 0; n < p.mecapm_means.rows(); ++n) {
            json row = json::array();
            for (Eigen::Index k = 0; k < p.mecapm_means.cols(); ++k)
                row.push_back(p.mecapm_means(n, k));
            rows.push_back(std::move(row));
        }
        j["mecapm_means"] = std::move(rows);
    } else {
        j["phi"] = vector_to_json(p.phi);
        j["xi"] = vector_to_json(p.xi);
        if (p.kind == EnsembleKind::BIPECM) {
            j["psi"] = vector_to_json(p.psi);
            j["gamma"] = vector_to_json(p.gamma);
            j["row_forced"] = bools_to_json(p.row_forced);
            j["col_forced"] = bools_to_json(p.col_forced);
        }
    }
    j["row_active"] = bools_to_json(p.row_active);
    j["col_active"] = bools_to_json(p.col_active);
    j["provenance_hash"] = p.hash();
    return j.dump(2);
}

EnsembleParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("ensemble params JSON: ") + e.what(), 0, 0);
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ValidationError("unsupported ensemble params schema version");
    EnsembleKind kind = ensemble_kind_from_string(j.at("kind").get<std::string>());
    StrengthSequences prov(vector_from_json(j.at("provenance").at("bank_sizes")),
                           vector_from_json(j.at("provenance").at("asset_caps")));
    std::optional<DegreeSequences> deg;
    if (j.contains("provenance_degrees")) {
        const auto& dj = j["provenance_degrees"];
        IntVector dr(static_cast<Eigen::Index>(dj.at("bank_degrees").size()));
        IntVector dc(static_cast<Eigen::Index>(dj.at("asset_degrees").size()));
        Eigen::Index i = 0;
        for (const auto& x : dj.at("bank_degrees")) dr[i++] = x.get<int>();
        i = 0;
        for (const auto& x : dj.at("asset_degrees")) dc[i++] = x.get<int>();
        deg.emplace(std::move(dr), std::move(dc));
    }
    EnsembleParams p{kind, {}, {}, {}, {}, {}, {}, {},
                     bools_from_json(j.at("row_active")),
                     bools_from_json(j.at("col_active")),
                     j.at("fit_residual").get<double>(),
                     std::move(prov),
                     std::move(deg)};
    if (kind == EnsembleKind::MECAPM) {
        const auto& rows = j.at("mecapm_means");
        p.mecapm_means.resize(p.n_banks(), p.n_assets());
        Eigen::Index n = 0;
        for (const auto& row : rows) {
            Eigen::Index k = 0;
            for (const auto& x : row) p.mecapm_means(n, k++) = x.get<double>();
            ++n;
        }
    } else {
        p.phi = vector_from_json(j.at("phi"));
        p.xi = vector_from_json(j.at("xi"));
        if (kind == EnsembleKind::BIPECM) {
            p.psi = vector_from_json(j.at("psi"));
            p.gamma = vector_from_json(j.at("gamma"));
            p.row_forced = bools_from_json(j.at("row_forced"));
            p.col_forced = bools_from_json(j.at("col_forced"));
        }
    }
    if (j.contains("provenance_hash") && j["provenance_hash"].get<std::string>() != p.hash())
        throw ValidationError("ensemble params hash mismatch: file was edited or truncated");
    return p;
}

}  // namespace firenet
