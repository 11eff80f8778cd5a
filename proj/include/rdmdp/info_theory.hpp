#pragma once

#include "rdmdp/planning.hpp"

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace rdmdp {

/// Logarithm base for entropies and mutual information. Base 2 (bits) is the
/// canonical choice throughout; nats are exposed for cross-checks.
enum class LogBase { two, e };

namespace detail {

inline real_t log_base(real_t x, LogBase base) {
    return base == LogBase::two ? std::log2(x) : std::log(x);
}

/// x * log(x) with the 0 log 0 := 0 convention.
inline real_t xlogx(real_t x, LogBase base) {
    return x > 0.0 ? x * log_base(x, base) : 0.0;
}

} // namespace detail

/// Shannon entropy of a distribution.
inline real_t entropy(const numvec& dist, LogBase base = LogBase::two) {
    real_t h = 0.0;
    for (real_t p : dist) h -= detail::xlogx(p, base);
    return h;
}

/// Binary entropy H(p).
inline real_t binary_entropy(real_t p, LogBase base = LogBase::two) {
    return -detail::xlogx(p, base) - detail::xlogx(1.0 - p, base);
}

/// Prior p(X) plus likelihood P(Y|X): the attacker-designed joint over
/// (ground-truth kernel, observed kernel). Joint, Y-marginal and posterior
/// columns are derived on construction; columns with p(y) = 0 stay absent
/// rather than being fabricated.
class JointChannel {
public:
    JointChannel(numvec prior, Matrix likelihood)
        : prior_(std::move(prior)), likelihood_(std::move(likelihood)) {
        if (static_cast<int>(prior_.size()) != likelihood_.rows())
            throw dimension_error("JointChannel: prior length != likelihood rows");
        check_distribution(prior_, 1e-12, "JointChannel prior");
        for (int x = 0; x < likelihood_.rows(); ++x) {
            real_t sum = 0.0;
            for (int y = 0; y < likelihood_.cols(); ++y) {
                if (!(likelihood_(x, y) >= 0.0))
                    throw invariant_error("JointChannel: negative likelihood entry");
                sum += likelihood_(x, y);
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw invariant_error("JointChannel: likelihood row does not sum to 1");
        }
        joint_ = Matrix(likelihood_.rows(), likelihood_.cols());
        marginal_y_.assign(likelihood_.cols(), 0.0);
        for (int x = 0; x < joint_.rows(); ++x)
            for (int y = 0; y < joint_.cols(); ++y) {
                joint_(x, y) = prior_[x] * likelihood_(x, y);
                marginal_y_[y] += joint_(x, y);
            }
    }

    int num_x() const { return joint_.rows(); }
    int num_y() const { return joint_.cols(); }
    const numvec& prior() const { return prior_; }
    const Matrix& likelihood() const { return likelihood_; }
    const Matrix& joint() const { return joint_; }
    const numvec& marginal_y() const { return marginal_y_; }

    /// Posterior column p(X | Y=y); absent when p(y) = 0.
    std::optional<numvec> posterior(int y) const {
        if (marginal_y_[y] <= 0.0) return std::nullopt;
        numvec col(num_x());
        for (int x = 0; x < num_x(); ++x) col[x] = joint_(x, y) / marginal_y_[y];
        return col;
    }

private:
    numvec prior_;
    Matrix likelihood_;
    Matrix joint_;
    numvec marginal_y_;
};

/// I(X;Y) by the generic double sum over the joint, in bits by default.
inline real_t mutual_information(const JointChannel& channel, LogBase base = LogBase::two) {
    const Matrix& j = channel.joint();
    real_t mi = 0.0;
    for (int x = 0; x < channel.num_x(); ++x)
        for (int y = 0; y < channel.num_y(); ++y) {
            const real_t p = j(x, y);
            if (p <= 0.0) continue;
            mi += p * detail::log_base(p / (channel.prior()[x] * channel.marginal_y()[y]), base);
        }
    return std::max(mi, 0.0);
}

/// H(X|Y), computed both as H(X) - I(X;Y) and directly from posterior
/// columns; the two routes must agree to 1e-10 (asserted).
inline real_t conditional_entropy(const JointChannel& channel, LogBase base = LogBase::two) {
    const real_t via_mi = entropy(channel.prior(), base) - mutual_information(channel, base);
    real_t direct = 0.0;
    for (int y = 0; y < channel.num_y(); ++y) {
        const auto post = channel.posterior(y);
        if (!post) continue;
        direct += channel.marginal_y()[y] * entropy(*post, base);
    }
    if (std::abs(via_mi - direct) > 1e-10)
        throw invariant_error("conditional_entropy: the two computation routes disagree");
    return direct;
}

/// MAP decoder of X from Y and its Bayes error probability.
struct MapDecoder {
    /// decode[y] = argmax_x p(x|y); absent where p(y) = 0.
    std::vector<std::optional<int>> decode;
    real_t pe = 0.0;
};

/// Picks, for each observation with positive marginal, the posterior argmax
/// (ties to the lowest x index). Pe = sum_y p(y) (1 - max_x p(x|y)) is the
/// minimal error probability over all decoder functions.
inline MapDecoder map_decoder(const JointChannel& channel) {
    MapDecoder out;
    out.decode.resize(channel.num_y());
    real_t correct = 0.0;
    for (int y = 0; y < channel.num_y(); ++y) {
        if (channel.marginal_y()[y] <= 0.0) continue;
        int best = 0;
        for (int x = 1; x < channel.num_x(); ++x)
            if (channel.joint()(x, y) > channel.joint()(best, y)) best = x;
        out.decode[y] = best;
        correct += channel.joint()(best, y);
    }
    out.pe = 1.0 - correct;
    return out;
}

/// Error probability of an arbitrary decoder function (for cross-checks).
inline real_t decoder_error(const JointChannel& channel, const indvec& decode) {
    if (static_cast<int>(decode.size()) != channel.num_y())
        throw dimension_error("decoder length != observation count");
    real_t correct = 0.0;
    for (int y = 0; y < channel.num_y(); ++y) {
        if (channel.marginal_y()[y] <= 0.0) continue;
        correct += channel.joint()(decode[y], y);
    }
    return 1.0 - correct;
}

/// The minimum sup-norm value loss any suboptimal policy suffers, over every
/// kernel in the ensemble:
///   eps = min_i min_{pi != pi*(X_i)} || V^{pi*(X_i)}_{X_i} - V^pi_{X_i} ||_inf,
/// by exhaustive enumeration (a sampled check could not certify the universal
/// quantifier). Throws hypothesis_violation when two kernels share an optimal
/// policy or some gap vanishes, which voids the eps-gap assumption.
inline real_t epsilon_gap(const TabularMdp& mdp, const KernelEnsemble& ensemble,
                          const EvalMethod& method = EvalMethod::exact()) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const std::size_t count = detail::policy_count_checked(S, A);

    std::vector<PolicyTable> optima;
    optima.reserve(ensemble.size());
    for (const Kernel& k : ensemble.kernels)
        optima.push_back(optimal_policy_fixed_kernel(mdp, k).first);
    for (std::size_t i = 0; i < optima.size(); ++i)
        for (std::size_t j = i + 1; j < optima.size(); ++j)
            if (optima[i] == optima[j])
                throw hypothesis_violation(
                    "epsilon_gap: kernels " + std::to_string(i) + " and " + std::to_string(j) +
                    " share an optimal policy");

    std::vector<ValueVector> reference(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        reference[i] = evaluate_policy(mdp, ensemble, optima[i], method)[i];

    real_t eps = 0.0;
    bool first = true;
    for (std::size_t idx = 0; idx < count; ++idx) {
        PolicyTable pol = PolicyTable::deterministic(detail::decode_policy(idx, S, A));
        std::vector<ValueVector> values = evaluate_policy(mdp, ensemble, pol, method);
        for (std::size_t i = 0; i < ensemble.size(); ++i) {
            if (pol == optima[i]) continue;
            const real_t gap = linf_distance(values[i], reference[i]);
            if (first || gap < eps) {
                eps = gap;
                first = false;
            }
        }
    }
    if (!(eps > 0.0))
        throw hypothesis_violation("epsilon_gap: some suboptimal policy has zero value gap");
    return eps;
}

/// The full certification chain of the regret lower bound: MAP error, Fano's
/// inequality in both forms, and eps * Pe.
struct FanoCertificate {
    real_t pe_map = 0.0;            ///< Bayes error of the MAP decoder
    real_t h_pe = 0.0;              ///< binary entropy H(Pe), bits
    real_t hxy = 0.0;               ///< conditional entropy H(X|Y), bits
    real_t mi = 0.0;                ///< mutual information I(X;Y), bits
    real_t bound_lhs = 0.0;         ///< H(Pe) + Pe log2 |Omega(X)|
    real_t weakened_pe_lower = 0.0; ///< (H(X|Y) - 1) / log2 |Omega(X)|; vacuous when negative
    real_t epsilon_gap = 0.0;
    real_t regret_lower = 0.0;      ///< epsilon_gap * pe_map
};

/// Assembles the certificate and asserts its internal inequalities:
/// Fano holds for the MAP decoder (a theorem; violation means a bug) and the
/// weakened form lower-bounds Pe whenever |Omega(X)| > 1.
inline FanoCertificate fano_certificate(const TabularMdp& mdp, const KernelEnsemble& ensemble,
                                        const JointChannel& channel,
                                        const EvalMethod& method = EvalMethod::exact()) {
    if (channel.prior().size() != ensemble.size())
        throw dimension_error("channel prior length != ensemble size");
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        if (std::abs(channel.prior()[i] - ensemble.prior[i]) > 1e-12)
            throw invariant_error("channel prior differs from ensemble prior");

    FanoCertificate cert;
    cert.pe_map = map_decoder(channel).pe;
    cert.h_pe = binary_entropy(cert.pe_map);
    cert.hxy = conditional_entropy(channel);
    cert.mi = mutual_information(channel);
    const real_t log_omega = std::log2(static_cast<real_t>(ensemble.size()));
    cert.bound_lhs = cert.h_pe + cert.pe_map * log_omega;
    cert.weakened_pe_lower = log_omega > 0.0 ? (cert.hxy - 1.0) / log_omega : 0.0;
    cert.epsilon_gap = epsilon_gap(mdp, ensemble, method);
    cert.regret_lower = cert.epsilon_gap * cert.pe_map;

    if (cert.bound_lhs < cert.hxy - 1e-9)
        throw invariant_error("fano_certificate: Fano inequality violated (bug)");
    if (log_omega > 0.0 && cert.pe_map < cert.weakened_pe_lower - 1e-9)
        throw invariant_error("fano_certificate: weakened Fano bound violated (bug)");
    return cert;
}

} // namespace rdmdp
