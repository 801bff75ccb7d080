// This file is part of orbe, a solver toolkit for robust Markov decision
// processes with optimal-robust best-effort policy refinement.
// SPDX-License-Identifier: MIT
#include "orbe/rational.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace orbe {

namespace {

/// Scatters u/h (first-return reward and discount vectors) into the
/// per-action coefficient matrices weighted by gamma * pi(missing, a).
RationalValueForm assemble_form(const Rmdp& m, const Policy& pi, int missing_state,
                                const Vec& u, const Vec& h) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    const auto sb = static_cast<std::size_t>(missing_state);
    RationalValueForm f;
    f.missing_state = missing_state;
    f.base_reward = 0.0;
    for (std::size_t a = 0; a < A; ++a) f.base_reward += pi[sb][a] * m.rewards[sb][a];
    f.alpha.assign(A, Vec(S, 0.0));
    f.beta.assign(A, Vec(S, 0.0));
    for (std::size_t a = 0; a < A; ++a) {
        const Real w = m.gamma * pi[sb][a];
        if (w == 0.0) continue;
        for (std::size_t t = 0; t < S; ++t) {
            f.alpha[a][t] = w * u[t];
            f.beta[a][t] = w * h[t];
        }
    }
    return f;
}

} // namespace

FirstReturn first_return(const Rmdp& m, const Policy& pi, const TransitionKernel& kernel,
                         int missing_state) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const Mat T = policy_transition_matrix(m, pi, kernel);
    const Vec r = policy_reward(m, pi);
    const auto sb = static_cast<std::size_t>(missing_state);

    // Reduced system over all states but the missing one, which acts as an
    // absorbing target for the first-return quantities.
    std::vector<std::size_t> idx;
    for (std::size_t s = 0; s < S; ++s)
        if (s != sb) idx.push_back(s);
    const auto n = static_cast<Eigen::Index>(idx.size());

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rew(n), into(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rew(i) = r[idx[static_cast<std::size_t>(i)]];
        into(i) = m.gamma * T[idx[static_cast<std::size_t>(i)]][sb];
        for (Eigen::Index j = 0; j < n; ++j)
            M(i, j) -= m.gamma * T[idx[static_cast<std::size_t>(i)]][idx[static_cast<std::size_t>(j)]];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd u_red = lu.solve(rew);
    Eigen::VectorXd h_red = lu.solve(into);
    Real scale = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(rew(i)));
    if (n > 0 && ((M * u_red - rew).cwiseAbs().maxCoeff() > 1e-9 * scale ||
                  (M * h_red - into).cwiseAbs().maxCoeff() > 1e-9))
        throw NumericError("first-return linear solve failed its residual check");

    FirstReturn fr;
    fr.u.assign(S, 0.0);
    fr.h.assign(S, 0.0);
    fr.h[sb] = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        fr.u[idx[static_cast<std::size_t>(i)]] = u_red(i);
        fr.h[idx[static_cast<std::size_t>(i)]] = h_red(i);
    }
    return fr;
}

RationalValueForm rational_coefficients(const Rmdp& m, const Policy& pi,
                                        const TransitionKernel& kernel, int missing_state) {
    const FirstReturn fr = first_return(m, pi, kernel, missing_state);
    return assemble_form(m, pi, missing_state, fr.u, fr.h);
}

RationalValueForm form_for_action(const Rmdp& m, int missing_state, int action,
                                  const FirstReturn& fr) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto A = static_cast<std::size_t>(m.num_actions);
    const auto sb = static_cast<std::size_t>(missing_state);
    const auto a = static_cast<std::size_t>(action);
    RationalValueForm f;
    f.missing_state = missing_state;
    f.base_reward = m.rewards[sb][a];
    f.alpha.assign(A, Vec(S, 0.0));
    f.beta.assign(A, Vec(S, 0.0));
    for (std::size_t t = 0; t < S; ++t) {
        f.alpha[a][t] = m.gamma * fr.u[t];
        f.beta[a][t] = m.gamma * fr.h[t];
    }
    return f;
}

std::vector<FirstReturn> first_return_all(const Rmdp& m, const Policy& pi,
                                          const TransitionKernel& kernel) {
    const auto S = static_cast<std::size_t>(m.num_states);
    const auto n = static_cast<Eigen::Index>(S);
    const Mat T = policy_transition_matrix(m, pi, kernel);
    const Vec r = policy_reward(m, pi);

    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd rew(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rew(i) = r[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j)
            M(i, j) -= m.gamma * T[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    const Eigen::MatrixXd G = lu.inverse();
    if ((M * G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9)
        throw NumericError("occupancy-matrix inversion failed its residual check");
    const Eigen::VectorXd y = G * rew; // fixed-kernel values

    // Removing one state's rows from the occupancy system reduces, by the
    // block-inverse identity, to ratios of the full inverse's entries:
    //   h(s') = G(s', sb) / G(sb, sb),   u(s') = y(s') - h(s') y(sb).
    std::vector<FirstReturn> out;
    out.reserve(S);
    for (std::size_t sb = 0; sb < S; ++sb) {
        const auto c = static_cast<Eigen::Index>(sb);
        FirstReturn fr;
        fr.u.assign(S, 0.0);
        fr.h.assign(S, 0.0);
        fr.h[sb] = 1.0;
        const Real diag = G(c, c);
        for (std::size_t t = 0; t < S; ++t) {
            if (t == sb) continue;
            const auto ti = static_cast<Eigen::Index>(t);
            fr.h[t] = G(ti, c) / diag;
            fr.u[t] = y(ti) - fr.h[t] * y(c);
        }
        out.push_back(std::move(fr));
    }
    return out;
}

std::vector<RationalValueForm> rational_coefficients_all(const Rmdp& m, const Policy& pi,
                                                         const TransitionKernel& kernel) {
    const std::vector<FirstReturn> frs = first_return_all(m, pi, kernel);
    std::vector<RationalValueForm> forms;
    forms.reserve(frs.size());
    for (std::size_t sb = 0; sb < frs.size(); ++sb)
        forms.push_back(assemble_form(m, pi, static_cast<int>(sb), frs[sb].u, frs[sb].h));
    return forms;
}

namespace {

void numerator_denominator(const RationalValueForm& f, const StateTransition& p, Real& N,
                           Real& D) {
    N = f.base_reward;
    D = 1.0;
    for (std::size_t a = 0; a < f.alpha.size(); ++a) {
        for (std::size_t t = 0; t < f.alpha[a].size(); ++t) {
            N += f.alpha[a][t] * p[a][t];
            D -= f.beta[a][t] * p[a][t];
        }
    }
}

} // namespace

Real rational_value(const RationalValueForm& f, const StateTransition& p) {
    Real N, D;
    numerator_denominator(f, p, N, D);
    if (!(D > 1e-12))
        throw NumericError("rational form evaluated at a vanishing denominator");
    return N / D;
}

Real directional_derivative(const RationalValueForm& f, const StateTransition& at,
                            const Direction& v) {
    Real N, D;
    numerator_denominator(f, at, N, D);
    if (!(D > 1e-12))
        throw NumericError("rational form evaluated at a vanishing denominator");
    Real dN = 0.0, dDbar = 0.0;
    for (std::size_t a = 0; a < f.alpha.size(); ++a) {
        for (std::size_t t = 0; t < f.alpha[a].size(); ++t) {
            dN += f.alpha[a][t] * v[a][t];
            dDbar += f.beta[a][t] * v[a][t];
        }
    }
    return (dN * D + N * dDbar) / (D * D);
}

bool segment_equivalence_check(const RationalValueForm& a, const RationalValueForm& b,
                               const StateTransition& p1, const StateTransition& p2, Real tol) {
    Direction v(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        v[i].resize(p1[i].size());
        for (std::size_t j = 0; j < p1[i].size(); ++j) v[i][j] = p2[i][j] - p1[i][j];
    }
    const bool values = std::abs(rational_value(a, p1) - rational_value(b, p1)) <= tol &&
                        std::abs(rational_value(a, p2) - rational_value(b, p2)) <= tol;
    if (!values) return false;
    return std::abs(directional_derivative(a, p1, v) - directional_derivative(b, p1, v)) <= tol &&
           std::abs(directional_derivative(a, p2, v) - directional_derivative(b, p2, v)) <= tol;
}

} // namespace orbe
