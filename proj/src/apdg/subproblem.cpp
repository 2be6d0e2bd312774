#include "apdg/subproblem.hpp"

#include <algorithm>
#include <cmath>

#include "socp/error.hpp"

namespace apdg {

namespace {

// A state component: value = offset + scale * x[col], or offset alone if col < 0.
struct Term {
    int col = -1;
    double scale = 0.0;
    double offset = 0.0;
};

class RowBuilder {
public:
    int add_row()
    {
        rows_.emplace_back();
        b_.push_back(0.0);
        return static_cast<int>(rows_.size()) - 1;
    }
    void coef(int row, int col, double value) { rows_[row].push_back({row, col, value}); }
    void term(int row, const Term& t, double value)
    {
        if (t.col >= 0) {
            coef(row, t.col, value * t.scale);
        }
        b_[row] -= value * t.offset;
    }
    void rhs(int row, double value) { b_[row] += value; }

    // Each row divided by its largest coefficient.
    void finish(int n, socp::SocpProblem& out)
    {
        std::vector<socp::Triplet> all;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            double big = 0.0;
            for (const auto& t : rows_[i]) {
                big = std::max(big, std::abs(t.value));
            }
            if (!(big > 0.0)) {
                throw socp::NumericalError("build_subproblem: empty constraint row");
            }
            for (auto t : rows_[i]) {
                t.value /= big;
                all.push_back(t);
            }
            b_[i] /= big;
        }
        out.A = socp::SparseMat::from_triplets(static_cast<std::int32_t>(rows_.size()), n, all, false,
                                               socp::SparseMat::Zeros::Keep);
        out.b = b_;
    }

private:
    std::vector<std::vector<socp::Triplet>> rows_;
    std::vector<double> b_;
};

bool state_entry(int row, int col, bool drag)
{
    if (row == 6) {
        return col == 6;
    }
    const int comp = row % 3;
    if (col == 6) {
        return true;
    }
    if (col < 3) {
        return col == comp || (drag && col == 1);
    }
    return col - 3 == comp || drag;
}

bool input_entry(int row, int col)
{
    return row == 6 ? col == 3 : col == row % 3;
}

} // namespace

Subproblem build_subproblem(const TrajectoryIterate& ref, const BoundaryConditions& bc,
                            const VehicleParams& p, const ScWeights& w)
{
    p.validate();
    bc.validate(p);
    w.validate();
    const int kf = w.k_f;
    if (ref.k_f() != kf || ref.T.size() != ref.nodes() || ref.Gamma.size() != ref.nodes() ||
        ref.m.size() != ref.nodes() || ref.v.size() != ref.nodes()) {
        throw ScenarioError("build_subproblem: reference does not have k_f + 1 nodes");
    }
    for (int k = 0; k <= kf; ++k) {
        if (!(ref.m[k] > 0.0)) {
            throw ScenarioError("build_subproblem: reference mass must be positive");
        }
    }
    if (!(ref.dt > 0.0)) {
        throw ScenarioError("build_subproblem: reference time step must be positive");
    }
    const bool drag = p.C_D > 0.0;

    Subproblem sub;
    VariableMap& map = sub.map;
    const VariableScales sc = map.scale;
    map.node.resize(kf + 1);

    // Linear cones.
    int next = 0;
    for (int k = 0; k <= kf; ++k) {
        NodeVars& nv = map.node[k];
        nv.Gamma = next++;
        nv.g_min = next++;
        nv.g_max = next++;
        nv.tilt = next++;
        if (k >= 1) {
            nv.mu = next++;
            nv.q = next++;
        }
        if (k >= 1 && k < kf) {
            nv.h = next++;
        }
    }
    for (int k = 0; k < kf; ++k) {
        map.rate_up.push_back(next++);
        map.rate_down.push_back(next++);
    }
    map.dt = next++;
    map.eta_dt = next++;
    map.e_plus = next++;
    map.e_minus = next++;
    const auto linear = static_cast<std::size_t>(next);

    // Second-order cones.
    std::vector<std::size_t> dims;
    auto cone = [&](std::size_t dim) {
        dims.push_back(dim);
        const int head = next;
        next += static_cast<int>(dim);
        return head;
    };
    for (int k = 0; k <= kf; ++k) {
        NodeVars& nv = map.node[k];
        if (k >= 1 && k < kf) {
            nv.nu = cone(4);
            nv.w = cone(3);
        }
        nv.t = cone(4);
        nv.eta_T = cone(4);
        nv.eta_a = cone(4);
    }
    const int n = next;
    sub.linear_constraints = linear;
    sub.soc_constraints = dims.size();

    auto state = [&](int k, int i) {
        const NodeVars& nv = map.node[k];
        Term t;
        if (i == 6) {
            if (nv.mu < 0) {
                t.offset = bc.m0;
            } else {
                t = {nv.mu, sc.m, p.m_dry};
            }
        } else if (k == 0 || k == kf) {
            const Vec3& fixed = k == 0 ? (i < 3 ? bc.r0 : bc.v0) : Vec3::Zero();
            t.offset = fixed[i % 3];
        } else if (i == 0) {
            t = {nv.w + 1, sc.r, 0.0};
        } else if (i == 1) {
            t = {nv.h, sc.r, 0.0};
        } else if (i == 2) {
            t = {nv.w + 2, sc.r, 0.0};
        } else {
            t = {nv.nu + 1 + (i - 3), sc.v, 0.0};
        }
        return t;
    };
    auto input = [&](int k, int j) {
        const NodeVars& nv = map.node[k];
        return j < 3 ? Term{nv.t + 1 + j, sc.T, 0.0} : Term{nv.Gamma, sc.T, 0.0};
    };

    RowBuilder rows;
    const double cos_tilt = std::cos(p.theta_T_max);
    const double tan_gs = std::tan(p.theta_gs);
    for (int k = 0; k <= kf; ++k) {
        const NodeVars& nv = map.node[k];
        int r = rows.add_row();
        rows.coef(r, nv.g_min, 1.0);
        rows.coef(r, nv.Gamma, -1.0);
        rows.rhs(r, -p.T_min / sc.T);
        r = rows.add_row();
        rows.coef(r, nv.g_max, 1.0);
        rows.coef(r, nv.Gamma, 1.0);
        rows.rhs(r, p.T_max / sc.T);
        r = rows.add_row();
        rows.coef(r, nv.tilt, 1.0);
        rows.coef(r, nv.t + 2, -1.0);
        rows.coef(r, nv.Gamma, cos_tilt);
        r = rows.add_row();
        rows.coef(r, nv.t, 1.0);
        rows.coef(r, nv.Gamma, -1.0);
        for (int j = 0; j < 3; ++j) {
            r = rows.add_row();
            rows.coef(r, nv.eta_T + 1 + j, 1.0);
            rows.coef(r, nv.t + 1 + j, -1.0);
            rows.rhs(r, -ref.T[k][j] / sc.T);
        }
        if (nv.q >= 0) {
            r = rows.add_row();
            rows.coef(r, nv.q, 1.0);
            rows.coef(r, nv.mu, 1.0);
            rows.rhs(r, (bc.m0 - p.m_dry) / sc.m);
        }
        if (nv.nu >= 0) {
            r = rows.add_row();
            rows.coef(r, nv.nu, 1.0);
            rows.rhs(r, p.v_max / sc.v);
            r = rows.add_row();
            rows.coef(r, nv.w, 1.0);
            rows.coef(r, nv.h, -tan_gs);
        }
    }
    for (int k = 0; k < kf; ++k) {
        const NodeVars& a = map.node[k];
        const NodeVars& b = map.node[k + 1];
        int r = rows.add_row();
        rows.coef(r, map.rate_up[k], 1.0);
        rows.coef(r, b.Gamma, -1.0);
        rows.coef(r, a.Gamma, 1.0);
        rows.rhs(r, -p.Tdot_min * ref.dt / sc.T);
        r = rows.add_row();
        rows.coef(r, map.rate_down[k], 1.0);
        rows.coef(r, b.Gamma, 1.0);
        rows.coef(r, a.Gamma, -1.0);
        rows.rhs(r, p.Tdot_max * ref.dt / sc.T);
    }
    {
        int r = rows.add_row();
        rows.coef(r, map.e_plus, 1.0);
        rows.coef(r, map.eta_dt, -1.0);
        rows.coef(r, map.dt, 1.0);
        rows.rhs(r, ref.dt / sc.dt);
        r = rows.add_row();
        rows.coef(r, map.e_minus, 1.0);
        rows.coef(r, map.eta_dt, -1.0);
        rows.coef(r, map.dt, -1.0);
        rows.rhs(r, -ref.dt / sc.dt);
    }

    const std::vector<IntervalMap> maps = linearize_discretize(ref, p);
    for (int k = 0; k < kf; ++k) {
        const IntervalMap& mp = maps[k];
        for (int i = 0; i < 7; ++i) {
            const int r = rows.add_row();
            for (int j = 0; j < 7; ++j) {
                if (state_entry(i, j, drag)) {
                    rows.term(r, state(k, j), mp.Xk(i, j));
                    rows.term(r, state(k + 1, j), mp.Xk1(i, j));
                }
            }
            for (int j = 0; j < 4; ++j) {
                if (input_entry(i, j)) {
                    rows.term(r, input(k, j), mp.Uk(i, j));
                    rows.term(r, input(k + 1, j), mp.Uk1(i, j));
                }
            }
            rows.coef(r, map.dt, mp.dt(i) * sc.dt);
            if (i < 6) {
                rows.coef(r, map.node[k].eta_a + 1 + i % 3, mp.Kk(i, i % 3) * sc.kappa);
                rows.coef(r, map.node[k + 1].eta_a + 1 + i % 3, mp.Kk1(i, i % 3) * sc.kappa);
            }
            rows.rhs(r, mp.rhs(i));
        }
    }
    // Vertical thrust at touchdown.
    for (const int j : {0, 2}) {
        const int r = rows.add_row();
        rows.coef(r, map.node[kf].t + 1 + j, 1.0);
    }

    socp::SocpProblem& prob = sub.problem;
    prob.layout = socp::ConeLayout(linear, dims);
    rows.finish(n, prob);

    socp::Vec c(static_cast<std::size_t>(n), 0.0);
    c[map.node[kf].mu] = -w.w_m_f * sc.m;
    c[map.eta_dt] = w.w_eta_dt * sc.dt;
    for (int k = 0; k <= kf; ++k) {
        c[map.node[k].eta_T] = w.w_eta_T / kf * sc.T;
        c[map.node[k].eta_a] = w.w_kappa_aR / kf * sc.kappa;
    }
    double big = 0.0;
    for (const double v : c) {
        big = std::max(big, std::abs(v));
    }
    for (double& v : c) {
        v /= big;
    }
    map.objective_scale = big;
    prob.c = std::move(c);
    prob.validate();
    return sub;
}

TrajectoryIterate extract_trajectory(const Subproblem& sub, std::span<const double> x,
                                     const BoundaryConditions& bc, const VehicleParams& p)
{
    const VariableMap& map = sub.map;
    const VariableScales& sc = map.scale;
    if (x.size() != sub.problem.n()) {
        throw socp::DimensionError("extract_trajectory: solution size mismatch");
    }
    const std::size_t nodes = map.node.size();
    const std::size_t kf = nodes - 1;
    TrajectoryIterate out;
    out.r.resize(nodes);
    out.v.resize(nodes);
    out.m.resize(nodes);
    out.T.resize(nodes);
    out.Gamma.resize(nodes);
    out.dt = x[map.dt] * sc.dt;
    out.eta_dt = x[map.eta_dt] * sc.dt;
    double eta_t = 0.0;
    for (std::size_t k = 0; k < nodes; ++k) {
        const NodeVars& nv = map.node[k];
        if (k == 0) {
            out.r[k] = bc.r0;
            out.v[k] = bc.v0;
        } else if (k == kf) {
            out.r[k].setZero();
            out.v[k].setZero();
        } else {
            out.r[k] = Vec3(x[nv.w + 1], x[nv.h], x[nv.w + 2]) * sc.r;
            out.v[k] = Vec3(x[nv.nu + 1], x[nv.nu + 2], x[nv.nu + 3]) * sc.v;
        }
        out.m[k] = nv.mu < 0 ? bc.m0 : p.m_dry + x[nv.mu] * sc.m;
        out.T[k] = Vec3(x[nv.t + 1], x[nv.t + 2], x[nv.t + 3]) * sc.T;
        out.Gamma[k] = x[nv.Gamma] * sc.T;
        eta_t += x[nv.eta_T] * sc.T;
        const Vec3 kappa(x[nv.eta_a + 1], x[nv.eta_a + 2], x[nv.eta_a + 3]);
        out.kappa_max = std::max(out.kappa_max, kappa.norm() * sc.kappa);
    }
    out.eta_T_mean = eta_t / static_cast<double>(kf);
    out.update_accelerations(p);
    return out;
}

double physical_objective(const Subproblem& sub, std::span<const double> x)
{
    double v = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        v += sub.problem.c[i] * x[i];
    }
    return v * sub.map.objective_scale;
}

} // namespace apdg
