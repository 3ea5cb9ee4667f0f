#include "ttp/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ttp/error.hpp"

namespace ttp {

MasterProblem MasterProblem::from_bundle(const BundleState& state,
                                         std::span<const double> capacity) {
    MasterProblem p;
    p.mode = state.method;
    p.groups = static_cast<int>(state.owners.size());
    p.center = &state.center;
    p.capacity = capacity;
    p.u = state.step.u;
    for (std::size_t o = 0; o < state.owners.size(); ++o)
        for (const Cut& cut : state.owners[o])
            p.cuts.push_back({static_cast<int>(o), cut.psi, &cut.sparse, cut.capacity_term});
    return p;
}

std::vector<std::vector<double>> split_multipliers(const BundleState& state,
                                                   std::span<const double> flat) {
    std::vector<std::vector<double>> out(state.owners.size());
    std::size_t k = 0;
    for (std::size_t o = 0; o < state.owners.size(); ++o)
        for (std::size_t j = 0; j < state.owners[o].size(); ++j)
            out[o].push_back(k < flat.size() ? flat[k++] : 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Product-of-simplices QP, primal active set.

namespace {

// Working face in null-space coordinates: for every working coordinate j
// other than its group's reference r, the direction e_j - e_r. The reduced
// Hessian is kept as a Cholesky factor that grows and shrinks with the face.
class Face {
public:
    Face(const Eigen::MatrixXd& H, std::span<const int> group, int groups)
        : H_(H), group_(group), L_(Eigen::MatrixXd::Zero(H.rows(), H.rows())) {
        ref.assign(groups, -1);
    }

    std::vector<int> ref;
    std::vector<int> cols;  // factor order

    int size() const { return static_cast<int>(cols.size()); }

    double entry(int a, int b) const {
        const int ra = ref[group_[a]], rb = ref[group_[b]];
        return H_(a, b) - H_(a, rb) - H_(ra, b) + H_(ra, rb);
    }

    // Appends coordinate j; false (and no change) if the face would turn singular.
    bool append(int j) {
        const int n = size();
        Eigen::VectorXd b(n);
        for (int a = 0; a < n; ++a) b[a] = entry(cols[a], j);
        const double d = entry(j, j);
        Eigen::VectorXd l = b;
        if (n > 0) L_.topLeftCorner(n, n).triangularView<Eigen::Lower>().solveInPlace(l);
        const double delta = d - l.squaredNorm();
        const double top = std::max(max_pivot_, delta);
        if (!(delta > 1e-9 * (1.0 + top))) return false;
        max_pivot_ = top;
        L_.row(n).head(n) = l.transpose();
        L_(n, n) = std::sqrt(delta);
        cols.push_back(j);
        return true;
    }

    // Drops the column at factor position a and restores triangularity with
    // Givens rotations.
    void remove_at(int a) {
        const int n = size();
        for (int i = a; i + 1 < n; ++i) L_.row(i).head(n) = L_.row(i + 1).head(n);
        for (int i = a; i + 1 < n; ++i) {
            const double x = L_(i, i), y = L_(i, i + 1);
            const double r = std::hypot(x, y);
            if (r == 0.0) continue;
            const double c = x / r, s = y / r;
            for (int k = i; k + 1 < n; ++k) {
                const double p = L_(k, i), q = L_(k, i + 1);
                L_(k, i) = c * p + s * q;
                L_(k, i + 1) = -s * p + c * q;
            }
        }
        L_.row(n - 1).head(n).setZero();
        L_.col(n - 1).head(n).setZero();
        cols.erase(cols.begin() + a);
    }

    // Refactors from scratch for the working set; false if singular.
    bool rebuild(const std::vector<char>& work) {
        const int m = static_cast<int>(work.size());
        cols.clear();
        max_pivot_ = 0.0;
        L_.setZero();
        for (int j = 0; j < m; ++j)
            if (work[j] && ref[group_[j]] != j && !append(j)) return false;
        return true;
    }

    Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
        const int n = size();
        const auto L = L_.topLeftCorner(n, n);
        L.triangularView<Eigen::Lower>().solveInPlace(rhs);
        L.transpose().triangularView<Eigen::Upper>().solveInPlace(rhs);
        return rhs;
    }

    Eigen::MatrixXd dense() const {
        const int n = size();
        Eigen::MatrixXd M(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) M(a, b) = M(b, a) = entry(cols[a], cols[b]);
        return M;
    }

private:
    const Eigen::MatrixXd& H_;
    std::span<const int> group_;
    Eigen::MatrixXd L_;
    double max_pivot_ = 0.0;
};

void pick_refs(Face& face, const Eigen::VectorXd& x, const std::vector<char>& work,
               std::span<const int> group, int only_group = -1) {
    for (int j = 0; j < static_cast<int>(x.size()); ++j) {
        const int g = group[j];
        if (!work[j] || (only_group >= 0 && g != only_group)) continue;
        if (face.ref[g] < 0 || x[j] > x[face.ref[g]]) face.ref[g] = j;
    }
}

}  // namespace

Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                                 std::span<const int> group, int groups, Eigen::VectorXd x,
                                 int max_iterations) {
    const int m = static_cast<int>(f.size());
    if (max_iterations <= 0) max_iterations = 10 * m + 100;
    std::vector<char> work(m);
    for (int j = 0; j < m; ++j) work[j] = x[j] > 0.0;

    Face face(H, group, groups);
    pick_refs(face, x, work, group);
    bool factored = face.rebuild(work);
    if (!factored) {
        // A start on a singular face would need one eigendecomposition per
        // dropped coordinate; restart from the heaviest coordinate of each
        // group and let the face grow instead.
        x.setZero();
        for (int g = 0; g < groups; ++g)
            if (face.ref[g] >= 0) x[face.ref[g]] = 1.0;
        for (int j = 0; j < m; ++j) work[j] = x[j] > 0.0;
        face.cols.clear();
        factored = face.rebuild(work);
    }

    Eigen::VectorXd grad = H * x + f;
    auto move = [&](const Eigen::VectorXd& p, double step) {
        x += step * p;
        for (int j = 0; j < m; ++j)
            if (p[j] != 0.0) grad.noalias() += (step * p[j]) * H.col(j);
    };
    auto drop = [&](int j) {
        x[j] = 0.0;
        work[j] = 0;
        const int g = group[j];
        if (face.ref[g] == j) {
            face.ref[g] = -1;
            pick_refs(face, x, work, group, g);
            if (face.ref[g] < 0) {  // nothing left in the group; keep j as its vertex
                x[j] = 1.0;
                work[j] = 1;
                face.ref[g] = j;
            }
            factored = face.rebuild(work);
        } else if (factored) {
            const auto it = std::find(face.cols.begin(), face.cols.end(), j);
            face.remove_at(static_cast<int>(it - face.cols.begin()));
        }
    };

    bool stationary = false;
    for (int it = 0; it < max_iterations; ++it) {
        const double gscale = 1.0 + grad.cwiseAbs().maxCoeff();

        if (stationary) {
            // Price out the zero coordinates against the group reference.
            int enter = -1;
            double most = -1e-12 * gscale;
            for (int j = 0; j < m; ++j) {
                if (work[j]) continue;
                const double mult = grad[j] - grad[face.ref[group[j]]];
                if (mult < most) {
                    most = mult;
                    enter = j;
                }
            }
            if (enter < 0) {
                // Confirm against a fresh gradient before stopping.
                const Eigen::VectorXd exact = H * x + f;
                if ((exact - grad).cwiseAbs().maxCoeff() <= 1e-12 * gscale) break;
                grad = exact;
                continue;
            }
            work[enter] = 1;
            if (factored) factored = face.append(enter);
            stationary = false;
            continue;
        }

        if (!factored) factored = face.rebuild(work);
        const int nz = face.size();
        Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
        bool unbounded = false;
        if (factored && nz > 0) {
            Eigen::VectorXd rhs(nz);
            for (int a = 0; a < nz; ++a)
                rhs[a] = grad[face.ref[group[face.cols[a]]]] - grad[face.cols[a]];
            const Eigen::VectorXd z = face.solve(rhs);
            for (int a = 0; a < nz; ++a) {
                p[face.cols[a]] += z[a];
                p[face.ref[group[face.cols[a]]]] -= z[a];
            }
        } else if (!factored) {
            // Singular face: split the reduced gradient into range and
            // null-space parts of the reduced Hessian.
            face.cols.clear();
            for (int j = 0; j < m; ++j)
                if (work[j] && face.ref[group[j]] != j) face.cols.push_back(j);
            const int n = face.size();
            const Eigen::MatrixXd M = face.dense();
            Eigen::VectorXd rhs(n);
            for (int a = 0; a < n; ++a)
                rhs[a] = grad[face.ref[group[face.cols[a]]]] - grad[face.cols[a]];
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
            const auto& ev = eig.eigenvalues();
            const auto& V = eig.eigenvectors();
            const double floor = 1e-11 * (1.0 + std::abs(ev[n - 1]));
            const Eigen::VectorXd coef = V.transpose() * rhs;
            Eigen::VectorXd q = Eigen::VectorXd::Zero(n), r0 = Eigen::VectorXd::Zero(n);
            for (int k = 0; k < n; ++k) {
                if (ev[k] > floor) q += (coef[k] / ev[k]) * V.col(k);
                else r0 += coef[k] * V.col(k);
            }
            // A descent component along zero curvature makes the face unbounded.
            unbounded = r0.norm() > 1e-10 * gscale;
            const Eigen::VectorXd z = unbounded ? r0 : q;
            for (int a = 0; a < n; ++a) {
                p[face.cols[a]] += z[a];
                p[face.ref[group[face.cols[a]]]] -= z[a];
            }
        }

        const double pmax = p.cwiseAbs().maxCoeff();
        if (!unbounded && pmax <= 1e-14 * (1.0 + x.cwiseAbs().maxCoeff())) {
            stationary = true;
            continue;
        }

        double step = unbounded ? std::numeric_limits<double>::infinity() : 1.0;
        int blocking = -1;
        for (int j = 0; j < m; ++j) {
            if (work[j] && p[j] < 0.0) {
                const double ratio = x[j] / -p[j];
                if (ratio < step) {
                    step = ratio;
                    blocking = j;
                }
            }
        }
        if (!std::isfinite(step)) break;
        move(p, step);
        for (int j = 0; j < m; ++j)
            if (x[j] < 0.0) x[j] = 0.0;
        if (blocking >= 0) drop(blocking);
        else stationary = true;  // full Newton step lands on the face minimiser
    }

    std::vector<double> sums(groups, 0.0);
    for (int j = 0; j < m; ++j) sums[group[j]] += x[j];
    for (int j = 0; j < m; ++j)
        if (sums[group[j]] > 0.0) x[j] /= sums[group[j]];
    return x;
}
// ---------------------------------------------------------------------------

namespace {

struct LocalSparse {
    std::vector<int> idx;
    std::vector<double> val;
};

// Dual of the master: maximise over cut multipliers lambda (one simplex per
// group) D(lambda) = sum lambda_j psi_j + sum_i min_{s_i >= -mu_i} (w_i s_i + u s_i^2 / 2)
// with w = kappa c + sum lambda_j h_j. The optimal step is s_i = max(-mu_i, -w_i/u).
class DualMaster {
public:
    explicit DualMaster(const MasterProblem& p) : p_(p) {
        if (!p.center) throw InputError("master", "missing center");
        if (p.capacity.size() != p.center->size())
            throw InputError("master", "capacity dimension does not match the center");
        if (!(p.u > 0.0)) throw InputError("master", "u must be positive");
        m_ = static_cast<int>(p.cuts.size());
        group_has_cap_.assign(p.groups, -1);
        std::vector<int> per_group(p.groups, 0);
        for (const MasterCut& c : p.cuts) {
            if (c.group < 0 || c.group >= p.groups) throw InputError("master", "bad cut group");
            int& flag = group_has_cap_[c.group];
            const int mine = c.capacity_term ? 1 : 0;
            if (flag >= 0 && flag != mine)
                throw InputError("master", "mixed capacity terms within one group");
            flag = mine;
            ++per_group[c.group];
        }
        for (int g = 0; g < p.groups; ++g)
            if (per_group[g] == 0) throw InputError("master", "every group needs a cut");
        kappa_ = p.mode == Method::Disaggregate ? 1.0 : 0.0;
        for (int flag : group_has_cap_) kappa_ += flag > 0 ? 1.0 : 0.0;

        std::vector<Cell> all;
        for (const MasterCut& c : p.cuts) all.insert(all.end(), c.sparse->index.begin(), c.sparse->index.end());
        std::sort(all.begin(), all.end());
        all.erase(std::unique(all.begin(), all.end()), all.end());
        cells_ = std::move(all);
        const auto mu = p.center->values();
        c_.resize(cells_.size());
        mu_.resize(cells_.size());
        for (std::size_t i = 0; i < cells_.size(); ++i) {
            c_[i] = kappa_ * p.capacity[cells_[i]];
            mu_[i] = mu[cells_[i]];
        }
        h_.resize(m_);
        psi_.resize(m_);
        group_.resize(m_);
        for (int j = 0; j < m_; ++j) {
            const MasterCut& c = p.cuts[j];
            psi_[j] = c.psi;
            group_[j] = c.group;
            auto& loc = h_[j];
            loc.val = c.sparse->value;
            loc.idx.resize(c.sparse->index.size());
            for (std::size_t k = 0; k < loc.idx.size(); ++k)
                loc.idx[k] = static_cast<int>(
                    std::lower_bound(cells_.begin(), cells_.end(), c.sparse->index[k]) -
                    cells_.begin());
        }
        by_cell_.resize(cells_.size());
        for (int j = 0; j < m_; ++j)
            for (std::size_t k = 0; k < h_[j].idx.size(); ++k)
                by_cell_[h_[j].idx[k]].emplace_back(j, h_[j].val[k]);
    }

    MasterSolution solve() {
        const double center_model = model_at_center();
        const double tol = p_.tol_qp * (1.0 + std::abs(center_model));
        Eigen::VectorXd lambda = initial_multipliers();
        Eigen::VectorXd start = lambda;

        std::vector<double> w, s, grad;
        double gap = 0.0;
        int iterations = 0;
        // Out of iterations or progress: keep the point if its gap is small
        // next to the descent it forecasts, which is all the bundle step needs.
        auto settle = [&](const char* why) {
            MasterSolution sol = assemble(lambda, s, center_model);
            if (!(gap <= tol + 1e-3 * std::max(0.0, sol.forecast()))) throw MasterFailure(why, gap);
            sol.kkt_residual = gap;
            sol.iterations = iterations;
            return sol;
        };
        for (;; ++iterations) {
            compute_w(lambda, w);
            compute_s(w, s);
            compute_grad(s, grad);
            gap = duality_gap(lambda, grad);
            if (gap <= tol) break;
            if (iterations >= p_.max_iterations) return settle("master QP iteration limit reached");

            // The previous partition optimum usually sits on a regular face.
            Eigen::VectorXd target = partition_qp(start, w);
            start = target;
            Eigen::VectorXd dir = target - lambda;
            double alpha = dir.cwiseAbs().maxCoeff() > 0.0 ? line_search(dir, w) : 0.0;
            if (alpha * dir.cwiseAbs().maxCoeff() <= 1e-15) {
                // The partition model made no progress; fall back to a
                // pairwise exchange inside the worst group.
                dir = pairwise_direction(lambda, grad);
                alpha = line_search(dir, w);
                if (alpha * dir.cwiseAbs().maxCoeff() <= 1e-16) return settle("master QP stalled");
            }
            lambda += alpha * dir;
            normalize(lambda);
        }

        MasterSolution sol = assemble(lambda, s, center_model);
        sol.kkt_residual = gap;
        sol.iterations = iterations;
        return sol;
    }

private:
    double model_at_center() const {
        std::vector<double> best(p_.groups, -std::numeric_limits<double>::infinity());
        for (int j = 0; j < m_; ++j) best[group_[j]] = std::max(best[group_[j]], psi_[j]);
        double v = p_.mode == Method::Disaggregate ? capacity_dot(p_.center->values()) : 0.0;
        for (double b : best) v += b;
        return v;
    }

    double capacity_dot(std::span<const double> x) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) acc += p_.capacity[i] * x[i];
        return acc;
    }

    Eigen::VectorXd initial_multipliers() const {
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m_);
        if (static_cast<int>(p_.warm_start.size()) == m_) {
            for (int j = 0; j < m_; ++j) lambda[j] = std::max(0.0, p_.warm_start[j]);
        }
        std::vector<double> sums(p_.groups, 0.0);
        for (int j = 0; j < m_; ++j) sums[group_[j]] += lambda[j];
        std::vector<int> arg(p_.groups, -1);
        for (int j = 0; j < m_; ++j) {
            const int g = group_[j];
            if (arg[g] < 0 || psi_[j] > psi_[arg[g]]) arg[g] = j;
        }
        for (int g = 0; g < p_.groups; ++g)
            if (!(sums[g] > 0.0)) lambda[arg[g]] = 1.0;
        normalize(lambda);
        return lambda;
    }

    void normalize(Eigen::VectorXd& lambda) const {
        std::vector<double> sums(p_.groups, 0.0);
        for (int j = 0; j < m_; ++j) {
            if (lambda[j] < 0.0) lambda[j] = 0.0;
            sums[group_[j]] += lambda[j];
        }
        for (int j = 0; j < m_; ++j) lambda[j] /= sums[group_[j]];
    }

    void compute_w(const Eigen::VectorXd& lambda, std::vector<double>& w) const {
        w = c_;
        for (int j = 0; j < m_; ++j) {
            if (lambda[j] == 0.0) continue;
            const auto& h = h_[j];
            for (std::size_t k = 0; k < h.idx.size(); ++k) w[h.idx[k]] += lambda[j] * h.val[k];
        }
    }

    bool at_bound(double w, double mu) const { return w >= p_.u * mu; }

    void compute_s(const std::vector<double>& w, std::vector<double>& s) const {
        s.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            s[i] = at_bound(w[i], mu_[i]) ? -mu_[i] : -w[i] / p_.u;
    }

    void compute_grad(const std::vector<double>& s, std::vector<double>& grad) const {
        grad.resize(m_);
        for (int j = 0; j < m_; ++j) {
            const auto& h = h_[j];
            double acc = psi_[j];
            for (std::size_t k = 0; k < h.idx.size(); ++k) acc += h.val[k] * s[h.idx[k]];
            grad[j] = acc;
        }
    }

    double duality_gap(const Eigen::VectorXd& lambda, const std::vector<double>& grad) const {
        std::vector<double> best(p_.groups, -std::numeric_limits<double>::infinity());
        for (int j = 0; j < m_; ++j) best[group_[j]] = std::max(best[group_[j]], grad[j]);
        double gap = 0.0;
        for (int j = 0; j < m_; ++j)
            if (lambda[j] > 0.0) gap += lambda[j] * (best[group_[j]] - grad[j]);
        return gap;
    }

    // Maximiser of the dual restricted to the current free/bound partition,
    // scaled by u: min 0.5 l'Hl + f'l with H = sum_{free} h h'.
    Eigen::VectorXd partition_qp(const Eigen::VectorXd& lambda, const std::vector<double>& w) const {
        const std::size_t n = cells_.size();
        if (free_.size() != n) {
            H_ = Eigen::MatrixXd::Zero(m_, m_);
            free_.assign(n, 0);
        }
        // H changes only on cells whose free/bound status flipped.
        for (std::size_t i = 0; i < n; ++i) {
            const char fr = !at_bound(w[i], mu_[i]);
            if (fr == free_[i]) continue;
            free_[i] = fr;
            const double sign = fr ? 1.0 : -1.0;
            for (const auto& [a, va] : by_cell_[i])
                for (const auto& [b, vb] : by_cell_[i]) H_(a, b) += sign * va * vb;
        }

        Eigen::VectorXd f(m_);
        for (int j = 0; j < m_; ++j) {
            const auto& hj = h_[j];
            double lin = 0.0;
            for (std::size_t k = 0; k < hj.idx.size(); ++k) {
                const int i = hj.idx[k];
                lin += (free_[i] ? c_[i] : p_.u * mu_[i]) * hj.val[k];
            }
            f[j] = lin - p_.u * psi_[j];
        }
        return solve_simplex_qp(H_, f, group_, p_.groups, lambda);
    }

    // Exact maximisation of the concave piecewise-quadratic D along dir, alpha in [0, 1].
    double line_search(const Eigen::VectorXd& dir, const std::vector<double>& w) const {
        const std::size_t n = cells_.size();
        std::vector<double> e(n, 0.0);
        double slope = 0.0;  // A in D'(alpha) = A + B alpha
        for (int j = 0; j < m_; ++j) {
            if (dir[j] == 0.0) continue;
            slope += dir[j] * psi_[j];
            const auto& h = h_[j];
            for (std::size_t k = 0; k < h.idx.size(); ++k) e[h.idx[k]] += dir[j] * h.val[k];
        }
        const double u = p_.u;
        double curv = 0.0;  // B
        struct Event {
            double alpha;
            std::size_t cell;
        };
        std::vector<Event> events;
        std::vector<char> free_now(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (e[i] == 0.0) continue;
            const bool fr = !at_bound(w[i], mu_[i]);
            free_now[i] = fr;
            if (fr) {
                slope += -e[i] * w[i] / u;
                curv += -e[i] * e[i] / u;
            } else {
                slope += -e[i] * mu_[i];
            }
            const double brk = (u * mu_[i] - w[i]) / e[i];
            const bool switches = e[i] > 0.0 ? fr : !fr;
            if (switches && brk < 1.0) events.push_back({std::max(0.0, brk), i});
        }
        if (slope <= 0.0 && events.empty()) return 0.0;
        std::sort(events.begin(), events.end(),
                  [](const Event& a, const Event& b) { return a.alpha < b.alpha; });

        double prev = 0.0;
        auto root = [&](double lo, double hi) {
            if (curv < 0.0) return std::clamp(-slope / curv, lo, hi);
            return slope <= 0.0 ? lo : hi;
        };
        for (const Event& ev : events) {
            if (slope + curv * ev.alpha <= 0.0) return root(prev, ev.alpha);
            const std::size_t i = ev.cell;
            if (free_now[i]) {
                slope -= -e[i] * w[i] / u;
                curv -= -e[i] * e[i] / u;
                slope += -e[i] * mu_[i];
            } else {
                slope -= -e[i] * mu_[i];
                slope += -e[i] * w[i] / u;
                curv += -e[i] * e[i] / u;
            }
            free_now[i] = !free_now[i];
            prev = ev.alpha;
        }
        if (slope + curv * 1.0 >= 0.0) return 1.0;
        return root(prev, 1.0);
    }

    Eigen::VectorXd pairwise_direction(const Eigen::VectorXd& lambda,
                                       const std::vector<double>& grad) const {
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(m_);
        double worst_gap = 0.0;
        int from = -1, to = -1;
        for (int g = 0; g < p_.groups; ++g) {
            int best = -1, worst = -1;
            for (int j = 0; j < m_; ++j) {
                if (group_[j] != g) continue;
                if (best < 0 || grad[j] > grad[best]) best = j;
                if (lambda[j] > 0.0 && (worst < 0 || grad[j] < grad[worst])) worst = j;
            }
            if (best >= 0 && worst >= 0) {
                const double gap = lambda[worst] * (grad[best] - grad[worst]);
                if (gap > worst_gap) {
                    worst_gap = gap;
                    from = worst;
                    to = best;
                }
            }
        }
        if (from >= 0) {
            dir[from] = -lambda[from];
            dir[to] = lambda[from];
        }
        return dir;
    }

    MasterSolution assemble(const Eigen::VectorXd& lambda, const std::vector<double>& s_local,
                            double center_model) const {
        const PriceMatrix& center = *p_.center;
        const std::size_t N = center.size();
        const double u = p_.u;
        MasterSolution sol;
        sol.y = PriceMatrix(center.blocks(), center.intervals());
        std::vector<double> s(N);
        auto yv = sol.y.values();
        const auto mu = center.values();
        for (std::size_t i = 0; i < N; ++i) {
            const double wi = kappa_ * p_.capacity[i];
            if (at_bound(wi, mu[i])) {
                s[i] = -mu[i];
                yv[i] = 0.0;
            } else {
                s[i] = -wi / u;
                yv[i] = mu[i] + s[i];
            }
        }
        for (std::size_t k = 0; k < cells_.size(); ++k) {
            const Cell c = cells_[k];
            s[c] = s_local[k];
            yv[c] = s_local[k] == -mu_[k] ? 0.0 : std::max(0.0, mu_[k] + s_local[k]);
        }
        const double cs = capacity_dot(s);
        std::vector<double> best(p_.groups, -std::numeric_limits<double>::infinity());
        for (int j = 0; j < m_; ++j) {
            double v = psi_[j] + (group_has_cap_[group_[j]] > 0 ? cs : 0.0);
            const auto& h = h_[j];
            for (std::size_t k = 0; k < h.idx.size(); ++k) v += h.val[k] * s_local[h.idx[k]];
            best[group_[j]] = std::max(best[group_[j]], v);
        }
        double model = p_.mode == Method::Disaggregate ? capacity_dot(mu) + cs : 0.0;
        for (double b : best) model += b;
        double norm2 = 0.0;
        for (double si : s) norm2 += si * si;

        sol.model_value_at_y = model;
        sol.model_value_at_center = center_model;
        sol.objective = model + 0.5 * u * norm2;
        sol.cut_multipliers.assign(lambda.data(), lambda.data() + m_);
        return sol;
    }

    const MasterProblem& p_;
    int m_ = 0;
    double kappa_ = 0.0;
    std::vector<int> group_has_cap_;
    std::vector<Cell> cells_;
    std::vector<double> c_, mu_;
    std::vector<LocalSparse> h_;
    std::vector<std::vector<std::pair<int, double>>> by_cell_;  // (cut, value) per cell
    std::vector<double> psi_;
    std::vector<int> group_;
    mutable Eigen::MatrixXd H_;  // sum over free cells of h h'
    mutable std::vector<char> free_;
};

}  // namespace

MasterSolution solve_master(const MasterProblem& problem) {
    return DualMaster(problem).solve();
}

double model_value(const MasterProblem& p, const PriceMatrix& mu) {
    if (!p.center || !mu.same_shape(*p.center))
        throw InputError("mu", "dimension mismatch with the master center");
    const auto center = p.center->values();
    const auto x = mu.values();
    std::vector<double> diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - center[i];
    double cdiff = 0.0, cmu = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cdiff += p.capacity[i] * diff[i];
        cmu += p.capacity[i] * x[i];
    }
    std::vector<double> best(p.groups, -std::numeric_limits<double>::infinity());
    for (const MasterCut& c : p.cuts) {
        const double v = c.psi + (c.capacity_term ? cdiff : 0.0) + c.sparse->dot(diff);
        best[c.group] = std::max(best[c.group], v);
    }
    double total = p.mode == Method::Disaggregate ? cmu : 0.0;
    for (double b : best) total += b;
    return total;
}

}  // namespace ttp
