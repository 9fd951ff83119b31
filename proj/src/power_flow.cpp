#include "quadrics/power_flow.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "quadrics/errors.hpp"

namespace quadrics {

void PowerNetwork::validate() const {
    if (node_count < 2) throw ValidationError("network needs at least 2 nodes");
    if (injections.size() != node_count - 1)
        throw ValidationError("injections must have n-1 entries");
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges) {
        if (e.k == e.m) throw ValidationError("self-loop on node " + std::to_string(e.k));
        if (e.k < 0 || e.m < 0 || e.k >= node_count || e.m >= node_count)
            throw ValidationError("edge endpoint out of range");
        auto key = std::minmax(e.k, e.m);
        if (!seen.insert(key).second)
            throw ValidationError("duplicate edge (" + std::to_string(e.k) + "," + std::to_string(e.m) + ")");
    }
    // connectivity
    std::vector<char> reached(node_count, 0);
    std::vector<int> stack{0};
    reached[0] = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const Edge& e : edges) {
            const int other = e.k == v ? e.m : (e.m == v ? e.k : -1);
            if (other >= 0 && !reached[other]) {
                reached[other] = 1;
                stack.push_back(other);
            }
        }
    }
    for (int v = 0; v < node_count; ++v)
        if (!reached[v]) throw ValidationError("network graph is disconnected");
}

RawQuadricForms build_raw_forms(const PowerNetwork& network) {
    network.validate();
    const int n = network.node_count;
    RawQuadricForms raw;
    raw.n = n;
    raw.injections = network.injections;

    Matrix slack = Matrix::Zero(2 * n, 2 * n);
    slack(0, 0) = 1.0;
    raw.power_forms.push_back(std::move(slack));

    for (int k = 1; k < n; ++k) {
        // P_k = sum_m b_km (x_m y_k - x_k y_m)
        Matrix q = Matrix::Zero(2 * n, 2 * n);
        for (const PowerNetwork::Edge& e : network.edges) {
            const int m = e.k == k ? e.m : (e.m == k ? e.k : -1);
            if (m < 0) continue;
            q(m, n + k) += e.b / 2.0;
            q(n + k, m) += e.b / 2.0;
            q(k, n + m) -= e.b / 2.0;
            q(n + m, k) -= e.b / 2.0;
        }
        raw.power_forms.push_back(std::move(q));
    }

    for (int k = 0; k < n; ++k) {
        Matrix s = Matrix::Zero(2 * n, 2 * n);
        s(k, k) = 1.0;
        s(n + k, n + k) = 1.0;
        raw.selector_forms.push_back(std::move(s));
    }
    return raw;
}

namespace {

Matrix symmetric_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

void check_rank(const std::vector<Matrix>& combos) {
    const int count = static_cast<int>(combos.size());
    const int d = static_cast<int>(combos[0].rows());
    Matrix flat(count, d * (d + 1) / 2);
    for (int k = 0; k < count; ++k) {
        int idx = 0;
        for (int r = 0; r < d; ++r)
            for (int c = r; c < d; ++c) flat(k, idx++) = combos[k](r, c);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(flat);
    qr.setThreshold(1e-10);
    if (qr.rank() < count)
        throw RankError("combined forms are linearly dependent as symmetric matrices");
}

} // namespace

QuadricSystem combine_to_definite(const RawQuadricForms& raw, const Matrix& alphas,
                                  const Matrix& betas, const Matrix& gammas) {
    const int n = raw.n;
    if (alphas.rows() != n || alphas.cols() != n || betas.rows() != n || betas.cols() != n ||
        gammas.rows() != n || gammas.cols() != n)
        throw DimensionError("coefficient matrices must be n x n");
    if ((alphas.array() <= 0.0).any()) throw ValidationError("alphas must be strictly positive");
    if ((gammas.array() <= 0.0).any()) throw ValidationError("gammas must be strictly positive");

    std::vector<Matrix> combos;
    Vector rhs(2 * n);
    for (int k = 0; k < n; ++k) {
        Matrix m = Matrix::Zero(2 * n, 2 * n);
        double r = 0.0;
        for (int j = 0; j < n; ++j) {
            m += alphas(j, k) * raw.selector_forms[j];
            r += alphas(j, k); // each selector equation has rhs 1
        }
        combos.push_back(std::move(m));
        rhs[k] = r;
    }
    for (int k = 0; k < n; ++k) {
        Matrix m = Matrix::Zero(2 * n, 2 * n);
        double r = 0.0;
        for (int j = 0; j < n; ++j) {
            m += betas(j, k) * raw.selector_forms[j];
            r += betas(j, k);
        }
        // power_forms[0] is the slack quadric with rhs 1, power_forms[j>=1]
        // is the flow equation with rhs P_j
        m += gammas(0, k) * raw.power_forms[0];
        r += gammas(0, k);
        for (int j = 1; j < n; ++j) {
            m += gammas(j, k) * raw.power_forms[j];
            r += gammas(j, k) * raw.injections[j - 1];
        }
        combos.push_back(std::move(m));
        rhs[n + k] = r;
    }

    for (int k = 0; k < 2 * n; ++k) {
        Eigen::LLT<Matrix> llt(combos[k]);
        if (llt.info() != Eigen::Success)
            throw DefinitenessError("combined matrix " + std::to_string(k) + " is not positive-definite");
        if (rhs[k] <= 0.0)
            throw ValidationError("combined rhs " + std::to_string(k) + " is not positive");
    }
    check_rank(combos);

    QuadricSystem system;
    system.dim = 2 * n;
    system.rhs = rhs;
    for (const Matrix& m : combos) system.factors.push_back(symmetric_sqrt(m));
    system.validate();
    return system;
}

QuadricSystem random_definite_combination(const RawQuadricForms& raw, Rng& rng) {
    const int n = raw.n;
    // Gershgorin bound for the flow couplings: keep gamma small enough that
    // the unit selector diagonal dominates every off-diagonal row sum.
    Matrix abs_sum = raw.power_forms[0].cwiseAbs();
    for (int j = 1; j < n; ++j) abs_sum += raw.power_forms[j].cwiseAbs();
    const double row_max = abs_sum.rowwise().sum().maxCoeff();
    const double gamma_scale = 0.5 / std::max(1.0, row_max);

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < 32; ++attempt) {
        Matrix alphas(n, n), betas(n, n), gammas(n, n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                alphas(j, k) = 1.0 + rng.uniform();
                betas(j, k) = 1.0 + rng.uniform();
                gammas(j, k) = gamma_scale * (0.5 + 0.5 * rng.uniform());
            }
        try {
            return combine_to_definite(raw, alphas, betas, gammas);
        } catch (const DefinitenessError& e) {
            last_error = e.what();
        } catch (const RankError& e) {
            last_error = e.what();
        } catch (const ValidationError& e) {
            last_error = e.what();
        }
    }
    throw DefinitenessError("no admissible combination after 32 attempts: " + last_error);
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> sparsity_pattern(const PowerNetwork& network) {
    network.validate();
    const int n = network.node_count;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(2 * n, 2 * n);
    mask.setConstant(false);
    for (int i = 0; i < 2 * n; ++i) mask(i, i) = true;
    for (const PowerNetwork::Edge& e : network.edges) {
        mask(e.k, n + e.m) = mask(n + e.m, e.k) = true;
        mask(e.m, n + e.k) = mask(n + e.k, e.m) = true;
    }
    return mask;
}

nlohmann::json network_to_json(const PowerNetwork& network) {
    nlohmann::json j;
    j["n"] = network.node_count;
    nlohmann::json edges = nlohmann::json::array();
    for (const PowerNetwork::Edge& e : network.edges) edges.push_back({e.k, e.m, e.b});
    j["edges"] = std::move(edges);
    std::vector<double> p(network.injections.data(),
                          network.injections.data() + network.injections.size());
    j["P"] = p;
    return j;
}

PowerNetwork network_from_json(const nlohmann::json& j) {
    PowerNetwork net;
    net.node_count = j.at("n").get<int>();
    for (const auto& e : j.at("edges"))
        net.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    const auto p = j.at("P").get<std::vector<double>>();
    net.injections = Eigen::Map<const Vector>(p.data(), static_cast<int>(p.size()));
    net.validate();
    return net;
}

PowerNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open: " + path);
    nlohmann::json j;
    in >> j;
    return network_from_json(j);
}

void save_network(const PowerNetwork& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << network_to_json(network).dump(2) << "\n";
}

PowerNetwork random_network(int n, double edge_prob, Rng& rng) {
    PowerNetwork net;
    net.node_count = n;
    std::set<std::pair<int, int>> used;
    for (int v = 1; v < n; ++v) {
        const int parent = static_cast<int>(rng.uniform() * v);
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        net.edges.push_back({parent, v, sign * rng.uniform(0.5, 1.5)});
        used.insert({parent, v});
    }
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (used.count({a, b})) continue;
            if (rng.uniform() < edge_prob) {
                const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
                net.edges.push_back({a, b, sign * rng.uniform(0.5, 1.5)});
            }
        }
    net.injections = Vector(n - 1);
    for (int k = 0; k + 1 < n; ++k) net.injections[k] = rng.uniform(-0.5, 0.5);
    net.validate();
    return net;
}

} // namespace quadrics
