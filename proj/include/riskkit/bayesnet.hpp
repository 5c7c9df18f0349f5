#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "riskkit/copula.hpp"
#include "riskkit/distribution.hpp"
#include "riskkit/doe.hpp"
#include "riskkit/expr.hpp"
#include "riskkit/rng.hpp"

namespace riskkit {

// ---- deterministic function library -----------------------------------

using DetFn = std::function<double(std::span<const double>)>;

inline std::map<std::string, DetFn>& function_registry() {
    static std::map<std::string, DetFn> reg;
    return reg;
}

inline void register_function(const std::string& name, DetFn fn) {
    function_registry()[name] = std::move(fn);
}

// ---- node kinds --------------------------------------------------------

struct MarginalSpec {
    Distribution dist;
};

// Expanded at build time into one column per member, sampled jointly.
struct CopulaGroupSpec {
    JointModel joint;
    std::vector<std::string> members;
};

struct CategoricalSpec {
    std::vector<std::string> labels;
    std::vector<double> probs;  // label i sampled as value i
};

enum class OutputTransform { none, exp_out, abs_out };

// y = T(sum_j beta_j * term_j(parents) + noise); if the failure parent fires,
// the node emits the sentinel instead (failure mixture).
struct RegressionSpec {
    ModelTerms terms;  // over the non-failure parents, in declared order
    Eigen::VectorXd beta;
    Distribution noise;
    OutputTransform transform = OutputTransform::none;
    std::string failure_parent;  // empty = pure continuous node
    double sentinel = 0.0;
};

// Bernoulli failure indicator; with a common-cause parent the probability is
// conditional on the parent's own indicator.
struct FailureSpec {
    double p = 0.0;
    std::string cause_parent;  // empty = independent
    double p_given_0 = 0.0;
    double p_given_1 = 0.0;
};

struct DeterministicSpec {
    std::string function;                    // registered function name, or
    std::shared_ptr<Expression> expression;  // restricted arithmetic expression
};

// Emits the injury probability logistic(b0 + b1 * parent0); when a gate parent
// is present (parent1), a non-positive gate value means no collision -> 0.
struct InjurySpec {
    double b0 = 0.0;
    double b1 = 0.0;
    bool gated = false;
};

using NodeSpec = std::variant<MarginalSpec, CopulaGroupSpec, CategoricalSpec, RegressionSpec,
                              FailureSpec, DeterministicSpec, InjurySpec>;

struct BnNode {
    std::string name;
    std::vector<std::string> parents;
    NodeSpec spec;
};

struct GraphError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---- compiled graph ----------------------------------------------------

namespace detail {

struct CompiledNode {
    std::string name;
    std::vector<int> parents;  // column indices
    NodeSpec spec;
    // copula-group members:
    int group_index = -1;                      // position within the group
    std::shared_ptr<JointModel> group_joint;   // shared by all members
    std::string group_name;
    bool stochastic = true;
    int failure_parent_col = -1;  // regression failure mixture
    int cause_parent_col = -1;    // failure common cause
};

}  // namespace detail

struct SampleTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // column-major, topological order
    std::uint64_t seed = 0;

    size_t rows() const { return data.empty() ? 0 : data[0].size(); }

    const std::vector<double>& column(const std::string& name) const {
        for (size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return data[j];
        throw std::invalid_argument("no such column: " + name);
    }
};

class BnGraph {
public:
    // Validates and compiles a node list; copula groups are expanded into one
    // column per member.
    static BnGraph build(const std::vector<BnNode>& specs);

    const std::vector<std::string>& topological_order() const { return topo_names_; }
    size_t node_count() const { return nodes_.size(); }

    SampleTable ancestral_sample(size_t n, std::uint64_t seed, int workers = 1) const;

    // Sum of log conditional densities/masses at a full assignment of the
    // stochastic nodes (deterministic nodes are recomputed).
    double log_density(const std::map<std::string, double>& assignment) const;

private:
    std::vector<detail::CompiledNode> nodes_;  // in topological order
    std::vector<std::string> topo_names_;

    void sample_block(std::vector<std::vector<double>>& cols, size_t row0, size_t count,
                      std::uint64_t seed, std::uint64_t block) const;
};

// ---- implementation ----------------------------------------------------

namespace detail {

inline bool is_stochastic(const NodeSpec& s) {
    return !std::holds_alternative<DeterministicSpec>(s) &&
           !std::holds_alternative<InjurySpec>(s);
}

}  // namespace detail

inline BnGraph BnGraph::build(const std::vector<BnNode>& specs) {
    // Expand copula groups into member columns at the declaration position.
    struct Raw {
        std::string name;
        std::vector<std::string> parents;
        NodeSpec spec;
        int group_index = -1;
        std::shared_ptr<JointModel> joint;
        std::string group_name;
    };
    std::vector<Raw> raw;
    for (const auto& s : specs) {
        if (const auto* g = std::get_if<CopulaGroupSpec>(&s.spec)) {
            if (g->members.empty()) throw GraphError("copula group " + s.name + " has no members");
            if (static_cast<long>(g->members.size()) != g->joint.copula.dimension() ||
                g->members.size() != g->joint.marginals.size())
                throw GraphError("copula group " + s.name +
                                 ": member count must match joint dimension");
            auto joint = std::make_shared<JointModel>(g->joint);
            for (size_t i = 0; i < g->members.size(); ++i) {
                Raw r{g->members[i], s.parents, s.spec, static_cast<int>(i), joint, s.name};
                raw.push_back(std::move(r));
            }
        } else {
            raw.push_back({s.name, s.parents, s.spec, -1, nullptr, ""});
        }
    }

    std::map<std::string, int> index;
    for (size_t i = 0; i < raw.size(); ++i) {
        if (!index.emplace(raw[i].name, static_cast<int>(i)).second)
            throw GraphError("duplicate node name: " + raw[i].name);
    }

    // Validate parents and per-kind structure.
    for (const auto& r : raw) {
        for (const auto& p : r.parents)
            if (!index.count(p))
                throw GraphError("node " + r.name + ": unknown parent " + p);
        if (const auto* c = std::get_if<CategoricalSpec>(&r.spec)) {
            if (c->probs.empty() || c->probs.size() != c->labels.size())
                throw GraphError("node " + r.name + ": labels and probabilities must align");
            double sum = 0;
            for (double q : c->probs) {
                if (q < 0) throw GraphError("node " + r.name + ": negative probability");
                sum += q;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw GraphError("node " + r.name + ": probability mass " + std::to_string(sum) +
                                 " != 1");
        }
        if (const auto* g = std::get_if<RegressionSpec>(&r.spec)) {
            size_t value_parents = r.parents.size() - (g->failure_parent.empty() ? 0 : 1);
            if (!g->failure_parent.empty() &&
                std::find(r.parents.begin(), r.parents.end(), g->failure_parent) ==
                    r.parents.end())
                throw GraphError("node " + r.name + ": failure parent " + g->failure_parent +
                                 " not among parents");
            if (g->beta.size() != static_cast<long>(g->terms.size()))
                throw GraphError("node " + r.name + ": coefficient/term count mismatch");
            for (const auto& t : g->terms)
                for (int f : t.factors)
                    if (f < 0 || f >= static_cast<int>(value_parents))
                        throw GraphError("node " + r.name + ": term " + t.name +
                                         " references parent index " + std::to_string(f) +
                                         " out of range");
        }
        if (const auto* f = std::get_if<FailureSpec>(&r.spec)) {
            if (!f->cause_parent.empty() &&
                std::find(r.parents.begin(), r.parents.end(), f->cause_parent) ==
                    r.parents.end())
                throw GraphError("node " + r.name + ": common-cause parent " + f->cause_parent +
                                 " not among parents");
        }
        if (const auto* d = std::get_if<DeterministicSpec>(&r.spec)) {
            if (d->function.empty() == !d->expression)
                throw GraphError("node " + r.name +
                                 ": deterministic node needs a function or an expression");
            if (!d->function.empty() && !function_registry().count(d->function))
                throw GraphError("node " + r.name + ": unregistered function " + d->function);
        }
        if (const auto* inj = std::get_if<InjurySpec>(&r.spec)) {
            size_t need = inj->gated ? 2 : 1;
            if (r.parents.size() != need)
                throw GraphError("node " + r.name + ": injury node needs " +
                                 std::to_string(need) + " parent(s)");
        }
    }

    // Kahn's algorithm; ready nodes processed in declaration order.
    std::vector<std::vector<int>> children(raw.size());
    std::vector<int> indegree(raw.size(), 0);
    for (size_t i = 0; i < raw.size(); ++i)
        for (const auto& p : raw[i].parents) {
            children[static_cast<size_t>(index[p])].push_back(static_cast<int>(i));
            ++indegree[i];
        }
    std::vector<int> order;
    std::vector<int> deg = indegree;
    for (size_t pass = 0; order.size() < raw.size(); ++pass) {
        int picked = -1;
        for (size_t i = 0; i < raw.size(); ++i)
            if (deg[i] == 0) {
                picked = static_cast<int>(i);
                break;
            }
        if (picked < 0) {
            // Report one cycle: walk parents from any remaining node.
            int start = -1;
            for (size_t i = 0; i < raw.size(); ++i)
                if (deg[i] >= 0) {
                    start = static_cast<int>(i);
                    break;
                }
            std::vector<int> path;
            std::vector<bool> seen(raw.size(), false);
            int cur = start;
            while (!seen[static_cast<size_t>(cur)]) {
                seen[static_cast<size_t>(cur)] = true;
                path.push_back(cur);
                // follow any parent still in the residual graph
                int next = -1;
                for (const auto& p : raw[static_cast<size_t>(cur)].parents) {
                    int pi = index[p];
                    if (deg[static_cast<size_t>(pi)] >= 0) {
                        next = pi;
                        break;
                    }
                }
                cur = next;
            }
            std::string cyc;
            bool in = false;
            for (int i : path) {
                if (i == cur) in = true;
                if (in) cyc += raw[static_cast<size_t>(i)].name + " <- ";
            }
            cyc += raw[static_cast<size_t>(cur)].name;
            throw GraphError("cycle detected: " + cyc);
        }
        order.push_back(picked);
        deg[static_cast<size_t>(picked)] = -1;
        for (int c : children[static_cast<size_t>(picked)]) --deg[static_cast<size_t>(c)];
    }

    BnGraph g;
    std::map<std::string, int> topo_index;
    for (size_t pos = 0; pos < order.size(); ++pos)
        topo_index[raw[static_cast<size_t>(order[pos])].name] = static_cast<int>(pos);
    for (int i : order) {
        const Raw& r = raw[static_cast<size_t>(i)];
        detail::CompiledNode cn;
        cn.name = r.name;
        cn.spec = r.spec;
        cn.group_index = r.group_index;
        cn.group_joint = r.joint;
        cn.group_name = r.group_name;
        cn.stochastic = detail::is_stochastic(r.spec);
        for (const auto& p : r.parents) cn.parents.push_back(topo_index[p]);
        if (const auto* reg = std::get_if<RegressionSpec>(&r.spec)) {
            if (!reg->failure_parent.empty())
                cn.failure_parent_col = topo_index[reg->failure_parent];
        }
        if (const auto* f = std::get_if<FailureSpec>(&r.spec)) {
            if (!f->cause_parent.empty()) cn.cause_parent_col = topo_index[f->cause_parent];
        }
        if (auto* d = std::get_if<DeterministicSpec>(&cn.spec)) {
            if (d->expression) d->expression->bind(r.parents);
        }
        g.nodes_.push_back(std::move(cn));
        g.topo_names_.push_back(r.name);
    }
    return g;
}

inline void BnGraph::sample_block(std::vector<std::vector<double>>& cols, size_t row0,
                                  size_t count, std::uint64_t seed,
                                  std::uint64_t block) const {
    const boost::math::normal_distribution<> std_normal;
    // One substream per stochastic node (and per copula group) per block.
    std::vector<std::unique_ptr<RngStream>> streams(nodes_.size());
    std::map<std::string, std::unique_ptr<RngStream>> group_streams;
    std::map<std::string, Eigen::LLT<Eigen::MatrixXd>> group_chol;
    for (size_t j = 0; j < nodes_.size(); ++j) {
        const auto& nd = nodes_[j];
        if (!nd.stochastic) continue;
        if (nd.group_joint) {
            if (!group_streams.count(nd.group_name)) {
                group_streams[nd.group_name] =
                    std::make_unique<RngStream>(seed, nd.group_name, block);
                long d = nd.group_joint->copula.dimension();
                group_chol[nd.group_name] =
                    Eigen::LLT<Eigen::MatrixXd>(nd.group_joint->copula.sigma +
                                                1e-12 * Eigen::MatrixXd::Identity(d, d));
            }
        } else {
            streams[j] = std::make_unique<RngStream>(seed, nd.name, block);
        }
    }

    std::vector<double> row(nodes_.size());
    std::map<std::string, Eigen::VectorXd> group_cache;
    std::vector<double> parent_vals;
    for (size_t r = 0; r < count; ++r) {
        group_cache.clear();
        for (size_t j = 0; j < nodes_.size(); ++j) {
            const auto& nd = nodes_[j];
            parent_vals.clear();
            for (int p : nd.parents) parent_vals.push_back(row[static_cast<size_t>(p)]);
            double value = 0;
            if (const auto* m = std::get_if<MarginalSpec>(&nd.spec)) {
                value = quantile(m->dist, streams[j]->uniform01());
            } else if (nd.group_joint) {
                auto it = group_cache.find(nd.group_name);
                if (it == group_cache.end()) {
                    const auto& joint = *nd.group_joint;
                    long d = joint.copula.dimension();
                    Eigen::VectorXd z(d);
                    auto& gs = *group_streams[nd.group_name];
                    for (long l = 0; l < d; ++l)
                        z[l] = boost::math::quantile(std_normal, gs.uniform01());
                    Eigen::VectorXd x = Eigen::MatrixXd(group_chol[nd.group_name].matrixL()) * z;
                    Eigen::VectorXd phys(d);
                    for (long l = 0; l < d; ++l)
                        phys[l] = quantile(joint.marginals[static_cast<size_t>(l)],
                                           boost::math::cdf(std_normal, x[l]));
                    it = group_cache.emplace(nd.group_name, std::move(phys)).first;
                }
                value = it->second[nd.group_index];
            } else if (const auto* c = std::get_if<CategoricalSpec>(&nd.spec)) {
                double u = streams[j]->uniform01();
                double acc = 0;
                size_t k = 0;
                for (; k < c->probs.size(); ++k) {
                    acc += c->probs[k];
                    if (u <= acc) break;
                }
                value = static_cast<double>(std::min(k, c->probs.size() - 1));
            } else if (const auto* f = std::get_if<FailureSpec>(&nd.spec)) {
                double p = f->p;
                if (nd.cause_parent_col >= 0)
                    p = row[static_cast<size_t>(nd.cause_parent_col)] > 0.5 ? f->p_given_1
                                                                            : f->p_given_0;
                value = streams[j]->uniform01() < p ? 1.0 : 0.0;
            } else if (const auto* reg = std::get_if<RegressionSpec>(&nd.spec)) {
                // Always draw the noise so the stream position does not depend
                // on the failure indicator.
                double noise = quantile(reg->noise, streams[j]->uniform01());
                if (nd.failure_parent_col >= 0 &&
                    row[static_cast<size_t>(nd.failure_parent_col)] > 0.5) {
                    value = reg->sentinel;
                } else {
                    std::vector<double> vp;
                    for (int p : nd.parents)
                        if (p != nd.failure_parent_col) vp.push_back(row[static_cast<size_t>(p)]);
                    Eigen::RowVectorXd xr =
                        Eigen::Map<const Eigen::RowVectorXd>(vp.data(), static_cast<long>(vp.size()));
                    double mean = 0;
                    for (size_t t = 0; t < reg->terms.size(); ++t)
                        mean += reg->beta[static_cast<long>(t)] * reg->terms[t].eval(xr);
                    double y = mean + noise;
                    if (reg->transform == OutputTransform::exp_out) y = std::exp(y);
                    if (reg->transform == OutputTransform::abs_out) y = std::abs(y);
                    value = y;
                }
            } else if (const auto* d = std::get_if<DeterministicSpec>(&nd.spec)) {
                try {
                    value = d->expression ? d->expression->eval(parent_vals)
                                          : function_registry().at(d->function)(parent_vals);
                } catch (const std::exception& e) {
                    throw std::runtime_error("deterministic node " + nd.name + ", row " +
                                             std::to_string(row0 + r) + ": " + e.what());
                }
                if (!std::isfinite(value))
                    throw std::runtime_error("deterministic node " + nd.name + ", row " +
                                             std::to_string(row0 + r) +
                                             ": non-finite result");
            } else if (const auto* inj = std::get_if<InjurySpec>(&nd.spec)) {
                if (inj->gated && parent_vals[1] <= 0.0) {
                    value = 0.0;
                } else {
                    value = 1.0 / (1.0 + std::exp(-(inj->b0 + inj->b1 * parent_vals[0])));
                }
            }
            row[j] = value;
            cols[j][row0 + r] = value;
        }
    }
}

inline SampleTable BnGraph::ancestral_sample(size_t n, std::uint64_t seed, int workers) const {
    constexpr size_t kBlock = 16384;  // fixed so worker count never changes results
    SampleTable t;
    t.seed = seed;
    t.columns = topo_names_;
    t.data.assign(nodes_.size(), std::vector<double>(n));

    const size_t blocks = n == 0 ? 0 : (n + kBlock - 1) / kBlock;
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&](size_t w) {
        try {
            for (size_t b = w; b < blocks; b += static_cast<size_t>(workers)) {
                size_t row0 = b * kBlock;
                size_t count = std::min(kBlock, n - row0);
                sample_block(t.data, row0, count, seed, b);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lk(err_mu);
            if (!err) err = std::current_exception();
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(work, static_cast<size_t>(w));
        for (auto& th : threads) th.join();
    }
    if (err) std::rethrow_exception(err);
    return t;
}

inline double BnGraph::log_density(const std::map<std::string, double>& assignment) const {
    const boost::math::normal_distribution<> std_normal;
    std::vector<double> row(nodes_.size());
    double lp = 0;
    std::map<std::string, bool> group_done;
    std::vector<double> parent_vals;

    for (size_t j = 0; j < nodes_.size(); ++j) {
        const auto& nd = nodes_[j];
        parent_vals.clear();
        for (int p : nd.parents) parent_vals.push_back(row[static_cast<size_t>(p)]);

        if (!nd.stochastic) {
            // recompute deterministic/injury values
            if (const auto* d = std::get_if<DeterministicSpec>(&nd.spec)) {
                row[j] = d->expression ? d->expression->eval(parent_vals)
                                       : function_registry().at(d->function)(parent_vals);
            } else if (const auto* inj = std::get_if<InjurySpec>(&nd.spec)) {
                row[j] = (inj->gated && parent_vals[1] <= 0.0)
                             ? 0.0
                             : 1.0 / (1.0 + std::exp(-(inj->b0 + inj->b1 * parent_vals[0])));
            }
            continue;
        }

        auto it = assignment.find(nd.name);
        if (it == assignment.end())
            throw std::invalid_argument("log_density: missing assignment for node " + nd.name);
        double x = it->second;
        row[j] = x;

        if (const auto* m = std::get_if<MarginalSpec>(&nd.spec)) {
            lp += log_pdf(m->dist, x);
        } else if (nd.group_joint) {
            if (!group_done[nd.group_name]) {
                group_done[nd.group_name] = true;
                const auto& joint = *nd.group_joint;
                long d = joint.copula.dimension();
                Eigen::VectorXd z(d);
                // collect all member values (they are consecutive in topo order
                // only by construction; find them by group name)
                long idx = 0;
                for (size_t l = j; l < nodes_.size() && idx < d; ++l) {
                    if (nodes_[l].group_name == nd.group_name) {
                        auto mit = assignment.find(nodes_[l].name);
                        if (mit == assignment.end())
                            throw std::invalid_argument("log_density: missing assignment for " +
                                                        nodes_[l].name);
                        double mv = mit->second;
                        long gi = nodes_[l].group_index;
                        double u = cdf(joint.marginals[static_cast<size_t>(gi)], mv);
                        u = std::clamp(u, 1e-15, 1.0 - 1e-15);
                        z[gi] = boost::math::quantile(std_normal, u);
                        lp += log_pdf(joint.marginals[static_cast<size_t>(gi)], mv);
                        ++idx;
                    }
                }
                Eigen::MatrixXd sigma = joint.copula.sigma;
                Eigen::LLT<Eigen::MatrixXd> llt(sigma);
                double logdet = 0;
                Eigen::MatrixXd L = llt.matrixL();
                for (long l = 0; l < d; ++l) logdet += 2.0 * std::log(L(l, l));
                Eigen::VectorXd w = llt.solve(z);
                lp += -0.5 * (z.dot(w) - z.squaredNorm()) - 0.5 * logdet;
            }
        } else if (const auto* c = std::get_if<CategoricalSpec>(&nd.spec)) {
            long k = std::lround(x);
            if (k < 0 || k >= static_cast<long>(c->probs.size()) || std::abs(x - k) > 1e-9)
                return -std::numeric_limits<double>::infinity();
            lp += std::log(c->probs[static_cast<size_t>(k)]);
        } else if (const auto* f = std::get_if<FailureSpec>(&nd.spec)) {
            double p = f->p;
            if (nd.cause_parent_col >= 0)
                p = row[static_cast<size_t>(nd.cause_parent_col)] > 0.5 ? f->p_given_1
                                                                        : f->p_given_0;
            if (x > 0.5)
                lp += std::log(p);
            else
                lp += std::log1p(-p);
        } else if (const auto* reg = std::get_if<RegressionSpec>(&nd.spec)) {
            if (nd.failure_parent_col >= 0 &&
                row[static_cast<size_t>(nd.failure_parent_col)] > 0.5) {
                if (x != reg->sentinel) return -std::numeric_limits<double>::infinity();
                continue;  // point mass, log 1
            }
            std::vector<double> vp;
            for (int p : nd.parents)
                if (p != nd.failure_parent_col) vp.push_back(row[static_cast<size_t>(p)]);
            Eigen::RowVectorXd xr =
                Eigen::Map<const Eigen::RowVectorXd>(vp.data(), static_cast<long>(vp.size()));
            double mean = 0;
            for (size_t t = 0; t < reg->terms.size(); ++t)
                mean += reg->beta[static_cast<long>(t)] * reg->terms[t].eval(xr);
            switch (reg->transform) {
                case OutputTransform::none:
                    lp += log_pdf(reg->noise, x - mean);
                    break;
                case OutputTransform::exp_out:
                    if (x <= 0) return -std::numeric_limits<double>::infinity();
                    lp += log_pdf(reg->noise, std::log(x) - mean) - std::log(x);
                    break;
                case OutputTransform::abs_out: {
                    double v = pdf(reg->noise, x - mean) + pdf(reg->noise, -x - mean);
                    lp += v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
                    break;
                }
            }
        }
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    }
    return lp;
}

}  // namespace riskkit
