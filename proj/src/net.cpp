#include "eraselab/net.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <utility>

#include "eraselab/errors.hpp"

namespace eraselab {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double softplus(double z) {
    return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0);
}

NetworkWeights NetworkWeights::zeros(int hidden_dim, int num_vars) {
    NetworkWeights w;
    w.hidden_dim = hidden_dim;
    w.num_vars = num_vars;
    w.w1.assign(static_cast<std::size_t>(hidden_dim) * num_vars, 0.0);
    w.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    w.w2.assign(static_cast<std::size_t>(hidden_dim), 0.0);
    w.b2 = 0.0;
    return w;
}

bool NetworkWeights::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return ok(w1) && ok(b1) && ok(w2) && std::isfinite(b2);
}

namespace {
void require_same_shape(const NetworkWeights& a, const NetworkWeights& b) {
    if (!a.same_shape(b))
        throw StructuralError("network shape mismatch: " + std::to_string(a.hidden_dim) + "x" +
                              std::to_string(a.num_vars) + " vs " + std::to_string(b.hidden_dim) +
                              "x" + std::to_string(b.num_vars));
}
} // namespace

NetworkWeights& NetworkWeights::operator+=(const NetworkWeights& o) {
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] += o.w1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += o.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += o.w2[i];
    b2 += o.b2;
    return *this;
}

NetworkWeights& NetworkWeights::operator-=(const NetworkWeights& o) {
    require_same_shape(*this, o);
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] -= o.w1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] -= o.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] -= o.w2[i];
    b2 -= o.b2;
    return *this;
}

NetworkWeights& NetworkWeights::operator*=(double s) {
    for (auto& x : w1) x *= s;
    for (auto& x : b1) x *= s;
    for (auto& x : w2) x *= s;
    b2 *= s;
    return *this;
}

NetworkWeights operator-(NetworkWeights a, const NetworkWeights& b) { return a -= b; }
NetworkWeights operator+(NetworkWeights a, const NetworkWeights& b) { return a += b; }
NetworkWeights operator*(NetworkWeights a, double s) { return a *= s; }

NetworkWeights init_weights(int hidden_dim, int num_vars, std::uint64_t seed) {
    if (hidden_dim < 1 || num_vars < 1)
        throw ConfigError("init_weights needs hidden_dim >= 1 and num_vars >= 1");
    NetworkWeights w = NetworkWeights::zeros(hidden_dim, num_vars);
    Rng rng(seed);
    const double bound1 = 1.0 / std::sqrt(static_cast<double>(num_vars));
    const double bound2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
    for (auto& x : w.w1) x = rng.uniform(-bound1, bound1);
    for (auto& x : w.b1) x = rng.uniform(-bound1, bound1);
    for (auto& x : w.w2) x = rng.uniform(-bound2, bound2);
    w.b2 = rng.uniform(-bound2, bound2);
    return w;
}

double forward_logit(const NetworkWeights& w, std::span<const int> active) {
    double z = w.b2;
    for (int j = 0; j < w.hidden_dim; ++j) {
        double pre = w.b1[static_cast<std::size_t>(j)];
        const double* row = w.w1.data() + static_cast<std::size_t>(j) * w.num_vars;
        for (int i : active) pre += row[i];
        if (pre > 0.0) z += w.w2[static_cast<std::size_t>(j)] * pre;
    }
    return z;
}

double forward_logit(const NetworkWeights& w, const Assignment& a) {
    if (a.size() != w.num_vars)
        throw StructuralError("assignment length " + std::to_string(a.size()) +
                              " != network num_vars " + std::to_string(w.num_vars));
    const auto active = a.active_indices();
    return forward_logit(w, std::span<const int>(active));
}

double forward(const NetworkWeights& w, const Assignment& a) {
    return std::clamp(sigmoid(forward_logit(w, a)), kProbClamp, 1.0 - kProbClamp);
}

TrainData TrainData::from(const Dataset& ds) {
    TrainData d;
    d.num_vars = ds.num_vars;
    d.actives.reserve(ds.samples.size());
    d.targets.reserve(ds.samples.size());
    for (const LabeledSample& s : ds.samples) {
        d.actives.push_back(s.assignment.active_indices());
        d.targets.push_back(s.label ? 1.0 : 0.0);
    }
    return d;
}

LossGrads loss_and_grads(const NetworkWeights& w, const TrainData& data,
                         std::span<const int> batch) {
    if (batch.empty()) throw StructuralError("loss_and_grads needs a nonempty batch");
    if (data.num_vars != w.num_vars)
        throw StructuralError("data num_vars " + std::to_string(data.num_vars) +
                              " != network num_vars " + std::to_string(w.num_vars));

    LossGrads out;
    out.grads = NetworkWeights::zeros(w.hidden_dim, w.num_vars);

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const double inv_temp = 1.0 / data.temperature;
    std::vector<double> pre(static_cast<std::size_t>(w.hidden_dim));

    for (int idx : batch) {
        const auto& active = data.actives[static_cast<std::size_t>(idx)];
        const double q = data.targets[static_cast<std::size_t>(idx)];

        double z = w.b2;
        for (int j = 0; j < w.hidden_dim; ++j) {
            double p = w.b1[static_cast<std::size_t>(j)];
            const double* row = w.w1.data() + static_cast<std::size_t>(j) * w.num_vars;
            for (int i : active) p += row[i];
            pre[static_cast<std::size_t>(j)] = p;
            if (p > 0.0) z += w.w2[static_cast<std::size_t>(j)] * p;
        }

        // BCE of sigmoid(u) against target q, u = z/T:  softplus(u) - q*u.
        const double u = z * inv_temp;
        out.loss += (softplus(u) - q * u) * inv_n;
        const double dz = (sigmoid(u) - q) * inv_temp * inv_n;

        out.grads.b2 += dz;
        for (int j = 0; j < w.hidden_dim; ++j) {
            const double p = pre[static_cast<std::size_t>(j)];
            if (p <= 0.0) continue;
            out.grads.w2[static_cast<std::size_t>(j)] += dz * p;
            const double dpre = dz * w.w2[static_cast<std::size_t>(j)];
            out.grads.b1[static_cast<std::size_t>(j)] += dpre;
            double* grow = out.grads.w1.data() + static_cast<std::size_t>(j) * w.num_vars;
            for (int i : active) grow[i] += dpre;
        }
    }
    return out;
}

LossGrads loss_and_grads(const NetworkWeights& w, const std::vector<LabeledSample>& batch) {
    TrainData data;
    data.num_vars = w.num_vars;
    for (const LabeledSample& s : batch) {
        data.actives.push_back(s.assignment.active_indices());
        data.targets.push_back(s.label ? 1.0 : 0.0);
    }
    std::vector<int> all(batch.size());
    std::iota(all.begin(), all.end(), 0);
    return loss_and_grads(w, data, all);
}

namespace {

// Stop probe invoked every `every` completed steps; returning true ends training.
struct StopCheck {
    int every = 0;
    std::function<bool(const NetworkWeights&, int)> fn;
};

NetworkWeights train_impl(const NetworkWeights& w, const TrainData& data, const TrainConfig& cfg,
                          std::vector<double>* loss_trace, const StopCheck* stop,
                          int* steps_done) {
    if (data.size() == 0) throw ConfigError("train needs a nonempty dataset");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (cfg.steps < 0) throw ConfigError("steps must be nonnegative");
    if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (cfg.loss_sign != 1 && cfg.loss_sign != -1) throw ConfigError("loss_sign must be +1 or -1");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) throw ConfigError("momentum must be in [0,1)");

    NetworkWeights cur = w;
    NetworkWeights vel = NetworkWeights::zeros(w.hidden_dim, w.num_vars);
    Rng rng(derive_seed(cfg.seed, "train-shuffle"));

    const int n = data.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    int pos = n;  // force a shuffle at the first step

    const double step_scale = static_cast<double>(cfg.loss_sign) * cfg.learning_rate;
    int step = 0;
    for (; step < cfg.steps; ++step) {
        if (pos >= n) {
            rng.shuffle(order);
            pos = 0;
        }
        const int take = std::min(cfg.batch_size, n - pos);
        std::span<const int> batch(order.data() + pos, static_cast<std::size_t>(take));
        pos += take;

        LossGrads lg = loss_and_grads(cur, data, batch);
        if (!std::isfinite(lg.loss)) throw TrainingDivergedError(step);
        if (loss_trace) loss_trace->push_back(lg.loss);

        if (cfg.momentum > 0.0) {
            vel *= cfg.momentum;
            vel += lg.grads;
            cur -= vel * step_scale;
        } else {
            cur -= lg.grads * step_scale;
        }

        if (stop && (step + 1) % stop->every == 0 && stop->fn(cur, step + 1)) {
            ++step;
            break;
        }
    }
    if (steps_done) *steps_done = step;
    return cur;
}

// Train-set TPR/TNR at threshold 0.5.
std::pair<double, double> train_rates(const NetworkWeights& w, const TrainData& data) {
    int tp = 0, pos = 0, tn = 0, neg = 0;
    for (int i = 0; i < data.size(); ++i) {
        const double z = forward_logit(w, std::span<const int>(data.actives[static_cast<std::size_t>(i)]));
        const bool predicted = sigmoid(z) > 0.5;
        if (data.targets[static_cast<std::size_t>(i)] > 0.5) {
            ++pos;
            tp += predicted;
        } else {
            ++neg;
            tn += !predicted;
        }
    }
    return {pos ? static_cast<double>(tp) / pos : 0.0, neg ? static_cast<double>(tn) / neg : 0.0};
}

} // namespace

NetworkWeights train(const NetworkWeights& w, const TrainData& data, const TrainConfig& cfg,
                     std::vector<double>* loss_trace) {
    return train_impl(w, data, cfg, loss_trace, nullptr, nullptr);
}

NetworkWeights train(const NetworkWeights& w, const Dataset& ds, const TrainConfig& cfg,
                     std::vector<double>* loss_trace) {
    return train(w, TrainData::from(ds), cfg, loss_trace);
}

BaseTrainResult train_base(const NetworkWeights& w, const Dataset& ds, const TrainConfig& cfg,
                           double stop_tpr, double stop_tnr, int check_every) {
    const TrainData data = TrainData::from(ds);
    BaseTrainResult res;

    StopCheck stop;
    stop.every = check_every;
    stop.fn = [&](const NetworkWeights& cur, int) {
        auto [tpr, tnr] = train_rates(cur, data);
        res.train_tpr = tpr;
        res.train_tnr = tnr;
        return tpr >= stop_tpr && tnr >= stop_tnr;
    };

    res.weights = train_impl(w, data, cfg, nullptr, &stop, &res.steps_run);
    res.early_stopped = res.steps_run < cfg.steps;
    if (res.steps_run == cfg.steps && res.steps_run % check_every != 0) {
        auto [tpr, tnr] = train_rates(res.weights, data);
        res.train_tpr = tpr;
        res.train_tnr = tnr;
    }
    return res;
}

std::vector<NeuronSign> neuron_signs(const NetworkWeights& w) {
    std::vector<NeuronSign> signs(static_cast<std::size_t>(w.hidden_dim));
    for (int j = 0; j < w.hidden_dim; ++j)
        signs[static_cast<std::size_t>(j)] =
            w.w2[static_cast<std::size_t>(j)] >= 0.0 ? NeuronSign::Positive : NeuronSign::Negative;
    return signs;
}

std::vector<double> clause_vector(const NetworkWeights& w, int neuron, const Clause& clause) {
    if (neuron < 0 || neuron >= w.hidden_dim)
        throw StructuralError("neuron index " + std::to_string(neuron) + " out of range");
    std::vector<double> out;
    out.reserve(clause.vars.size());
    for (int v : clause.vars) {
        if (v < 0 || v >= w.num_vars)
            throw StructuralError("clause variable " + std::to_string(v) + " out of range");
        out.push_back(w.w1_at(neuron, v));
    }
    return out;
}

} // namespace eraselab
