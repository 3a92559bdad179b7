#include "trendpu/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trendpu/error.hpp"
#include "trendpu/format.hpp"
#include "trendpu/rng.hpp"

namespace trendpu {

namespace {

double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_input(const ModelParams& params, std::size_t dim) {
    if (dim != params.spec.input_dim) {
        fail(ErrorKind::Shape, "model input has dimension " + std::to_string(dim) + ", expected " +
                                   std::to_string(params.spec.input_dim));
    }
}

bool same_shape(const ModelParams& a, const ModelParams& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l) {
        if (a.layers[l].weights.rows() != b.layers[l].weights.rows() ||
            a.layers[l].weights.cols() != b.layers[l].weights.cols() ||
            a.layers[l].bias.size() != b.layers[l].bias.size()) {
            return false;
        }
    }
    return true;
}

// Per-sample forward pass keeping pre-activations for backprop.
struct Activations {
    std::vector<std::vector<double>> inputs;  // input to each layer
    std::vector<std::vector<double>> pre;     // pre-activation of each layer
};

double forward_cached(const ModelParams& params, std::span<const double> x, Activations* cache) {
    std::vector<double> a(x.begin(), x.end());
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        std::vector<double> z(layer.bias);
        for (std::size_t o = 0; o < z.size(); ++o) {
            const auto w = layer.weights.row(o);
            double acc = z[o];
            for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * a[i];
            z[o] = acc;
        }
        if (cache) {
            cache->inputs.push_back(a);
            cache->pre.push_back(z);
        }
        if (l == last) return sigmoid(z[0]);
        for (auto& v : z) v = std::max(v, 0.0);
        a = std::move(z);
    }
    return 0.5;  // unreachable: there is always an output layer
}

template <class Fn>
void for_each_value(ModelParams& p, Fn&& fn) {
    for (auto& layer : p.layers) {
        for (double& w : layer.weights.values()) fn(w);
        for (double& b : layer.bias) fn(b);
    }
}

}  // namespace

std::size_t ModelParams::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.weights.values().size() + layer.bias.size();
    return n;
}

std::vector<double> ModelParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& layer : layers) {
        flat.insert(flat.end(), layer.weights.values().begin(), layer.weights.values().end());
        flat.insert(flat.end(), layer.bias.begin(), layer.bias.end());
    }
    return flat;
}

void ModelParams::assign_flat(std::span<const double> flat) {
    if (flat.size() != parameter_count()) fail(ErrorKind::Shape, "assign_flat: parameter count mismatch");
    std::size_t k = 0;
    for_each_value(*this, [&](double& v) { v = flat[k++]; });
}

ModelParams zero_params(const ModelSpec& spec) {
    if (spec.input_dim == 0) fail(ErrorKind::Config, "model input_dim must be at least 1");
    ModelParams params;
    params.spec = spec;
    std::size_t fan_in = spec.input_dim;
    for (std::size_t width : spec.hidden_dims) {
        if (width == 0) fail(ErrorKind::Config, "hidden layer widths must be positive");
        params.layers.push_back({Matrix(width, fan_in), std::vector<double>(width, 0.0)});
        fan_in = width;
    }
    params.layers.push_back({Matrix(1, fan_in), std::vector<double>(1, 0.0)});
    return params;
}

ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
    ModelParams params = zero_params(spec);
    Rng rng(seed);
    for (auto& layer : params.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
        for (double& w : layer.weights.values()) w = rng.uniform(-bound, bound);
        for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    }
    return params;
}

double forward(const ModelParams& params, std::span<const double> x) {
    check_input(params, x.size());
    return forward_cached(params, x, nullptr);
}

std::vector<double> predict_scores(const ModelParams& params, const Matrix& features) {
    if (features.rows() > 0) check_input(params, features.cols());
    std::vector<double> p(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) p[r] = 1.0 - forward_cached(params, features.row(r), nullptr);
    return p;
}

double cross_entropy(double q, int y) {
    const double qc = std::clamp(q, kLogClip, 1.0 - kLogClip);
    return y == 1 ? -std::log(qc) : -std::log1p(-qc);
}

double weighted_loss(const ModelParams& params, const Matrix& features, std::span<const int> targets,
                     std::span<const double> weights, Gradients* grad) {
    if (features.rows() != targets.size() || features.rows() != weights.size()) {
        fail(ErrorKind::Shape, "weighted_loss: features, targets and weights disagree in length");
    }
    if (features.rows() > 0) check_input(params, features.cols());
    if (grad) *grad = zero_params(params.spec);

    double loss = 0.0;
    Activations cache;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        cache.inputs.clear();
        cache.pre.clear();
        const double q = forward_cached(params, features.row(r), grad ? &cache : nullptr);
        loss += weights[r] * cross_entropy(q, targets[r]);
        if (!grad) continue;

        // d(CE)/dz at the sigmoid output is q - y.
        std::vector<double> delta{weights[r] * (q - static_cast<double>(targets[r]))};
        for (std::size_t l = params.layers.size(); l-- > 0;) {
            auto& g = grad->layers[l];
            const auto& input = cache.inputs[l];
            for (std::size_t o = 0; o < delta.size(); ++o) {
                auto grow = g.weights.row(o);
                for (std::size_t i = 0; i < input.size(); ++i) grow[i] += delta[o] * input[i];
                g.bias[o] += delta[o];
            }
            if (l == 0) break;
            const auto& w = params.layers[l].weights;
            const auto& below_pre = cache.pre[l - 1];
            std::vector<double> next(below_pre.size(), 0.0);
            for (std::size_t o = 0; o < delta.size(); ++o) {
                const auto wrow = w.row(o);
                for (std::size_t i = 0; i < next.size(); ++i) next[i] += wrow[i] * delta[o];
            }
            for (std::size_t i = 0; i < next.size(); ++i) {
                if (below_pre[i] <= 0.0) next[i] = 0.0;
            }
            delta = std::move(next);
        }
    }
    return loss;
}

namespace {

struct StackedBatch {
    Matrix features;
    std::vector<int> targets;
    std::vector<double> weights;
};

StackedBatch stack_pu_batch(const Matrix& positive_batch, const Matrix& unlabeled_batch) {
    if (positive_batch.rows() == 0 || unlabeled_batch.rows() == 0) {
        fail(ErrorKind::Size, "batch_loss: positive and unlabeled batches must be non-empty");
    }
    if (positive_batch.cols() != unlabeled_batch.cols()) {
        fail(ErrorKind::Shape, "batch_loss: positive and unlabeled batches differ in width");
    }
    StackedBatch s;
    const double wp = 1.0 / static_cast<double>(positive_batch.rows());
    const double wu = 1.0 / static_cast<double>(unlabeled_batch.rows());
    for (std::size_t r = 0; r < positive_batch.rows(); ++r) {
        s.features.append_row(positive_batch.row(r));
        s.targets.push_back(0);
        s.weights.push_back(wp);
    }
    for (std::size_t r = 0; r < unlabeled_batch.rows(); ++r) {
        s.features.append_row(unlabeled_batch.row(r));
        s.targets.push_back(1);
        s.weights.push_back(wu);
    }
    return s;
}

}  // namespace

double batch_loss(const ModelParams& params, const Matrix& positive_batch, const Matrix& unlabeled_batch) {
    const auto s = stack_pu_batch(positive_batch, unlabeled_batch);
    return weighted_loss(params, s.features, s.targets, s.weights);
}

Gradients backward(const ModelParams& params, const Matrix& positive_batch, const Matrix& unlabeled_batch) {
    const auto s = stack_pu_batch(positive_batch, unlabeled_batch);
    Gradients g;
    weighted_loss(params, s.features, s.targets, s.weights, &g);
    return g;
}

double batch_loss_and_gradient(const ModelParams& params, const Matrix& positive_batch, const Matrix& unlabeled_batch,
                               Gradients& grad) {
    const auto s = stack_pu_batch(positive_batch, unlabeled_batch);
    return weighted_loss(params, s.features, s.targets, s.weights, &grad);
}

AdamState make_adam_state(const ModelParams& params, const AdamConfig& config) {
    if (!(config.learning_rate > 0.0)) fail(ErrorKind::Config, "Adam learning rate must be positive");
    AdamState state;
    state.config = config;
    state.first_moment = zero_params(params.spec);
    state.second_moment = zero_params(params.spec);
    return state;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state) {
    if (!same_shape(params, grads) || !same_shape(params, state.first_moment) ||
        !same_shape(params, state.second_moment)) {
        fail(ErrorKind::Shape, "adam_step: parameter, gradient and moment shapes disagree");
    }
    const auto g = grads.flatten();
    for (double v : g) {
        if (!std::isfinite(v)) fail(ErrorKind::Numeric, "adam_step: non-finite gradient");
    }
    auto theta = params.flatten();
    auto m = state.first_moment.flatten();
    auto v = state.second_moment.flatten();
    const auto& c = state.config;

    ++state.step;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
        v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
        const double m_hat = m[k] / bc1;
        const double v_hat = v[k] / bc2;
        theta[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
    params.assign_flat(theta);
    state.first_moment.assign_flat(m);
    state.second_moment.assign_flat(v);
}

// Checkpoint format (comma separated text):
//   trendpu-model,1
//   input_dim,<d>
//   hidden_dims[,<w>...]
//   layer,kind,row,col,value        <- column header
//   <l>,w,<r>,<c>,<value>  /  <l>,b,<r>,0,<value>
void save_checkpoint(const ModelParams& params, std::ostream& out) {
    out << "trendpu-model,1\n";
    out << "input_dim," << params.spec.input_dim << '\n';
    out << "hidden_dims";
    for (auto w : params.spec.hidden_dims) out << ',' << w;
    out << '\n' << "layer,kind,row,col,value\n";
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        const auto& layer = params.layers[l];
        for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
            for (std::size_t c = 0; c < layer.weights.cols(); ++c) {
                out << l << ",w," << r << ',' << c << ',' << format_real(layer.weights(r, c)) << '\n';
            }
        }
        for (std::size_t r = 0; r < layer.bias.size(); ++r) {
            out << l << ",b," << r << ",0," << format_real(layer.bias[r]) << '\n';
        }
    }
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot open checkpoint for writing: " + path);
    save_checkpoint(params, out);
}

ModelParams load_checkpoint(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_fields = [&]() {
        if (!std::getline(in, line)) fail(ErrorKind::Parse, "checkpoint truncated at line " + std::to_string(line_no + 1));
        ++line_no;
        return split_csv_line(line);
    };
    auto bad = [&](const std::string& why) -> void {
        fail(ErrorKind::Parse, "checkpoint line " + std::to_string(line_no) + ": " + why);
    };

    auto f = next_fields();
    if (f.size() != 2 || f[0] != "trendpu-model" || f[1] != "1") bad("expected 'trendpu-model,1'");
    f = next_fields();
    if (f.size() != 2 || f[0] != "input_dim") bad("expected input_dim");
    ModelSpec spec;
    spec.input_dim = parse_size(f[1], line_no);
    f = next_fields();
    if (f.empty() || f[0] != "hidden_dims") bad("expected hidden_dims");
    for (std::size_t i = 1; i < f.size(); ++i) spec.hidden_dims.push_back(parse_size(f[i], line_no));
    f = next_fields();
    if (f.size() != 5 || f[0] != "layer") bad("expected column header");

    ModelParams params = zero_params(spec);
    std::size_t filled = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        f = split_csv_line(line);
        if (f.size() != 5) bad("expected 5 fields");
        const auto l = parse_size(f[0], line_no);
        const auto r = parse_size(f[2], line_no);
        const auto c = parse_size(f[3], line_no);
        const double value = parse_real(f[4], line_no);
        if (l >= params.layers.size()) bad("layer index out of range");
        auto& layer = params.layers[l];
        double* slot = nullptr;
        if (f[1] == "w") {
            if (r >= layer.weights.rows() || c >= layer.weights.cols()) bad("weight index out of range");
            slot = &layer.weights(r, c);
        } else if (f[1] == "b") {
            if (r >= layer.bias.size() || c != 0) bad("bias index out of range");
            slot = &layer.bias[r];
        } else {
            bad("kind must be w or b");
        }
        *slot = value;
        ++filled;
    }
    if (filled != params.parameter_count()) {
        fail(ErrorKind::Parse, "checkpoint has " + std::to_string(filled) + " values, expected " +
                                   std::to_string(params.parameter_count()));
    }
    return params;
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open checkpoint: " + path);
    return load_checkpoint(in);
}

}  // namespace trendpu
