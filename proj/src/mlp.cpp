#include "metaxfer/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "metaxfer/arff.hpp"
#include "metaxfer/errors.hpp"

namespace metaxfer {

namespace {

constexpr double kProbFloor = 1e-12;

void he_fill(Matrix& w, size_t fan_in, Prng& rng) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& entry : w.data) entry = rng.normal(0.0, stddev);
}

// out[r] = relu(x.row(r) * w^T + b), w is units x inputs
void dense_relu(const Matrix& x, const Matrix& w, const std::vector<double>& b, Matrix& out) {
    out = Matrix(x.rows, w.rows);
    for (size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row_ptr(r);
        double* or_ = out.row_ptr(r);
        for (size_t u = 0; u < w.rows; ++u) {
            const double* wu = w.row_ptr(u);
            double acc = b[u];
            for (size_t c = 0; c < w.cols; ++c) acc += wu[c] * xr[c];
            or_[u] = acc > 0.0 ? acc : 0.0;
        }
    }
}

void dense_linear(const Matrix& x, const Matrix& w, const std::vector<double>& b, Matrix& out) {
    out = Matrix(x.rows, w.rows);
    for (size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row_ptr(r);
        double* or_ = out.row_ptr(r);
        for (size_t u = 0; u < w.rows; ++u) {
            const double* wu = w.row_ptr(u);
            double acc = b[u];
            for (size_t c = 0; c < w.cols; ++c) acc += wu[c] * xr[c];
            or_[u] = acc;
        }
    }
}

void softmax_rows(Matrix& logits) {
    for (size_t r = 0; r < logits.rows; ++r) {
        double* row = logits.row_ptr(r);
        double max_logit = row[0];
        for (size_t c = 1; c < logits.cols; ++c) max_logit = std::max(max_logit, row[c]);
        double sum = 0.0;
        for (size_t c = 0; c < logits.cols; ++c) {
            row[c] = std::exp(row[c] - max_logit);
            sum += row[c];
        }
        for (size_t c = 0; c < logits.cols; ++c) row[c] /= sum;
    }
}

// grad_w = delta^T * activations, grad_b = column sums of delta
void accumulate_layer_grads(const Matrix& delta, const Matrix& activations, Matrix& grad_w,
                            std::vector<double>& grad_b) {
    grad_w = Matrix(delta.cols, activations.cols);
    grad_b.assign(delta.cols, 0.0);
    for (size_t r = 0; r < delta.rows; ++r) {
        const double* dr = delta.row_ptr(r);
        const double* ar = activations.row_ptr(r);
        for (size_t u = 0; u < delta.cols; ++u) {
            const double d = dr[u];
            if (d == 0.0) continue;
            double* gw = grad_w.row_ptr(u);
            for (size_t c = 0; c < activations.cols; ++c) gw[c] += d * ar[c];
            grad_b[u] += d;
        }
    }
}

// delta_prev = (delta * w) masked by relu'(activation_prev)
void backprop_delta(const Matrix& delta, const Matrix& w, const Matrix& activation_prev,
                    Matrix& delta_prev) {
    delta_prev = Matrix(delta.rows, w.cols);
    for (size_t r = 0; r < delta.rows; ++r) {
        const double* dr = delta.row_ptr(r);
        const double* ap = activation_prev.row_ptr(r);
        double* dp = delta_prev.row_ptr(r);
        for (size_t u = 0; u < delta.cols; ++u) {
            const double d = dr[u];
            if (d == 0.0) continue;
            const double* wu = w.row_ptr(u);
            for (size_t c = 0; c < w.cols; ++c) dp[c] += d * wu[c];
        }
        for (size_t c = 0; c < w.cols; ++c) {
            if (ap[c] <= 0.0) dp[c] = 0.0;
        }
    }
}

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 const TrainConfig& cfg, double bias1, double bias2) {
    for (size_t i = 0; i < param.data.size(); ++i) {
        const double g = grad.data[i];
        m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g;
        v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m.data[i] / bias1;
        const double v_hat = v.data[i] / bias2;
        param.data[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

void adam_update(std::vector<double>& param, const std::vector<double>& grad,
                 std::vector<double>& m, std::vector<double>& v, const TrainConfig& cfg,
                 double bias1, double bias2) {
    for (size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

std::vector<std::vector<double>> matrix_to_nested(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows, std::vector<double>(m.cols));
    for (size_t r = 0; r < m.rows; ++r)
        for (size_t c = 0; c < m.cols; ++c) out[r][c] = m.at(r, c);
    return out;
}

Matrix nested_to_matrix(const nlohmann::json& rows, size_t expect_rows, size_t expect_cols,
                        const std::string& what) {
    if (rows.size() != expect_rows)
        throw ShapeMismatch(what + " has " + std::to_string(rows.size()) + " rows, expected " +
                            std::to_string(expect_rows));
    Matrix m(expect_rows, expect_cols);
    for (size_t r = 0; r < expect_rows; ++r) {
        const auto& row = rows.at(r);
        if (row.size() != expect_cols)
            throw ShapeMismatch(what + " row " + std::to_string(r) + " has " +
                                std::to_string(row.size()) + " columns, expected " +
                                std::to_string(expect_cols));
        for (size_t c = 0; c < expect_cols; ++c) {
            const double v = row.at(c).get<double>();
            if (!std::isfinite(v)) throw ShapeMismatch(what + " contains a non-finite entry");
            m.at(r, c) = v;
        }
    }
    return m;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 must be in [0,1)");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

AdamState AdamState::zeros_like(const MlpModel& model) {
    AdamState s;
    s.m_w1 = Matrix(model.w1.rows, model.w1.cols);
    s.v_w1 = Matrix(model.w1.rows, model.w1.cols);
    s.m_w2 = Matrix(model.w2.rows, model.w2.cols);
    s.v_w2 = Matrix(model.w2.rows, model.w2.cols);
    s.m_w_out = Matrix(model.w_out.rows, model.w_out.cols);
    s.v_w_out = Matrix(model.w_out.rows, model.w_out.cols);
    s.m_b1.assign(model.b1.size(), 0.0);
    s.v_b1.assign(model.b1.size(), 0.0);
    s.m_b2.assign(model.b2.size(), 0.0);
    s.v_b2.assign(model.b2.size(), 0.0);
    s.m_b_out.assign(model.b_out.size(), 0.0);
    s.v_b_out.assign(model.b_out.size(), 0.0);
    return s;
}

MlpModel he_init(const MlpSizes& sizes, Prng& rng) {
    if (sizes.input < 1 || sizes.hidden1 < 1 || sizes.hidden2 < 1 || sizes.classes < 2)
        throw ShapeMismatch("he_init: sizes must be positive with at least 2 classes");
    MlpModel model;
    model.sizes = sizes;
    model.w1 = Matrix(sizes.hidden1, sizes.input);
    model.w2 = Matrix(sizes.hidden2, sizes.hidden1);
    model.w_out = Matrix(sizes.classes, sizes.hidden2);
    model.b1.assign(sizes.hidden1, 0.0);
    model.b2.assign(sizes.hidden2, 0.0);
    model.b_out.assign(sizes.classes, 0.0);
    he_fill(model.w1, sizes.input, rng);
    he_fill(model.w2, sizes.hidden1, rng);
    he_fill(model.w_out, sizes.hidden2, rng);
    return model;
}

Matrix forward(const MlpModel& model, const Matrix& x, ForwardCache* cache) {
    if (x.cols != model.sizes.input)
        throw ShapeMismatch("forward: input has " + std::to_string(x.cols) +
                            " columns, model expects " + std::to_string(model.sizes.input));
    Matrix hidden1, hidden2, logits;
    dense_relu(x, model.w1, model.b1, hidden1);
    dense_relu(hidden1, model.w2, model.b2, hidden2);
    dense_linear(hidden2, model.w_out, model.b_out, logits);
    softmax_rows(logits);
    if (cache) {
        cache->input = x;
        cache->hidden1 = std::move(hidden1);
        cache->hidden2 = std::move(hidden2);
        cache->probabilities = logits;
    }
    return logits;
}

double cross_entropy(const Matrix& probabilities, std::span<const int> y) {
    if (probabilities.rows != y.size())
        throw ShapeMismatch("cross_entropy: batch size mismatch");
    double total = 0.0;
    for (size_t r = 0; r < probabilities.rows; ++r) {
        const double p = std::max(probabilities.at(r, static_cast<size_t>(y[r])), kProbFloor);
        total -= std::log(p);
    }
    return total / static_cast<double>(probabilities.rows);
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const int> y) {
    const size_t n = cache.probabilities.rows;
    if (n != y.size()) throw ShapeMismatch("backward: batch size mismatch");

    Matrix delta_out = cache.probabilities;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (size_t r = 0; r < n; ++r) {
        double* row = delta_out.row_ptr(r);
        row[static_cast<size_t>(y[r])] -= 1.0;
        for (size_t c = 0; c < delta_out.cols; ++c) row[c] *= inv_n;
    }

    Gradients grads;
    accumulate_layer_grads(delta_out, cache.hidden2, grads.w_out, grads.b_out);
    Matrix delta2;
    backprop_delta(delta_out, model.w_out, cache.hidden2, delta2);
    accumulate_layer_grads(delta2, cache.hidden1, grads.w2, grads.b2);
    Matrix delta1;
    backprop_delta(delta2, model.w2, cache.hidden1, delta1);
    accumulate_layer_grads(delta1, cache.input, grads.w1, grads.b1);

    if (model.freeze_mask[0]) {
        std::fill(grads.w1.data.begin(), grads.w1.data.end(), 0.0);
        std::fill(grads.b1.begin(), grads.b1.end(), 0.0);
    }
    if (model.freeze_mask[1]) {
        std::fill(grads.w2.data.begin(), grads.w2.data.end(), 0.0);
        std::fill(grads.b2.begin(), grads.b2.end(), 0.0);
    }
    if (model.freeze_mask[2]) {
        std::fill(grads.w_out.data.begin(), grads.w_out.data.end(), 0.0);
        std::fill(grads.b_out.begin(), grads.b_out.end(), 0.0);
    }
    return grads;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& config) {
    state.timestep += 1;
    const double t = static_cast<double>(state.timestep);
    const double bias1 = 1.0 - std::pow(config.beta1, t);
    const double bias2 = 1.0 - std::pow(config.beta2, t);

    if (!model.freeze_mask[0]) {
        adam_update(model.w1, grads.w1, state.m_w1, state.v_w1, config, bias1, bias2);
        adam_update(model.b1, grads.b1, state.m_b1, state.v_b1, config, bias1, bias2);
    }
    if (!model.freeze_mask[1]) {
        adam_update(model.w2, grads.w2, state.m_w2, state.v_w2, config, bias1, bias2);
        adam_update(model.b2, grads.b2, state.m_b2, state.v_b2, config, bias1, bias2);
    }
    if (!model.freeze_mask[2]) {
        adam_update(model.w_out, grads.w_out, state.m_w_out, state.v_w_out, config, bias1, bias2);
        adam_update(model.b_out, grads.b_out, state.m_b_out, state.v_b_out, config, bias1, bias2);
    }
}

std::vector<double> train(MlpModel& model, const Matrix& x, const std::vector<int>& y,
                          const TrainConfig& config) {
    config.validate();
    if (x.rows != y.size()) throw ShapeMismatch("train: X/y row mismatch");
    if (x.rows == 0) throw ShapeMismatch("train: empty training set");

    AdamState state = AdamState::zeros_like(model);
    std::vector<double> history;
    history.reserve(config.epochs);

    std::vector<size_t> order(x.rows);
    Matrix batch_x;
    std::vector<int> batch_y;
    ForwardCache cache;

    for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Prng epoch_rng(mix_seed(config.seed, epoch));
        epoch_rng.shuffle(order);

        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(start + config.batch_size, order.size());
            const size_t bn = end - start;
            batch_x = Matrix(bn, x.cols);
            batch_y.resize(bn);
            for (size_t i = 0; i < bn; ++i) {
                const size_t src = order[start + i];
                const double* from = x.row_ptr(src);
                double* to = batch_x.row_ptr(i);
                for (size_t c = 0; c < x.cols; ++c) to[c] = from[c];
                batch_y[i] = y[src];
            }
            forward(model, batch_x, &cache);
            loss_sum += cross_entropy(cache.probabilities, batch_y) * static_cast<double>(bn);
            const Gradients grads = backward(model, cache, batch_y);
            adam_step(model, grads, state, config);
        }
        history.push_back(loss_sum / static_cast<double>(x.rows));
    }
    return history;
}

EvalResult evaluate(const MlpModel& model, const Matrix& x, const std::vector<int>& y) {
    if (x.rows != y.size()) throw ShapeMismatch("evaluate: X/y row mismatch");
    if (x.rows == 0) throw ShapeMismatch("evaluate: empty evaluation set");
    const Matrix probs = forward(model, x);
    size_t correct = 0;
    for (size_t r = 0; r < probs.rows; ++r) {
        const double* row = probs.row_ptr(r);
        size_t best = 0;
        for (size_t c = 1; c < probs.cols; ++c) {
            if (row[c] > row[best]) best = c;  // ties keep the smaller index
        }
        if (static_cast<int>(best) == y[r]) ++correct;
    }
    EvalResult result;
    result.accuracy = static_cast<double>(correct) / static_cast<double>(probs.rows);
    result.loss = cross_entropy(probs, y);
    return result;
}

nlohmann::ordered_json serialize_model(const MlpModel& model, const TrainConfig* config_echo) {
    nlohmann::ordered_json doc;
    doc["sizes"] = {{"input", model.sizes.input},
                    {"hidden1", model.sizes.hidden1},
                    {"hidden2", model.sizes.hidden2},
                    {"classes", model.sizes.classes}};
    doc["freeze_mask"] = model.freeze_mask;
    doc["layers"] = nlohmann::ordered_json::array();
    doc["layers"].push_back({{"W", matrix_to_nested(model.w1)}, {"b", model.b1}});
    doc["layers"].push_back({{"W", matrix_to_nested(model.w2)}, {"b", model.b2}});
    doc["layers"].push_back({{"W", matrix_to_nested(model.w_out)}, {"b", model.b_out}});
    if (config_echo) {
        doc["config_echo"] = {{"learning_rate", config_echo->learning_rate},
                              {"epochs", config_echo->epochs},
                              {"batch_size", config_echo->batch_size},
                              {"beta1", config_echo->beta1},
                              {"beta2", config_echo->beta2},
                              {"epsilon", config_echo->epsilon},
                              {"seed", config_echo->seed}};
    } else {
        doc["config_echo"] = nullptr;
    }
    return doc;
}

MlpModel deserialize_model(const nlohmann::json& doc) {
    MlpModel model;
    const auto& sizes = doc.at("sizes");
    model.sizes.input = sizes.at("input").get<size_t>();
    model.sizes.hidden1 = sizes.at("hidden1").get<size_t>();
    model.sizes.hidden2 = sizes.at("hidden2").get<size_t>();
    model.sizes.classes = sizes.at("classes").get<size_t>();

    const auto& mask = doc.at("freeze_mask");
    if (mask.size() != 3) throw ShapeMismatch("freeze_mask must have 3 entries");
    for (size_t i = 0; i < 3; ++i) model.freeze_mask[i] = mask.at(i).get<bool>();

    const auto& layers = doc.at("layers");
    if (layers.size() != 3) throw ShapeMismatch("model must have exactly 3 layers");
    model.w1 = nested_to_matrix(layers.at(0).at("W"), model.sizes.hidden1, model.sizes.input, "W1");
    model.w2 =
        nested_to_matrix(layers.at(1).at("W"), model.sizes.hidden2, model.sizes.hidden1, "W2");
    model.w_out =
        nested_to_matrix(layers.at(2).at("W"), model.sizes.classes, model.sizes.hidden2, "Wout");
    model.b1 = layers.at(0).at("b").get<std::vector<double>>();
    model.b2 = layers.at(1).at("b").get<std::vector<double>>();
    model.b_out = layers.at(2).at("b").get<std::vector<double>>();
    if (model.b1.size() != model.sizes.hidden1 || model.b2.size() != model.sizes.hidden2 ||
        model.b_out.size() != model.sizes.classes)
        throw ShapeMismatch("bias length disagrees with declared sizes");
    for (const auto& b : {model.b1, model.b2, model.b_out}) {
        for (const double v : b) {
            if (!std::isfinite(v)) throw ShapeMismatch("bias contains a non-finite entry");
        }
    }
    return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path,
                const TrainConfig* config_echo) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << serialize_model(model, config_echo).dump(2) << '\n';
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return deserialize_model(nlohmann::json::parse(in));
}

void save_history_csv(std::span<const double> history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,loss\n";
    for (size_t i = 0; i < history.size(); ++i)
        out << i << ',' << format_double(history[i]) << '\n';
}

}  // namespace metaxfer
