#include "airfl/flcore.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace airfl {

namespace {

constexpr std::uint64_t kCheckpointMagic = 0x4c444d4c46524941ull;  // "AIRFLMDL"

struct LayerView {
    Eigen::Map<Eigen::MatrixXd> weight;
    Eigen::Map<Eigen::VectorXd> bias;
};

template <typename Vec>
std::vector<LayerView> make_views(Vec& theta, const Architecture& arch) {
    std::vector<LayerView> views;
    double* base = const_cast<double*>(theta.data());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < arch.sizes.size(); ++l) {
        const Eigen::Index rows = arch.sizes[l + 1];
        const Eigen::Index cols = arch.sizes[l];
        views.push_back({Eigen::Map<Eigen::MatrixXd>(base + off, rows, cols),
                         Eigen::Map<Eigen::VectorXd>(base + off + rows * cols, rows)});
        off += rows * cols + rows;
    }
    return views;
}

// Forward pass for a batch (columns = samples); activations[0] is the input,
// the last entry holds raw logits.
std::vector<Eigen::MatrixXd> forward(const std::vector<LayerView>& layers,
                                     const Eigen::MatrixXd& input) {
    std::vector<Eigen::MatrixXd> act;
    act.reserve(layers.size() + 1);
    act.push_back(input);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        Eigen::MatrixXd z =
            (layers[l].weight * act.back()).colwise() + layers[l].bias;
        if (l + 1 < layers.size()) z = z.cwiseMax(0.0);  // ReLU on hidden layers
        act.push_back(std::move(z));
    }
    return act;
}

// Column-wise softmax probabilities and mean cross-entropy.
double softmax_loss(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                    Eigen::MatrixXd* probs_out) {
    const Eigen::Index batch = logits.cols();
    Eigen::MatrixXd probs = logits;
    double loss = 0.0;
    for (Eigen::Index c = 0; c < batch; ++c) {
        auto col = probs.col(c);
        col.array() -= col.maxCoeff();
        col = col.array().exp();
        const double z = col.sum();
        col /= z;
        loss -= std::log(std::max(probs(labels[c], c), 1e-300));
    }
    if (probs_out) *probs_out = std::move(probs);
    return loss / static_cast<double>(batch);
}

Eigen::MatrixXd gather(const Dataset& data, const std::vector<int>& indices,
                       std::vector<int>* labels) {
    Eigen::MatrixXd batch(data.dim(), indices.size());
    labels->resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        batch.col(i) = data.features.col(indices[i]);
        (*labels)[i] = data.labels[indices[i]];
    }
    return batch;
}

// Gradients of the mean batch loss, written into the grad views.
void backward(const std::vector<LayerView>& layers,
              const std::vector<Eigen::MatrixXd>& act,
              const Eigen::MatrixXd& probs, const std::vector<int>& labels,
              std::vector<LayerView>& grads) {
    const Eigen::Index batch = probs.cols();
    Eigen::MatrixXd dz = probs;
    for (Eigen::Index c = 0; c < batch; ++c) dz(labels[c], c) -= 1.0;
    dz /= static_cast<double>(batch);
    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
        grads[l].weight = dz * act[l].transpose();
        grads[l].bias = dz.rowwise().sum();
        if (l > 0) {
            dz = (layers[l].weight.transpose() * dz).cwiseProduct(
                (act[l].array() > 0.0).cast<double>().matrix());
        }
    }
}

}  // namespace

ModelState init_model(const Architecture& arch, Rng& rng) {
    ModelState model;
    model.arch = arch;
    model.theta = Eigen::VectorXd::Zero(arch.dim());
    auto views = make_views(model.theta, arch);
    for (auto& v : views) {
        const double bound =
            std::sqrt(6.0 / double(v.weight.rows() + v.weight.cols()));
        for (Eigen::Index j = 0; j < v.weight.cols(); ++j) {
            for (Eigen::Index i = 0; i < v.weight.rows(); ++i) {
                v.weight(i, j) = rng.uniform(-bound, bound);
            }
        }
        v.bias.setZero();
    }
    return model;
}

double forward_loss(const ModelState& model, const Dataset& data,
                    const std::vector<int>& indices) {
    if (indices.empty()) throw std::invalid_argument("empty-dataset");
    if (data.dim() != model.arch.sizes.front()) {
        throw std::invalid_argument("dimension-mismatch: feature size vs input layer");
    }
    auto views = make_views(model.theta, model.arch);
    std::vector<int> labels;
    const Eigen::MatrixXd batch = gather(data, indices, &labels);
    const auto act = forward(views, batch);
    return softmax_loss(act.back(), labels, nullptr);
}

UpdateVector local_train(const ModelState& model, const Dataset& data,
                         const std::vector<int>& indices, const TrainConfig& cfg,
                         Rng& rng) {
    if (indices.empty()) throw std::invalid_argument("empty-dataset");
    if (cfg.batch_size < 1 || cfg.local_epochs < 1) {
        throw std::invalid_argument("invalid train config");
    }
    Eigen::VectorXd theta = model.theta;
    auto views = make_views(theta, model.arch);
    Eigen::VectorXd grad_store = Eigen::VectorXd::Zero(theta.size());
    auto grads = make_views(grad_store, model.arch);

    std::vector<int> order = indices;
    std::vector<int> labels;
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
            const std::size_t end = std::min(pos + cfg.batch_size, order.size());
            const std::vector<int> batch_idx(order.begin() + pos, order.begin() + end);
            const Eigen::MatrixXd batch = gather(data, batch_idx, &labels);
            const auto act = forward(views, batch);
            Eigen::MatrixXd probs;
            softmax_loss(act.back(), labels, &probs);
            backward(views, act, probs, labels, grads);
            theta -= cfg.learning_rate * grad_store;
        }
    }

    UpdateVector up;
    up.delta = theta - model.theta;
    up.data_size = static_cast<long>(indices.size());
    up.mean = up.delta.mean();
    up.stddev = std::sqrt((up.delta.array() - up.mean).square().mean());
    up.norm = up.delta.norm();
    return up;
}

NormalizedUpdate normalize_update(const UpdateVector& update, double weight) {
    NormalizedUpdate out;
    out.shift = weight * update.mean;
    if (update.stddev > 1e-12) {
        out.symbols = (update.delta.array() - update.mean) / update.stddev;
        out.phi = weight * update.stddev;
        out.transmits = true;
    } else {
        out.symbols = Eigen::VectorXd::Zero(update.delta.size());
        out.phi = 0.0;
        out.transmits = false;
    }
    return out;
}

void global_update(ModelState& model, const Eigen::VectorXd& estimate,
                   double shift_sum, double total_weight) {
    if (estimate.size() != model.theta.size()) {
        throw std::invalid_argument("dimension-mismatch: estimate vs model");
    }
    if (!(total_weight > 0.0)) throw std::invalid_argument("invalid-weight");
    model.theta += (estimate.array() + shift_sum).matrix() / total_weight;
}

EvalResult evaluate(const ModelState& model, const Dataset& test_set) {
    if (test_set.size() == 0) throw std::invalid_argument("empty-dataset");
    auto views = make_views(model.theta, model.arch);
    EvalResult res;
    long correct = 0;
    double loss_sum = 0.0;
    const int chunk = 512;
    std::vector<int> labels;
    for (int lo = 0; lo < test_set.size(); lo += chunk) {
        const int hi = std::min(lo + chunk, test_set.size());
        std::vector<int> idx(hi - lo);
        std::iota(idx.begin(), idx.end(), lo);
        const Eigen::MatrixXd batch = gather(test_set, idx, &labels);
        const auto act = forward(views, batch);
        Eigen::MatrixXd probs;
        loss_sum += softmax_loss(act.back(), labels, &probs) * (hi - lo);
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            Eigen::Index argmax = 0;
            probs.col(c).maxCoeff(&argmax);
            if (argmax == labels[c]) ++correct;
        }
    }
    res.accuracy = double(correct) / test_set.size();
    res.loss = loss_sum / test_set.size();
    return res;
}

void save_checkpoint(const ModelState& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("io-error: cannot open " + path);
    const std::uint64_t magic = kCheckpointMagic;
    const std::uint64_t d = static_cast<std::uint64_t>(model.theta.size());
    out.write(reinterpret_cast<const char*>(&magic), 8);
    out.write(reinterpret_cast<const char*>(&d), 8);
    out.write(reinterpret_cast<const char*>(model.theta.data()),
              static_cast<std::streamsize>(d * sizeof(double)));
}

Eigen::VectorXd load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("io-error: cannot open " + path);
    std::uint64_t magic = 0, d = 0;
    in.read(reinterpret_cast<char*>(&magic), 8);
    in.read(reinterpret_cast<char*>(&d), 8);
    if (!in || magic != kCheckpointMagic) throw std::runtime_error("bad-magic: " + path);
    Eigen::VectorXd theta(static_cast<Eigen::Index>(d));
    in.read(reinterpret_cast<char*>(theta.data()),
            static_cast<std::streamsize>(d * sizeof(double)));
    if (!in) throw std::runtime_error("truncated-file: " + path);
    return theta;
}

}  // namespace airfl
