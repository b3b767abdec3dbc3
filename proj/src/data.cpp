#include "airfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

namespace airfl {

namespace {

std::uint32_t read_be32(std::istream& in, const char* what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error(std::string("truncated-file: ") + what);
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<char*>(b), 4);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("truncated-file: cannot open " + images_path);
    if (read_be32(img, "image magic") != 0x00000803u) {
        throw std::runtime_error("bad-magic: " + images_path);
    }
    const std::uint32_t n = read_be32(img, "image count");
    const std::uint32_t rows = read_be32(img, "rows");
    const std::uint32_t cols = read_be32(img, "cols");
    const std::size_t pix = std::size_t(rows) * cols;

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("truncated-file: cannot open " + labels_path);
    if (read_be32(lab, "label magic") != 0x00000801u) {
        throw std::runtime_error("bad-magic: " + labels_path);
    }
    const std::uint32_t nl = read_be32(lab, "label count");
    if (n != nl) throw std::runtime_error("count-mismatch: images vs labels");

    Dataset data;
    data.features.resize(pix, n);
    data.labels.resize(n);
    std::vector<unsigned char> buf(pix);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), pix)) {
            throw std::runtime_error("truncated-file: image data");
        }
        for (std::size_t j = 0; j < pix; ++j) {
            data.features(j, i) = buf[j] / 255.0;
        }
    }
    std::vector<unsigned char> lbuf(n);
    if (!lab.read(reinterpret_cast<char*>(lbuf.data()), n)) {
        throw std::runtime_error("truncated-file: label data");
    }
    for (std::uint32_t i = 0; i < n; ++i) data.labels[i] = lbuf[i];
    return data;
}

void write_idx(const Dataset& data, const std::string& images_path,
               const std::string& labels_path, int rows, int cols) {
    if (rows * cols != data.dim()) throw std::invalid_argument("write_idx: shape mismatch");
    std::ofstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("io-error: cannot open " + images_path);
    write_be32(img, 0x00000803u);
    write_be32(img, static_cast<std::uint32_t>(data.size()));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    std::vector<unsigned char> buf(data.dim());
    for (int i = 0; i < data.size(); ++i) {
        for (int j = 0; j < data.dim(); ++j) {
            const double v = std::clamp(data.features(j, i), 0.0, 1.0);
            buf[j] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
        img.write(reinterpret_cast<char*>(buf.data()), buf.size());
    }
    std::ofstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("io-error: cannot open " + labels_path);
    write_be32(lab, 0x00000801u);
    write_be32(lab, static_cast<std::uint32_t>(data.size()));
    for (int l : data.labels) {
        const unsigned char c = static_cast<unsigned char>(l);
        lab.write(reinterpret_cast<const char*>(&c), 1);
    }
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, Rng& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split: train_fraction must be in (0, 1)");
    }
    const int n = dataset.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    const int n_train = static_cast<int>(std::floor(n * train_fraction));
    auto take = [&](int lo, int hi) {
        Dataset out;
        out.features.resize(dataset.dim(), hi - lo);
        out.labels.resize(hi - lo);
        for (int i = lo; i < hi; ++i) {
            out.features.col(i - lo) = dataset.features.col(idx[i]);
            out.labels[i - lo] = dataset.labels[idx[i]];
        }
        return out;
    };
    return {take(0, n_train), take(n_train, n)};
}

Partition partition_noniid(const Dataset& train, int users, int classes_per_user,
                           double size_spread, Rng& rng) {
    if (users < 1) throw std::invalid_argument("partition: users must be >= 1");
    if (classes_per_user < 1 || classes_per_user > 10) {
        throw std::invalid_argument("partition: classes_per_user must be in [1, 10]");
    }
    if (!(size_spread >= 1.0)) throw std::invalid_argument("partition: size_spread must be >= 1");

    const int n = train.size();
    int num_labels = 0;
    for (int l : train.labels) num_labels = std::max(num_labels, l + 1);

    // Indices per label, each group shuffled.
    std::vector<std::vector<int>> by_label(num_labels);
    for (int i = 0; i < n; ++i) by_label[train.labels[i]].push_back(i);
    for (auto& g : by_label) rng.shuffle(g);

    // Shard slots allotted to labels by largest remainder, keeping shards
    // label-pure so each user sees at most classes_per_user distinct labels.
    const int total_slots = users * classes_per_user;
    if (n < total_slots) throw std::runtime_error("too-few-samples: fewer samples than shards");
    std::vector<int> slots(num_labels, 0);
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int l = 0; l < num_labels; ++l) {
        const double exact = double(by_label[l].size()) * total_slots / n;
        slots[l] = std::min<int>(static_cast<int>(std::floor(exact)),
                                 static_cast<int>(by_label[l].size()));
        assigned += slots[l];
        remainders.push_back({exact - std::floor(exact), l});
    }
    std::sort(remainders.begin(), remainders.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
              });
    for (std::size_t i = 0; assigned < total_slots; i = (i + 1) % remainders.size()) {
        const int l = remainders[i].second;
        if (slots[l] < static_cast<int>(by_label[l].size())) {
            ++slots[l];
            ++assigned;
        }
    }

    // Cut each label group into its slots.
    std::vector<std::vector<int>> shards;
    for (int l = 0; l < num_labels; ++l) {
        const auto& g = by_label[l];
        if (slots[l] == 0) continue;
        const int base = static_cast<int>(g.size()) / slots[l];
        const int extra = static_cast<int>(g.size()) % slots[l];
        int pos = 0;
        for (int s = 0; s < slots[l]; ++s) {
            const int len = base + (s < extra ? 1 : 0);
            shards.emplace_back(g.begin() + pos, g.begin() + pos + len);
            pos += len;
        }
    }
    rng.shuffle(shards);

    Partition part;
    part.user_indices.resize(users);
    for (int u = 0; u < users; ++u) {
        for (int s = 0; s < classes_per_user; ++s) {
            const std::size_t shard_id = std::size_t(u) * classes_per_user + s;
            if (shard_id >= shards.size()) break;
            auto& dst = part.user_indices[u];
            dst.insert(dst.end(), shards[shard_id].begin(), shards[shard_id].end());
        }
        // Log-uniform subsample over [1/size_spread, 1].
        auto& dst = part.user_indices[u];
        if (dst.empty()) throw std::runtime_error("too-few-samples: user with empty shard");
        if (size_spread > 1.0) {
            const double frac = std::pow(size_spread, -rng.uniform());
            const int keep = std::max(1, static_cast<int>(std::ceil(frac * dst.size())));
            rng.shuffle(dst);
            dst.resize(keep);
        }
        std::sort(dst.begin(), dst.end());
    }
    return part;
}

Dataset synthetic_two_class_8x8(int n, Rng& rng) {
    Dataset data;
    data.features.resize(64, n);
    data.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng.below(2));
        data.labels[i] = label;
        for (int r = 0; r < 8; ++r) {
            for (int c = 0; c < 8; ++c) {
                // class 0: bright left half; class 1: bright right half
                const double base = (label == 0 ? (c < 4) : (c >= 4)) ? 0.8 : 0.15;
                double v = base + 0.1 * rng.gaussian();
                data.features(r * 8 + c, i) = std::clamp(v, 0.0, 1.0);
            }
        }
    }
    return data;
}

namespace {
// 5x7 bitmaps for the ten digits, one row per byte (low 5 bits used).
const unsigned char kDigitFont[10][7] = {
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E},  // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},  // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F},  // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},  // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02},  // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},  // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E},  // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E},  // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},  // 9
};
}  // namespace

Dataset synthetic_digits_28x28(int n, Rng& rng) {
    Dataset data;
    data.features = Eigen::MatrixXd::Zero(784, n);
    data.labels.resize(n);
    for (int i = 0; i < n; ++i) {
        const int digit = static_cast<int>(rng.below(10));
        data.labels[i] = digit;
        // Glyph scaled 4x to 20x28, jittered inside the 28x28 frame.
        const int dx = 3 + static_cast<int>(rng.below(3));   // [3, 5]
        const int dy = static_cast<int>(rng.below(3)) - 1;   // [-1, 1]
        const double ink = 0.75 + 0.25 * rng.uniform();
        for (int fr = 0; fr < 7; ++fr) {
            for (int fc = 0; fc < 5; ++fc) {
                if (!(kDigitFont[digit][fr] >> (4 - fc) & 1)) continue;
                for (int rr = 0; rr < 4; ++rr) {
                    for (int cc = 0; cc < 4; ++cc) {
                        const int r = fr * 4 + rr + dy + 1;
                        const int c = fc * 4 + cc + dx;
                        if (r < 0 || r >= 28 || c < 0 || c >= 28) continue;
                        data.features(r * 28 + c, i) = ink;
                    }
                }
            }
        }
        for (int j = 0; j < 784; ++j) {
            const double v = data.features(j, i) + 0.04 * rng.gaussian();
            data.features(j, i) = std::clamp(v, 0.0, 1.0);
        }
    }
    return data;
}

}  // namespace airfl
