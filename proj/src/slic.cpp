#include "pmn/slic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "pmn/color.hpp"
#include "pmn/errors.hpp"
#include "pmn/rng.hpp"

namespace pmn {

namespace {

struct Center {
    Lab lab;
    Real y = 0.0;
    Real x = 0.0;
};

void check_extent(std::size_t h, std::size_t w, std::size_t n, const char* who) {
    if (h == 0 || w == 0) throw DimensionError(std::string(who) + ": empty image");
    if (n == 0) throw ParameterError(std::string(who) + ": n_segments must be at least 1");
}

Real lab_dist2(const Lab& a, const Lab& b) {
    const Real d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
}

class SlicSolver {
public:
    SlicSolver(const Image& image, const SlicOptions& opt)
        : h_(image.height), w_(image.width), opt_(opt), lab_(image_to_lab(image)) {
        step_ = std::sqrt(static_cast<Real>(h_ * w_) / static_cast<Real>(opt.n_segments));
        const Real spatial = opt.compactness / step_;
        spatial2_ = spatial * spatial;
        labels_.assign(h_ * w_, -1);
        dist_.assign(h_ * w_, std::numeric_limits<Real>::infinity());
    }

    SuperpixelMap run(SlicTrace* trace) {
        init_centers();
        for (int it = 0; it < opt_.iterations; ++it) {
            const Real cost = assign();
            if (trace) trace->costs.push_back(cost);
            update_centers();
        }
        if (opt_.iterations <= 0) assign();
        return enforce_connectivity();
    }

private:
    Real gradient(std::size_t y, std::size_t x) const {
        auto at = [&](std::size_t yy, std::size_t xx) -> const Lab& { return lab_[yy * w_ + xx]; };
        const std::size_t x0 = x > 0 ? x - 1 : x, x1 = std::min(x + 1, w_ - 1);
        const std::size_t y0 = y > 0 ? y - 1 : y, y1 = std::min(y + 1, h_ - 1);
        return lab_dist2(at(y, x1), at(y, x0)) + lab_dist2(at(y1, x), at(y0, x));
    }

    void init_centers() {
        const Real n = static_cast<Real>(opt_.n_segments);
        std::size_t nx = static_cast<std::size_t>(std::ceil(std::sqrt(n * static_cast<Real>(w_) / static_cast<Real>(h_))));
        nx = std::clamp<std::size_t>(nx, 1, std::min(w_, opt_.n_segments));
        std::size_t ny = std::clamp<std::size_t>(opt_.n_segments / nx, 1, h_);
        const Real sy = static_cast<Real>(h_) / static_cast<Real>(ny);
        const Real sx = static_cast<Real>(w_) / static_cast<Real>(nx);
        centers_.clear();
        for (std::size_t i = 0; i < ny; ++i) {
            for (std::size_t j = 0; j < nx; ++j) {
                auto cy = static_cast<std::size_t>((static_cast<Real>(i) + 0.5) * sy);
                auto cx = static_cast<std::size_t>((static_cast<Real>(j) + 0.5) * sx);
                // move to the lowest-gradient pixel of the 3x3 neighborhood
                std::size_t by = cy, bx = cx;
                Real best = gradient(cy, cx);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const long yy = static_cast<long>(cy) + dy, xx = static_cast<long>(cx) + dx;
                        if (yy < 0 || xx < 0 || yy >= static_cast<long>(h_) || xx >= static_cast<long>(w_)) continue;
                        const Real g = gradient(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
                        if (g < best) {
                            best = g;
                            by = static_cast<std::size_t>(yy);
                            bx = static_cast<std::size_t>(xx);
                        }
                    }
                }
                // an unmoved seed keeps the exact cell center, in pixel-index coordinates
                const bool moved = by != cy || bx != cx;
                const Real fy = moved ? static_cast<Real>(by) : (static_cast<Real>(i) + 0.5) * sy - 0.5;
                const Real fx = moved ? static_cast<Real>(bx) : (static_cast<Real>(j) + 0.5) * sx - 0.5;
                centers_.push_back({lab_[by * w_ + bx], fy, fx});
            }
        }
    }

    Real distance2(std::size_t p, const Center& c) const {
        const Real dy = static_cast<Real>(p / w_) - c.y;
        const Real dx = static_cast<Real>(p % w_) - c.x;
        return lab_dist2(lab_[p], c.lab) + spatial2_ * (dy * dy + dx * dx);
    }

    // Rows [row0, row1). Each pixel keeps its current center as a candidate so
    // the k-means objective cannot increase between iterations.
    void assign_band(std::size_t row0, std::size_t row1) {
        for (std::size_t p = row0 * w_; p < row1 * w_; ++p) {
            dist_[p] = labels_[p] >= 0 ? distance2(p, centers_[static_cast<std::size_t>(labels_[p])])
                                       : std::numeric_limits<Real>::infinity();
        }
        for (std::size_t k = 0; k < centers_.size(); ++k) {
            const Center& c = centers_[k];
            const long ylo = std::max<long>(static_cast<long>(row0), static_cast<long>(std::floor(c.y - step_)));
            const long yhi = std::min<long>(static_cast<long>(row1) - 1, static_cast<long>(std::ceil(c.y + step_)));
            const long xlo = std::max<long>(0, static_cast<long>(std::floor(c.x - step_)));
            const long xhi = std::min<long>(static_cast<long>(w_) - 1, static_cast<long>(std::ceil(c.x + step_)));
            for (long y = ylo; y <= yhi; ++y) {
                for (long x = xlo; x <= xhi; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * w_ + static_cast<std::size_t>(x);
                    const Real d = distance2(p, c);
                    if (d < dist_[p]) {
                        dist_[p] = d;
                        labels_[p] = static_cast<std::int32_t>(k);
                    }
                }
            }
        }
        // pixels outside every window on the first pass
        for (std::size_t p = row0 * w_; p < row1 * w_; ++p) {
            if (labels_[p] >= 0) continue;
            for (std::size_t k = 0; k < centers_.size(); ++k) {
                const Real d = distance2(p, centers_[k]);
                if (d < dist_[p]) {
                    dist_[p] = d;
                    labels_[p] = static_cast<std::int32_t>(k);
                }
            }
        }
    }

    Real assign() {
        const std::size_t bands = std::clamp<std::size_t>(opt_.threads, 1, h_);
        if (bands == 1) {
            assign_band(0, h_);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t b = 0; b < bands; ++b) {
                pool.emplace_back([this, b, bands] { assign_band(b * h_ / bands, (b + 1) * h_ / bands); });
            }
            for (auto& t : pool) t.join();
        }
        Real cost = 0.0;
        for (Real d : dist_) cost += d;
        return cost;
    }

    void update_centers() {
        std::vector<std::array<Real, 5>> sums(centers_.size(), {0, 0, 0, 0, 0});
        std::vector<std::size_t> counts(centers_.size(), 0);
        for (std::size_t p = 0; p < labels_.size(); ++p) {
            const auto k = static_cast<std::size_t>(labels_[p]);
            auto& s = sums[k];
            s[0] += lab_[p][0];
            s[1] += lab_[p][1];
            s[2] += lab_[p][2];
            s[3] += static_cast<Real>(p / w_);
            s[4] += static_cast<Real>(p % w_);
            ++counts[k];
        }
        for (std::size_t k = 0; k < centers_.size(); ++k) {
            if (counts[k] == 0) continue;
            const Real n = static_cast<Real>(counts[k]);
            centers_[k] = {{sums[k][0] / n, sums[k][1] / n, sums[k][2] / n}, sums[k][3] / n, sums[k][4] / n};
        }
    }

    // Raster-order flood fill. Components below S^2/4 pixels join the earlier
    // adjacent component they share the most edges with (ties -> smaller label).
    SuperpixelMap enforce_connectivity() const {
        const std::size_t n = h_ * w_;
        const Real min_size = step_ * step_ / 4.0;
        std::vector<std::int32_t> out(n, -1);
        std::vector<std::size_t> comp;
        std::map<std::int32_t, std::size_t> contacts;
        std::int32_t next = 0;
        for (std::size_t seed = 0; seed < n; ++seed) {
            if (out[seed] >= 0) continue;
            const std::int32_t old = labels_[seed];
            comp.clear();
            comp.push_back(seed);
            out[seed] = next;
            contacts.clear();
            for (std::size_t head = 0; head < comp.size(); ++head) {
                const std::size_t p = comp[head];
                const std::size_t y = p / w_, x = p % w_;
                const std::size_t nbrs[4] = {x > 0 ? p - 1 : n, x + 1 < w_ ? p + 1 : n, y > 0 ? p - w_ : n,
                                             y + 1 < h_ ? p + w_ : n};
                for (std::size_t q : nbrs) {
                    if (q == n) continue;
                    if (out[q] < 0 && labels_[q] == old) {
                        out[q] = next;
                        comp.push_back(q);
                    } else if (out[q] >= 0 && out[q] != next) {
                        ++contacts[out[q]];
                    }
                }
            }
            if (static_cast<Real>(comp.size()) < min_size && !contacts.empty()) {
                std::int32_t target = contacts.begin()->first;
                std::size_t best = 0;
                for (const auto& [lbl, cnt] : contacts) {
                    if (cnt > best) {
                        best = cnt;
                        target = lbl;
                    }
                }
                for (std::size_t p : comp) out[p] = target;
            } else {
                ++next;
            }
        }
        return {h_, w_, static_cast<std::size_t>(next), std::move(out)};
    }

    std::size_t h_, w_;
    SlicOptions opt_;
    std::vector<Lab> lab_;
    std::vector<Center> centers_;
    std::vector<std::int32_t> labels_;
    std::vector<Real> dist_;
    Real step_ = 1.0;
    Real spatial2_ = 0.0;
};

// floor/ceil split of `extent` into `parts` spans; earlier spans get the extra pixel
std::vector<std::size_t> split_starts(std::size_t extent, std::size_t parts) {
    std::vector<std::size_t> starts(parts + 1, 0);
    const std::size_t base = extent / parts, extra = extent % parts;
    for (std::size_t i = 0; i < parts; ++i) starts[i + 1] = starts[i] + base + (i < extra ? 1 : 0);
    return starts;
}

}  // namespace

BinaryMask MaskStack::mask(std::size_t k) const {
    BinaryMask m(height, width);
    for (std::size_t i = 0; i < cells.size(); ++i) m.bits[i] = cells[i] == static_cast<std::int32_t>(k) ? 1 : 0;
    return m;
}

std::size_t MaskStack::area(std::size_t k) const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), static_cast<std::int32_t>(k)));
}

SuperpixelMap slic_segment(const Image& image, const SlicOptions& options, SlicTrace* trace) {
    check_extent(image.height, image.width, options.n_segments, "slic_segment");
    if (options.n_segments > image.height * image.width) {
        throw ParameterError("slic_segment: n_segments " + std::to_string(options.n_segments) + " exceeds " +
                             std::to_string(image.height * image.width) + " pixels");
    }
    if (!(options.compactness > 0.0)) throw ParameterError("slic_segment: compactness must be positive");
    return SlicSolver(image, options).run(trace);
}

SuperpixelMap grid_masks(std::size_t height, std::size_t width, std::size_t n_segments) {
    check_extent(height, width, n_segments, "grid_masks");
    const std::size_t n = std::min(n_segments, height * width);
    std::size_t rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<Real>(n)))));
    rows = std::min(rows, height);
    std::size_t cols = (n + rows - 1) / rows;
    if (cols > width) {
        cols = width;
        rows = (n + cols - 1) / cols;
    }
    const std::size_t last_row = n - (rows - 1) * cols;

    SuperpixelMap map{height, width, n, std::vector<std::int32_t>(height * width, 0)};
    const auto ys = split_starts(height, rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t tiles = r + 1 == rows ? last_row : cols;
        const auto xs = split_starts(width, tiles);
        for (std::size_t c = 0; c < tiles; ++c) {
            const auto label = static_cast<std::int32_t>(r * cols + c);
            for (std::size_t y = ys[r]; y < ys[r + 1]; ++y)
                for (std::size_t x = xs[c]; x < xs[c + 1]; ++x) map.labels[y * width + x] = label;
        }
    }
    return map;
}

SuperpixelMap random_masks(std::size_t height, std::size_t width, std::size_t n_segments, std::uint64_t seed) {
    check_extent(height, width, n_segments, "random_masks");
    const std::size_t total = height * width;
    if (n_segments > total) {
        throw ParameterError("random_masks: n_segments " + std::to_string(n_segments) + " exceeds " +
                             std::to_string(total) + " pixels");
    }
    // partial Fisher-Yates over pixel indices
    std::vector<std::size_t> pool(total);
    for (std::size_t i = 0; i < total; ++i) pool[i] = i;
    Rng rng(seed);
    for (std::size_t i = 0; i < n_segments; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(pool[i], pool[j]);
    }
    SuperpixelMap map{height, width, n_segments, std::vector<std::int32_t>(total, 0)};
    for (std::size_t p = 0; p < total; ++p) {
        const long py = static_cast<long>(p / width), px = static_cast<long>(p % width);
        long best = std::numeric_limits<long>::max();
        for (std::size_t k = 0; k < n_segments; ++k) {
            const long dy = py - static_cast<long>(pool[k] / width), dx = px - static_cast<long>(pool[k] % width);
            const long d = dy * dy + dx * dx;
            if (d < best) {
                best = d;
                map.labels[p] = static_cast<std::int32_t>(k);
            }
        }
    }
    return map;
}

MaskStack downsample_masks(const SuperpixelMap& map, std::size_t height, std::size_t width, Stream source) {
    if (height == 0 || width == 0 || height > map.height || width > map.width) {
        throw DimensionError("downsample_masks: target " + std::to_string(height) + "x" + std::to_string(width) +
                             " must be within 1.." + std::to_string(map.height) + "x" + std::to_string(map.width));
    }
    std::vector<std::int32_t> cell_label(height * width, 0);
    std::vector<std::size_t> votes(map.count, 0);
    std::vector<std::int32_t> touched;
    for (std::size_t cy = 0; cy < height; ++cy) {
        const std::size_t y0 = cy * map.height / height, y1 = (cy + 1) * map.height / height;
        for (std::size_t cx = 0; cx < width; ++cx) {
            const std::size_t x0 = cx * map.width / width, x1 = (cx + 1) * map.width / width;
            touched.clear();
            for (std::size_t y = y0; y < y1; ++y) {
                for (std::size_t x = x0; x < x1; ++x) {
                    const std::int32_t l = map.at(y, x);
                    if (votes[static_cast<std::size_t>(l)]++ == 0) touched.push_back(l);
                }
            }
            std::int32_t winner = touched.front();
            for (std::int32_t l : touched) {
                const std::size_t v = votes[static_cast<std::size_t>(l)], best = votes[static_cast<std::size_t>(winner)];
                if (v > best || (v == best && l < winner)) winner = l;
            }
            for (std::int32_t l : touched) votes[static_cast<std::size_t>(l)] = 0;
            cell_label[cy * width + cx] = winner;
        }
    }

    std::vector<std::int32_t> position(map.count, -1);
    for (std::int32_t l : cell_label) position[static_cast<std::size_t>(l)] = 0;
    MaskStack stack{height, width, source, {}, {}};
    for (std::size_t l = 0; l < map.count; ++l) {
        if (position[l] < 0) continue;
        position[l] = static_cast<std::int32_t>(stack.indices.size());
        stack.indices.push_back(static_cast<std::int32_t>(l));
    }
    stack.cells.resize(cell_label.size());
    for (std::size_t i = 0; i < cell_label.size(); ++i) {
        stack.cells[i] = position[static_cast<std::size_t>(cell_label[i])];
    }
    return stack;
}

bool is_compact_partition(const SuperpixelMap& map) {
    if (map.labels.size() != map.height * map.width || map.count == 0) return false;
    std::vector<bool> seen(map.count, false);
    for (std::int32_t l : map.labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= map.count) return false;
        seen[static_cast<std::size_t>(l)] = true;
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

bool labels_are_connected(const SuperpixelMap& map) {
    const std::size_t n = map.labels.size(), w = map.width;
    std::vector<bool> visited(n, false), label_seen(map.count, false);
    std::vector<std::size_t> queue;
    for (std::size_t s = 0; s < n; ++s) {
        if (visited[s]) continue;
        const std::int32_t l = map.labels[s];
        if (label_seen[static_cast<std::size_t>(l)]) return false;  // second component of the same label
        label_seen[static_cast<std::size_t>(l)] = true;
        queue.assign(1, s);
        visited[s] = true;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t p = queue[head], y = p / w, x = p % w;
            const std::size_t nbrs[4] = {x > 0 ? p - 1 : n, x + 1 < w ? p + 1 : n, y > 0 ? p - w : n,
                                         y + 1 < map.height ? p + w : n};
            for (std::size_t q : nbrs) {
                if (q != n && !visited[q] && map.labels[q] == l) {
                    visited[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    return true;
}

Image overlay_boundaries(const Image& image, const SuperpixelMap& map, const std::array<Real, 3>& color) {
    if (image.height != map.height || image.width != map.width) {
        throw DimensionError("overlay_boundaries: image and label map sizes differ");
    }
    Image out = image;
    for (std::size_t y = 0; y < map.height; ++y) {
        for (std::size_t x = 0; x < map.width; ++x) {
            const std::int32_t l = map.at(y, x);
            const bool edge = (x + 1 < map.width && map.at(y, x + 1) != l) || (y + 1 < map.height && map.at(y + 1, x) != l);
            if (edge) out.set(y, x, color);
        }
    }
    return out;
}

}  // namespace pmn
