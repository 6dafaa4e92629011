#include "npkry/unet.hpp"

#include <sstream>

#include "npkry/conv_kernels.hpp"
#include "npkry/error.hpp"
#include "npkry/rng.hpp"

namespace npkry {

VolumeTensor pad_or_embed(const DenseVector& v, std::size_t grid_n) {
  check(v.size() == grid_n * grid_n * grid_n,
        "pad_or_embed: length is not grid_n^3");
  VolumeTensor t;
  t.channels = 1;
  t.n1 = t.n2 = t.n3 = grid_n;
  t.data.assign(v.begin(), v.end());
  return t;
}

DenseVector flatten(const VolumeTensor& t) {
  check(t.channels == 1, "flatten: expected a single channel");
  return DenseVector(t.data);
}

std::vector<std::size_t> UNetDescriptor::level_sizes() const {
  check(!channels.empty(), "descriptor: needs at least one level");
  check(channels.front() % 2 == 0, "descriptor: stem width must be even");
  std::vector<std::size_t> sizes{grid_n};
  for (std::size_t i = 1; i < channels.size(); ++i) {
    const std::size_t next = sizes.back() / 2;
    check(next >= 2, "descriptor: grid too small for this depth");
    sizes.push_back(next);
  }
  return sizes;
}

std::string UNetDescriptor::to_text() const {
  std::ostringstream out;
  out << "unet v1\n";
  out << "grid_n " << grid_n << "\n";
  out << "channels";
  for (std::size_t c : channels) out << " " << c;
  out << "\n";
  out << "kernel " << kernel << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", leaky_slope);
  out << "leaky_slope " << buf << "\n";
  return out.str();
}

UNetDescriptor UNetDescriptor::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  check(static_cast<bool>(std::getline(in, line)) && line == "unet v1",
        "descriptor: bad header");
  UNetDescriptor d;
  d.channels.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "grid_n") ls >> d.grid_n;
    else if (key == "channels") {
      std::size_t c;
      while (ls >> c) d.channels.push_back(c);
    } else if (key == "kernel") ls >> d.kernel;
    else if (key == "leaky_slope") ls >> d.leaky_slope;
    else throw Error("descriptor: unknown key " + key);
  }
  check(!d.channels.empty(), "descriptor: missing channels");
  return d;
}

UNetDescriptor UNetDescriptor::desk(std::size_t grid_n) {
  UNetDescriptor d;
  d.grid_n = grid_n;
  d.channels = {8, 16, 32};
  return d;
}

UNetDescriptor UNetDescriptor::paper_scale() {
  UNetDescriptor d;
  d.grid_n = 21;
  d.channels = {32, 64, 128};
  return d;
}

namespace {

std::size_t cube(std::size_t k) { return k * k * k; }

struct LayerSpec {
  std::string name;
  std::size_t len = 0;
  std::size_t fan_in = 0;
  bool is_bias = false;
};

std::vector<LayerSpec> layer_specs(const UNetDescriptor& d) {
  const auto& ch = d.channels;
  const std::size_t L = d.depth();
  const std::size_t lift = d.lift_channels();
  const std::size_t k3 = cube(d.kernel);
  std::vector<LayerSpec> specs;
  specs.push_back({"stem.lift.w", lift, 1, false});
  specs.push_back({"stem.conv.w", lift * ch[0] * k3, lift * k3, false});
  for (std::size_t i = 1; i < L; ++i)
    specs.push_back({"enc" + std::to_string(i) + ".conv.w",
                     ch[i - 1] * ch[i] * k3, ch[i - 1] * k3, false});
  specs.push_back(
      {"bottleneck.conv.w", ch[L - 1] * ch[L - 1] * k3, ch[L - 1] * k3, false});
  const std::size_t kt = cube(d.up_kernel());
  for (std::size_t i = L - 1; i >= 1; --i) {
    const std::string p = "dec" + std::to_string(i);
    specs.push_back({p + ".up.w", ch[i] * ch[i - 1] * kt, ch[i] * kt, false});
    specs.push_back({p + ".up.b", ch[i - 1], 0, true});
    specs.push_back({p + ".conv.w", 2 * ch[i - 1] * ch[i - 1] * k3,
                     2 * ch[i - 1] * k3, false});
  }
  specs.push_back({"head.w", ch[0], ch[0], false});
  specs.push_back({"head.b", 1, 0, true});
  return specs;
}

}  // namespace

std::vector<LayerCount> layer_param_counts(const UNetDescriptor& desc) {
  const std::size_t L = desc.depth();
  std::vector<LayerCount> rows;
  rows.push_back({"stem", 0});
  for (std::size_t i = 1; i < L; ++i)
    rows.push_back({"enc" + std::to_string(i), 0});
  rows.push_back({"bottleneck", 0});
  for (std::size_t i = L - 1; i >= 1; --i)
    rows.push_back({"dec" + std::to_string(i), 0});
  rows.push_back({"head", 0});
  for (const auto& s : layer_specs(desc)) {
    const std::string row = s.name.substr(0, s.name.find('.'));
    for (auto& r : rows)
      if (r.row == row) r.params += s.len;
  }
  return rows;
}

std::size_t total_params(const UNetDescriptor& desc) {
  std::size_t total = 0;
  for (const auto& s : layer_specs(desc)) total += s.len;
  return total;
}

ModelParams make_params(const UNetDescriptor& desc) {
  ModelParams p;
  for (const auto& s : layer_specs(desc)) p.add_slice(s.name, s.len);
  return p;
}

ModelParams init_params(const UNetDescriptor& desc, std::uint64_t seed) {
  ModelParams p = make_params(desc);
  Rng rng(seed);
  const double gain =
      std::sqrt(2.0 / (1.0 + desc.leaky_slope * desc.leaky_slope));
  const auto specs = layer_specs(desc);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto s = p.slice(i);
    if (specs[i].is_bias) continue;  // biases stay zero
    const double bound =
        gain * std::sqrt(3.0 / static_cast<double>(specs[i].fan_in));
    for (auto& w : s) w = rng.uniform(-bound, bound);
  }
  return p;
}

NeuralPreconditioner::NeuralPreconditioner(UNetDescriptor desc,
                                           ModelParams params)
    : desc_(std::move(desc)), params_(std::move(params)) {
  check(params_.size() == total_params(desc_),
        "NeuralPreconditioner: parameter count does not match descriptor");
}

namespace {

void leaky_inplace(std::vector<double>& x, double slope) {
  for (auto& v : x)
    if (v < 0.0) v *= slope;
}

}  // namespace

DenseVector NeuralPreconditioner::apply(const DenseVector& v,
                                        const ProblemInstance& inst) const {
  const std::size_t n = desc_.grid_n;
  const std::size_t sp = n * n * n;
  check(v.size() == sp && inst.d.size() == sp,
        "NeuralPreconditioner: input length mismatch");
  const auto sizes = desc_.level_sizes();
  const auto& ch = desc_.channels;
  const std::size_t L = desc_.depth();
  const std::size_t k = desc_.kernel;
  const double slope = desc_.leaky_slope;
  const std::size_t lift = desc_.lift_channels();

  // 2-channel input [v | d]
  std::vector<double> x(2 * sp);
  std::copy(v.begin(), v.end(), x.begin());
  std::copy(inst.d.begin(), inst.d.end(), x.begin() + static_cast<std::ptrdiff_t>(sp));

  // stem: per-channel lift then conv
  const auto wl = params_.slice("stem.lift.w");
  std::vector<double> lifted(lift * sp);
  for (std::size_t o = 0; o < lift; ++o) {
    const double* src = x.data() + (o % 2) * sp;
    double* dst = lifted.data() + o * sp;
    for (std::size_t i = 0; i < sp; ++i) dst[i] = wl[o] * src[i];
  }
  leaky_inplace(lifted, slope);

  std::vector<std::vector<double>> skip(L);
  vol::VolDims dims{lift, n, n, n};
  skip[0].resize(ch[0] * sp);
  vol::conv3d_forward(lifted, dims, params_.slice("stem.conv.w"), ch[0], k,
                      {}, skip[0]);
  leaky_inplace(skip[0], slope);

  for (std::size_t i = 1; i < L; ++i) {
    const vol::VolDims in_d{ch[i - 1], sizes[i - 1], sizes[i - 1],
                            sizes[i - 1]};
    const vol::VolDims pool_d{ch[i - 1], sizes[i], sizes[i], sizes[i]};
    std::vector<double> pooled(pool_d.total());
    std::vector<std::size_t> argmax(pool_d.total());
    vol::maxpool2_forward(skip[i - 1], in_d, pooled, argmax);
    skip[i].resize(ch[i] * pool_d.spatial());
    vol::conv3d_forward(pooled, pool_d,
                        params_.slice("enc" + std::to_string(i) + ".conv.w"),
                        ch[i], k, {}, skip[i]);
    leaky_inplace(skip[i], slope);
  }

  const std::size_t nb = sizes[L - 1];
  vol::VolDims cur_d{ch[L - 1], nb, nb, nb};
  std::vector<double> cur(cur_d.total());
  vol::conv3d_forward(skip[L - 1], cur_d, params_.slice("bottleneck.conv.w"),
                      ch[L - 1], k, {}, cur);
  leaky_inplace(cur, slope);

  for (std::size_t i = L - 1; i >= 1; --i) {
    const std::string p = "dec" + std::to_string(i);
    const std::size_t kt = desc_.up_kernel();
    const std::size_t target = sizes[i - 1];
    const vol::VolDims up_d{ch[i - 1], target, target, target};
    std::vector<double> up(up_d.total());
    vol::convt3d_forward(cur, cur_d, params_.slice(p + ".up.w"), ch[i - 1],
                         kt, target, params_.slice(p + ".up.b"), up);
    leaky_inplace(up, slope);
    // concat with the encoder skip at this size
    std::vector<double> cat(2 * up_d.total());
    std::copy(up.begin(), up.end(), cat.begin());
    std::copy(skip[i - 1].begin(), skip[i - 1].end(),
              cat.begin() + static_cast<std::ptrdiff_t>(up.size()));
    const vol::VolDims cat_d{2 * ch[i - 1], target, target, target};
    cur_d = up_d;
    cur.assign(cur_d.total(), 0.0);
    vol::conv3d_forward(cat, cat_d, params_.slice(p + ".conv.w"), ch[i - 1],
                        k, {}, cur);
    leaky_inplace(cur, slope);
  }

  const vol::VolDims out_d{1, sizes[0], sizes[0], sizes[0]};
  std::vector<double> y(out_d.total());
  vol::conv3d_forward(cur, cur_d, params_.slice("head.w"), 1, 1,
                      params_.slice("head.b"), y);
  return DenseVector(std::move(y));
}

const std::vector<ad::Var>& NeuralPreconditioner::bind(ad::Tape& tape) const {
  if (bound_serial_ == tape.serial()) return leaves_;
  leaves_.clear();
  const auto& layout = params_.layout();
  leaves_.reserve(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto s = params_.slice(i);
    leaves_.push_back(
        tape.leaf(std::vector<double>(s.begin(), s.end()), {s.size()}));
  }
  bound_serial_ = tape.serial();
  return leaves_;
}

std::vector<double> NeuralPreconditioner::gather_gradient(
    const ad::Tape& tape) const {
  check(bound_serial_ == tape.serial(),
        "gather_gradient: parameters not bound to this tape");
  std::vector<double> grad(params_.size(), 0.0);
  const auto& layout = params_.layout();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& g = leaves_[i].grad();
    check(g.size() == layout[i].len, "gather_gradient: missing gradient");
    std::copy(g.begin(), g.end(),
              grad.begin() + static_cast<std::ptrdiff_t>(layout[i].offset));
  }
  return grad;
}

ad::Var NeuralPreconditioner::apply_ad(ad::Tape& tape, ad::Var v,
                                       const ProblemInstance& inst) const {
  const std::size_t n = desc_.grid_n;
  const std::size_t sp = n * n * n;
  check(ad::numel(v.shape()) == sp && inst.d.size() == sp,
        "NeuralPreconditioner: input length mismatch");
  const auto sizes = desc_.level_sizes();
  const auto& ch = desc_.channels;
  const std::size_t L = desc_.depth();
  const std::size_t k = desc_.kernel;
  const double slope = desc_.leaky_slope;

  const auto& leaves = bind(tape);
  auto leaf_of = [&](std::string_view name) -> ad::Var {
    const auto& layout = params_.layout();
    for (std::size_t i = 0; i < layout.size(); ++i)
      if (layout[i].name == name) return leaves[i];
    throw Error("apply_ad: unknown slice " + std::string(name));
  };
  ad::Var invalid;  // bias-free marker

  ad::Var vin = tape.reshape(v, {1, n, n, n});
  ad::Var din = tape.constant(inst.d.raw(), {1, n, n, n});
  ad::Var x = tape.concat_channels(vin, din);

  ad::Var lifted =
      tape.leaky_relu(tape.channel_lift(x, leaf_of("stem.lift.w")), slope);
  std::vector<ad::Var> skip(L);
  skip[0] = tape.leaky_relu(
      tape.conv3d(lifted, tape.reshape(leaf_of("stem.conv.w"),
                                       {ch[0], desc_.lift_channels(), k, k, k}),
                  invalid, k),
      slope);
  for (std::size_t i = 1; i < L; ++i) {
    ad::Var pooled = tape.maxpool3d(skip[i - 1]);
    skip[i] = tape.leaky_relu(
        tape.conv3d(pooled,
                    tape.reshape(leaf_of("enc" + std::to_string(i) + ".conv.w"),
                                 {ch[i], ch[i - 1], k, k, k}),
                    invalid, k),
        slope);
  }
  ad::Var cur = tape.leaky_relu(
      tape.conv3d(skip[L - 1],
                  tape.reshape(leaf_of("bottleneck.conv.w"),
                               {ch[L - 1], ch[L - 1], k, k, k}),
                  invalid, k),
      slope);
  for (std::size_t i = L - 1; i >= 1; --i) {
    const std::string p = "dec" + std::to_string(i);
    const std::size_t kt = desc_.up_kernel();
    const std::size_t target = sizes[i - 1];
    ad::Var up = tape.leaky_relu(
        tape.conv3d_transposed(
            cur,
            tape.reshape(leaf_of(p + ".up.w"), {ch[i], ch[i - 1], kt, kt, kt}),
            leaf_of(p + ".up.b"), kt, target),
        slope);
    ad::Var cat = tape.concat_channels(up, skip[i - 1]);
    cur = tape.leaky_relu(
        tape.conv3d(cat,
                    tape.reshape(leaf_of(p + ".conv.w"),
                                 {ch[i - 1], 2 * ch[i - 1], k, k, k}),
                    invalid, k),
        slope);
  }
  ad::Var y = tape.conv3d(
      cur, tape.reshape(leaf_of("head.w"), {1, ch[0], 1, 1, 1}),
      leaf_of("head.b"), 1);
  return tape.reshape(y, {sp});
}

void NeuralPreconditioner::save(const std::filesystem::path& path) const {
  params_.save(path, desc_.to_text());
}

NeuralPreconditioner NeuralPreconditioner::load(
    const std::filesystem::path& path) {
  auto [params, text] = ModelParams::load(path);
  return NeuralPreconditioner(UNetDescriptor::from_text(text),
                              std::move(params));
}

}  // namespace npkry
