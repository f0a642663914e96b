#include "brdfnqm/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "brdfnqm/errors.hpp"
#include "brdfnqm/table.hpp"

namespace brdfnqm::nn {

namespace {

constexpr const char* kMagic = "BRDFNQM-CHECKPOINT";

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

std::string header_text(const MlpModel& m) {
  std::ostringstream h;
  h << kMagic << ' ' << kCheckpointVersion << '\n';
  h << "input_dim " << m.arch.input_dim << '\n';
  h << "hidden";
  for (int w : m.arch.hidden) h << ' ' << w;
  h << '\n';
  h << "dropout " << fmt_double(m.arch.dropout) << '\n';
  h << "layernorm_eps " << fmt_double(m.arch.layernorm_eps) << '\n';
  h << "jod_range " << fmt_double(m.jod_min) << ' ' << fmt_double(m.jod_max) << '\n';
  h << "whitening_mean";
  for (double v : m.whitening.mean) h << ' ' << fmt_double(v);
  h << '\n';
  h << "whitening_std";
  for (double v : m.whitening.std) h << ' ' << fmt_double(v);
  h << '\n';
  h << "seed " << m.seed << '\n';
  const std::size_t n = m.params.count();
  h << "param_count " << n << '\n';
  h << "payload_bytes " << n * sizeof(float) << '\n';
  h << "END\n";
  return h.str();
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

template <typename Fn>
auto guarded(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw CheckpointError("malformed checkpoint field '" + what + "': " + e.what());
  }
}

CheckpointInfo parse_header(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError(name + ": empty checkpoint");
  auto magic = split_words(line);
  if (magic.size() != 2 || magic[0] != kMagic) throw CheckpointError(name + ": not a checkpoint file");
  if (magic[1] != std::to_string(kCheckpointVersion)) {
    throw CheckpointError(name + ": unsupported checkpoint version " + magic[1]);
  }

  CheckpointInfo info;
  std::vector<std::string> seen;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == "END") {
      ended = true;
      break;
    }
    const auto w = split_words(line);
    if (w.empty()) throw CheckpointError(name + ": blank header line");
    const std::string& key = w[0];
    const auto arity = [&](std::size_t n) {
      if (w.size() != n + 1) throw CheckpointError(name + ": wrong value count for '" + key + "'");
    };
    guarded(key, [&] {
      if (key == "input_dim") {
        arity(1);
        info.arch.input_dim = static_cast<int>(parse_int(w[1]));
      } else if (key == "hidden") {
        if (w.size() < 2) throw CheckpointError(name + ": no hidden widths");
        info.arch.hidden.clear();
        for (std::size_t i = 1; i < w.size(); ++i) info.arch.hidden.push_back(static_cast<int>(parse_int(w[i])));
      } else if (key == "dropout") {
        arity(1);
        info.arch.dropout = parse_double(w[1]);
      } else if (key == "layernorm_eps") {
        arity(1);
        info.arch.layernorm_eps = parse_double(w[1]);
      } else if (key == "jod_range") {
        arity(2);
        info.jod_min = parse_double(w[1]);
        info.jod_max = parse_double(w[2]);
      } else if (key == "whitening_mean") {
        arity(3);
        for (int c = 0; c < 3; ++c) info.whitening.mean[c] = parse_double(w[c + 1]);
      } else if (key == "whitening_std") {
        arity(3);
        for (int c = 0; c < 3; ++c) info.whitening.std[c] = parse_double(w[c + 1]);
      } else if (key == "seed") {
        arity(1);
        info.seed = parse_uint(w[1]);
      } else if (key == "param_count") {
        arity(1);
        info.param_count = parse_uint(w[1]);
      } else if (key == "payload_bytes") {
        arity(1);
        info.payload_bytes = parse_uint(w[1]);
      } else {
        throw CheckpointError(name + ": unknown header field '" + key + "'");
      }
      return 0;
    });
    seen.push_back(key);
  }
  if (!ended) throw CheckpointError(name + ": header is not terminated");
  for (const char* required : {"input_dim", "hidden", "dropout", "layernorm_eps", "jod_range", "whitening_mean",
                               "whitening_std", "seed", "param_count", "payload_bytes"}) {
    if (std::find(seen.begin(), seen.end(), required) == seen.end()) {
      throw CheckpointError(name + ": missing header field '" + required + "'");
    }
  }
  if (info.arch.input_dim <= 0) throw CheckpointError(name + ": input_dim must be positive");
  for (int h : info.arch.hidden) {
    if (h <= 0) throw CheckpointError(name + ": hidden widths must be positive");
  }
  if (!(info.jod_min < info.jod_max)) throw CheckpointError(name + ": jod_range is empty");
  if (info.param_count != info.arch.parameter_count()) {
    throw CheckpointError(name + ": param_count does not match the architecture");
  }
  if (info.payload_bytes != info.param_count * sizeof(float)) {
    throw CheckpointError(name + ": payload_bytes does not match param_count");
  }
  return info;
}

MlpParams<float> shaped_params(const Architecture& arch) {
  MlpParams<float> p;
  int in = arch.input_dim;
  for (int width : arch.hidden) {
    p.hidden.push_back({Matrix<float>(width, in), RowVector<float>(width), RowVector<float>(width),
                        RowVector<float>(width)});
    in = width;
  }
  p.out_weight.resize(1, in);
  p.out_bias.resize(1);
  return p;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  if (model.params.count() != model.arch.parameter_count()) {
    throw CheckpointError("model parameters do not match its architecture");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << header_text(model);
  std::vector<std::uint32_t> buf;
  model.params.for_each_block([&](const auto& block, bool) {
    buf.resize(static_cast<std::size_t>(block.size()));
    for (Eigen::Index i = 0; i < block.size(); ++i) buf[static_cast<std::size_t>(i)] = to_le(std::bit_cast<std::uint32_t>(block.data()[i]));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
  });
  if (!out) throw IoError("failed writing " + path.string());
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_header(in, path.string());
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path);
  const CheckpointInfo info = parse_header(in, path.string());
  const auto start = in.tellg();
  in.seekg(0, std::ios::end);
  const auto end = in.tellg();
  if (end - start != static_cast<std::streamoff>(info.payload_bytes)) {
    throw CheckpointError(path.string() + ": payload size differs from header");
  }
  in.seekg(start);

  MlpModel m;
  m.arch = info.arch;
  m.jod_min = info.jod_min;
  m.jod_max = info.jod_max;
  m.whitening = info.whitening;
  m.seed = info.seed;
  m.params = shaped_params(info.arch);
  std::vector<std::uint32_t> buf;
  m.params.for_each_block([&](auto& block, bool) {
    buf.resize(static_cast<std::size_t>(block.size()));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    for (Eigen::Index i = 0; i < block.size(); ++i) block.data()[i] = std::bit_cast<float>(to_le(buf[static_cast<std::size_t>(i)]));
  });
  if (!in) throw CheckpointError(path.string() + ": truncated payload");
  return m;
}

}  // namespace brdfnqm::nn
