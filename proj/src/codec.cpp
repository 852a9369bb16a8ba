// Copyright 2026 the actcodec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "actcodec/codec.hpp"

#include <fstream>
#include <sstream>

#include "actcodec/io.hpp"

namespace actcodec {

namespace {

constexpr char kCkptMagic[9] = "ACTCKPT1";

std::map<std::string, std::string> parse_pairs(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    require(static_cast<bool>(ls >> value), "codec config line '" + line + "' has no value");
    kv[key] = value;
  }
  return kv;
}

int get_int(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  require(it != kv.end(), "codec config is missing '" + key + "'");
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw InputError("codec config '" + key + "' is not an integer: " + it->second);
  }
}

double get_double(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  require(it != kv.end(), "codec config is missing '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw InputError("codec config '" + key + "' is not a number: " + it->second);
  }
}

}  // namespace

void CodecConfig::validate() const {
  patch.validate();
  taae.validate(patch);
  rvq.validate();
  require(rvq.dim == taae.d_latent, "rvq dim " + std::to_string(rvq.dim) + " differs from d_latent " +
                                        std::to_string(taae.d_latent));
}

std::string CodecConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "d_latent " << taae.d_latent << "\n"
     << "d_model " << taae.d_model << "\n"
     << "enc_layers " << taae.enc_layers << "\n"
     << "dec_layers " << taae.dec_layers << "\n"
     << "heads " << taae.heads << "\n"
     << "conv_kernel " << taae.conv_kernel << "\n"
     << "cells_h " << taae.cells_h << "\n"
     << "cells_a " << taae.cells_a << "\n"
     << "mlp_ratio " << taae.mlp_ratio << "\n"
     << "activation " << activation_name(taae.activation) << "\n"
     << "stages " << rvq.stages << "\n"
     << "codebook_size " << rvq.codebook_size << "\n"
     << "ema_decay " << rvq.decay << "\n"
     << "ema_epsilon " << rvq.epsilon << "\n"
     << "dead_threshold " << rvq.dead_threshold << "\n";
  return os.str();
}

CodecConfig CodecConfig::from_text(const std::string& codec_text, const std::string& patch_text) {
  const auto kv = parse_pairs(codec_text);
  CodecConfig c;
  c.patch = PatchSpec::from_text(patch_text);
  c.taae.d_latent = get_int(kv, "d_latent");
  c.taae.d_model = get_int(kv, "d_model");
  c.taae.enc_layers = get_int(kv, "enc_layers");
  c.taae.dec_layers = get_int(kv, "dec_layers");
  c.taae.heads = get_int(kv, "heads");
  c.taae.conv_kernel = get_int(kv, "conv_kernel");
  c.taae.cells_h = get_int(kv, "cells_h");
  c.taae.cells_a = get_int(kv, "cells_a");
  c.taae.mlp_ratio = get_int(kv, "mlp_ratio");
  const auto act = kv.find("activation");
  require(act != kv.end(), "codec config is missing 'activation'");
  c.taae.activation = parse_activation(act->second);
  c.rvq.stages = get_int(kv, "stages");
  c.rvq.codebook_size = get_int(kv, "codebook_size");
  c.rvq.dim = c.taae.d_latent;
  c.rvq.decay = get_double(kv, "ema_decay");
  c.rvq.epsilon = get_double(kv, "ema_epsilon");
  c.rvq.dead_threshold = get_double(kv, "dead_threshold");
  c.validate();
  return c;
}

Codec::Codec(CodecConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), model_(cfg_.taae, cfg_.patch), params_(model_.init_params(seed)),
      bank_(cfg_.rvq, seed ^ 0xB0A4C0DEULL) {
  cfg_.validate();
}

Codec::Codec(CodecConfig cfg, ad::ParamSet params, CodebookBank bank)
    : cfg_(std::move(cfg)), model_(cfg_.taae, cfg_.patch), params_(std::move(params)), bank_(std::move(bank)) {
  cfg_.validate();
  const auto fresh = model_.init_params(0);
  require(fresh.names() == params_.names(), "parameter set does not match the codec architecture");
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    require(fresh.value(i).rows() == params_.value(i).rows() && fresh.value(i).cols() == params_.value(i).cols(),
            "parameter '" + fresh.name(i) + "' has the wrong shape");
  }
  require(static_cast<int>(bank_.stages.size()) == cfg_.rvq.stages, "codebook bank stage count mismatch");
  for (const auto& s : bank_.stages) {
    require(s.size() == cfg_.rvq.codebook_size && s.dim() == cfg_.rvq.dim, "codebook shape mismatch");
  }
}

void Codec::check_chunk(const Mat& chunk) const {
  require(chunk.rows() == cfg_.patch.horizon && chunk.cols() == cfg_.patch.dims,
          "chunk is " + std::to_string(chunk.rows()) + "x" + std::to_string(chunk.cols()) + ", expected " +
              std::to_string(cfg_.patch.horizon) + "x" + std::to_string(cfg_.patch.dims));
}

Mat Codec::latents(const Mat& chunk) const {
  check_chunk(chunk);
  Mat patches(cfg_.patch.patch_count(), cfg_.patch.patch_width());
  patchify_into(chunk, cfg_.patch, patches, 0);
  return model_.encode_values(params_, patches, 1);
}

CodeTensor Codec::encode(const Mat& chunk) const {
  const Mat z = latents(chunk);
  LatentGrid grid{cfg_.taae.cells_h, cfg_.taae.cells_a, z};
  return rvq_encode(grid, bank_).codes;
}

Mat Codec::decode(const CodeTensor& codes) const {
  require(codes.stages == cfg_.rvq.stages && codes.cells_h == cfg_.taae.cells_h && codes.cells_a == cfg_.taae.cells_a,
          "code tensor is " + std::to_string(codes.stages) + "x" + std::to_string(codes.cells_h) + "x" +
              std::to_string(codes.cells_a) + ", expected " + std::to_string(cfg_.rvq.stages) + "x" +
              std::to_string(cfg_.taae.cells_h) + "x" + std::to_string(cfg_.taae.cells_a));
  const LatentGrid zq = rvq_decode(codes, bank_);
  PatchGrid grid;
  grid.patches = model_.decode_values(params_, zq.values, 1);
  grid.mask = patchify(ActionChunk(Mat::Zero(cfg_.patch.horizon, cfg_.patch.dims)), cfg_.patch).mask;
  return unpatchify(grid, cfg_.patch).values;
}

Mat Codec::reconstruct(const Mat& chunk) const { return decode(encode(chunk)); }

void save_checkpoint(const std::filesystem::path& path, const Codec& codec, const TrainingState* training) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw RuntimeFailure("cannot open " + tmp + " for writing");
    io::write_magic(os, kCkptMagic);
    io::write_u32(os, kCheckpointVersion);
    io::write_string(os, codec.config().to_text());
    io::write_string(os, codec.config().patch.to_text());
    const auto& params = codec.params();
    io::write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
      io::write_string(os, params.name(i));
      io::write_mat_f64(os, params.value(i));
    }
    const auto& bank = codec.bank();
    io::write_u32(os, static_cast<std::uint32_t>(bank.stages.size()));
    for (const auto& s : bank.stages) {
      io::write_mat_f64(os, s.codes);
      io::write_mat_f64(os, Mat(s.cluster_size.transpose()));
      io::write_mat_f64(os, s.embed_sum);
      io::write_u32(os, static_cast<std::uint32_t>(s.usage.size()));
      for (auto u : s.usage) io::write_i64(os, u);
    }
    io::write_u32(os, training ? 1u : 0u);
    if (training) {
      require(training->adam_m.size() == params.size() && training->adam_v.size() == params.size(),
              "optimizer state does not match parameter count");
      io::write_i64(os, training->step);
      io::write_string(os, training->train_config_text);
      for (std::size_t i = 0; i < params.size(); ++i) {
        io::write_mat_f64(os, training->adam_m[i]);
        io::write_mat_f64(os, training->adam_v[i]);
      }
    }
    os.flush();
    if (!os) throw RuntimeFailure("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RuntimeFailure("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open checkpoint " + path.string());
  io::expect_magic(is, kCkptMagic, "checkpoint " + path.string());
  const auto version = io::read_u32(is);
  require(version == kCheckpointVersion, "checkpoint " + path.string() + " has version " + std::to_string(version) +
                                             ", this build reads version " + std::to_string(kCheckpointVersion));
  const auto codec_text = io::read_string(is);
  const auto patch_text = io::read_string(is);
  CodecConfig cfg = CodecConfig::from_text(codec_text, patch_text);

  ad::ParamSet params;
  const auto n_params = io::read_u32(is);
  for (std::uint32_t i = 0; i < n_params; ++i) {
    auto name = io::read_string(is);
    params.add(std::move(name), io::read_mat_f64(is));
  }
  CodebookBank bank;
  bank.config = cfg.rvq;
  const auto n_stages = io::read_u32(is);
  require(static_cast<int>(n_stages) == cfg.rvq.stages, "checkpoint stage count mismatch");
  for (std::uint32_t s = 0; s < n_stages; ++s) {
    Codebook book;
    book.codes = io::read_mat_f64(is);
    const Mat cs = io::read_mat_f64(is);
    require(cs.rows() == 1 && cs.cols() == book.codes.rows(), "checkpoint cluster-size shape mismatch");
    book.cluster_size = cs.row(0).transpose();
    book.embed_sum = io::read_mat_f64(is);
    const auto n_usage = io::read_u32(is);
    require(n_usage == book.codes.rows(), "checkpoint usage shape mismatch");
    book.usage.resize(n_usage);
    for (auto& u : book.usage) u = io::read_i64(is);
    bank.stages.push_back(std::move(book));
  }
  LoadedCheckpoint out{Codec(std::move(cfg), std::move(params), std::move(bank)), std::nullopt};
  if (io::read_u32(is) == 1u) {
    TrainingState st;
    st.step = io::read_i64(is);
    st.train_config_text = io::read_string(is);
    for (std::size_t i = 0; i < out.codec.params().size(); ++i) {
      st.adam_m.push_back(io::read_mat_f64(is));
      st.adam_v.push_back(io::read_mat_f64(is));
    }
    out.training = std::move(st);
  }
  return out;
}

}  // namespace actcodec
