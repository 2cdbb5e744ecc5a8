// cada/config.cc

// Copyright 2026 CADA-GAN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "cada/config.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace cada {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};
using Section = std::map<std::string, Entry>;

std::string Trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, Section> ParseIni(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::map<std::string, Section> sections;
  std::string line, current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = Trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ParseError(CADA_MAKE_MSG("config line " << lineno << ": unterminated section header"));
      current = Trim(t.substr(1, t.size() - 2));
      if (current.empty())
        throw ParseError(CADA_MAKE_MSG("config line " << lineno << ": empty section name"));
      sections.try_emplace(current);
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ParseError(CADA_MAKE_MSG("config line " << lineno << ": expected key = value"));
    if (current.empty())
      throw ParseError(CADA_MAKE_MSG("config line " << lineno << ": key outside any section"));
    std::string key = Trim(t.substr(0, eq));
    std::string value = Trim(t.substr(eq + 1));
    auto [it, inserted] = sections[current].try_emplace(key, Entry{value, lineno, false});
    if (!inserted)
      throw ParseError(CADA_MAKE_MSG("config line " << lineno << ": duplicate key '" << key
                                                    << "' in [" << current << "]"));
  }
  return sections;
}

class SectionReader {
 public:
  SectionReader(std::map<std::string, Section>* sections, const std::string& name)
      : name_(name) {
    auto it = sections->find(name);
    section_ = (it == sections->end()) ? nullptr : &it->second;
  }

  bool Has(const std::string& key) const {
    return section_ && section_->count(key);
  }

  std::string GetString(const std::string& key, const std::string& def) {
    if (!Has(key)) return def;
    auto& e = (*section_)[key];
    e.used = true;
    return e.value;
  }

  double GetDouble(const std::string& key, double def) {
    if (!Has(key)) return def;
    auto& e = (*section_)[key];
    e.used = true;
    try {
      size_t pos = 0;
      double v = std::stod(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParseError(CADA_MAKE_MSG("config line " << e.line << ": [" << name_ << "] " << key
                                                    << " is not a number: '" << e.value << "'"));
    }
  }

  int64_t GetInt(const std::string& key, int64_t def) {
    if (!Has(key)) return def;
    auto& e = (*section_)[key];
    e.used = true;
    try {
      size_t pos = 0;
      int64_t v = std::stoll(e.value, &pos);
      if (pos != e.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ParseError(CADA_MAKE_MSG("config line " << e.line << ": [" << name_ << "] " << key
                                                    << " is not an integer: '" << e.value << "'"));
    }
  }

  bool GetBool(const std::string& key, bool def) {
    if (!Has(key)) return def;
    auto& e = (*section_)[key];
    e.used = true;
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ParseError(CADA_MAKE_MSG("config line " << e.line << ": [" << name_ << "] " << key
                                                  << " must be true/false"));
  }

  std::vector<std::string> GetStringList(const std::string& key,
                                         const std::vector<std::string>& def) {
    if (!Has(key)) return def;
    auto& e = (*section_)[key];
    e.used = true;
    std::vector<std::string> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = Trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  std::vector<int64_t> GetIntList(const std::string& key, const std::vector<int64_t>& def) {
    if (!Has(key)) return def;
    std::vector<int64_t> out;
    for (const std::string& s : GetStringList(key, {})) {
      try {
        out.push_back(std::stoll(s));
      } catch (const std::exception&) {
        throw ParseError(CADA_MAKE_MSG("config: [" << name_ << "] " << key
                                                   << " has non-integer element '" << s << "'"));
      }
    }
    return out;
  }

 private:
  std::string name_;
  Section* section_;
};

ChannelProfile ParseProfileSection(const std::string& name, SectionReader* r) {
  ChannelProfile p;
  p.name = name;
  std::string bands = r->GetString("eq_bands", "");
  if (!bands.empty()) {
    std::stringstream ss(bands);
    std::string item;
    while (std::getline(ss, item, ';')) {
      item = Trim(item);
      if (item.empty()) continue;
      EqBand band;
      if (std::sscanf(item.c_str(), "%lf:%lf:%lf", &band.center_hz, &band.gain_db, &band.q) != 3)
        throw ParseError("profile " + name + ": eq band must be 'center:gain_db:q', got '" + item +
                         "'");
      p.eq_bands.push_back(band);
    }
  }
  if (r->Has("lowpass_hz")) p.lowpass_hz = r->GetDouble("lowpass_hz", 0);
  if (r->Has("highpass_hz")) p.highpass_hz = r->GetDouble("highpass_hz", 0);
  p.gain_db = r->GetDouble("gain_db", 0.0);
  if (r->Has("noise_snr_db")) p.noise_snr_db = r->GetDouble("noise_snr_db", 0);
  p.seed = uint64_t(r->GetInt("seed", 0));
  return p;
}

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"corpus", {"sample_rate", "n_clean", "clean_seed", "dur_s", "out_dir", "profiles"}},
    {"features",
     {"win_ms", "hop_ms", "n_fft", "n_mels", "frame_len", "log_floor", "log_ceil", "mel_major"}},
    {"encoder",
     {"d_c", "widths", "lr", "beta1", "beta2", "eps", "epochs", "batch_size", "seed",
      "val_fraction", "exclude_channels", "arch", "manifest"}},
    {"gan", {"g_widths", "d_width", "n_res_blocks", "dropout", "proj_dim", "frame_t", "frame_m"}},
    {"train",
     {"manifest", "source_channel", "target_channel", "n_sample", "sample_seed", "epochs", "lr",
      "beta1", "beta2", "eps", "lambda_ch", "tau", "n_patches", "batch_size", "seed",
      "negatives_from", "adv_form", "lr_decay", "checkpoint_every"}},
    {"simulate", {"seed"}},
};

const std::vector<std::string> kProfileKeys = {"eq_bands",     "lowpass_hz", "highpass_hz",
                                               "gain_db",      "noise_snr_db", "seed"};

}  // namespace

CadaConfig DefaultConfig() {
  CadaConfig cfg;
  cfg.profile_bank = DefaultProfileBank();
  for (const auto& p : cfg.profile_bank) cfg.corpus.profiles.push_back(p.name);
  return cfg;
}

CadaConfig LoadConfig(const std::string& path) {
  auto sections = ParseIni(path);

  // Reject unknown sections up front.
  for (const auto& [name, sec] : sections) {
    if (name.rfind("profile:", 0) == 0) continue;
    if (!kKnownKeys.count(name)) throw ParseError("config: unknown section [" + name + "]");
  }

  CadaConfig cfg;

  SectionReader corpus(&sections, "corpus");
  cfg.corpus.sample_rate = int(corpus.GetInt("sample_rate", cfg.corpus.sample_rate));
  cfg.corpus.n_clean = int(corpus.GetInt("n_clean", cfg.corpus.n_clean));
  cfg.corpus.clean_seed = uint64_t(corpus.GetInt("clean_seed", int64_t(cfg.corpus.clean_seed)));
  cfg.corpus.dur_s = corpus.GetDouble("dur_s", cfg.corpus.dur_s);
  cfg.corpus.out_dir = corpus.GetString("out_dir", cfg.corpus.out_dir);
  cfg.corpus.profiles = corpus.GetStringList("profiles", {});

  SectionReader feats(&sections, "features");
  cfg.features.win_ms = feats.GetDouble("win_ms", cfg.features.win_ms);
  cfg.features.hop_ms = feats.GetDouble("hop_ms", cfg.features.hop_ms);
  cfg.features.n_fft = int(feats.GetInt("n_fft", cfg.features.n_fft));
  cfg.features.n_mels = int(feats.GetInt("n_mels", cfg.features.n_mels));
  cfg.features.frame_len = int(feats.GetInt("frame_len", cfg.features.frame_len));
  cfg.features.log_floor = feats.GetDouble("log_floor", cfg.features.log_floor);
  cfg.features.log_ceil = feats.GetDouble("log_ceil", cfg.features.log_ceil);
  cfg.features.mel_major = feats.GetBool("mel_major", cfg.features.mel_major);

  SectionReader enc(&sections, "encoder");
  cfg.encoder.d_c = int(enc.GetInt("d_c", cfg.encoder.d_c));
  cfg.encoder.widths = enc.GetIntList("widths", cfg.encoder.widths);
  cfg.encoder.lr = enc.GetDouble("lr", cfg.encoder.lr);
  cfg.encoder.beta1 = enc.GetDouble("beta1", cfg.encoder.beta1);
  cfg.encoder.beta2 = enc.GetDouble("beta2", cfg.encoder.beta2);
  cfg.encoder.eps = enc.GetDouble("eps", cfg.encoder.eps);
  cfg.encoder.epochs = int(enc.GetInt("epochs", cfg.encoder.epochs));
  cfg.encoder.batch_size = int(enc.GetInt("batch_size", cfg.encoder.batch_size));
  cfg.encoder.seed = uint64_t(enc.GetInt("seed", int64_t(cfg.encoder.seed)));
  cfg.encoder.val_fraction = enc.GetDouble("val_fraction", cfg.encoder.val_fraction);
  cfg.encoder.exclude_channels = enc.GetStringList("exclude_channels", {});
  cfg.encoder.arch = enc.GetString("arch", cfg.encoder.arch);
  cfg.encoder.manifest = enc.GetString("manifest", "");

  SectionReader gan(&sections, "gan");
  cfg.gan.g_widths = gan.GetIntList("g_widths", cfg.gan.g_widths);
  cfg.gan.d_width = gan.GetInt("d_width", cfg.gan.d_width);
  cfg.gan.n_res_blocks = int(gan.GetInt("n_res_blocks", cfg.gan.n_res_blocks));
  cfg.gan.dropout = gan.GetDouble("dropout", cfg.gan.dropout);
  cfg.gan.proj_dim = gan.GetInt("proj_dim", cfg.gan.proj_dim);
  cfg.gan.frame_t = int(gan.GetInt("frame_t", cfg.gan.frame_t));
  cfg.gan.frame_m = int(gan.GetInt("frame_m", cfg.gan.frame_m));

  SectionReader train(&sections, "train");
  cfg.train.manifest = train.GetString("manifest", "");
  cfg.train.source_channel = train.GetString("source_channel", cfg.train.source_channel);
  cfg.train.target_channel = train.GetString("target_channel", cfg.train.target_channel);
  cfg.train.n_sample = int(train.GetInt("n_sample", cfg.train.n_sample));
  cfg.train.sample_seed = uint64_t(train.GetInt("sample_seed", int64_t(cfg.train.sample_seed)));
  cfg.train.epochs = int(train.GetInt("epochs", cfg.train.epochs));
  cfg.train.lr = train.GetDouble("lr", cfg.train.lr);
  cfg.train.beta1 = train.GetDouble("beta1", cfg.train.beta1);
  cfg.train.beta2 = train.GetDouble("beta2", cfg.train.beta2);
  cfg.train.eps = train.GetDouble("eps", cfg.train.eps);
  cfg.train.lambda_ch = train.GetDouble("lambda_ch", cfg.train.lambda_ch);
  cfg.train.tau = train.GetDouble("tau", cfg.train.tau);
  cfg.train.n_patches = int(train.GetInt("n_patches", cfg.train.n_patches));
  cfg.train.batch_size = int(train.GetInt("batch_size", cfg.train.batch_size));
  cfg.train.seed = uint64_t(train.GetInt("seed", int64_t(cfg.train.seed)));
  cfg.train.negatives_from =
      ParseNegativesFrom(train.GetString("negatives_from", ToString(cfg.train.negatives_from)));
  cfg.train.adv_form = ParseAdvForm(train.GetString("adv_form", ToString(cfg.train.adv_form)));
  cfg.train.lr_decay = train.GetBool("lr_decay", cfg.train.lr_decay);
  cfg.train.checkpoint_every = int(train.GetInt("checkpoint_every", cfg.train.checkpoint_every));
  cfg.train.Validate();

  SectionReader sim(&sections, "simulate");
  cfg.simulate.seed = uint64_t(sim.GetInt("seed", int64_t(cfg.simulate.seed)));

  for (auto& [name, sec] : sections) {
    if (name.rfind("profile:", 0) != 0) continue;
    SectionReader r(&sections, name);
    cfg.profile_bank.push_back(ParseProfileSection(name.substr(8), &r));
  }
  if (cfg.corpus.profiles.empty())
    for (const auto& p : cfg.profile_bank) cfg.corpus.profiles.push_back(p.name);

  // Every key must belong to its section's schema.
  for (const auto& [name, sec] : sections) {
    const std::vector<std::string>* known =
        name.rfind("profile:", 0) == 0 ? &kProfileKeys : &kKnownKeys.at(name);
    for (const auto& [key, entry] : sec) {
      if (std::find(known->begin(), known->end(), key) == known->end())
        throw ParseError(CADA_MAKE_MSG("config line " << entry.line << ": unknown key '" << key
                                                      << "' in [" << name << "]"));
    }
  }

  std::ifstream raw(path, std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(raw)), std::istreambuf_iterator<char>());
  cfg.config_hash = Fnv1a64(text);
  return cfg;
}

std::string DefaultConfigText() {
  std::ostringstream os;
  CadaConfig d = DefaultConfig();
  os << "[corpus]\n"
     << "sample_rate = " << d.corpus.sample_rate << "\n"
     << "n_clean = " << d.corpus.n_clean << "\n"
     << "clean_seed = " << d.corpus.clean_seed << "\n"
     << "dur_s = " << d.corpus.dur_s << "\n"
     << "out_dir = " << d.corpus.out_dir << "\n\n"
     << "[features]\n"
     << "win_ms = 25\nhop_ms = 10\nn_fft = 512\nn_mels = 128\nframe_len = 129\n"
     << "log_floor = -10\nlog_ceil = 2\nmel_major = false\n\n"
     << "[encoder]\n"
     << "d_c = 64\nwidths = 16,32,64,128\nlr = 0.001\nbeta1 = 0.9\nbeta2 = 0.999\neps = 1e-8\n"
     << "epochs = 30\nbatch_size = 16\nseed = 1\nval_fraction = 0.1\n"
     << "exclude_channels = condenser-ish,webcam-ish\narch = cnn_mfa\n\n"
     << "[gan]\n"
     << "g_widths = 64,128\nd_width = 64\nn_res_blocks = 9\ndropout = 0.5\nproj_dim = 256\n\n"
     << "[train]\n"
     << "source_channel = condenser-ish\ntarget_channel = webcam-ish\nn_sample = 40\n"
     << "sample_seed = 17\nepochs = 400\nlr = 0.0002\nbeta1 = 0.5\nbeta2 = 0.999\neps = 1e-8\n"
     << "lambda_ch = 0.5\ntau = 0.07\nn_patches = 256\nbatch_size = 4\nseed = 1\n"
     << "negatives_from = source\nadv_form = non_saturating\nlr_decay = true\n"
     << "checkpoint_every = 50\n\n"
     << "[simulate]\nseed = 1\n";
  for (const auto& p : DefaultProfileBank()) {
    os << "\n[profile:" << p.name << "]\n";
    if (!p.eq_bands.empty()) {
      os << "eq_bands = ";
      for (size_t i = 0; i < p.eq_bands.size(); ++i) {
        if (i) os << ";";
        os << p.eq_bands[i].center_hz << ":" << p.eq_bands[i].gain_db << ":" << p.eq_bands[i].q;
      }
      os << "\n";
    }
    if (p.lowpass_hz) os << "lowpass_hz = " << *p.lowpass_hz << "\n";
    if (p.highpass_hz) os << "highpass_hz = " << *p.highpass_hz << "\n";
    if (p.gain_db != 0) os << "gain_db = " << p.gain_db << "\n";
    if (p.noise_snr_db) os << "noise_snr_db = " << *p.noise_snr_db << "\n";
    os << "seed = " << p.seed << "\n";
  }
  return os.str();
}

}  // namespace cada
