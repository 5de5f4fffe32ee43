#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hill/error.hpp"
#include "hill/trainer.hpp"

namespace hill {

namespace {

using nlohmann::json;

const char* readout_name(Readout r) { return r == Readout::Sum ? "sum" : "mean"; }
const char* form_name(NtXentForm f) { return f == NtXentForm::SimClr ? "simclr" : "literal"; }

template <typename T>
T positive_int(const json& v, const char* key) {
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    throw Error(std::string("config: ") + key + " must be a positive integer");
  }
  return v.get<T>();
}

double number(const json& v, const char* key) {
  if (!v.is_number()) throw Error(std::string("config: ") + key + " must be a number");
  return v.get<double>();
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw Error("config: expected a JSON object");

  TrainConfig c;
  auto& m = c.model;
  for (const auto& [key, v] : doc.items()) {
    if (key == "d_B") {
      m.d_B = positive_int<std::size_t>(v, "d_B");
    } else if (key == "d_V") {
      m.d_V = positive_int<std::size_t>(v, "d_V");
    } else if (key == "K") {
      m.K = positive_int<std::uint32_t>(v, "K");
    } else if (key == "tau") {
      m.tau = number(v, "tau");
      if (!(m.tau > 0.0)) throw Error("config: tau must be positive");
    } else if (key == "lambda_clr") {
      m.lambda_clr = number(v, "lambda_clr");
      if (!(m.lambda_clr >= 0.0)) throw Error("config: lambda_clr must be non-negative");
    } else if (key == "eta") {
      const auto s = v.is_string() ? v.get<std::string>() : "";
      if (s == "sum") {
        m.eta = Readout::Sum;
      } else if (s == "mean") {
        m.eta = Readout::Mean;
      } else {
        throw Error("config: eta must be \"sum\" or \"mean\"");
      }
    } else if (key == "ntxent_form") {
      const auto s = v.is_string() ? v.get<std::string>() : "";
      if (s == "simclr") {
        m.ntxent_form = NtXentForm::SimClr;
      } else if (s == "literal") {
        m.ntxent_form = NtXentForm::Literal;
      } else {
        throw Error("config: ntxent_form must be \"simclr\" or \"literal\"");
      }
    } else if (key == "vocab_size") {
      m.vocab_size = positive_int<std::size_t>(v, "vocab_size");
    } else if (key == "lr_encoder") {
      c.lr_encoder = number(v, "lr_encoder");
      if (!(c.lr_encoder > 0.0)) throw Error("config: lr_encoder must be positive");
    } else if (key == "lr_structure") {
      c.lr_structure = number(v, "lr_structure");
      if (!(c.lr_structure > 0.0)) throw Error("config: lr_structure must be positive");
    } else if (key == "batch_size") {
      c.batch_size = positive_int<std::size_t>(v, "batch_size");
    } else if (key == "epochs") {
      c.epochs = positive_int<std::size_t>(v, "epochs");
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw Error("config: seed must be a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else {
      throw Error("config: unknown key \"" + key + "\"");
    }
  }
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str());
}

std::string train_config_to_json(const TrainConfig& c) {
  nlohmann::ordered_json doc;
  doc["d_B"] = c.model.d_B;
  doc["d_V"] = c.model.d_V;
  doc["K"] = c.model.K;
  doc["tau"] = c.model.tau;
  doc["lambda_clr"] = c.model.lambda_clr;
  doc["eta"] = readout_name(c.model.eta);
  doc["lr_encoder"] = c.lr_encoder;
  doc["lr_structure"] = c.lr_structure;
  doc["batch_size"] = c.batch_size;
  doc["epochs"] = c.epochs;
  doc["seed"] = c.seed;
  doc["ntxent_form"] = form_name(c.model.ntxent_form);
  doc["vocab_size"] = c.model.vocab_size;
  return doc.dump(2) + "\n";
}

std::string epoch_report_to_json(const EpochReport& r) {
  nlohmann::ordered_json doc;
  doc["epoch"] = r.epoch;
  doc["loss"] = r.loss;
  doc["classification_loss"] = r.classification_loss;
  doc["contrastive_loss"] = r.contrastive_loss;
  if (r.has_dev) {
    doc["dev_micro_f1"] = r.dev.micro_f1;
    doc["dev_macro_f1"] = r.dev.macro_f1;
  }
  return doc.dump();
}

}  // namespace hill
