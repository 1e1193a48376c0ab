// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/dataset_io.hpp"

#include <fstream>
#include <sstream>

namespace ltdm {

using nlohmann::json;

json dataset_to_json(const Dataset& data) {
  json records = json::array();
  for (const auto& r : data.records) {
    json sentences = json::array();
    for (const auto& s : r.sentences) {
      sentences.push_back({{"events", s.events}, {"stamps", s.stamps}});
    }
    records.push_back({{"sentences", std::move(sentences)}});
  }
  return {{"alphabet", data.alphabet}, {"records", std::move(records)}};
}

Dataset dataset_from_json(const json& j) {
  Dataset data;
  try {
    data.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    for (const auto& r : j.at("records")) {
      ProcessRecord rec;
      for (const auto& s : r.at("sentences")) {
        Sentence sent;
        sent.events = s.at("events").get<std::vector<EventId>>();
        sent.stamps = s.at("stamps").get<std::vector<double>>();
        rec.sentences.push_back(std::move(sent));
      }
      data.records.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw MalformedRecord(std::string("dataset schema: ") + e.what());
  }
  validate_dataset(data);
  return data;
}

json dictionary_to_json(const Dictionary& d, const std::vector<std::string>& alphabet) {
  json out = json::array();
  for (const auto& p : d) out.push_back(render_pattern(p, alphabet));
  return out;
}

Dictionary dictionary_from_json(const json& j, const std::vector<std::string>& alphabet) {
  Dictionary d;
  for (const auto& item : j) {
    Pattern p;
    if (item.is_string()) {
      p = parse_pattern(item.get<std::string>(), alphabet);
    } else {
      p = Pattern(item.get<std::vector<EventId>>());
    }
    if (!d.add(std::move(p))) throw MalformedRecord("duplicate pattern in dictionary file");
  }
  return d;
}

json params_to_json(const ModelParams& p) {
  return {{"pi", p.pi}, {"theta", p.theta}, {"lambda", p.lambda}, {"kappa", p.kappa}};
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  try {
    p.pi = j.at("pi").get<std::vector<double>>();
    p.theta = j.at("theta").get<std::vector<std::vector<double>>>();
    p.lambda = j.at("lambda").get<std::vector<double>>();
    p.kappa = j.at("kappa").get<double>();
  } catch (const json::exception& e) {
    throw MalformedRecord(std::string("parameter schema: ") + e.what());
  }
  return p;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_json_file(path));
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  write_json_file(path, dataset_to_json(data));
}

}  // namespace ltdm
