#pragma once

// Versioned JSON documents for trained models. Serialization is canonical:
// keys are emitted sorted and doubles use shortest round-trip formatting, so
// identical models produce byte-identical documents and a serialize ->
// deserialize -> serialize cycle is the identity. Shape grids are stored once
// in the binmap section and rebound on load.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "glassgam/common.hpp"
#include "glassgam/logreg.hpp"
#include "glassgam/model.hpp"

namespace glassgam {

inline constexpr const char* kModelFormat = "glassgam.model";
inline constexpr int kModelFormatVersion = 1;

namespace detail {

using json = nlohmann::json;

inline json feature_bins_to_json(const FeatureBins& fb) {
  json j;
  j["feature"] = fb.feature;
  j["kind"] = fb.kind == ColumnKind::continuous ? "continuous" : "categorical";
  if (fb.kind == ColumnKind::continuous) {
    j["cuts"] = fb.cuts;
    j["value_min"] = fb.value_min;
    j["value_max"] = fb.value_max;
  } else {
    j["categories"] = fb.category_labels;
  }
  j["counts"] = fb.counts;
  return j;
}

inline FeatureBins feature_bins_from_json(const json& j) {
  FeatureBins fb;
  fb.feature = j.at("feature").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "continuous") {
    fb.kind = ColumnKind::continuous;
    fb.cuts = j.at("cuts").get<std::vector<double>>();
    fb.value_min = j.at("value_min").get<double>();
    fb.value_max = j.at("value_max").get<double>();
  } else if (kind == "categorical") {
    fb.kind = ColumnKind::categorical;
    fb.category_labels = j.at("categories").get<std::vector<std::string>>();
  } else {
    throw ValueError("model document: unknown bin kind '" + kind + "'");
  }
  fb.counts = j.at("counts").get<std::vector<std::int64_t>>();
  if (fb.counts.size() != static_cast<std::size_t>(fb.n_bins())) {
    throw ValueError("model document: bin counts do not match the grid for '" + fb.feature +
                     "'");
  }
  return fb;
}

inline void check_envelope(const json& j, const std::string& expected_type) {
  if (!j.contains("format") || j.at("format").get<std::string>() != kModelFormat) {
    throw ValueError("not a model document (missing or wrong format tag)");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw ValueError("unsupported model document version " + std::to_string(version) +
                     " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }
  const auto type = j.at("model_type").get<std::string>();
  if (type != expected_type) {
    throw ValueError("expected a " + expected_type + " model document, found '" + type + "'");
  }
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace detail

inline std::string serialize(const AdditiveModel& m) {
  using detail::json;
  json j;
  j["format"] = kModelFormat;
  j["format_version"] = kModelFormatVersion;
  j["model_type"] = "additive";
  j["link"] = m.link == LinkFunction::logistic ? "logistic" : "identity";
  j["intercept"] = m.intercept;
  json binmap = json::array();
  for (const auto& fb : m.binmap.features) binmap.push_back(detail::feature_bins_to_json(fb));
  j["binmap"] = std::move(binmap);
  json shapes = json::array();
  for (const auto& s : m.shapes) {
    json js;
    js["feature"] = s.feature;
    js["values"] = s.values;
    js["stderrs"] = s.stderrs;
    shapes.push_back(std::move(js));
  }
  j["shapes"] = std::move(shapes);
  json inters = json::array();
  for (const auto& inter : m.interactions) {
    json ji;
    ji["feature_a"] = inter.feature_a;
    ji["feature_b"] = inter.feature_b;
    ji["cell_of_bin_a"] = inter.cell_of_bin_a;
    ji["cell_of_bin_b"] = inter.cell_of_bin_b;
    ji["n_cells_a"] = inter.n_cells_a;
    ji["n_cells_b"] = inter.n_cells_b;
    ji["values"] = inter.values;
    ji["cell_counts"] = inter.cell_counts;
    inters.push_back(std::move(ji));
  }
  j["interactions"] = std::move(inters);
  j["metadata"] = {{"seed", m.metadata.seed},
                   {"config_digest", m.metadata.config_digest},
                   {"notes", m.metadata.notes}};
  return j.dump(2) + "\n";
}

inline AdditiveModel deserialize_additive(const std::string& text) {
  const auto j = detail::parse_document(text);
  try {
    detail::check_envelope(j, "additive");
    AdditiveModel m;
    const auto link = j.at("link").get<std::string>();
    if (link == "logistic") {
      m.link = LinkFunction::logistic;
    } else if (link == "identity") {
      m.link = LinkFunction::identity;
    } else {
      throw ValueError("model document: unknown link '" + link + "'");
    }
    m.intercept = j.at("intercept").get<double>();
    for (const auto& jb : j.at("binmap")) {
      m.binmap.features.push_back(detail::feature_bins_from_json(jb));
    }
    for (const auto& js : j.at("shapes")) {
      ShapeFunction s;
      s.feature = js.at("feature").get<std::string>();
      s.bins = m.binmap.features[m.binmap.index_of(s.feature)];
      s.values = js.at("values").get<std::vector<double>>();
      s.stderrs = js.at("stderrs").get<std::vector<double>>();
      if (s.values.size() != static_cast<std::size_t>(s.bins.n_bins()) ||
          s.stderrs.size() != s.values.size()) {
        throw ValueError("model document: shape '" + s.feature + "' does not match its grid");
      }
      m.shapes.push_back(std::move(s));
    }
    for (const auto& ji : j.at("interactions")) {
      InteractionSurface inter;
      inter.feature_a = ji.at("feature_a").get<std::string>();
      inter.feature_b = ji.at("feature_b").get<std::string>();
      inter.cell_of_bin_a = ji.at("cell_of_bin_a").get<std::vector<std::uint16_t>>();
      inter.cell_of_bin_b = ji.at("cell_of_bin_b").get<std::vector<std::uint16_t>>();
      inter.n_cells_a = ji.at("n_cells_a").get<std::size_t>();
      inter.n_cells_b = ji.at("n_cells_b").get<std::size_t>();
      inter.values = ji.at("values").get<std::vector<double>>();
      inter.cell_counts = ji.at("cell_counts").get<std::vector<std::int64_t>>();
      if (inter.values.size() != inter.n_cells_a * inter.n_cells_b ||
          inter.cell_counts.size() != inter.values.size()) {
        throw ValueError("model document: interaction '" + inter.feature_a + " x " +
                         inter.feature_b + "' has inconsistent cell data");
      }
      m.interactions.push_back(std::move(inter));
    }
    const auto& meta = j.at("metadata");
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    m.metadata.config_digest = meta.at("config_digest").get<std::string>();
    m.metadata.notes = meta.at("notes").get<std::vector<std::string>>();
    return m;
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

inline std::string serialize(const LinearModel& m) {
  using detail::json;
  json j;
  j["format"] = kModelFormat;
  j["format_version"] = kModelFormatVersion;
  j["model_type"] = "linear";
  j["intercept"] = m.intercept;
  j["coefficients"] = m.coefficients;
  j["l2"] = m.l2;
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  json terms = json::array();
  for (const auto& t : m.encoding.terms) {
    terms.push_back({{"categorical", t.categorical}, {"index", t.index}});
  }
  json scalers = json::array();
  for (const auto& s : m.encoding.scalers) {
    scalers.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd}});
  }
  json groups = json::array();
  for (const auto& g : m.encoding.groups) {
    groups.push_back(
        {{"name", g.name}, {"reference", g.reference}, {"categories", g.categories}});
  }
  j["encoding"] = {{"terms", std::move(terms)},
                   {"scalers", std::move(scalers)},
                   {"groups", std::move(groups)},
                   {"column_names", m.encoding.column_names}};
  return j.dump(2) + "\n";
}

inline LinearModel deserialize_linear(const std::string& text) {
  const auto j = detail::parse_document(text);
  try {
    detail::check_envelope(j, "linear");
    LinearModel m;
    m.intercept = j.at("intercept").get<double>();
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.l2 = j.at("l2").get<double>();
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<int>();
    const auto& enc = j.at("encoding");
    for (const auto& jt : enc.at("terms")) {
      m.encoding.terms.push_back(
          {jt.at("categorical").get<bool>(), jt.at("index").get<std::size_t>()});
    }
    for (const auto& js : enc.at("scalers")) {
      m.encoding.scalers.push_back({js.at("name").get<std::string>(),
                                    js.at("mean").get<double>(), js.at("sd").get<double>()});
    }
    for (const auto& jg : enc.at("groups")) {
      m.encoding.groups.push_back({jg.at("name").get<std::string>(),
                                   jg.at("reference").get<std::string>(),
                                   jg.at("categories").get<std::vector<std::string>>()});
    }
    m.encoding.column_names = enc.at("column_names").get<std::vector<std::string>>();
    m.encoding.n_cols = m.encoding.column_names.size();
    if (m.coefficients.size() != m.encoding.n_cols) {
      throw ValueError("model document: coefficient count does not match the encoding");
    }
    return m;
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

inline std::string model_type_of(const std::string& text) {
  const auto j = detail::parse_document(text);
  try {
    if (!j.contains("format") || j.at("format").get<std::string>() != kModelFormat) {
      throw ValueError("not a model document (missing or wrong format tag)");
    }
    return j.at("model_type").get<std::string>();
  } catch (const detail::json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for write: " + path);
  out << text;
}

}  // namespace glassgam
