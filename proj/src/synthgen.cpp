#include "voucher/synthgen.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "voucher/error.hpp"
#include "voucher/rng.hpp"

namespace voucher {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::vector<double> shifted(const std::vector<double>& dist, double prob, int sign) {
  std::vector<double> out(dist.size(), 0.0);
  const std::size_t top = dist.size() - 1;
  for (std::size_t c = 0; c < dist.size(); ++c) {
    const std::size_t moved = sign > 0 ? std::min(c + 1, top) : (c == 0 ? 0 : c - 1);
    out[c] += (1.0 - prob) * dist[c];
    out[moved] += prob * dist[c];
  }
  return out;
}

double mean_midpoint(const std::vector<double>& dist, const BracketSchedule& schedule) {
  double sum = 0.0;
  for (std::size_t c = 0; c < dist.size(); ++c) sum += schedule.midpoint(c) * dist[c];
  return sum;
}

// Per-group quantities implied by the spec.
struct GroupModel {
  double theta = 0.0;       // true substitution probability
  double bias = 0.0;        // substitution reporting bias b_j
  double flip = 0.0;        // per-individual flip probability realizing b_j
  std::vector<double> brackets;
  std::vector<double> brackets_extra;
  std::vector<double> reported;
  std::vector<double> reported_extra;
};

GroupModel model_of(const VoucherPopulation& pop, const SyntheticGroup& g) {
  GroupModel m;
  m.theta = pop.es_theta + g.es_eta;
  m.bias = pop.es_bias + g.es_nu;
  if (m.bias != 0.0) {
    m.flip = pop.es_bias_sign > 0 ? m.bias / (1.0 - m.theta) : -m.bias / m.theta;
  }
  m.brackets = g.brackets;
  m.brackets_extra = g.brackets_extra.empty() ? g.brackets : g.brackets_extra;
  m.reported = shifted(m.brackets, g.shift_prob, pop.ic_bias_sign);
  m.reported_extra = shifted(m.brackets_extra, g.shift_prob, pop.ic_bias_sign);
  return m;
}

std::size_t draw_bracket(const std::vector<double>& dist, double u) {
  double cumulative = 0.0;
  for (std::size_t c = 0; c + 1 < dist.size(); ++c) {
    cumulative += dist[c];
    if (u < cumulative) return c;
  }
  return dist.size() - 1;
}

void check_distribution(const std::vector<double>& dist, std::size_t size, const std::string& where) {
  if (dist.size() != size) {
    throw ConfigError(where + ": bracket distribution needs " + std::to_string(size) + " entries, got " +
                      std::to_string(dist.size()));
  }
  double sum = 0.0;
  for (double p : dist) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(where + ": bracket probabilities must lie in [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(where + ": bracket probabilities must sum to 1");
}

}  // namespace

std::string SyntheticGroup::label() const {
  return std::string(to_string(profile.gender)) + "/" + std::string(to_string(profile.residence)) + "/" +
         std::string(to_string(profile.age));
}

NoiseModelSpec VoucherPopulation::es_model() const {
  NoiseModelSpec m;
  m.theta = es_theta;
  m.bias = es_bias;
  m.bias_sign = es_bias_sign;
  for (const auto& g : groups) {
    m.eta.push_back(g.es_eta);
    m.nu.push_back(g.es_nu);
  }
  return m;
}

void PopulationSpec::validate(const VoucherCatalog& catalog) const {
  std::vector<VoucherKind> seen;
  for (const auto& pop : vouchers) {
    const std::string name(to_string(pop.kind));
    if (std::find(seen.begin(), seen.end(), pop.kind) != seen.end()) {
      throw ConfigError("population spec lists voucher '" + name + "' twice");
    }
    seen.push_back(pop.kind);
    const auto& spec = catalog.at(pop.kind);
    if (pop.ic_bias_sign != 1 && pop.ic_bias_sign != -1) {
      throw ConfigError("voucher '" + name + "': ic_bias_sign must be +1 or -1");
    }
    std::vector<double> weights;
    for (const auto& g : pop.groups) weights.push_back(static_cast<double>(g.n_original));
    pop.es_model().validate(weights);
    if (pop.es_theta < 0.0) throw ConfigError("voucher '" + name + "': theta must be non-negative");

    for (const auto& g : pop.groups) {
      const std::string where = "voucher '" + name + "', group " + g.label();
      check_distribution(g.brackets, spec.schedule.size(), where);
      if (!g.brackets_extra.empty()) check_distribution(g.brackets_extra, spec.schedule.size(), where + " (extra wave)");
      if (!(g.shift_prob >= 0.0 && g.shift_prob <= 1.0)) throw ConfigError(where + ": shift_prob must lie in [0, 1]");
      const auto m = model_of(pop, g);
      if (!(m.theta >= 0.0 && m.theta <= 1.0)) throw ConfigError(where + ": true substitution probability outside [0, 1]");
      if (!(m.theta + m.bias >= 0.0 && m.theta + m.bias <= 1.0)) {
        throw ConfigError(where + ": reported substitution probability outside [0, 1]");
      }
      if (!(m.flip >= 0.0 && m.flip <= 1.0)) throw ConfigError(where + ": bias cannot be realized by one-sided flips");
    }
  }
}

const VoucherTruth& GroundTruth::at(VoucherKind k) const {
  for (const auto& v : vouchers) {
    if (v.kind == k) return v;
  }
  throw ConfigError("no ground truth for voucher '" + std::string(to_string(k)) + "'");
}

GroundTruth ground_truth(const PopulationSpec& spec, const VoucherCatalog& catalog) {
  spec.validate(catalog);
  GroundTruth truth;
  truth.seed = spec.seed;
  for (const auto& pop : spec.vouchers) {
    const auto& vspec = catalog.at(pop.kind);
    const double face = vspec.face_value_original;
    VoucherTruth vt;
    vt.kind = pop.kind;
    vt.es_model = pop.es_model();
    vt.ic_model.bias_sign = pop.ic_bias_sign;

    std::vector<double> pooled_orig(vspec.schedule.size(), 0.0), pooled_extra(vspec.schedule.size(), 0.0);
    std::vector<double> true_orig(vspec.schedule.size(), 0.0), true_extra(vspec.schedule.size(), 0.0);
    std::size_t n_orig = 0;
    std::size_t n_extra = 0;
    GroupTruth overall{"overall"};
    for (const auto& g : pop.groups) {
      const auto m = model_of(pop, g);
      GroupTruth gt{g.label(), g.n_original};
      if (pop.recipients) {
        gt.es_true = m.theta;
        gt.es_bias = m.bias;
        gt.es_reported = m.theta + m.bias;
        gt.ic_true = mean_midpoint(m.brackets, vspec.schedule) / face;
        gt.ic_reported = mean_midpoint(m.reported, vspec.schedule) / face;
        gt.ic_bias = gt.ic_reported - gt.ic_true;
      }
      vt.ic_model.eta.push_back(gt.ic_true);
      vt.ic_model.nu.push_back(gt.ic_bias);
      if (g.n_original == 0) {
        vt.absent_groups.push_back(g.label());
        continue;
      }
      const double w = static_cast<double>(g.n_original);
      n_orig += g.n_original;
      overall.es_true += w * gt.es_true;
      overall.es_bias += w * gt.es_bias;
      overall.es_reported += w * gt.es_reported;
      overall.ic_true += w * gt.ic_true;
      overall.ic_bias += w * gt.ic_bias;
      overall.ic_reported += w * gt.ic_reported;
      for (std::size_t c = 0; c < pooled_orig.size(); ++c) {
        pooled_orig[c] += w * (pop.recipients ? m.reported[c] : (c == 0 ? 1.0 : 0.0));
        true_orig[c] += w * (pop.recipients ? m.brackets[c] : (c == 0 ? 1.0 : 0.0));
      }
      if (g.n_extra > 0) {
        const double we = static_cast<double>(g.n_extra);
        n_extra += g.n_extra;
        for (std::size_t c = 0; c < pooled_extra.size(); ++c) {
          pooled_extra[c] += we * (pop.recipients ? m.reported_extra[c] : (c == 0 ? 1.0 : 0.0));
          true_extra[c] += we * (pop.recipients ? m.brackets_extra[c] : (c == 0 ? 1.0 : 0.0));
        }
      }
      vt.groups.push_back(gt);
    }
    if (n_orig > 0) {
      const double n = static_cast<double>(n_orig);
      overall.n = n_orig;
      overall.es_true /= n;
      overall.es_bias /= n;
      overall.es_reported /= n;
      overall.ic_true /= n;
      overall.ic_bias /= n;
      overall.ic_reported /= n;
      double es_min = vt.groups.front().es_reported;
      double ic_min = vt.groups.front().ic_reported;
      for (const auto& gt : vt.groups) {
        es_min = std::min(es_min, gt.es_reported);
        ic_min = std::min(ic_min, gt.ic_reported);
      }
      vt.es_bias_proxy = es_min;
      vt.ic_bias_proxy = ic_min;
      for (auto& gt : vt.groups) {
        gt.es_lower_target = gt.es_reported - es_min;
        gt.ic_lower_target = gt.ic_reported - ic_min;
      }
      overall.es_lower_target = overall.es_reported - es_min;
      overall.ic_lower_target = overall.ic_reported - ic_min;
    }
    vt.overall = overall;

    // IC decomposition: theta_k is the weighted mean true rate, eta_j its group deviation.
    vt.ic_model.theta = overall.ic_true;
    vt.ic_model.bias = overall.ic_bias;
    for (auto& e : vt.ic_model.eta) e -= overall.ic_true;
    for (auto& v : vt.ic_model.nu) v -= overall.ic_bias;

    if (n_orig > 0 && n_extra > 0) {
      double reported = 0.0;
      double truth_it = 0.0;
      for (std::size_t c = 0; c < pooled_orig.size(); ++c) {
        const double mid = vspec.schedule.midpoint(c);
        reported += mid * (pooled_orig[c] / static_cast<double>(n_orig) - pooled_extra[c] / static_cast<double>(n_extra));
        truth_it += mid * (true_orig[c] / static_cast<double>(n_orig) - true_extra[c] / static_cast<double>(n_extra));
      }
      vt.intensity_reported = reported;
      vt.intensity_true = truth_it;
    }
    truth.vouchers.push_back(std::move(vt));
  }
  return truth;
}

SyntheticSurvey generate(const PopulationSpec& spec, const VoucherCatalog& catalog) {
  SyntheticSurvey out;
  out.truth = ground_truth(spec, catalog);
  std::vector<SurveyRecord> records;

  for (const auto& pop : spec.vouchers) {
    const auto& vspec = catalog.at(pop.kind);
    const auto vi = static_cast<std::uint64_t>(index_of(pop.kind));
    for (std::size_t gi = 0; gi < pop.groups.size(); ++gi) {
      const auto& g = pop.groups[gi];
      const auto m = model_of(pop, g);
      for (Wave wave : {Wave::original, Wave::extra}) {
        const std::size_t n = wave == Wave::original ? g.n_original : g.n_extra;
        const auto& dist = wave == Wave::original ? m.brackets : m.brackets_extra;
        Substream rng(spec.seed, {vi, static_cast<std::uint64_t>(gi), static_cast<std::uint64_t>(wave)});
        for (std::size_t i = 0; i < n; ++i) {
          // Four uniforms per respondent keep the stream layout fixed.
          const double u_answer = rng.uniform();
          const double u_flip = rng.uniform();
          const double u_bracket = rng.uniform();
          const double u_shift = rng.uniform();

          SurveyRecord r;
          r.respondent_id = std::string(to_string(pop.kind)) + "-" + std::to_string(gi) + "-" +
                            (wave == Wave::original ? "o" : "x") + std::to_string(i);
          r.voucher = pop.kind;
          r.profile = g.profile;
          r.wave = wave;
          double es_bias = 0.0;
          double ic_bias = 0.0;
          if (!pop.recipients) {
            r.triggered = true;
            r.bracket_index = 0;
          } else {
            const bool true_no = u_answer < m.theta;
            bool reported_no = true_no;
            if (pop.es_bias_sign > 0 && !true_no && u_flip < m.flip) reported_no = true;
            if (pop.es_bias_sign < 0 && true_no && u_flip < m.flip) reported_no = false;
            es_bias = static_cast<double>(reported_no) - static_cast<double>(true_no);
            r.triggered = !reported_no;

            const std::size_t true_bracket = draw_bracket(dist, u_bracket);
            std::size_t reported_bracket = true_bracket;
            if (u_shift < g.shift_prob) {
              if (pop.ic_bias_sign > 0) reported_bracket = std::min(true_bracket + 1, vspec.schedule.size() - 1);
              else reported_bracket = true_bracket == 0 ? 0 : true_bracket - 1;
            }
            ic_bias = (vspec.schedule.midpoint(reported_bracket) - vspec.schedule.midpoint(true_bracket)) /
                      vspec.face_value_original;
            r.bracket_index = reported_bracket;
          }
          records.push_back(std::move(r));
          out.es_bias_draws.push_back(es_bias);
          out.ic_bias_draws.push_back(ic_bias);
        }
      }
    }
  }
  out.dataset = Dataset(std::move(records));
  return out;
}

// ---------------------------------------------------------------------------
// Default spec and JSON

PopulationSpec default_population_spec() {
  const std::vector<double> young{0.30, 0.14, 0.16, 0.16, 0.12, 0.07, 0.03, 0.02};
  const std::vector<double> middle{0.24, 0.10, 0.14, 0.18, 0.16, 0.10, 0.05, 0.03};
  const std::vector<double> older{0.18, 0.08, 0.12, 0.18, 0.20, 0.13, 0.07, 0.04};
  const std::vector<double> extra_wave{0.45, 0.15, 0.14, 0.12, 0.08, 0.04, 0.01, 0.01};
  const std::array<AgeBand, 3> ages{AgeBand::from_20_to_29, AgeBand::from_30_to_39, AgeBand::from_50_to_59};
  const std::array<double, 3> age_eta{-0.05, 0.0, 0.05};
  const std::array<const std::vector<double>*, 3> age_brackets{&young, &middle, &older};
  const std::array<double, 6> theta{0.12, 0.23, 0.21, 0.40, 0.19, 0.19};

  PopulationSpec spec;
  spec.seed = 1;
  for (VoucherKind k : kVoucherKinds) {
    VoucherPopulation pop;
    pop.kind = k;
    pop.es_theta = theta[index_of(k)];
    pop.es_bias = 0.05;
    for (Gender gender : {Gender::male, Gender::female}) {
      for (Residence residence : {Residence::taipei, Residence::other}) {
        for (std::size_t a = 0; a < ages.size(); ++a) {
          SyntheticGroup g;
          g.profile = {gender, residence, ages[a]};
          g.n_original = 60;
          g.n_extra = 20;
          g.es_eta = age_eta[a];
          g.es_nu = residence == Residence::taipei ? 0.02 : -0.02;
          g.brackets = *age_brackets[a];
          g.brackets_extra = extra_wave;
          g.shift_prob = 0.1;
          pop.groups.push_back(std::move(g));
        }
      }
    }
    spec.vouchers.push_back(std::move(pop));
  }
  return spec;
}

namespace {

template <typename T>
T parse_enum_field(const nlohmann::json& j, const char* key, std::optional<T> (*parse)(std::string_view)) {
  const auto token = j.at(key).get<std::string>();
  const auto value = parse(token);
  if (!value) throw ConfigError(std::string("population spec: invalid ") + key + " '" + token + "'");
  return *value;
}

}  // namespace

PopulationSpec load_population_spec(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("population spec is not valid JSON: ") + e.what());
  }
  PopulationSpec spec;
  try {
    spec.seed = doc.value("seed", std::uint64_t{1});
    for (const auto& v : doc.at("vouchers")) {
      VoucherPopulation pop;
      pop.kind = parse_enum_field<VoucherKind>(v, "kind", parse_voucher_kind);
      pop.recipients = v.value("recipients", true);
      const auto es = v.value("es", nlohmann::json::object());
      pop.es_theta = es.value("theta", 0.0);
      pop.es_bias = es.value("bias", 0.0);
      pop.es_bias_sign = es.value("bias_sign", 1);
      pop.ic_bias_sign = v.value("ic_bias_sign", 1);
      for (const auto& gj : v.at("groups")) {
        SyntheticGroup g;
        g.profile.gender = parse_enum_field<Gender>(gj, "gender", parse_gender);
        g.profile.residence = parse_enum_field<Residence>(gj, "residence", parse_residence);
        g.profile.age = parse_enum_field<AgeBand>(gj, "age_band", parse_age_band);
        const auto n = gj.at("n").get<long long>();
        const auto n_extra = gj.value("n_extra", 0LL);
        if (n < 0 || n_extra < 0) throw ConfigError("population spec: group sizes must be non-negative");
        g.n_original = static_cast<std::size_t>(n);
        g.n_extra = static_cast<std::size_t>(n_extra);
        g.es_eta = gj.value("es_eta", 0.0);
        g.es_nu = gj.value("es_nu", 0.0);
        g.brackets = gj.at("brackets").get<std::vector<double>>();
        g.brackets_extra = gj.value("brackets_extra", std::vector<double>{});
        g.shift_prob = gj.value("shift_prob", 0.0);
        pop.groups.push_back(std::move(g));
      }
      spec.vouchers.push_back(std::move(pop));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("population spec: ") + e.what());
  }
  return spec;
}

PopulationSpec load_population_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open population spec '" + path + "'");
  return load_population_spec(in);
}

void write_population_spec(std::ostream& out, const PopulationSpec& spec) {
  nlohmann::ordered_json doc;
  doc["seed"] = spec.seed;
  doc["vouchers"] = nlohmann::ordered_json::array();
  for (const auto& pop : spec.vouchers) {
    nlohmann::ordered_json v;
    v["kind"] = std::string(to_string(pop.kind));
    v["recipients"] = pop.recipients;
    v["es"] = {{"theta", pop.es_theta}, {"bias", pop.es_bias}, {"bias_sign", pop.es_bias_sign}};
    v["ic_bias_sign"] = pop.ic_bias_sign;
    v["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : pop.groups) {
      nlohmann::ordered_json gj;
      gj["gender"] = std::string(to_string(g.profile.gender));
      gj["residence"] = std::string(to_string(g.profile.residence));
      gj["age_band"] = std::string(to_string(g.profile.age));
      gj["n"] = g.n_original;
      gj["n_extra"] = g.n_extra;
      gj["es_eta"] = g.es_eta;
      gj["es_nu"] = g.es_nu;
      gj["brackets"] = g.brackets;
      if (!g.brackets_extra.empty()) gj["brackets_extra"] = g.brackets_extra;
      gj["shift_prob"] = g.shift_prob;
      v["groups"].push_back(gj);
    }
    doc["vouchers"].push_back(v);
  }
  out << doc.dump(2) << '\n';
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth) {
  auto group_json = [](const GroupTruth& g) {
    nlohmann::ordered_json j;
    j["group"] = g.label;
    j["n"] = g.n;
    j["es_true"] = g.es_true;
    j["es_bias"] = g.es_bias;
    j["es_reported"] = g.es_reported;
    j["es_lower_target"] = g.es_lower_target;
    j["ic_true"] = g.ic_true;
    j["ic_bias"] = g.ic_bias;
    j["ic_reported"] = g.ic_reported;
    j["ic_lower_target"] = g.ic_lower_target;
    return j;
  };
  auto model_json = [](const NoiseModelSpec& m) {
    nlohmann::ordered_json j;
    j["theta"] = m.theta;
    j["eta"] = m.eta;
    j["bias"] = m.bias;
    j["nu"] = m.nu;
    j["bias_sign"] = m.bias_sign;
    return j;
  };
  nlohmann::ordered_json doc;
  doc["seed"] = truth.seed;
  doc["vouchers"] = nlohmann::ordered_json::array();
  for (const auto& v : truth.vouchers) {
    nlohmann::ordered_json vj;
    vj["kind"] = std::string(to_string(v.kind));
    vj["es_bias_proxy"] = v.es_bias_proxy;
    vj["ic_bias_proxy"] = v.ic_bias_proxy;
    vj["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : v.groups) vj["groups"].push_back(group_json(g));
    vj["overall"] = group_json(v.overall);
    vj["es_model"] = model_json(v.es_model);
    vj["ic_model"] = model_json(v.ic_model);
    vj["intensity_true"] = v.intensity_true ? nlohmann::ordered_json(*v.intensity_true) : nlohmann::ordered_json(nullptr);
    vj["intensity_reported"] = v.intensity_reported ? nlohmann::ordered_json(*v.intensity_reported) : nlohmann::ordered_json(nullptr);
    vj["absent_groups"] = v.absent_groups;
    doc["vouchers"].push_back(vj);
  }
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Coverage

const CoverageCell& CoverageSummary::find(VoucherKind k, Metric m, const std::string& group) const {
  for (const auto& c : cells) {
    if (c.voucher == k && c.metric == m && c.group == group) return c;
  }
  throw std::out_of_range("no coverage cell for " + std::string(to_string(k)) + "/" + group);
}

namespace {

struct CellTarget {
  std::string group;
  double reported = 0.0;
  double lower = 0.0;
  double truth = 0.0;
};

// Targets per scheme cell (then overall) for one voucher and metric.
std::vector<CellTarget> cell_targets(const VoucherPopulation& pop, const VoucherTruth& vt,
                                     const StratificationScheme& scheme, Metric metric) {
  const std::size_t cells = scheme.group_count();
  std::vector<double> weight(cells, 0.0), reported(cells, 0.0), truth(cells, 0.0);
  std::size_t gi = 0;
  for (const auto& g : pop.groups) {
    if (g.n_original == 0) continue;
    const auto& gt = vt.groups[gi++];
    const auto c = scheme.group_of(g.profile);
    const double w = static_cast<double>(g.n_original);
    weight[c] += w;
    reported[c] += w * (metric == Metric::substitution ? gt.es_reported : gt.ic_reported);
    truth[c] += w * (metric == Metric::substitution ? gt.es_true : gt.ic_true);
  }
  std::vector<CellTarget> out;
  double min_reported = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (weight[c] == 0.0) {
      throw ConfigError("coverage: scheme cell '" + scheme.key(c).label() + "' of voucher '" +
                        std::string(to_string(pop.kind)) + "' has no synthetic respondents");
    }
    const double r = reported[c] / weight[c];
    out.push_back({scheme.key(c).label(), r, 0.0, truth[c] / weight[c]});
    min_reported = c == 0 ? r : std::min(min_reported, r);
  }
  for (auto& t : out) t.lower = t.reported - min_reported;
  const auto& o = vt.overall;
  const double overall_reported = metric == Metric::substitution ? o.es_reported : o.ic_reported;
  out.push_back({"overall", overall_reported, overall_reported - min_reported,
                 metric == Metric::substitution ? o.es_true : o.ic_true});
  return out;
}

}  // namespace

CoverageSummary coverage_experiment(const PopulationSpec& spec, const VoucherCatalog& catalog,
                                    const BootstrapConfig& cfg, std::size_t trials) {
  if (trials < 100) throw ConfigError("coverage experiment needs at least 100 trials");
  cfg.validate();
  const auto truth = ground_truth(spec, catalog);

  struct Job {
    VoucherKind kind;
    Metric metric;
    std::vector<CellTarget> targets;
  };
  std::vector<Job> jobs;
  CoverageSummary summary;
  summary.trials = trials;
  for (std::size_t v = 0; v < spec.vouchers.size(); ++v) {
    const auto& pop = spec.vouchers[v];
    for (Metric m : {Metric::substitution, Metric::induced}) {
      Job job{pop.kind, m, cell_targets(pop, truth.vouchers[v], cfg.scheme, m)};
      for (const auto& t : job.targets) summary.cells.push_back({pop.kind, m, t.group, trials});
      jobs.push_back(std::move(job));
    }
  }

  // hits[trial][cell] packed as three flags.
  const std::size_t cell_total = summary.cells.size();
  std::vector<std::uint8_t> hits(trials * cell_total, 0);

  auto run_trial = [&](std::size_t t) {
    PopulationSpec trial_spec = spec;
    trial_spec.seed = splitmix64(spec.seed + kGolden * (t + 1));
    const auto survey = generate(trial_spec, catalog);
    const auto data = survey.dataset.only_wave(Wave::original);
    BootstrapConfig trial_cfg = cfg;
    trial_cfg.seed = splitmix64(cfg.seed ^ (kGolden * (t + 1)));
    trial_cfg.workers = 1;
    trial_cfg.reporting.clear();
    trial_cfg.observer = nullptr;
    std::size_t slot = 0;
    for (const auto& job : jobs) {
      const auto result = stratified_bootstrap(data, job.metric, trial_cfg, job.kind, catalog.at(job.kind));
      for (std::size_t c = 0; c < job.targets.size(); ++c, ++slot) {
        const auto& region = c + 1 < job.targets.size() ? result.cells[c].region : result.overall.region;
        const auto& target = job.targets[c];
        std::uint8_t flags = 0;
        if (region.ci_upper.contains(target.reported)) flags |= 1;
        if (region.ci_lower.contains(target.lower)) flags |= 2;
        if (region.combined.contains(target.truth)) flags |= 4;
        hits[t * cell_total + slot] = flags;
      }
    }
  };

  unsigned workers = cfg.workers ? cfg.workers : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, trials));
  if (workers <= 1) {
    for (std::size_t t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::size_t t = next++; t < trials; t = next++) run_trial(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t c = 0; c < cell_total; ++c) {
      const auto flags = hits[t * cell_total + c];
      summary.cells[c].upper_hits += (flags & 1) ? 1 : 0;
      summary.cells[c].lower_hits += (flags & 2) ? 1 : 0;
      summary.cells[c].combined_hits += (flags & 4) ? 1 : 0;
    }
  }
  return summary;
}

}  // namespace voucher
