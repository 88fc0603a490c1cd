#include "coordbeam/fixtures.h"

#include <fstream>

#include <json.hpp>

#include "coordbeam/errors.h"

namespace coordbeam {

namespace {

using nlohmann::json;

json cvec_to_json(const CVec& v) {
  json out = json::array();
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

CVec cvec_from_json(const json& j) {
  CVec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[i] = cplx(j[i][0].get<double>(), j[i][1].get<double>());
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixture: " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write fixture: " + path);
  out << text;
}

}  // namespace

std::string channel_set_to_json(const ChannelSet& ch) {
  json j;
  j["num_bs"] = ch.num_bs();
  j["antennas"] = ch.antennas();
  j["power_limit"] = ch.power_limit();
  json serving = json::array();
  json noise = json::array();
  json channels = json::array();
  for (std::size_t k = 0; k < ch.num_users(); ++k) {
    serving.push_back(ch.serving(k));
    noise.push_back(ch.noise(k));
    json row = json::array();
    for (std::size_t b = 0; b < ch.num_bs(); ++b) row.push_back(cvec_to_json(ch.channel(k, b)));
    channels.push_back(row);
  }
  j["serving"] = serving;
  j["noise"] = noise;
  j["channels"] = channels;
  return j.dump(2) + "\n";
}

ChannelSet channel_set_from_json(const std::string& text) {
  const json j = json::parse(text);
  const std::size_t num_bs = j.at("num_bs").get<std::size_t>();
  const std::size_t antennas = j.at("antennas").get<std::size_t>();
  std::vector<int> serving = j.at("serving").get<std::vector<int>>();
  std::vector<double> noise = j.at("noise").get<std::vector<double>>();
  std::vector<std::vector<CVec>> channels;
  for (const auto& row : j.at("channels")) {
    std::vector<CVec> r;
    for (const auto& h : row) r.push_back(cvec_from_json(h));
    channels.push_back(std::move(r));
  }
  return ChannelSet(num_bs, antennas, std::move(serving), std::move(channels), std::move(noise),
                    j.at("power_limit").get<double>());
}

ChannelSet load_channel_set(const std::string& path) {
  return channel_set_from_json(read_file(path));
}

void save_channel_set(const ChannelSet& ch, const std::string& path) {
  write_file(path, channel_set_to_json(ch));
}

std::string drop_to_json(const DropScenario& drop) {
  json j;
  j["rng_seed"] = drop.rng_seed;
  json pos = json::array();
  for (const auto& p : drop.user_positions) pos.push_back({p.x, p.y});
  j["user_positions"] = pos;
  j["serving"] = drop.serving;
  json clusters = json::array();
  for (const auto& c : drop.cluster) clusters.push_back(std::vector<int>(c.begin(), c.end()));
  j["cluster"] = clusters;
  j["gains"] = drop.gains;
  json ss = json::array();
  for (const auto& row : drop.small_scale) {
    json r = json::array();
    for (const auto& h : row) r.push_back(cvec_to_json(h));
    ss.push_back(r);
  }
  j["small_scale"] = ss;
  return j.dump(2) + "\n";
}

DropScenario drop_from_json(const std::string& text) {
  const json j = json::parse(text);
  DropScenario drop;
  drop.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  for (const auto& p : j.at("user_positions"))
    drop.user_positions.push_back({p[0].get<double>(), p[1].get<double>()});
  drop.serving = j.at("serving").get<std::vector<int>>();
  for (const auto& c : j.at("cluster")) {
    const auto v = c.get<std::vector<int>>();
    drop.cluster.emplace_back(v.begin(), v.end());
  }
  drop.gains = j.at("gains").get<std::vector<std::vector<double>>>();
  for (const auto& row : j.at("small_scale")) {
    std::vector<CVec> r;
    for (const auto& h : row) r.push_back(cvec_from_json(h));
    drop.small_scale.push_back(std::move(r));
  }
  return drop;
}

std::string outcome_to_json(const SolveOutcome& out) {
  json j;
  j["gamma"] = out.gamma_star;
  j["powers"] = out.powers.value;
  j["power_kind"] = out.powers.kind == PowerKind::kDownlink ? "downlink" : "virtual_uplink";
  json beams = json::array();
  for (const auto& f : out.beams.f) beams.push_back(cvec_to_json(f));
  j["beams"] = beams;
  j["active_bs"] = out.active_bs;
  j["iterations"] = out.iterations;
  j["backhaul_scalars"] = out.backhaul_scalars;
  j["converged"] = out.converged;
  j["clipped"] = out.clipped;
  if (!out.note.empty()) j["note"] = out.note;
  json trace = json::array();
  for (const auto& r : out.trace)
    trace.push_back({{"gamma", r.gamma}, {"max_bs_power", r.max_bs_power},
                     {"feasible", r.feasible}});
  j["trace"] = trace;
  return j.dump(2) + "\n";
}

}  // namespace coordbeam
