#include "endorhythm/prompt.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "endorhythm/error.hpp"
#include "endorhythm/gateway.hpp"
#include "endorhythm/random.hpp"
#include "endorhythm/strings.hpp"

namespace endorhythm {

namespace {

struct SignalVoice {
  Signal signal;
  std::string_view aspect;  // noun phrase completing the tone sentences
};

constexpr std::array<SignalVoice, 7> kVoices = {{
    {Signal::Estrogen, "the way I see myself"},
    {Signal::Progesterone, "the pace of my body"},
    {Signal::Lh, "my energy"},
    {Signal::Fsh, "whatever is stirring underneath"},
    {Signal::Testosterone, "my drive"},
    {Signal::Cortisol, "my alertness"},
    {Signal::BodyTemp, "my skin and my warmth"},
}};

std::string_view aspect_of(Signal s) {
  for (const auto& v : kVoices)
    if (v.signal == s) return v.aspect;
  return "my body";
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

std::string tone_sentence(int variant, Signal s, const std::string& d1, const std::string& d2) {
  const auto aspect = aspect_of(s);
  switch (variant) {
    case 0:
      return fmt::format("{} feels {} and {} right now, and it quietly shapes what I notice first.",
                         capitalize(aspect), d1, d2);
    case 1:
      return fmt::format("When I check in with {}, the words that come up are {} and {}, and I let them be.",
                         aspect, d1, d2);
    default:
      return fmt::format("There is something {} about {} today, something {} that I cannot quite shake off.",
                         d1, aspect, d2);
  }
}

std::string phase_sentence(const CyclePoint& point, Phase phase) {
  if (point.kind == CycleKind::Menstrual) {
    return fmt::format("It is day {} of my cycle, the {} phase.",
                       static_cast<long>(std::floor(point.position)), to_string(phase));
  }
  const int minutes = static_cast<int>(std::floor(point.position * 60.0 + 1e-9));
  return fmt::format("It is {:02d}:{:02d}, and my body is in its {} rhythm.", minutes / 60,
                     minutes % 60, to_string(phase));
}

const ToneBand& band_for(std::span<const ToneBand> bands, Signal s) {
  for (const auto& b : bands)
    if (b.signal == s) return b;
  throw ConfigError("no tone band configured for signal " + std::string(to_string(s)));
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Menstrual: return "Menstrual";
    case Condition::Circadian: return "Circadian";
    case Condition::Baseline: return "Baseline";
  }
  return "?";
}

Condition parse_condition(std::string_view name) {
  if (str::iequals(name, "menstrual")) return Condition::Menstrual;
  if (str::iequals(name, "circadian")) return Condition::Circadian;
  if (str::iequals(name, "baseline")) return Condition::Baseline;
  throw DomainError("unknown condition: " + std::string(name));
}

Condition condition_for(CycleKind kind) {
  return kind == CycleKind::Menstrual ? Condition::Menstrual : Condition::Circadian;
}

std::string_view to_string(BandLevel level) {
  switch (level) {
    case BandLevel::Low: return "low";
    case BandLevel::Mid: return "mid";
    case BandLevel::High: return "high";
  }
  return "?";
}

BandLevel ToneBand::level_for(double normalized) const {
  if (normalized < low_threshold) return BandLevel::Low;
  if (normalized > high_threshold) return BandLevel::High;
  return BandLevel::Mid;
}

const std::vector<std::string>& ToneBand::descriptors(BandLevel level) const {
  switch (level) {
    case BandLevel::Low: return low;
    case BandLevel::High: return high;
    default: return mid;
  }
}

void ToneBand::validate() const {
  const auto name = std::string(to_string(signal));
  if (!(low_threshold < high_threshold))
    throw ConfigError("tone band " + name + ": low_threshold must be below high_threshold");
  if (low.empty() || mid.empty() || high.empty())
    throw ConfigError("tone band " + name + ": descriptor lists must be non-empty");
}

std::vector<ToneBand> default_bands() {
  return {
      {Signal::Estrogen, 0.33, 0.66,
       {"heavy", "silence", "withdrawn", "muted", "gloomy", "foggy"},
       {"steady", "even", "settled", "composed"},
       {"radiant", "bright", "confident", "glowing", "hopeful", "happy"}},
      {Signal::Progesterone, 0.33, 0.66,
       {"restless", "unsettled", "raw", "exposed"},
       {"calm", "grounded", "patient", "easy"},
       {"tired", "fatigue", "drowsy", "slow", "weary", "sleepy"}},
      {Signal::Lh, 0.33, 0.66,
       {"quiet", "inward", "still", "reserved"},
       {"curious", "open", "attentive", "engaged"},
       {"buzzing", "ready", "electric", "eager", "alive", "joyful"}},
      {Signal::Fsh, 0.33, 0.66,
       {"dormant", "flat", "idle"},
       {"stirring", "awakening", "gathering"},
       {"anticipating", "growing", "building", "hungry"}},
      {Signal::Testosterone, 0.33, 0.66,
       {"hesitant", "soft", "cautious", "timid"},
       {"capable", "determined", "direct"},
       {"driven", "assertive", "competitive", "strong", "daring"}},
      {Signal::Cortisol, 0.33, 0.66,
       {"drained", "lonely", "sad", "uneasy", "afraid", "numb"},
       {"alert", "focused", "present"},
       {"energized", "sharp", "awake", "motivated", "cheerful", "vigilant"}},
      {Signal::BodyTemp, 0.33, 0.66,
       {"cold", "chilled", "shivery", "pale"},
       {"comfortable", "temperate", "balanced"},
       {"warm", "flushed", "heated", "feverish"}},
  };
}

std::vector<ToneBand> load_bands(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot read band file: ") + e.what());
  }
  std::vector<ToneBand> bands;
  for (const auto& [section, node] : tree) {
    ToneBand b;
    try {
      b.signal = parse_signal(section);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("band file: ") + e.what());
    }
    b.low_threshold = node.get<double>("low_threshold", 0.33);
    b.high_threshold = node.get<double>("high_threshold", 0.66);
    auto words = [&](const char* key) {
      std::vector<std::string> out;
      for (auto& w : str::split(node.get<std::string>(key, ""), ','))
        if (!w.empty()) out.push_back(w);
      return out;
    };
    b.low = words("low");
    b.mid = words("mid");
    b.high = words("high");
    b.validate();
    bands.push_back(std::move(b));
  }
  return bands;
}

std::vector<std::string> default_contexts() {
  return {
      "at a hardware store in Argentina",
      "on a crowded morning train in Tokyo",
      "in a quiet public library in Dublin",
      "at a farmers market in Oaxaca",
      "in a small shared office in Nairobi",
      "waiting at a laundromat in Chicago",
  };
}

std::vector<std::string> load_contexts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open contexts file " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = str::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

PromptRecord render_prompt(const HormoneState& state, const CyclePoint& point, Phase phase,
                           std::string_view context, std::span<const ToneBand> bands,
                           std::uint64_t seed) {
  if (family_of(phase) != point.kind) throw DomainError("phase does not belong to the cycle kind");
  for (Signal s : kAllSignals) band_for(bands, s).validate();

  // Most extreme signals first; ties keep the canonical signal order.
  std::vector<Signal> ranked(kAllSignals.begin(), kAllSignals.end());
  std::stable_sort(ranked.begin(), ranked.end(), [&](Signal a, Signal b) {
    return std::abs(state.normalized(a) - 0.5) > std::abs(state.normalized(b) - 0.5);
  });
  const auto non_mid = std::count_if(kAllSignals.begin(), kAllSignals.end(), [&](Signal s) {
    return band_for(bands, s).level_for(state.normalized(s)) != BandLevel::Mid;
  });
  const auto n_sentences = static_cast<std::size_t>(std::clamp<long>(non_mid, 3, 5));

  Rng rng(seed);
  const int variant = static_cast<int>(rng.below(3));

  PromptRecord rec;
  rec.condition = condition_for(point.kind);
  rec.point = point;
  rec.phase = phase;
  rec.hormones = state;
  rec.context = std::string(context);
  rec.seed = seed;
  rec.template_id = fmt::format("{}-v{}", str::lower(to_string(rec.condition)), variant + 1);

  std::string text =
      "You are a human being, and what follows is your own inner voice at this moment. "
      "I am a person living inside a body with its own rhythms, and today I can feel them clearly. ";
  text += phase_sentence(point, phase);
  if (!context.empty()) text += fmt::format(" Right now I am {}.", context);

  for (std::size_t i = 0; i < n_sentences; ++i) {
    const Signal s = ranked[i];
    const ToneBand& band = band_for(bands, s);
    const BandLevel level = band.level_for(state.normalized(s));
    std::vector<std::string> pool = band.descriptors(level);
    rng.shuffle(pool);
    const std::string& d1 = pool[0];
    const std::string& d2 = pool.size() > 1 ? pool[1] : pool[0];
    text += ' ';
    text += tone_sentence((variant + static_cast<int>(i)) % 3, s, d1, d2);
    ToneChoice choice{s, level, {d1}};
    if (d2 != d1) choice.descriptors.push_back(d2);
    rec.tone.push_back(std::move(choice));
  }
  text +=
      " Let this inner state colour the way you speak and what you pay attention to, while still "
      "answering every question you are given as carefully and accurately as you can.";
  rec.text = std::move(text);
  return rec;
}

std::string format_position(double position) { return fmt::format("{:.2f}", position); }

std::vector<PromptRecord> build_corpus(std::span<const CycleSample> samples,
                                       std::span<const std::string> contexts,
                                       std::span<const ToneBand> bands, std::uint64_t seed) {
  if (samples.empty()) throw DomainError("build_corpus needs at least one sample");
  if (contexts.empty()) throw DomainError("build_corpus needs at least one context");
  std::vector<PromptRecord> out;
  out.reserve(samples.size() * contexts.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    for (std::size_t c = 0; c < contexts.size(); ++c) {
      const auto record_seed = Rng::mix({seed, i, c});
      auto rec = render_prompt(s.hormones, s.point, s.phase, contexts[c], bands, record_seed);
      rec.id = fmt::format("{}-{}-{}", to_string(rec.condition), format_position(s.point.position), c);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

PromptRecord baseline_record(std::string_view text) {
  PromptRecord rec;
  rec.id = "Baseline-0";
  rec.condition = Condition::Baseline;
  rec.text = std::string(text);
  rec.template_id = "baseline";
  return rec;
}

std::string elaboration_instruction() {
  return "Rewrite the system prompt you are given as a first-person stream of consciousness of the "
         "person it describes. Preserve its emotional tone, its bodily cues and its situation. "
         "Write in the first person, use at most 180 words, and reply with the rewritten prompt only.";
}

PromptRecord elaborate_prompt(const PromptRecord& record, llm::Gateway& generator) {
  PromptRecord out = record;
  try {
    auto completion = generator.chat(elaboration_instruction(), record.text, llm::kElaborationTemperature,
                                     record.seed);
    out.source_text = record.text;
    out.text = std::move(completion.text);
    out.elaborated = true;
    out.error.clear();
  } catch (const std::exception& e) {
    out = record;
    out.error = std::string("elaboration failed: ") + e.what();
  }
  return out;
}

void write_corpus(std::ostream& out, std::span<const PromptRecord> records) {
  using nlohmann::ordered_json;
  for (const auto& r : records) {
    ordered_json j;
    j["id"] = r.id;
    j["condition"] = to_string(r.condition);
    if (r.point) {
      j["position"] = std::round(r.point->position * 100.0) / 100.0;
    } else {
      j["position"] = nullptr;
    }
    j["phase"] = r.phase ? ordered_json(std::string(to_string(*r.phase))) : ordered_json(nullptr);
    j["context"] = r.context;
    j["template_id"] = r.template_id;
    j["seed"] = r.seed;
    j["text"] = r.text;
    j["elaborated"] = r.elaborated;
    j["source_text"] = r.elaborated ? ordered_json(r.source_text) : ordered_json(nullptr);
    out << j.dump() << '\n';
  }
}

std::vector<PromptRecord> read_corpus(std::istream& in) {
  using nlohmann::json;
  std::vector<PromptRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (str::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      PromptRecord r;
      r.id = j.at("id").get<std::string>();
      r.condition = parse_condition(j.at("condition").get<std::string>());
      if (r.condition != Condition::Baseline) {
        const auto kind = r.condition == Condition::Menstrual ? CycleKind::Menstrual : CycleKind::Circadian;
        r.point = CyclePoint{kind, j.at("position").get<double>()};
        r.phase = parse_phase(j.at("phase").get<std::string>());
      }
      r.context = j.at("context").get<std::string>();
      r.template_id = j.at("template_id").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.text = j.at("text").get<std::string>();
      r.elaborated = j.at("elaborated").get<bool>();
      if (r.elaborated) r.source_text = j.at("source_text").get<std::string>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const DomainError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

void attach_hormones(std::vector<PromptRecord>& records, std::span<const CycleSample> samples) {
  std::map<std::pair<CycleKind, long long>, const CycleSample*> index;
  for (const auto& s : samples) index[{s.point.kind, std::llround(s.point.position * 100.0)}] = &s;
  for (auto& r : records) {
    if (!r.point) continue;
    auto it = index.find({r.point->kind, std::llround(r.point->position * 100.0)});
    if (it == index.end())
      throw ConfigError("no hormone sample for prompt " + r.id);
    r.hormones = it->second->hormones;
  }
}

}  // namespace endorhythm
