#include <algorithm>
#include <cmath>
#include <map>

#include "dgf/synthgen.hpp"
#include "library.hpp"

namespace dgf::synth {

NoiseParams NoiseParams::from_level(double level) {
    for (int i = 0; i < kCycleLength; ++i) {
        if (std::abs(level - 0.1 * i) < 1e-9) return NoiseParams{0.1 * i};
    }
    throw Error("noise level must be one of 0.0, 0.1, 0.2, 0.3, 0.4");
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

std::vector<ScenarioKey> list_scenarios(Domain domain) {
    std::vector<ScenarioKey> keys;
    for (const auto& s : detail::library(domain)) keys.push_back(s.key);
    return keys;
}

ScenarioKey find_scenario(const std::string& scenario_id) {
    const auto* s = detail::find(scenario_id);
    if (!s) throw Error("unknown scenario: " + scenario_id);
    return s->key;
}

std::string_view cycle_slot_name(Domain domain, int slot) {
    static constexpr std::string_view fbd[] = {"none", "missing_force", "wrong_direction",
                                               "anchor_error", "extra_force"};
    static constexpr std::string_view circuit[] = {"none", "missing_component", "missing_ground",
                                                   "wrong_polarity", "open_circuit"};
    if (slot < 0 || slot >= kCycleLength) throw Error("cycle slot out of range");
    return domain == Domain::Fbd ? fbd[slot] : circuit[slot];
}

namespace {

InjectedError open_circuit(const ScenarioKey& key, std::size_t candidate) {
    if (const auto* s = detail::find(key.id); s && !s->circuit.open_candidates.empty()) {
        const auto& cands = s->circuit.open_candidates;
        const auto& c = cands[std::min(candidate, cands.size() - 1)];
        return {ErrorType::OpenCircuit, c.target, "wire=w" + std::to_string(c.wire)};
    }
    // Keys outside the library carry no drawing; name the first connection.
    const std::string target =
        key.connections.empty() ? key.components.front().id : key.connections.front().first;
    return {ErrorType::OpenCircuit, target, ""};
}

}  // namespace

std::vector<InjectedError> error_cycle(Domain domain, int sample_index, const ScenarioKey& key) {
    if (sample_index < 0 || sample_index >= kSamplesPerScenario) {
        throw Error("sample index out of range: " + std::to_string(sample_index));
    }
    if (key.domain != domain) throw Error("key '" + key.id + "' is not in the requested domain");
    const int slot = sample_index % kCycleLength;
    if (slot == 0) return {};

    if (domain == Domain::Fbd) {
        const std::string& first = key.required_forces.front().name;
        switch (slot) {
            case 1: return {{ErrorType::MissingForce, first, ""}};
            case 2: return {{ErrorType::WrongDirection, first, ""}};
            case 3: return {{ErrorType::AnchorError, first, ""}};
            default: return {{ErrorType::ExtraForce, "extra_force", ""}};
        }
    }

    switch (slot) {
        case 1:
            return {{ErrorType::MissingComponent, key.components.front().id, ""}};
        case 2:
            if (key.requires_ground) return {{ErrorType::MissingGround, "ground", ""}};
            return {open_circuit(key, 1)};
        case 3: {
            const auto polar = std::find_if(key.components.begin(), key.components.end(),
                                            [](const KeyComponent& c) { return c.polarity_deg; });
            if (polar != key.components.end()) {
                return {{ErrorType::WrongPolarity, polar->id, ""}};
            }
            if (key.crossing_wires_connected) {
                return {{ErrorType::IllegalJunction, "crossing", ""}};
            }
            return {open_circuit(key, 2)};
        }
        default:
            return {open_circuit(key, 0)};
    }
}

NoiseParams assign_noise(int sample_index) {
    if (sample_index < 0) throw Error("negative sample index");
    const int step = (sample_index + sample_index / kCycleLength) % kCycleLength;
    return NoiseParams{0.1 * step};
}

std::vector<Split> stratified_split(std::span<const SplitSlot> samples) {
    const std::size_t expected = static_cast<std::size_t>(kScenariosPerDomain) * kSamplesPerScenario;
    if (samples.size() != expected) {
        throw Error("stratified_split expects " + std::to_string(expected) + " samples, got " +
                    std::to_string(samples.size()));
    }
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> by_scenario;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.sample_index < 0 || s.sample_index >= kSamplesPerScenario) {
            throw Error("sample index out of range in split input");
        }
        if (!by_scenario.contains(s.scenario_id)) order.push_back(s.scenario_id);
        by_scenario[s.scenario_id].push_back(i);
    }
    if (order.size() != static_cast<std::size_t>(kScenariosPerDomain)) {
        throw Error("stratified_split expects exactly 10 scenarios");
    }

    std::vector<Split> out(samples.size(), Split::Train);
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto& members = by_scenario[order[j]];
        if (members.size() != static_cast<std::size_t>(kSamplesPerScenario)) {
            throw Error("scenario '" + order[j] + "' does not have 20 samples");
        }
        for (int k = 0; k < kCycleLength - 1; ++k) {
            const int slot = static_cast<int>((j + k) % kCycleLength);
            std::size_t best = samples.size();
            for (std::size_t m : members) {
                if (samples[m].sample_index % kCycleLength != slot) continue;
                if (best == samples.size() || samples[m].sample_index < samples[best].sample_index) {
                    best = m;
                }
            }
            out[best] = Split::Test;
        }
    }
    return out;
}

std::uint64_t sample_seed(std::uint64_t master_seed, const std::string& scenario_id,
                          int sample_index) {
    // FNV-1a over (seed bytes, id, index), then a splitmix finalizer.
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 1099511628211ULL;
    };
    for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(master_seed >> (8 * i)));
    for (char c : scenario_id) mix(static_cast<std::uint8_t>(c));
    for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(static_cast<unsigned>(sample_index) >> (8 * i)));
    h += 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
    return h ^ (h >> 31);
}

}  // namespace dgf::synth
