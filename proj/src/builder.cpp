#include "casekit/builder.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

#include "casekit/io.hpp"
#include "casekit/rng.hpp"
#include "casekit/templates.hpp"

namespace casekit {

using nlohmann::json;

std::string_view task_name(Task t) {
    switch (t) {
        case Task::Scr: return "scr";
        case Task::Pcr: return "pcr";
        case Task::Ljp: return "ljp";
    }
    return "scr";
}

std::string_view phase_name(Phase p) { return p == Phase::Train ? "train" : "test"; }

std::string_view ljp_mode_name(LjpMode m) {
    return m == LjpMode::ZeroShot ? "zero_shot" : "few_shot";
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::string canonical_reason(PrimaryFactor factor) {
    switch (factor) {
        case PrimaryFactor::CaseDetail: return "due to their similar case details.";
        case PrimaryFactor::Judge: return "because they are under the same court.";
        case PrimaryFactor::Date: return "because of their close dates.";
        case PrimaryFactor::Title: return "due to their similar titles.";
        case PrimaryFactor::Plaintiffs: return "because they share plaintiffs.";
        case PrimaryFactor::Defendants: return "because they share defendants.";
    }
    return "due to their similar case details.";
}

namespace {

std::string substitute(std::string_view tpl, std::string_view placeholder,
                       std::string_view value) {
    std::string out(tpl);
    auto pos = out.find(placeholder);
    if (pos == std::string::npos) throw Error("template missing placeholder");
    out.replace(pos, placeholder.size(), value);
    return out;
}

std::string choices_block(const std::vector<Choice>& choices) {
    std::string block;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (i) block += '\n';
        block += "Choice " + std::to_string(choices[i].position) + ":\n";
        block += choices[i].rendered;
    }
    return block;
}

// Seed split per concern so changing one draw never shifts another.
std::uint64_t subseed(std::uint64_t seed, std::string_view concern) {
    return derive_seed(seed, concern);
}

void assign_positions(std::vector<Choice>& choices, std::uint64_t permutation_seed) {
    seeded_shuffle(choices, permutation_seed);
    for (std::size_t i = 0; i < choices.size(); ++i) {
        choices[i].position = static_cast<int>(i) + 1;
    }
}

EmbeddingVector query_vector(const ProcessedCase& input, const VectorIndex& index,
                             const EmbeddingProvider& provider) {
    if (const EmbeddingVector* stored = index.find(input.id)) return *stored;
    return provider.embed(render_case(input, false));
}

}  // namespace

void render_prompt(PromptInstance& instance) {
    std::string prompt;
    switch (instance.task) {
        case Task::Scr:
            prompt = substitute(templates::kScr, "{{CHOICES}}", choices_block(instance.choices));
            prompt = substitute(prompt, "{{INPUT}}", instance.input_rendered);
            break;
        case Task::Pcr:
            prompt = substitute(templates::kPcr, "{{CHOICES}}", choices_block(instance.choices));
            prompt = substitute(prompt, "{{INPUT}}", instance.input_rendered);
            break;
        case Task::Ljp: {
            prompt = substitute(templates::kLjp, "{{INPUT}}", instance.input_rendered);
            if (instance.ljp_mode == LjpMode::FewShot) {
                std::string prefix;
                prefix += templates::kSimilarExampleHeader;
                prefix += '\n';
                prefix += instance.icl_similar_rendered;
                prefix += "\n\n";
                prefix += templates::kPrecedentExampleHeader;
                prefix += '\n';
                prefix += instance.icl_precedent_rendered;
                prefix += "\n\n";
                prompt = prefix + prompt;
            }
            break;
        }
    }
    instance.instruction_text = std::move(prompt);
    instance.token_estimate = estimate_tokens(instance.instruction_text);
}

PromptInstance build_scr_instance(const ProcessedCase& input, const CaseStore& store,
                                  const VectorIndex& index, const EmbeddingProvider& provider,
                                  Phase phase, std::uint64_t seed, int num_choices) {
    if (num_choices < 1) throw Error("build_scr_instance: num_choices < 1");
    PromptInstance inst;
    inst.task = Task::Scr;
    inst.phase = phase;
    inst.input_case = input.id;
    inst.input_rendered = render_case(input, false);

    const EmbeddingVector query = query_vector(input, index, provider);
    std::vector<Neighbor> neighbors;
    if (phase == Phase::Train) {
        if (!index.contains(input.id)) {
            throw Error("scr train: input case " + input.id + " not in index");
        }
        neighbors = index.top_k(query, static_cast<std::size_t>(num_choices), input.id);
    } else {
        if (index.contains(input.id)) {
            throw Error("scr test: input case " + input.id + " must not be indexed");
        }
        neighbors = index.top_k(query, static_cast<std::size_t>(num_choices));
    }

    const int truth = phase == Phase::Train ? 1 : 0;
    for (const Neighbor& n : neighbors) {
        Choice c;
        c.case_id = n.id;
        c.rendered = render_case(store.at(n.id), false);
        c.truth_rank = n.rank;
        c.is_ground_truth = n.rank == truth;
        if (c.is_ground_truth) inst.expected_output = store.at(n.id).title + ".";
        inst.choices.push_back(std::move(c));
    }

    inst.permutation_seed = subseed(seed, "scr-perm");
    assign_positions(inst.choices, inst.permutation_seed);
    render_prompt(inst);
    return inst;
}

PromptInstance build_pcr_instance(const ProcessedCase& input, const CaseStore& store,
                                  const KnowledgeGraph& kg, const VectorIndex& index,
                                  const EmbeddingProvider& provider, Phase phase, int k,
                                  std::uint64_t seed, int num_choices) {
    if (phase == Phase::Train) k = 1;
    if (k < 1 || k > num_choices) throw Error("build_pcr_instance: bad k");

    const std::set<CaseId> precedent_set = kg.precedents_of(input.id);
    const std::vector<CaseId> precedents(precedent_set.begin(), precedent_set.end());
    if (precedents.size() < static_cast<std::size_t>(k)) {
        throw Error("pcr: case " + input.id + " has " + std::to_string(precedents.size()) +
                    " precedents in graph, need " + std::to_string(k));
    }

    PromptInstance inst;
    inst.task = Task::Pcr;
    inst.phase = phase;
    inst.input_case = input.id;
    inst.input_rendered = render_case(input, false);

    std::vector<CaseId> truths;
    for (std::size_t idx :
         sample_without_replacement(precedents.size(), static_cast<std::size_t>(k),
                                    subseed(seed, "pcr-gt"))) {
        truths.push_back(precedents[idx]);
    }

    // Similar-but-not-precedent distractors; skip any true precedent and
    // take the next candidate.
    const EmbeddingVector query = query_vector(input, index, provider);
    std::size_t population = index.size() - (index.contains(input.id) ? 1 : 0);
    std::size_t fetch = std::min<std::size_t>(
        population, static_cast<std::size_t>(num_choices) + precedent_set.size());
    std::vector<Neighbor> candidates = index.top_k(query, fetch, input.id);
    std::vector<CaseId> distractors;
    const std::size_t wanted = static_cast<std::size_t>(num_choices - k);
    for (const Neighbor& n : candidates) {
        if (distractors.size() == wanted) break;
        if (precedent_set.count(n.id)) continue;
        distractors.push_back(n.id);
    }
    if (distractors.size() < wanted) {
        throw Error("pcr: only " + std::to_string(distractors.size()) +
                    " non-precedent distractors available, need " + std::to_string(wanted));
    }

    int truth_index = 0;
    for (const CaseId& id : truths) {
        Choice c;
        c.case_id = id;
        c.rendered = render_case(store.at(id), false);
        c.is_ground_truth = true;
        c.truth_rank = ++truth_index;
        inst.choices.push_back(std::move(c));
    }
    for (const CaseId& id : distractors) {
        Choice c;
        c.case_id = id;
        c.rendered = render_case(store.at(id), false);
        inst.choices.push_back(std::move(c));
    }

    const ProcessedCase& first_truth = store.at(truths.front());
    FactorScores fs = primary_factor(input, first_truth, provider);
    inst.expected_output =
        first_truth.title + ".\nThey have precedent relation is " + canonical_reason(fs.primary);

    inst.permutation_seed = subseed(seed, "pcr-perm");
    assign_positions(inst.choices, inst.permutation_seed);
    render_prompt(inst);
    return inst;
}

PromptInstance build_ljp_instance(const ProcessedCase& input, const CaseStore& store,
                                  const KnowledgeGraph& kg, const VectorIndex& index,
                                  const EmbeddingProvider& provider, LjpMode mode,
                                  std::uint64_t seed) {
    if (input.verdict == Verdict::Unsure) {
        throw Error("ljp: case " + input.id + " has verdict Unsure");
    }
    PromptInstance inst;
    inst.task = Task::Ljp;
    inst.phase = Phase::Test;  // caller overrides for train material
    inst.input_case = input.id;
    inst.input_rendered = render_case(input, false);
    inst.ljp_label = input.verdict;
    inst.ljp_mode = mode;
    inst.expected_output = verdict_label(input.verdict);
    inst.permutation_seed = subseed(seed, "ljp");

    if (mode == LjpMode::FewShot) {
        const EmbeddingVector query = query_vector(input, index, provider);
        std::vector<Neighbor> similar;
        try {
            similar = index.top_k(query, 1, input.id);
        } catch (const Error&) {
            throw Error("ljp few_shot: no indexed neighbor for " + input.id);
        }
        const std::set<CaseId> precedent_set = kg.precedents_of(input.id);
        if (precedent_set.empty()) {
            throw Error("ljp few_shot: no precedent in graph for " + input.id);
        }
        std::vector<CaseId> precedents(precedent_set.begin(), precedent_set.end());
        SplitMix64 rng(subseed(seed, "ljp-precedent"));
        const CaseId& precedent = precedents[rng.below(precedents.size())];

        inst.icl_similar = similar.front().id;
        inst.icl_precedent = precedent;
        inst.icl_similar_rendered = render_case(store.at(*inst.icl_similar), true);
        inst.icl_precedent_rendered = render_case(store.at(precedent), true);
    }
    render_prompt(inst);
    return inst;
}

std::vector<PromptInstance> assemble_combined(const std::vector<PromptInstance>& scr,
                                              const std::vector<PromptInstance>& pcr,
                                              const std::vector<PromptInstance>& ljp,
                                              std::uint64_t seed) {
    std::vector<PromptInstance> combined;
    combined.reserve(scr.size() + pcr.size() + ljp.size());
    for (const auto* part : {&scr, &pcr, &ljp}) {
        for (const auto& inst : *part) {
            if (inst.phase != Phase::Train) {
                throw Error("assemble_combined: non-train instance " + inst.input_case);
            }
            combined.push_back(inst);
        }
    }
    seeded_shuffle(combined, seed);
    return combined;
}

namespace {

// Span of the detail content inside a rendered case block.
std::pair<std::size_t, std::size_t> detail_span(const std::string& rendered) {
    static constexpr std::string_view kLabel = "\nCase Detail: ";
    auto pos = rendered.find(kLabel);
    if (pos == std::string::npos) return {rendered.size(), rendered.size()};
    std::size_t begin = pos + kLabel.size();
    auto verdict = rendered.find("\nVerdict: ", begin);
    return {begin, verdict == std::string::npos ? rendered.size() : verdict};
}

std::size_t detail_length(const std::string& rendered) {
    auto [b, e] = detail_span(rendered);
    return e - b;
}

// Removes up to `amount` detail characters; returns how many were cut.
std::size_t trim_detail(std::string& rendered, std::size_t amount) {
    auto [b, e] = detail_span(rendered);
    std::size_t cut = std::min(amount, e - b);
    rendered.erase(e - cut, cut);
    return cut;
}

}  // namespace

PromptInstance enforce_token_budget(PromptInstance instance, std::size_t budget_tokens) {
    if (budget_tokens < 512) throw Error("enforce_token_budget: budget below 512");
    render_prompt(instance);
    if (instance.token_estimate <= budget_tokens) return instance;

    // Trimmable detail sections: choices for SCR/PCR; ICL examples and the
    // input case for LJP. Position codes for LJP metadata: -1 similar
    // example, -2 precedent example, 0 input case.
    struct Target {
        std::string* rendered;
        int position;
    };
    std::vector<Target> targets;
    if (instance.task == Task::Ljp) {
        if (!instance.icl_similar_rendered.empty()) {
            targets.push_back({&instance.icl_similar_rendered, -1});
        }
        if (!instance.icl_precedent_rendered.empty()) {
            targets.push_back({&instance.icl_precedent_rendered, -2});
        }
        targets.push_back({&instance.input_rendered, 0});
    } else {
        for (Choice& c : instance.choices) targets.push_back({&c.rendered, c.position});
    }

    while (instance.token_estimate > budget_tokens) {
        Target* longest = nullptr;
        std::size_t longest_len = 0;
        for (Target& t : targets) {
            std::size_t len = detail_length(*t.rendered);
            if (len > longest_len) {
                longest_len = len;
                longest = &t;
            }
        }
        if (!longest || longest_len == 0) {
            throw Error("enforce_token_budget: prompt cannot fit in " +
                        std::to_string(budget_tokens) + " tokens even with empty details");
        }
        const std::size_t excess_chars = (instance.token_estimate - budget_tokens) * 4;
        trim_detail(*longest->rendered, std::min(excess_chars, longest_len));
        if (std::find(instance.truncated_choices.begin(), instance.truncated_choices.end(),
                      longest->position) == instance.truncated_choices.end()) {
            instance.truncated_choices.push_back(longest->position);
        }
        render_prompt(instance);
    }
    return instance;
}

namespace {

json choice_to_json(const Choice& c) {
    json j;
    j["position"] = c.position;
    j["case_id"] = c.case_id;
    j["rendered"] = c.rendered;
    j["is_ground_truth"] = c.is_ground_truth;
    if (c.truth_rank) {
        j["truth_rank"] = *c.truth_rank;
    } else {
        j["truth_rank"] = nullptr;
    }
    return j;
}

Choice choice_from_json(const json& j) {
    Choice c;
    c.position = j.at("position").get<int>();
    c.case_id = j.at("case_id").get<std::string>();
    c.rendered = j.value("rendered", std::string{});
    c.is_ground_truth = j.at("is_ground_truth").get<bool>();
    if (j.contains("truth_rank") && !j.at("truth_rank").is_null()) {
        c.truth_rank = j.at("truth_rank").get<int>();
    }
    return c;
}

Task task_from_name(std::string_view name) {
    if (name == "scr") return Task::Scr;
    if (name == "pcr") return Task::Pcr;
    if (name == "ljp") return Task::Ljp;
    throw Error("unknown task: " + std::string(name));
}

}  // namespace

std::string serialize_instance(const PromptInstance& inst) {
    json j;
    j["task"] = std::string(task_name(inst.task));
    j["phase"] = std::string(phase_name(inst.phase));
    j["input_case"] = inst.input_case;
    j["instruction_text"] = inst.instruction_text;
    j["input_rendered"] = inst.input_rendered;
    j["expected_output"] = inst.expected_output;
    j["permutation_seed"] = inst.permutation_seed;
    j["token_estimate"] = inst.token_estimate;
    j["choices"] = json::array();
    for (const Choice& c : inst.choices) j["choices"].push_back(choice_to_json(c));
    if (inst.ljp_label) j["ljp_label"] = std::string(verdict_label(*inst.ljp_label));
    if (inst.ljp_mode) j["ljp_mode"] = std::string(ljp_mode_name(*inst.ljp_mode));
    if (inst.icl_similar) j["icl_similar"] = *inst.icl_similar;
    if (inst.icl_precedent) j["icl_precedent"] = *inst.icl_precedent;
    if (!inst.icl_similar_rendered.empty()) j["icl_similar_rendered"] = inst.icl_similar_rendered;
    if (!inst.icl_precedent_rendered.empty()) {
        j["icl_precedent_rendered"] = inst.icl_precedent_rendered;
    }
    if (!inst.truncated_choices.empty()) j["truncated_choices"] = inst.truncated_choices;
    return j.dump();
}

PromptInstance parse_instance(const std::string& line) {
    json j = json::parse(line);
    PromptInstance inst;
    inst.task = task_from_name(j.at("task").get<std::string>());
    inst.phase = j.at("phase").get<std::string>() == "train" ? Phase::Train : Phase::Test;
    inst.input_case = j.at("input_case").get<std::string>();
    inst.instruction_text = j.at("instruction_text").get<std::string>();
    inst.input_rendered = j.value("input_rendered", std::string{});
    inst.expected_output = j.at("expected_output").get<std::string>();
    inst.permutation_seed = j.at("permutation_seed").get<std::uint64_t>();
    inst.token_estimate = j.at("token_estimate").get<std::size_t>();
    for (const auto& c : j.at("choices")) inst.choices.push_back(choice_from_json(c));
    if (j.contains("ljp_label")) {
        inst.ljp_label = normalize_verdict(j.at("ljp_label").get<std::string>());
    }
    if (j.contains("ljp_mode")) {
        inst.ljp_mode = j.at("ljp_mode").get<std::string>() == "zero_shot" ? LjpMode::ZeroShot
                                                                           : LjpMode::FewShot;
    }
    if (j.contains("icl_similar")) inst.icl_similar = j.at("icl_similar").get<std::string>();
    if (j.contains("icl_precedent")) inst.icl_precedent = j.at("icl_precedent").get<std::string>();
    inst.icl_similar_rendered = j.value("icl_similar_rendered", std::string{});
    inst.icl_precedent_rendered = j.value("icl_precedent_rendered", std::string{});
    if (j.contains("truncated_choices")) {
        inst.truncated_choices = j.at("truncated_choices").get<std::vector<int>>();
    }
    return inst;
}

void write_instances(const std::filesystem::path& path,
                     const std::vector<PromptInstance>& instances) {
    std::string out;
    for (const auto& inst : instances) {
        out += serialize_instance(inst);
        out += '\n';
    }
    atomic_write_file(path, out);
}

std::vector<PromptInstance> read_instances(const std::filesystem::path& path) {
    std::string content = read_file(path);
    std::vector<PromptInstance> out;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string::npos) end = content.size();
        std::string line = content.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty()) out.push_back(parse_instance(line));
    }
    return out;
}

SplitResult split_corpus(const std::vector<ProcessedCase>& cases, const SplitConfig& config) {
    if (config.train_fraction <= 0.0 || config.train_fraction >= 1.0) {
        throw Error("split: train_fraction must be in (0, 1)");
    }
    SplitResult result;

    // Constraint 1: enough precedents overall.
    std::vector<const ProcessedCase*> eligible;
    for (const auto& c : cases) {
        if (c.precedent_ids.size() < config.min_precedents) {
            result.report.discarded.push_back(
                {c.id, "only " + std::to_string(c.precedent_ids.size()) + " precedents, need " +
                           std::to_string(config.min_precedents)});
        } else {
            eligible.push_back(&c);
        }
    }
    std::sort(eligible.begin(), eligible.end(),
              [](const ProcessedCase* a, const ProcessedCase* b) { return a->id < b->id; });
    result.report.eligible = eligible.size();

    // Constraint 3: balanced train histogram over the four decided verdicts.
    std::map<Verdict, std::vector<const ProcessedCase*>> by_class;
    std::vector<const ProcessedCase*> undecided;
    for (const ProcessedCase* c : eligible) {
        if (c->verdict == Verdict::Unsure) {
            undecided.push_back(c);
        } else {
            by_class[c->verdict].push_back(c);
        }
    }
    const Verdict classes[] = {Verdict::PlaintiffWin, Verdict::DefendantWin, Verdict::Settlement,
                               Verdict::CaseDismissal};
    std::size_t train_target =
        static_cast<std::size_t>(config.train_fraction * static_cast<double>(eligible.size()));
    std::size_t quota = config.balance_classes ? train_target / 4 : 0;
    for (Verdict v : classes) {
        if (by_class[v].empty()) {
            throw InfeasibleError(std::string("split: no eligible cases with verdict '") +
                                  std::string(verdict_label(v)) + "'");
        }
        if (config.balance_classes) quota = std::min(quota, by_class[v].size());
    }
    result.report.per_class_quota = quota;
    if (config.balance_classes && quota == 0) {
        throw InfeasibleError("split: balanced per-class quota is zero");
    }

    if (config.balance_classes) {
        for (Verdict v : classes) {
            auto& members = by_class[v];
            seeded_shuffle(members, derive_seed(config.seed, verdict_label(v)));
            for (std::size_t i = 0; i < quota; ++i) result.train.insert(members[i]->id);
        }
    } else {
        std::vector<const ProcessedCase*> pool = eligible;
        seeded_shuffle(pool, derive_seed(config.seed, "unbalanced"));
        for (std::size_t i = 0; i < pool.size() && i < train_target; ++i) {
            result.train.insert(pool[i]->id);
        }
    }

    // Constraint 2: test cases keep at least min_precedents inside train.
    std::size_t unsatisfiable = 0;
    auto consider_for_test = [&](const ProcessedCase* c) {
        if (result.train.count(c->id)) return;
        std::size_t in_train = 0;
        for (const auto& p : c->precedent_ids) in_train += result.train.count(p);
        if (in_train >= config.min_precedents) {
            result.test.insert(c->id);
        } else {
            ++unsatisfiable;
            result.report.discarded.push_back(
                {c->id, "only " + std::to_string(in_train) + " precedents inside train"});
            result.report.spillover.push_back(c->id);
        }
    };
    for (const ProcessedCase* c : eligible) consider_for_test(c);

    if (result.test.empty()) {
        throw InfeasibleError("split: no test case satisfies the in-train precedent constraint (" +
                              std::to_string(unsatisfiable) + " candidates failed)");
    }
    std::sort(result.report.spillover.begin(), result.report.spillover.end());
    result.report.train_count = result.train.size();
    result.report.test_count = result.test.size();
    return result;
}

}  // namespace casekit
