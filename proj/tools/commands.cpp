#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cst/curation.hpp"
#include "cst/density.hpp"
#include "cst/engine.hpp"
#include "cst/io.hpp"
#include "cst/report.hpp"
#include "cst/rng.hpp"

namespace cst::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// schema tags for the JSONL artifacts
constexpr const char* kScenesSchema = "cst.scenes.v1";
constexpr const char* kLabelsSchema = "cst.labels.v1";
constexpr const char* kRecordsSchema = "cst.records.v1";
constexpr const char* kTwoStepSchema = "cst.twostep.v1";

struct RunConfig {
    std::uint64_t seed = 1;
    GeneratorConfig generator = default_generator_config();
    GeometryOptions geometry;
    DetectorConstants detector;
    std::vector<GroupKey> weak_groups;
    double alpha = 0.1;
    CampaignOptions campaign;
    AggregateOptions aggregate;
    TwoStepOptions two_step;
    std::vector<GroupKey> two_step_first_set;
    std::vector<double> agnostic_thresholds = {0.2, 0.4, 0.6, 0.8};
    long agnostic_per_bucket = 1000;

    json to_json() const {
        json weights{{"asset", campaign.weights.asset},
                     {"rotation", campaign.weights.rotation},
                     {"weather", campaign.weights.weather},
                     {"location", campaign.weights.location}};
        return json{{"seed", seed},
                    {"generator", generator},
                    {"geometry", {{"buffer_scale", geometry.buffer_scale}}},
                    {"detector", detector},
                    {"weak_groups", weak_groups},
                    {"density", {{"alpha", alpha}}},
                    {"campaign",
                     {{"n", campaign.n},
                      {"tau", campaign.tau},
                      {"weights", weights},
                      {"min_count", aggregate.min_count},
                      {"include_location", aggregate.include_location},
                      {"count_self_per_side", aggregate.count_self_per_side},
                      {"tier_cuts", {aggregate.tier1_cut, aggregate.tier2_cut}}}},
                    {"two_step",
                     {{"n", two_step.n},
                      {"tau1", two_step.tau1},
                      {"tau2", two_step.tau2},
                      {"first_set", two_step_first_set}}},
                    {"agnostic",
                     {{"thresholds", agnostic_thresholds},
                      {"per_bucket", agnostic_per_bucket}}}};
    }

    static RunConfig from_json(const json& j) {
        RunConfig c;
        if (j.contains("seed")) j.at("seed").get_to(c.seed);
        if (j.contains("generator")) j.at("generator").get_to(c.generator);
        if (j.contains("geometry") && j.at("geometry").contains("buffer_scale"))
            c.geometry.buffer_scale = j.at("geometry").at("buffer_scale").get<double>();
        if (j.contains("detector")) j.at("detector").get_to(c.detector);
        if (j.contains("weak_groups"))
            c.weak_groups = j.at("weak_groups").get<std::vector<GroupKey>>();
        if (j.contains("density") && j.at("density").contains("alpha"))
            c.alpha = j.at("density").at("alpha").get<double>();
        if (j.contains("campaign")) {
            const auto& cj = j.at("campaign");
            if (cj.contains("n")) cj.at("n").get_to(c.campaign.n);
            if (cj.contains("tau")) cj.at("tau").get_to(c.campaign.tau);
            if (cj.contains("weights")) {
                const auto& w = cj.at("weights");
                c.campaign.weights.asset = w.value("asset", c.campaign.weights.asset);
                c.campaign.weights.rotation = w.value("rotation", c.campaign.weights.rotation);
                c.campaign.weights.weather = w.value("weather", c.campaign.weights.weather);
                c.campaign.weights.location = w.value("location", c.campaign.weights.location);
            }
            if (cj.contains("min_count")) cj.at("min_count").get_to(c.aggregate.min_count);
            if (cj.contains("include_location"))
                cj.at("include_location").get_to(c.aggregate.include_location);
            if (cj.contains("count_self_per_side"))
                cj.at("count_self_per_side").get_to(c.aggregate.count_self_per_side);
            if (cj.contains("tier_cuts")) {
                c.aggregate.tier1_cut = cj.at("tier_cuts").at(0).get<double>();
                c.aggregate.tier2_cut = cj.at("tier_cuts").at(1).get<double>();
            }
        }
        if (j.contains("two_step")) {
            const auto& tj = j.at("two_step");
            if (tj.contains("n")) tj.at("n").get_to(c.two_step.n);
            if (tj.contains("tau1")) tj.at("tau1").get_to(c.two_step.tau1);
            if (tj.contains("tau2")) tj.at("tau2").get_to(c.two_step.tau2);
            if (tj.contains("first_set"))
                c.two_step_first_set = tj.at("first_set").get<std::vector<GroupKey>>();
        }
        if (j.contains("agnostic")) {
            const auto& aj = j.at("agnostic");
            if (aj.contains("thresholds"))
                c.agnostic_thresholds = aj.at("thresholds").get<std::vector<double>>();
            if (aj.contains("per_bucket")) aj.at("per_bucket").get_to(c.agnostic_per_bucket);
        }
        return c;
    }
};

struct CliState {
    RunConfig config;
    std::string config_hash;
    PipelineContext ctx;

    void finalize() {
        try {
            config.generator.validate();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        config_hash = hash_hex(fnv1a64(config.to_json().dump()));
        ctx = PipelineContext::make(config.generator, config.geometry);
    }

    ArtifactHeader header(const std::string& schema, json extra = json::object()) const {
        ArtifactHeader h;
        h.schema = schema;
        h.config_hash = config_hash;
        h.seed = config.seed;
        h.version = kVersion;
        h.extra = std::move(extra);
        return h;
    }
};

void write_meta(const fs::path& artifact, const CliState& state, json extra = json::object()) {
    json meta{{"config_hash", state.config_hash},
              {"seed", state.config.seed},
              {"version", kVersion},
              {"extra", std::move(extra)}};
    write_text_file(artifact.string() + ".meta.json", meta.dump(2) + "\n");
}

std::vector<SceneGraph> read_scenes(const fs::path& path) {
    std::vector<SceneGraph> scenes;
    for (const auto& j : read_jsonl(path, kScenesSchema)) scenes.push_back(j.get<SceneGraph>());
    return scenes;
}

void write_scenes(const fs::path& path, const CliState& state,
                  const std::vector<SceneGraph>& scenes) {
    JsonlWriter out(path, state.header(kScenesSchema, {{"count", scenes.size()}}));
    for (const auto& s : scenes) out.write(json(s));
}

std::vector<InterventionRecord> read_records(const fs::path& path, ArtifactHeader* hdr = nullptr) {
    std::vector<InterventionRecord> records;
    for (const auto& j : read_jsonl(path, kRecordsSchema, hdr))
        records.push_back(j.get<InterventionRecord>());
    return records;
}

void write_records(const fs::path& path, const CliState& state,
                   const std::vector<InterventionRecord>& records, json extra) {
    JsonlWriter out(path, state.header(kRecordsSchema, std::move(extra)));
    for (const auto& r : records) out.write(json(r));
}

// token files: one sequence of whitespace-separated indices per line, with a
// self-describing sidecar carrying the slot-class vocabularies
fs::path token_sidecar(const fs::path& tokens) { return tokens.string() + ".schema.json"; }

void write_tokens(const fs::path& path, const CliState& state,
                  const std::vector<TokenSequence>& seqs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    for (const auto& seq : seqs) {
        for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
            if (i) out << ' ';
            out << seq.tokens[i];
        }
        out << '\n';
    }
    json sidecar{{"_schema", "cst.tokens.v1"},
                 {"schema_hash", hash_hex(state.ctx.schema->hash())},
                 {"token_schema", state.ctx.schema->to_json()},
                 {"config_hash", state.config_hash},
                 {"seed", state.config.seed},
                 {"version", kVersion},
                 {"count", seqs.size()}};
    write_text_file(token_sidecar(path), sidecar.dump(2) + "\n");
}

std::vector<TokenSequence> read_tokens(const fs::path& path, const CliState& state,
                                       const std::vector<SceneGraph>& scenes) {
    const json sidecar = json::parse(read_text_file(token_sidecar(path)));
    if (sidecar.value("_schema", "") != "cst.tokens.v1")
        throw DataError("not a token sidecar: " + token_sidecar(path).string());
    if (sidecar.at("schema_hash").get<std::string>() != hash_hex(state.ctx.schema->hash()))
        throw DataError("token file schema hash does not match the configured codec");

    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::vector<TokenSequence> seqs;
    std::string line;
    std::size_t idx = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TokenSequence seq;
        seq.schema = state.ctx.schema;
        std::istringstream ss(line);
        int tok;
        while (ss >> tok) seq.tokens.push_back(tok);
        if (!TokenSchema::valid_length(seq.tokens.size()))
            throw DataError("token line " + std::to_string(idx) + " has invalid length");
        if (idx < scenes.size())
            seq.map_index = map_index_of(state.ctx.config, scenes[idx].map_id);
        seqs.push_back(std::move(seq));
        ++idx;
    }
    if (!scenes.empty() && seqs.size() != scenes.size())
        throw DataError("token line count does not match the scene file");
    return seqs;
}

DetectorProfile read_profile(const fs::path& path) {
    const json j = json::parse(read_text_file(path));
    if (j.value("_schema", "") != "cst.profile.v1")
        throw DataError("not a detector profile artifact: " + path.string());
    return j.at("profile").get<DetectorProfile>();
}

void write_profile(const fs::path& path, const CliState& state, const DetectorProfile& profile) {
    json j{{"_schema", "cst.profile.v1"},
           {"config_hash", state.config_hash},
           {"version", kVersion},
           {"profile", profile}};
    write_text_file(path, j.dump(2) + "\n");
}

std::vector<GroupKey> parse_group_list(const std::string& csv) {
    std::vector<GroupKey> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(GroupKey::parse(item));
    }
    return out;
}

// ---- subcommand bodies -------------------------------------------------

int cmd_generate(const CliState& state, const std::string& out, long count) {
    std::vector<SceneGraph> scenes;
    scenes.reserve(count);
    for (long i = 0; i < count; ++i)
        scenes.push_back(sample_scene(state.config.generator,
                                      state.config.seed + static_cast<std::uint64_t>(i)));
    write_scenes(out, state, scenes);
    std::cout << "wrote " << scenes.size() << " scenes to " << out << "\n";
    return 0;
}

int cmd_label(const CliState& state, const std::string& scenes_path, const std::string& out) {
    const auto scenes = read_scenes(scenes_path);
    JsonlWriter writer(out, state.header(kLabelsSchema, {{"count", scenes.size()}}));
    long boxes = 0;
    for (const auto& s : scenes) {
        const LabelSet labels = derive_labels(s, state.ctx.geometry);
        boxes += static_cast<long>(labels.boxes.size());
        writer.write(json(labels));
    }
    std::cout << "wrote labels for " << scenes.size() << " scenes (" << boxes << " boxes) to "
              << out << "\n";
    return 0;
}

int cmd_encode(const CliState& state, const std::string& scenes_path, const std::string& out) {
    const auto scenes = read_scenes(scenes_path);
    std::vector<TokenSequence> seqs;
    seqs.reserve(scenes.size());
    for (const auto& s : scenes) seqs.push_back(encode_scene(s, state.ctx.config, state.ctx.schema));
    write_tokens(out, state, seqs);
    std::cout << "encoded " << seqs.size() << " scenes to " << out << "\n";
    return 0;
}

int cmd_train_density(const CliState& state, const std::string& scenes_path,
                      const std::string& tokens_path, const std::string& out) {
    const auto scenes = read_scenes(scenes_path);
    const auto corpus = read_tokens(tokens_path, state, scenes);
    const auto model = train(corpus, state.ctx.schema, state.config.alpha);
    save_model(model, out);
    write_meta(out, state, {{"corpus", corpus.size()}, {"alpha", state.config.alpha}});
    std::cout << "trained density model on " << corpus.size() << " sequences; corpus perplexity "
              << perplexity(model, corpus) << " (uniform "
              << uniform_perplexity(*state.ctx.schema, corpus) << ")\n";
    return 0;
}

int cmd_intervene(const CliState& state, const std::string& scenes_path,
                  const std::string& model_path, const std::string& profile_path,
                  const std::string& out) {
    const auto scenes = read_scenes(scenes_path);
    const auto model = load_model(model_path, state.ctx.schema);
    const auto profile = read_profile(profile_path);

    const auto result = run_campaign(scenes, model, profile, state.ctx, state.config.campaign);
    write_records(out, state, result.records,
                  {{"n", state.config.campaign.n},
                   {"tau", state.config.campaign.tau},
                   {"skipped_no_agent", result.skipped_no_agent},
                   {"dropped_noop", result.dropped_noop},
                   {"model_schema_hash", hash_hex(state.ctx.schema->hash())}});
    std::cout << "campaign: " << result.records.size() << " records, "
              << result.skipped_no_agent << " skipped, " << result.dropped_noop
              << " no-ops dropped -> " << out << "\n";
    return 0;
}

int cmd_random_baseline(const CliState& state, const std::string& records_path,
                        const std::string& scenes_path, const std::string& profile_path,
                        const std::string& out) {
    const auto mlm_records = read_records(records_path);
    const auto scenes = read_scenes(scenes_path);
    const auto profile = read_profile(profile_path);
    const auto result =
        run_random_campaign(mlm_records, scenes, profile, state.ctx, state.config.seed);
    write_records(out, state, result.records,
                  {{"paired_with", records_path}, {"dropped_noop", result.dropped_noop}});
    std::cout << "random baseline: " << result.records.size() << " records -> " << out << "\n";
    return 0;
}

int cmd_two_step(const CliState& state, const std::string& scenes_path,
                 const std::string& model_path, const std::string& profile_path,
                 const std::string& out) {
    if (state.config.two_step_first_set.empty())
        throw ConfigError("two-step campaign needs a first-edit set (config two_step.first_set "
                          "or --first-set)");
    const auto scenes = read_scenes(scenes_path);
    const auto model = load_model(model_path, state.ctx.schema);
    const auto profile = read_profile(profile_path);
    TwoStepOptions opts = state.config.two_step;
    opts.seed = state.config.seed;
    const auto records =
        run_two_step(scenes, model, profile, state.ctx, state.config.two_step_first_set, opts);
    JsonlWriter writer(out, state.header(kTwoStepSchema, {{"n", opts.n}}));
    for (const auto& r : records) writer.write(json(r));
    std::cout << "two-step campaign: " << records.size() << " records -> " << out << "\n";
    return 0;
}

int cmd_aggregate(const CliState& state, const std::string& records_path,
                  const std::string& out) {
    const auto records = read_records(records_path);
    const auto groups =
        aggregate_groups(records, state.config.campaign.tau, state.config.aggregate);
    write_text_file(out, groups_to_csv(groups));
    write_meta(out, state,
               {{"tau", state.config.campaign.tau},
                {"min_count", state.config.aggregate.min_count},
                {"records", records.size()}});
    std::cout << "aggregated " << records.size() << " records into " << groups.size()
              << " groups -> " << out << "\n";
    return 0;
}

int cmd_curate(const CliState& state, const std::string& scenes_path, const std::string& group,
               const std::string& out, long count) {
    auto scenes = read_scenes(scenes_path);
    if (count > 0 && count < static_cast<long>(scenes.size())) scenes.resize(count);
    const auto dataset =
        build_group_dataset(scenes, GroupKey::parse(group), state.config.seed, state.ctx);
    write_scenes(out, state, dataset);
    std::cout << "curated " << dataset.size() << " scenes for " << group << " -> " << out << "\n";
    return 0;
}

int cmd_fit_detector(const CliState& state, const std::vector<std::string>& scene_paths,
                     const std::string& out, const std::string& manifest_out, double capacity,
                     const std::string& weak_csv) {
    TrainingManifest manifest;
    for (const auto& path : scene_paths) {
        const auto scenes = read_scenes(path);
        manifest.add(build_manifest(scenes, state.ctx));
    }
    DetectorConstants constants = state.config.detector;
    constants.capacity = capacity;
    std::vector<GroupKey> weak = state.config.weak_groups;
    for (auto& g : parse_group_list(weak_csv)) weak.push_back(g);

    const auto profile = fit(manifest, state.ctx.config.catalog, constants, weak);
    write_profile(out, state, profile);
    if (!manifest_out.empty()) {
        json j{{"_schema", "cst.manifest.v1"},
               {"config_hash", state.config_hash},
               {"manifest", manifest}};
        write_text_file(manifest_out, j.dump(2) + "\n");
    }
    std::cout << "fit detector on " << manifest.total_images << " images ("
              << manifest.total_instances() << " instances) -> " << out << "\n";
    return 0;
}

int cmd_eval(const CliState& state, const std::string& profile_path,
             const std::string& scenes_path, const std::string& out, double iou_threshold,
             const std::string& append_csv, const std::string& series, double x_value) {
    const auto profile = read_profile(profile_path);
    const auto scenes = read_scenes(scenes_path);
    std::vector<std::pair<SceneGraph, LabelSet>> dataset;
    dataset.reserve(scenes.size());
    for (const auto& s : scenes) dataset.push_back({s, derive_labels(s, state.ctx.geometry)});
    const auto result =
        evaluate_ap(profile, state.ctx.config, dataset, iou_threshold, state.config.seed,
                    state.ctx.geometry);

    json j{{"_schema", "cst.eval.v1"},
           {"config_hash", state.config_hash},
           {"ap", result.ap},
           {"zero_gt_warning", result.zero_gt_warning},
           {"iou", iou_threshold},
           {"scenes", scenes.size()}};
    if (!out.empty()) write_text_file(out, j.dump(2) + "\n");

    if (!append_csv.empty()) {
        const bool fresh = !fs::exists(append_csv);
        std::ofstream csv(append_csv, std::ios::app);
        if (!csv) throw DataError("cannot open for append: " + append_csv);
        if (fresh) csv << "series,x,ap\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g\n",
                      series.empty() ? "default" : series.c_str(), x_value, result.ap);
        csv << buf;
    }
    std::cout << "AP " << result.ap << (result.zero_gt_warning ? " (zero ground truth!)" : "")
              << " over " << scenes.size() << " scenes\n";
    return 0;
}

int cmd_collect_agnostic(const CliState& state, const std::string& pool_path,
                         const std::string& profile_path, const std::string& out_dir) {
    const auto pool = read_scenes(pool_path);
    const auto profile = read_profile(profile_path);

    std::vector<ScoredScene> scored;
    scored.reserve(pool.size());
    for (const auto& s : pool)
        scored.push_back(ScoredScene{s, pipeline_score(profile, state.ctx, s)});

    const auto buckets =
        cause_agnostic_collect(scored, state.config.agnostic_thresholds,
                               state.config.agnostic_per_bucket, state.config.seed);
    fs::create_directories(out_dir);
    for (const auto& b : buckets) {
        char name[64];
        std::snprintf(name, sizeof(name), "bucket_%.2f.jsonl", b.threshold);
        const fs::path out = fs::path(out_dir) / name;
        write_scenes(out, state, b.selected);
        std::cout << "threshold " << b.threshold << ": bucket " << b.bucket_size << ", selected "
                  << b.selected.size() << (b.shortage ? " (shortage)" : "") << " -> "
                  << out.string() << "\n";
    }
    return 0;
}

int cmd_report_table(const CliState& state, const std::string& groups_csv,
                     const std::string& out, double tau) {
    const auto groups = groups_from_csv(read_text_file(groups_csv));
    const std::string table = format_group_table(groups, tau);
    if (out.empty()) {
        std::cout << table;
    } else {
        write_text_file(out, table);
        write_meta(out, state);
        std::cout << "wrote intervention table -> " << out << "\n";
    }
    return 0;
}

int cmd_report_density(const CliState& state, const std::string& attribute,
                       const std::string& scenes_path, const std::string& records_path,
                       const std::string& random_path, const std::string& out_csv,
                       const std::string& out_svg, bool deleterious_only, double tau) {
    const auto scenes = read_scenes(scenes_path);

    const bool rotation = attribute == "rotation";
    if (!rotation && attribute != "cloudiness")
        throw ConfigError("supported density attributes: rotation, cloudiness");

    auto series_values = [&](const fs::path& path) {
        std::vector<double> values;
        for (const auto& r : read_records(path)) {
            if (deleterious_only && !(r.delta <= -tau)) continue;
            if (rotation && r.category == kCategoryRotation)
                values.push_back(r.target_value.get<double>());
            if (!rotation && r.category == kCategoryWeather) {
                for (const auto& p : state.ctx.config.weather_presets)
                    if (p.name == r.target_value.get<std::string>())
                        values.push_back(p.state.cloudiness());
            }
        }
        return values;
    };

    std::vector<double> original;
    for (const auto& s : scenes) {
        if (rotation) {
            for (const auto& a : s.agents)
                if (a.kind == AgentKind::vehicle) original.push_back(a.pose.yaw);
        } else {
            original.push_back(s.weather.cloudiness());
        }
    }

    const double lo = 0.0;
    const double hi = rotation ? 360.0 : 1.0;
    const int bins = rotation ? 36 : 20;
    std::vector<HistogramSeries> series;
    series.push_back({"original", histogram_density(original, bins, lo, hi)});
    series.push_back({"mlm", histogram_density(series_values(records_path), bins, lo, hi)});
    if (!random_path.empty())
        series.push_back({"random", histogram_density(series_values(random_path), bins, lo, hi)});

    write_text_file(out_csv, histogram_csv(series, bins, lo, hi));
    write_meta(out_csv, state);
    if (!out_svg.empty()) {
        std::vector<std::string> names;
        std::vector<std::vector<double>> xs, ys;
        for (const auto& s : series) {
            names.push_back(s.name);
            std::vector<double> x, y;
            for (int b = 0; b < bins; ++b) {
                x.push_back(lo + (b + 0.5) * (hi - lo) / bins);
                y.push_back(s.density[b]);
            }
            xs.push_back(std::move(x));
            ys.push_back(std::move(y));
        }
        write_text_file(out_svg, svg_line_chart("density: " + attribute, names, xs, ys,
                                                attribute, "density"));
        write_meta(out_svg, state);
    }
    std::cout << "wrote density report for " << attribute << " -> " << out_csv << "\n";
    return 0;
}

int cmd_report_curves(const CliState& state, const std::string& curves_csv,
                      const std::string& out_svg, const std::string& title,
                      const std::string& x_label) {
    const auto points = curves_from_csv(read_text_file(curves_csv));
    if (points.empty()) throw DataError("curves CSV has no data rows");
    write_text_file(out_svg, curves_svg(points, title, x_label));
    write_meta(out_svg, state);
    std::cout << "wrote curves (" << points.size() << " points) -> " << out_svg << "\n";
    return 0;
}

int cmd_report_two_step(const CliState& state, const std::string& records_path, int question,
                        const std::string& out, long min_count) {
    std::vector<TwoStepRecord> records;
    for (const auto& j : read_jsonl(records_path, kTwoStepSchema))
        records.push_back(j.get<TwoStepRecord>());
    const auto summary = filter_two_step(records, question, state.config.two_step.tau1,
                                         state.config.two_step.tau2);
    const std::string table = format_two_step_table(summary, question, min_count);
    if (out.empty()) {
        std::cout << table;
    } else {
        write_text_file(out, table);
        write_meta(out, state);
        std::cout << "wrote two-step table -> " << out << "\n";
    }
    return 0;
}

// Built-in self checks; exit code 4 when any fail.
int cmd_verify(const CliState& state) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        std::cout << (ok ? "ok: " : "FAILED: ") << what << "\n";
        if (!ok) ++failures;
    };

    const auto& cfg = state.config.generator;
    const SceneGraph a = sample_scene(cfg, 1);
    const SceneGraph b = sample_scene(cfg, 1);
    check(a == b, "generator determinism");

    bool round_trip = true, idempotent = true, support = true;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const SceneGraph g = sample_scene(cfg, seed);
        const TokenSequence s = encode_scene(g, state.ctx.config, state.ctx.schema);
        const SceneGraph back = decode_scene(s, g, state.ctx.config);
        auto close = [&](double x, double y) { return std::abs(x - y) < 0.1; };
        for (std::size_t i = 0; i < g.agents.size(); ++i) {
            round_trip = round_trip && close(back.agents[i].pose.x, g.agents[i].pose.x) &&
                         close(back.agents[i].pose.yaw, g.agents[i].pose.yaw) &&
                         back.agents[i].asset == g.agents[i].asset;
        }
        round_trip = round_trip && back.weather == g.weather && back.camera == g.camera;
        idempotent =
            idempotent && encode_scene(back, state.ctx.config, state.ctx.schema).tokens == s.tokens;
        support = support && std::isfinite(scene_distribution_log_prob(cfg, g));
    }
    check(round_trip, "codec round trip within 0.1 with exact discrete attributes");
    check(idempotent, "encode(decode(S)) token identity");
    check(support, "generated scenes stay on the generator's support");

    int offset = 0;
    bool partition = true;
    for (const auto& c : state.ctx.schema->classes()) {
        partition = partition && (c.vocab_offset == offset);
        offset += c.vocab_size;
    }
    check(partition, "slot classes partition the vocabulary");

    {
        const Box2D gt{100, 100, 200, 200};
        LabelSet labels;
        labels.boxes.push_back(LabeledBox{1, gt, 10, 2000, 0});
        const auto r = score_example({Prediction{gt, 1.0}}, labels);
        check(std::abs(r.score - 1.0) < 1e-12, "perfect-match score fixed point");
        check(score_example({}, labels).score == 0.0, "empty predictions with ground truth");
        check(is_sufficient(0.2, 0.2), "sufficiency boundary inclusive");
    }

    if (failures > 0) {
        std::cout << failures << " verification check(s) failed\n";
        return 4;
    }
    std::cout << "all verification checks passed\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
    CLI::App app{"causal scene-intervention toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // --config/--seed may follow the subcommand name

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "run configuration JSON file");
    app.add_option("--seed", seed_override, "override the configured seed")
        ->each([&](const std::string&) { seed_set = true; });
    std::string dump_config_path;
    app.add_option("--dump-config", dump_config_path,
                   "write the effective configuration to a file and continue");

    auto* generate = app.add_subcommand("generate", "sample scenes from the generator");
    std::string g_out = "scenes.jsonl";
    long g_count = 1000;
    generate->add_option("--out", g_out, "output scene JSONL");
    generate->add_option("--count", g_count, "number of scenes");

    auto* label = app.add_subcommand("label", "derive ground-truth labels for scenes");
    std::string l_scenes, l_out = "labels.jsonl";
    label->add_option("--scenes", l_scenes, "scene JSONL")->required();
    label->add_option("--out", l_out, "output label JSONL");

    auto* encode = app.add_subcommand("encode", "encode scenes to token sequences");
    std::string e_scenes, e_out = "tokens.txt";
    encode->add_option("--scenes", e_scenes, "scene JSONL")->required();
    encode->add_option("--out", e_out, "output token file (sidecar schema written alongside)");

    auto* train_cmd = app.add_subcommand("train-density", "train the masked density model");
    std::string t_scenes, t_tokens, t_out = "model.json";
    train_cmd->add_option("--scenes", t_scenes, "scene JSONL (provides per-sequence map ids)")
        ->required();
    train_cmd->add_option("--tokens", t_tokens, "token file")->required();
    train_cmd->add_option("--out", t_out, "output model artifact");

    auto* intervene = app.add_subcommand("intervene", "run a single-step MLM campaign");
    std::string i_scenes, i_model, i_profile, i_out = "records.jsonl";
    long i_n = -1;
    double i_tau = -1.0;
    intervene->add_option("--scenes", i_scenes, "scene JSONL")->required();
    intervene->add_option("--model", i_model, "density model artifact")->required();
    intervene->add_option("--profile", i_profile, "detector profile artifact")->required();
    intervene->add_option("--out", i_out, "output record JSONL");
    intervene->add_option("--n", i_n, "number of trials");
    intervene->add_option("--tau", i_tau, "sufficiency threshold");

    auto* random_cmd =
        app.add_subcommand("random-baseline", "matched uniform-random interventions");
    std::string r_records, r_scenes, r_profile, r_out = "random_records.jsonl";
    random_cmd->add_option("--records", r_records, "MLM record JSONL")->required();
    random_cmd->add_option("--scenes", r_scenes, "scene JSONL")->required();
    random_cmd->add_option("--profile", r_profile, "detector profile artifact")->required();
    random_cmd->add_option("--out", r_out, "output record JSONL");

    auto* twostep = app.add_subcommand("two-step", "two-step intervention campaign");
    std::string ts_scenes, ts_model, ts_profile, ts_out = "twostep.jsonl", ts_first;
    long ts_n = -1;
    twostep->add_option("--scenes", ts_scenes, "scene JSONL")->required();
    twostep->add_option("--model", ts_model, "density model artifact")->required();
    twostep->add_option("--profile", ts_profile, "detector profile artifact")->required();
    twostep->add_option("--out", ts_out, "output record JSONL");
    twostep->add_option("--n", ts_n, "number of trials");
    twostep->add_option("--first-set", ts_first,
                        "comma-separated group keys for the forced first edit");

    auto* aggregate_cmd = app.add_subcommand("aggregate", "rank intervention groups");
    std::string a_records, a_out = "groups.csv";
    double a_tau = -1.0;
    long a_min_count = -1;
    bool a_include_location = false;
    aggregate_cmd->add_option("--records", a_records, "record JSONL")->required();
    aggregate_cmd->add_option("--out", a_out, "output CSV (group,tier,percent,events,total)");
    aggregate_cmd->add_option("--tau", a_tau, "sufficiency threshold");
    aggregate_cmd->add_option("--min-count", a_min_count, "minimum occurrences per group");
    aggregate_cmd->add_flag("--include-location", a_include_location,
                            "aggregate location records too");

    auto* curate = app.add_subcommand("curate", "build a group-augmented dataset");
    std::string c_scenes, c_group, c_out = "group_scenes.jsonl";
    long c_count = 0;
    curate->add_option("--scenes", c_scenes, "source scene JSONL")->required();
    curate->add_option("--group", c_group, "group key, e.g. asset:bike.gazelle")->required();
    curate->add_option("--out", c_out, "output scene JSONL");
    curate->add_option("--count", c_count, "use only the first N source scenes");

    auto* fit_cmd = app.add_subcommand("fit-detector", "fit the detector oracle on scenes");
    std::vector<std::string> f_scenes;
    std::string f_out = "profile.json", f_manifest_out, f_weak;
    double f_capacity = 1.0;
    fit_cmd->add_option("--scenes", f_scenes, "scene JSONL (repeatable)")->required();
    fit_cmd->add_option("--out", f_out, "output profile artifact");
    fit_cmd->add_option("--manifest-out", f_manifest_out, "also write the training manifest");
    fit_cmd->add_option("--capacity", f_capacity, "capacity multiplier on the exposure weight");
    fit_cmd->add_option("--weak", f_weak, "comma-separated weakness-injected group keys");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate AP on a scene set");
    std::string ev_profile, ev_scenes, ev_out, ev_csv, ev_series;
    double ev_iou = 0.5, ev_x = 0.0;
    eval_cmd->add_option("--profile", ev_profile, "detector profile artifact")->required();
    eval_cmd->add_option("--scenes", ev_scenes, "evaluation scene JSONL")->required();
    eval_cmd->add_option("--out", ev_out, "output JSON result");
    eval_cmd->add_option("--iou", ev_iou, "IOU threshold");
    eval_cmd->add_option("--append-csv", ev_csv, "append a (series,x,ap) row to a curves CSV");
    eval_cmd->add_option("--series", ev_series, "series label for the curves CSV");
    eval_cmd->add_option("--x", ev_x, "x value for the curves CSV");

    auto* agnostic =
        app.add_subcommand("collect-agnostic", "cause-agnostic data collection baseline");
    std::string ag_pool, ag_profile, ag_out = "agnostic";
    agnostic->add_option("--pool", ag_pool, "pool scene JSONL")->required();
    agnostic->add_option("--profile", ag_profile, "detector profile artifact")->required();
    agnostic->add_option("--out-dir", ag_out, "output directory for bucket files");

    auto* report = app.add_subcommand("report", "tables, histograms, and curves");
    std::string rp_table, rp_groups, rp_out;
    std::string rp_density, rp_scenes, rp_records, rp_random, rp_out_csv, rp_out_svg;
    std::string rp_curves, rp_title = "AP curves", rp_xlabel = "added scenes";
    std::string rp_twostep;
    int rp_question = 1;
    long rp_min_count = 10;
    bool rp_deleterious = false;
    double rp_tau = 0.2;
    report->add_option("--table", rp_table, "table kind: interventions");
    report->add_option("--groups", rp_groups, "group aggregation CSV");
    report->add_option("--out", rp_out, "output text file (stdout when omitted)");
    report->add_option("--density", rp_density, "density attribute: rotation or cloudiness");
    report->add_option("--scenes", rp_scenes, "scene JSONL for the original series");
    report->add_option("--records", rp_records, "MLM record JSONL");
    report->add_option("--random", rp_random, "random-baseline record JSONL");
    report->add_option("--out-csv", rp_out_csv, "density CSV output");
    report->add_option("--out-svg", rp_out_svg, "SVG output");
    report->add_option("--curves", rp_curves, "curves CSV from eval --append-csv");
    report->add_option("--title", rp_title, "curve chart title");
    report->add_option("--x-label", rp_xlabel, "curve chart x label");
    report->add_option("--two-step", rp_twostep, "two-step record JSONL");
    report->add_option("--question", rp_question, "two-step question id (1, 2, 3)");
    report->add_option("--min-count", rp_min_count, "minimum pair occurrences to print");
    report->add_flag("--deleterious-only", rp_deleterious,
                     "density series restricted to delta <= -tau records");
    report->add_option("--tau", rp_tau, "threshold for --deleterious-only and table headers");

    auto* verify = app.add_subcommand("verify", "run built-in pipeline self-checks");

    try {
        std::vector<const char*> raw;
        raw.push_back("cst");
        for (const auto& s : argv) raw.push_back(s.c_str());
        app.parse(static_cast<int>(raw.size()), const_cast<char**>(raw.data()));
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        CliState state;
        if (!config_path.empty()) {
            json j;
            try {
                j = json::parse(read_text_file(config_path));
            } catch (const json::exception& e) {
                throw ConfigError(std::string("malformed config JSON: ") + e.what());
            }
            try {
                state.config = RunConfig::from_json(j);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("bad config value: ") + e.what());
            }
        }
        if (seed_set) state.config.seed = seed_override;

        // per-command overrides feed the effective config before hashing
        if (intervene->parsed()) {
            if (i_n >= 0) state.config.campaign.n = i_n;
            if (i_tau > 0) state.config.campaign.tau = i_tau;
        }
        state.config.campaign.seed = state.config.seed;
        if (twostep->parsed()) {
            if (ts_n >= 0) state.config.two_step.n = ts_n;
            if (!ts_first.empty()) state.config.two_step_first_set = parse_group_list(ts_first);
        }
        if (aggregate_cmd->parsed()) {
            if (a_tau > 0) state.config.campaign.tau = a_tau;
            if (a_min_count >= 0) state.config.aggregate.min_count = a_min_count;
            if (a_include_location) state.config.aggregate.include_location = true;
        }
        state.finalize();

        if (!dump_config_path.empty())
            write_text_file(dump_config_path, state.config.to_json().dump(2) + "\n");

        if (generate->parsed()) return cmd_generate(state, g_out, g_count);
        if (label->parsed()) return cmd_label(state, l_scenes, l_out);
        if (encode->parsed()) return cmd_encode(state, e_scenes, e_out);
        if (train_cmd->parsed()) return cmd_train_density(state, t_scenes, t_tokens, t_out);
        if (intervene->parsed()) return cmd_intervene(state, i_scenes, i_model, i_profile, i_out);
        if (random_cmd->parsed())
            return cmd_random_baseline(state, r_records, r_scenes, r_profile, r_out);
        if (twostep->parsed()) return cmd_two_step(state, ts_scenes, ts_model, ts_profile, ts_out);
        if (aggregate_cmd->parsed()) return cmd_aggregate(state, a_records, a_out);
        if (curate->parsed()) return cmd_curate(state, c_scenes, c_group, c_out, c_count);
        if (fit_cmd->parsed())
            return cmd_fit_detector(state, f_scenes, f_out, f_manifest_out, f_capacity, f_weak);
        if (eval_cmd->parsed())
            return cmd_eval(state, ev_profile, ev_scenes, ev_out, ev_iou, ev_csv, ev_series, ev_x);
        if (agnostic->parsed()) return cmd_collect_agnostic(state, ag_pool, ag_profile, ag_out);
        if (report->parsed()) {
            if (!rp_table.empty()) {
                if (rp_table != "interventions")
                    throw ConfigError("unknown table kind: " + rp_table);
                if (rp_groups.empty()) throw ConfigError("--table needs --groups");
                return cmd_report_table(state, rp_groups, rp_out, rp_tau);
            }
            if (!rp_density.empty()) {
                if (rp_scenes.empty() || rp_records.empty() || rp_out_csv.empty())
                    throw ConfigError("--density needs --scenes, --records, and --out-csv");
                return cmd_report_density(state, rp_density, rp_scenes, rp_records, rp_random,
                                          rp_out_csv, rp_out_svg, rp_deleterious, rp_tau);
            }
            if (!rp_curves.empty()) {
                if (rp_out_svg.empty()) throw ConfigError("--curves needs --out-svg");
                return cmd_report_curves(state, rp_curves, rp_out_svg, rp_title, rp_xlabel);
            }
            if (!rp_twostep.empty())
                return cmd_report_two_step(state, rp_twostep, rp_question, rp_out, rp_min_count);
            throw ConfigError("report needs one of --table, --density, --curves, --two-step");
        }
        if (verify->parsed()) return cmd_verify(state);
        throw ConfigError("no subcommand selected");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CodecError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace cst::cli
