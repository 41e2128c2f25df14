// Acceptance gate: one test case per shipped guarantee, each printing a
// single PASS/FAIL line. Run the binary directly to see all eight lines.
#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "ptmchain/cards.hpp"
#include "ptmchain/cli.hpp"
#include "ptmchain/license.hpp"
#include "ptmchain/mapper.hpp"
#include "ptmchain/scanner.hpp"
#include "ptmchain/signatures.hpp"
#include "ptmchain/stats.hpp"
#include "ptmchain/store.hpp"

using namespace ptmchain;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kCorpus = PTMCHAIN_FIXTURE_DIR "/corpus";
const char* kHubDump = PTMCHAIN_FIXTURE_DIR "/hub_dump";

sig::SignatureSet catalog() {
    return sig::SignatureSet::load(PTMCHAIN_DATA_DIR "/signatures.json");
}

void expect(std::vector<std::string>& problems, bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
}

void verdict(int index, const std::string& name,
             const std::vector<std::string>& problems) {
    std::cout << "[" << index << "/8] " << name << ": "
              << (problems.empty() ? "PASS" : "FAIL") << std::endl;
    for (const auto& p : problems) {
        std::cout << "        problem: " << p << std::endl;
        UNSCOPED_INFO(p);
    }
    REQUIRE(problems.empty());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char* tag) {
        path = fs::temp_directory_path() /
               (std::string("accept-") + tag + "-" +
                std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

using RecordKey =
    std::tuple<std::string, std::string, int, std::string, std::optional<std::string>>;

std::set<RecordKey> record_set(const scan::CorpusScan& scan) {
    std::set<RecordKey> out;
    for (const auto& repo : scan.repos) {
        for (const auto& r : repo.records) {
            out.insert({repo.repo, r.file, r.line, r.signature_id, r.model_name});
        }
    }
    return out;
}

std::set<RecordKey> label_set() {
    std::ifstream in(PTMCHAIN_FIXTURE_DIR "/corpus_labels.json");
    REQUIRE(in.good());
    json doc = json::parse(in);
    std::set<RecordKey> out;
    for (auto it = doc["repos"].begin(); it != doc["repos"].end(); ++it) {
        for (const auto& rec : it.value()["records"]) {
            std::optional<std::string> model;
            if (!rec["model"].is_null()) model = rec["model"].get<std::string>();
            out.insert({it.key(), rec["file"].get<std::string>(),
                        rec["line"].get<int>(), rec["signature_id"].get<std::string>(),
                        model});
        }
    }
    return out;
}

// Copies the corpus and appends, to every Python file, comment lines and
// string literals that contain every anchor of every cataloged signature.
void mutate_corpus(const fs::path& dst, const sig::SignatureSet& signatures) {
    fs::copy(kCorpus, dst, fs::copy_options::recursive);
    for (const auto& entry : fs::recursive_directory_iterator(dst)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".py") continue;
        std::ofstream out(entry.path(), std::ios::binary | std::ios::app);
        out << "\n# --- inert lines: anchors in comments and strings only ---\n";
        int n = 0;
        for (const auto& s : signatures.all()) {
            std::string anchors;
            for (const auto& a : sig::anchors_for(s)) {
                anchors += a;
                anchors += " ";
            }
            out << "# " << anchors << "\n";
            out << "# model = " << s.full_callee() << "(\"bait-model\")\n";
            out << "_inert_" << n++ << " = \"" << anchors << "bait\"\n";
        }
    }
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<json> read_jsonl(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::vector<json> rows;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) rows.push_back(json::parse(line));
    }
    return rows;
}

int run_cli(std::vector<std::string> args, std::vector<std::string>& problems,
            std::string* stdout_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(args, out, err);
    if (code != 0) {
        std::string joined;
        for (const auto& a : args) joined += a + " ";
        problems.push_back("command '" + joined + "' exited " + std::to_string(code) +
                           ": " + err.str());
    }
    if (stdout_text) *stdout_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("criterion 1: scanner ground truth") {
    std::vector<std::string> problems;
    auto signatures = catalog();

    auto start = std::chrono::steady_clock::now();
    scan::CorpusScan scanned = scan::scan_corpus(kCorpus, signatures);  // jobs = 1
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::set<RecordKey> got = record_set(scanned);
    std::set<RecordKey> want = label_set();
    std::size_t tp = 0;
    for (const auto& k : got) tp += want.count(k);
    double precision = got.empty() ? 0.0 : double(tp) / double(got.size());
    double recall = want.empty() ? 0.0 : double(tp) / double(want.size());

    expect(problems, !want.empty(), "label fixture is empty");
    expect(problems, precision == 1.0,
           "precision " + std::to_string(precision) + " != 1.0");
    expect(problems, recall == 1.0, "recall " + std::to_string(recall) + " != 1.0");
    expect(problems, seconds < 10.0,
           "single-threaded scan took " + std::to_string(seconds) + "s (limit 10s)");

    std::set<std::string> libraries;
    for (const auto& k : want) {
        if (const sig::Signature* s = signatures.by_id(std::get<3>(k))) {
            libraries.insert(s->library);
        }
    }
    expect(problems, libraries.size() >= 6,
           "labels cover only " + std::to_string(libraries.size()) + " libraries");

    verdict(1, "scanner precision and recall 1.0 on the labeled corpus, under 10s",
            problems);
}

TEST_CASE("criterion 2: anchors in comments and strings never produce records") {
    std::vector<std::string> problems;
    auto signatures = catalog();

    TempDir tmp("mutate");
    fs::path mutated = tmp.path / "corpus";
    mutate_corpus(mutated, signatures);

    std::set<RecordKey> baseline = record_set(scan::scan_corpus(kCorpus, signatures));
    std::set<RecordKey> after = record_set(scan::scan_corpus(mutated, signatures));

    expect(problems, baseline == after,
           "record set changed after the mutation (" + std::to_string(baseline.size()) +
               " before, " + std::to_string(after.size()) + " after)");

    // sanity: the mutation really bites; a file with no anchors before now
    // reaches the analyzer and still yields nothing
    std::string util = read_bytes(mutated / "leo__playground" / "util.py");
    expect(problems, scan::passes_prefilter(util, signatures),
           "mutated util.py should pass the pre-filter");

    verdict(2, "comment- and string-embedded anchors yield zero usage records",
            problems);
}

TEST_CASE("criterion 3: the pre-filter never changes the outcome") {
    std::vector<std::string> problems;
    auto signatures = catalog();

    TempDir tmp("funnel");
    fs::path mutated = tmp.path / "corpus";
    mutate_corpus(mutated, signatures);

    for (const auto& [name, root] :
         std::vector<std::pair<std::string, fs::path>>{{"shipped", kCorpus},
                                                       {"mutated", mutated}}) {
        scan::ScanConfig with;
        scan::ScanConfig without;
        without.prefilter = false;
        auto on = record_set(scan::scan_corpus(root, signatures, with));
        auto off = record_set(scan::scan_corpus(root, signatures, without));
        expect(problems, on == off,
               name + " corpus: records differ with the pre-filter off");
    }

    verdict(3, "disabling the pre-filter leaves the record set unchanged", problems);
}

TEST_CASE("criterion 4: mapping fixture counts") {
    std::vector<std::string> problems;
    store::Store db = store::Store::open_memory();

    auto ptm = [&](const std::string& name) {
        PtmPackage p;
        p.registry = Registry::HuggingFace;
        p.name = name;
        return db.put_ptm(p);
    };
    auto repo = [&](const std::string& full) {
        Repository r;
        r.full_name = full;
        return db.put_repo(r);
    };
    auto usage = [&](std::int64_t repo_id, int line, std::optional<std::string> model) {
        UsageRecord u;
        u.repo_id = repo_id;
        u.file = "main.py";
        u.line = line;
        u.signature_id = "transformers.AutoModel.from_pretrained";
        u.library = "transformers";
        u.model_name = std::move(model);
        db.add_usage_records({u});
    };

    std::int64_t shared = ptm("org/shared-model");
    std::int64_t second = ptm("org/second-model");
    std::int64_t third = ptm("org/third-model");
    std::int64_t r1 = repo("app/one");
    std::int64_t r2 = repo("app/two");
    std::int64_t r3 = repo("app/three");

    usage(r1, 1, "org/shared-model");
    usage(r2, 1, "org/shared-model");
    usage(r3, 1, "org/second-model");
    usage(r3, 2, "org/third-model");
    usage(r1, 9, std::nullopt);  // dynamic
    usage(r3, 9, std::nullopt);  // dynamic

    mapping::MapStats stats = mapping::map_dependencies(db);
    expect(problems, stats.links == 4,
           "links " + std::to_string(stats.links) + " != 4");
    expect(problems, stats.distinct_repos == 3,
           "distinct repos " + std::to_string(stats.distinct_repos) + " != 3");
    expect(problems, stats.distinct_ptms == 3,
           "distinct ptms " + std::to_string(stats.distinct_ptms) + " != 3");
    expect(problems, stats.dynamic_usages == 2,
           "dynamic usages " + std::to_string(stats.dynamic_usages) + " != 2");

    std::set<std::int64_t> seen_ptms;
    for (const auto& l : db.all_links()) seen_ptms.insert(l.ptm_id);
    expect(problems, seen_ptms == std::set<std::int64_t>{shared, second, third},
           "stored links do not target exactly the three packages");

    // dynamic records alone never link
    store::Store only_dynamic = store::Store::open_memory();
    PtmPackage p;
    p.registry = Registry::HuggingFace;
    p.name = "org/shared-model";
    only_dynamic.put_ptm(p);
    Repository r;
    r.full_name = "app/dyn";
    std::int64_t rd = only_dynamic.put_repo(r);
    UsageRecord u;
    u.repo_id = rd;
    u.file = "main.py";
    u.line = 1;
    u.signature_id = "transformers.AutoModel.from_pretrained";
    u.library = "transformers";
    only_dynamic.add_usage_records({u});
    mapping::MapStats dyn = mapping::map_dependencies(only_dynamic);
    expect(problems, dyn.links == 0 && only_dynamic.all_links().empty(),
           "a dynamic record produced a link");

    verdict(4, "mapping yields 4 links, 3 repos, 3 packages; dynamic maps to none",
            problems);
}

TEST_CASE("criterion 5: license matrix properties and the 8-link flow fixture") {
    std::vector<std::string> problems;
    auto classifier =
        license::Classifier::load(PTMCHAIN_DATA_DIR "/licenses/classes.json");
    auto matrix = license::Matrix::load(PTMCHAIN_DATA_DIR "/licenses/matrix.json");

    // totality: every category pairing gets a reasoned verdict
    const std::vector<std::optional<std::string>> spread = {
        std::optional<std::string>("mit"),
        std::optional<std::string>("mpl-2.0"),
        std::optional<std::string>("gpl-3.0-only"),
        std::optional<std::string>("cc0-1.0"),
        std::optional<std::string>("openrail"),
        std::optional<std::string>("homegrown eula"),
        std::optional<std::string>("mit or apache-2.0"),
        std::nullopt,
    };
    for (const auto& up : spread) {
        for (const auto& down : spread) {
            auto r = matrix.check(classifier.classify(up), classifier.classify(down));
            if (r.reason.empty()) {
                problems.push_back("empty reason for a pair");
            }
        }
    }

    // enumerate the shipped analyzable tokens
    json classes = json::parse(read_bytes(PTMCHAIN_DATA_DIR "/licenses/classes.json"));
    std::vector<std::string> analyzable;
    std::vector<std::string> strong;
    std::vector<std::string> permissive;
    for (auto it = classes["tokens"].begin(); it != classes["tokens"].end(); ++it) {
        std::string category = it.value().get<std::string>();
        if (category == "other" || category == "no-license" || category == "multiple") {
            continue;
        }
        analyzable.push_back(it.key());
        if (category == "strong-copyleft") strong.push_back(it.key());
        if (category == "permissive") permissive.push_back(it.key());
    }
    expect(problems, analyzable.size() >= 12, "class table lost its tokens");

    for (const auto& t : analyzable) {
        auto self = matrix.check(classifier.classify(t), classifier.classify(t));
        expect(problems, self.verdict == license::Verdict::Compatible,
               "identity pair not compatible: " + t);
    }
    for (const auto& up : strong) {
        for (const auto& down : permissive) {
            auto r = matrix.check(classifier.classify(up), classifier.classify(down));
            expect(problems, r.verdict == license::Verdict::Incompatible,
                   up + " -> " + down + " should be incompatible");
        }
    }
    for (const auto& up : analyzable) {
        auto r = matrix.check(classifier.classify(up), classifier.classify(std::nullopt));
        expect(problems, r.verdict == license::Verdict::Unanalyzed,
               up + " -> no-license should stay unanalyzed");
    }

    // the 8-link flow fixture: 2 identical MIT, 1 GPL->MIT, 4 X->no-license,
    // 1 Apache->GPL
    store::Store db = store::Store::open_memory();
    auto ptm = [&](const std::string& name, const std::string& lic) {
        PtmPackage p;
        p.registry = Registry::HuggingFace;
        p.name = name;
        p.license_raw = lic;
        return db.put_ptm(p);
    };
    auto repo = [&](const std::string& full, std::optional<std::string> lic) {
        Repository r;
        r.full_name = full;
        r.license_raw = std::move(lic);
        return db.put_repo(r);
    };
    std::int64_t mit_ptm = ptm("m/mit-model", "mit");
    std::int64_t gpl_ptm = ptm("m/gpl-model", "gpl-3.0-only");
    std::int64_t apache_ptm = ptm("m/apache-model", "apache-2.0");
    std::int64_t bsd_ptm = ptm("m/bsd-model", "bsd-3-clause");

    std::vector<std::int64_t> link_ptms = {mit_ptm,    mit_ptm, gpl_ptm, apache_ptm,
                                           apache_ptm, gpl_ptm, mit_ptm, bsd_ptm};
    std::vector<std::optional<std::string>> repo_lics = {
        "mit", "mit", "mit", "gpl-3.0-only",
        std::nullopt, std::nullopt, std::nullopt, std::nullopt};
    std::vector<PtmAppLink> links;
    for (size_t i = 0; i < link_ptms.size(); ++i) {
        std::int64_t rid = repo("app/r" + std::to_string(i), repo_lics[i]);
        UsageRecord u;
        u.repo_id = rid;
        u.file = "main.py";
        u.line = 1;
        u.signature_id = "transformers.pipeline";
        u.library = "transformers";
        u.model_name = "x";
        db.add_usage_records({u});
        PtmAppLink l;
        l.repo_id = rid;
        l.ptm_id = link_ptms[i];
        l.evidence = {db.all_usage().back().id};
        links.push_back(l);
    }
    db.replace_links(links);

    license::FlowReport report = license::license_flows(db, classifier, matrix);
    expect(problems, report.total_links == 8,
           "total links " + std::to_string(report.total_links) + " != 8");
    expect(problems, report.identical_pct == 25.0,
           "identical " + std::to_string(report.identical_pct) + " != 25.0");
    expect(problems, report.incompatible_pct == 12.5,
           "incompatible " + std::to_string(report.incompatible_pct) + " != 12.5");
    expect(problems, report.unanalyzed_pct == 50.0,
           "unanalyzed " + std::to_string(report.unanalyzed_pct) + " != 50.0");
    int conserved = 0;
    for (const auto& row : report.rows) conserved += row.count;
    expect(problems, conserved == report.total_links,
           "flow rows do not conserve the link count");

    verdict(5, "license matrix is total with exact flow percentages", problems);
}

namespace {

std::string random_card(std::mt19937& rng) {
    std::uniform_int_distribution<int> block_count(1, 16);
    std::uniform_int_distribution<int> kind(0, 11);
    std::uniform_int_distribution<int> words(1, 80);
    std::uniform_int_distribution<int> level(1, 4);
    std::uniform_int_distribution<int> pick(0, 13);
    static const char* kWords[] = {"model",   "training", "data",     "license",
                                   "weights", "tokens",   "epochs",   "accuracy",
                                   "usage",   "card",     "datasets", "language",
                                   "bias",    "hardware"};
    auto sentence = [&](int n) {
        std::string s;
        for (int i = 0; i < n; ++i) {
            if (i) s += ' ';
            s += kWords[pick(rng)];
        }
        return s;
    };
    std::string doc;
    int blocks = block_count(rng);
    for (int b = 0; b < blocks; ++b) {
        switch (kind(rng)) {
            case 0:
            case 1:
                doc += std::string(static_cast<size_t>(level(rng)), '#') + " " +
                       sentence(4) + "\n";
                break;
            case 2:
                doc += "```\n# fenced\n" + sentence(12) + "\n```\n";
                break;
            case 3:
                doc += "\n";
                break;
            case 4:
                doc += sentence(500) + "\n";
                break;
            case 5:
                doc += "license: mit\n\n";
                break;
            default:
                doc += sentence(words(rng)) + "\n\n";
                break;
        }
    }
    return doc;
}

}  // namespace

TEST_CASE("criterion 6: extraction chunking, budgets and mock accuracy") {
    std::vector<std::string> problems;
    card::Schema schema = card::Schema::load(PTMCHAIN_DATA_DIR "/metadata_schema.json");
    card::ExtractOptions options;
    options.prompt_template = read_bytes(PTMCHAIN_DATA_DIR "/prompts/extract.txt");
    expect(problems, options.cheap_budget == 4096, "cheap budget default moved");
    expect(problems, options.accurate_budget == 128000, "accurate budget default moved");

    std::mt19937 rng(991199);
    int lossless_failures = 0;
    int cap_failures = 0;
    int budget_failures = 0;
    int nonempty_failures = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string doc = random_card(rng);
        auto chunks = card::split_markdown(doc, options.max_chunk_words);
        std::string glued;
        for (const auto& c : chunks) {
            glued += c.text_of(doc);
            std::istringstream ws(c.text_of(doc));
            std::size_t n = 0;
            for (std::string w; ws >> w;) ++n;
            if (n > options.max_chunk_words) ++cap_failures;
        }
        if (glued != doc) ++lossless_failures;

        card::MockClient mock(card::MockClient::Fallback::EmptyObject);
        card::ExtractionResult result =
            card::extract_cheap(doc, schema, mock, options);
        for (const auto& req : mock.requests()) {
            if (card::token_estimate(req.prompt) > options.cheap_budget) {
                ++budget_failures;
            }
        }
        for (const auto& f : schema.fields()) {
            if (card::field_has_value(result.payload[f.name])) ++nonempty_failures;
        }
    }
    expect(problems, lossless_failures == 0,
           std::to_string(lossless_failures) + " of 1000 cards re-chunked lossily");
    expect(problems, cap_failures == 0,
           std::to_string(cap_failures) + " chunks over the word cap");
    expect(problems, budget_failures == 0,
           std::to_string(budget_failures) + " requests over the 4096-token budget");
    expect(problems, nonempty_failures == 0,
           "an empty-object mock produced non-empty fields");

    // scripted five-card fixture: 4 labeled fields per card, one wrong answer
    // on each of the first four cards: 16 of 20 agree
    std::vector<std::pair<json, json>> pairs;
    for (int k = 0; k < 5; ++k) {
        std::string marker = "CARD-MARK-" + std::to_string(k);
        std::string doc = "# Model " + std::to_string(k) + "\n" + marker +
                          "\nlicense and details follow\n";
        json gold = json::object();
        gold["license"] = "mit";
        gold["domain"] = "nlp";
        gold["task"] = "text-classification";
        gold["parameter_count"] = 1000 + k;

        json answer = gold;
        if (k == 0) answer["license"] = "apache-2.0";
        if (k == 1) answer["domain"] = "audio";
        if (k == 2) answer["task"] = "translation";
        if (k == 3) answer["parameter_count"] = 7;

        card::MockClient mock(card::MockClient::Fallback::EmptyObject);
        mock.script(marker, answer.dump());
        card::ExtractionResult result =
            card::extract_accurate(doc, schema, mock, options);
        expect(problems, result.mode == "accurate",
               "card " + std::to_string(k) + " did not take the single-request path");
        pairs.emplace_back(result.payload, gold);
    }
    card::AccuracyReport pooled = card::evaluate_sample(pairs, schema);
    expect(problems, pooled.compared == 20,
           "compared " + std::to_string(pooled.compared) + " != 20");
    expect(problems, pooled.accuracy == 0.8,
           "pooled accuracy " + std::to_string(pooled.accuracy) + " != 0.8");

    // the 8-of-10 single-card fixture
    json gold = json::object();
    json extracted = json::object();
    const char* same[] = {"libraries", "domain", "task", "license",
                          "datasets",  "languages", "hardware", "demo"};
    for (const char* f : same) {
        if (schema.field(f)->type == card::FieldType::StringList) {
            gold[f] = json::array({"shared"});
            extracted[f] = json::array({"shared"});
        } else {
            gold[f] = "shared";
            extracted[f] = "shared";
        }
    }
    gold["framework"] = "tensorflow";
    extracted["framework"] = "pytorch";
    gold["parameter_count"] = 42;
    extracted["parameter_count"] = 43;
    card::AccuracyReport ten = card::evaluate_accuracy(extracted, gold, schema);
    expect(problems, ten.compared == 10 && ten.matched == 8 && ten.accuracy == 0.8,
           "8-of-10 fixture scored " + std::to_string(ten.accuracy));

    verdict(6, "extraction is lossless, budget-safe and scores mocks exactly",
            problems);
}

namespace {

struct OracleRatio {
    std::string key;
    int count = 0;
    double ratio = 0.0;
};

std::vector<OracleRatio> oracle_ratios(const std::map<std::string, int>& counts) {
    int total = 0;
    for (const auto& [k, n] : counts) total += n;
    std::vector<OracleRatio> rows;
    for (const auto& [k, n] : counts) {
        rows.push_back({k, n, double(n) / double(total)});
    }
    std::sort(rows.begin(), rows.end(), [](const OracleRatio& a, const OracleRatio& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.key < b.key;
    });
    return rows;
}

std::string oracle_trim_lower(std::string s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    size_t e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    s = s.substr(b, e - b + 1);
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool oracle_filled(const json& v) {
    if (v.is_null()) return false;
    if (v.is_string()) return !oracle_trim_lower(v.get<std::string>()).empty();
    if (v.is_array() || v.is_object()) return !v.empty();
    return v.is_number() || v.is_boolean();
}

}  // namespace

TEST_CASE("criterion 7: statistics agree with a brute-force recomputation") {
    std::vector<std::string> problems;
    card::Schema schema = card::Schema::load(PTMCHAIN_DATA_DIR "/metadata_schema.json");
    stats::DomainMap map = stats::DomainMap::load(PTMCHAIN_DATA_DIR "/domains.json");

    // 50 randomized packages with messy timestamps, tags and payloads
    store::Store db = store::Store::open_memory();
    std::mt19937 rng(50505);
    std::uniform_int_distribution<int> d10(0, 9);
    std::uniform_int_distribution<int> year(2019, 2023);
    std::uniform_int_distribution<int> month(1, 12);
    std::uniform_int_distribution<int> tag_count(0, 2);
    std::uniform_int_distribution<int> tag_pick(0, 6);
    std::uniform_int_distribution<std::int64_t> params(1000, 2000000000);
    static const char* kTags[] = {
        "fill-mask",      "image-classification", "text-generation",
        "summarization",  "audio-classification", "weird-tag",
        "another-mystery"};

    std::vector<std::int64_t> ptm_ids;
    for (int i = 0; i < 50; ++i) {
        PtmPackage p;
        p.registry = i % 7 == 0 ? Registry::PyTorchHub : Registry::HuggingFace;
        p.name = "pkg-" + std::to_string(i);
        int t = d10(rng);
        if (t < 6) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%04d-%02d-15T00:00:00Z", year(rng),
                          month(rng));
            p.created_at = buf;
        } else if (t == 6) {
            p.created_at = std::nullopt;
        } else if (t == 7) {
            p.created_at = "not a date";
        } else if (t == 8) {
            p.created_at = "2023-13-01T00:00:00Z";
        } else {
            p.created_at = "202";
        }
        int tags = tag_count(rng);
        for (int k = 0; k < tags; ++k) p.tags.push_back(kTags[tag_pick(rng)]);
        std::int64_t id = db.put_ptm(p);
        ptm_ids.push_back(id);

        if (i % 3 != 0) {
            json payload = json::object();
            switch (d10(rng) % 4) {
                case 0: payload["domain"] = "NLP"; break;
                case 1: payload["domain"] = "custom vision"; break;
                case 2: payload["domain"] = ""; break;
                default: break;
            }
            switch (d10(rng) % 5) {
                case 0: payload["parameter_count"] = params(rng); break;
                case 1:
                    payload["parameter_count"] = std::to_string(params(rng));
                    break;
                case 2: payload["parameter_count"] = "12x7"; break;
                case 3: payload["parameter_count"] = nullptr; break;
                default: break;
            }
            if (d10(rng) < 5) payload["license"] = "mit";
            if (d10(rng) < 3) payload["libraries"] = json::array({"transformers"});
            db.put_metadata(id, payload.dump(), "cheap", "2024-01-01T00:00:00Z");
        }
    }

    std::vector<std::int64_t> repo_ids;
    for (int i = 0; i < 20; ++i) {
        Repository r;
        r.full_name = "app/r" + std::to_string(i);
        repo_ids.push_back(db.put_repo(r));
    }
    std::uniform_int_distribution<size_t> rpick(0, repo_ids.size() - 1);
    std::uniform_int_distribution<size_t> ppick(0, ptm_ids.size() - 1);
    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    std::vector<PtmAppLink> links;
    int line = 1;
    while (links.size() < 40) {
        std::int64_t rid = repo_ids[rpick(rng)];
        std::int64_t pid = ptm_ids[ppick(rng)];
        if (!pairs.insert({rid, pid}).second) continue;
        UsageRecord u;
        u.repo_id = rid;
        u.file = "main.py";
        u.line = line++;
        u.signature_id = "transformers.pipeline";
        u.library = "transformers";
        u.model_name = "x";
        db.add_usage_records({u});
        PtmAppLink l;
        l.repo_id = rid;
        l.ptm_id = pid;
        l.evidence = {db.all_usage().back().id};
        links.push_back(l);
    }
    db.replace_links(links);

    // export, then recompute everything from the exported rows alone
    TempDir tmp("stats");
    store::export_jsonl(db, tmp.path);
    std::vector<json> ptm_rows = read_jsonl(tmp.path / "ptm_package.jsonl");
    std::vector<json> meta_rows = read_jsonl(tmp.path / "extracted_metadata.jsonl");
    std::vector<json> link_rows = read_jsonl(tmp.path / "ptm_app_link.jsonl");
    json tag_map = json::parse(read_bytes(PTMCHAIN_DATA_DIR "/domains.json"))["tags"];

    std::map<std::int64_t, json> payload_of;
    for (const auto& row : meta_rows) {
        payload_of[row["ptm_id"].get<std::int64_t>()] = row["payload"];
    }
    auto oracle_domain = [&](const json& ptm_row) {
        auto it = payload_of.find(ptm_row["id"].get<std::int64_t>());
        if (it != payload_of.end() && it->second.contains("domain") &&
            it->second["domain"].is_string()) {
            std::string d = oracle_trim_lower(it->second["domain"].get<std::string>());
            if (!d.empty()) return d;
        }
        for (const auto& tag : ptm_row["tags"]) {
            std::string key = oracle_trim_lower(tag.get<std::string>());
            if (tag_map.contains(key)) return tag_map[key].get<std::string>();
        }
        return std::string("other");
    };

    // package-domain shares
    std::map<std::string, int> domain_counts;
    std::map<std::int64_t, std::string> domain_by_id;
    for (const auto& row : ptm_rows) {
        std::string d = oracle_domain(row);
        domain_by_id[row["id"].get<std::int64_t>()] = d;
        ++domain_counts[d];
    }
    auto want_domains = oracle_ratios(domain_counts);
    auto got_domains = stats::domain_ratios(db, map);
    expect(problems, got_domains.size() == want_domains.size(),
           "domain row count mismatch");
    for (size_t i = 0; i < want_domains.size() && i < got_domains.size(); ++i) {
        expect(problems, got_domains[i].key == want_domains[i].key,
               "domain order differs at row " + std::to_string(i));
        expect(problems, got_domains[i].count == want_domains[i].count,
               "domain count differs for " + want_domains[i].key);
        expect(problems,
               std::fabs(got_domains[i].ratio - want_domains[i].ratio) <= 1e-9,
               "domain ratio differs for " + want_domains[i].key);
    }

    // link-weighted shares
    std::map<std::string, int> down_counts;
    for (const auto& row : link_rows) {
        ++down_counts[domain_by_id[row["ptm_id"].get<std::int64_t>()]];
    }
    auto want_down = oracle_ratios(down_counts);
    auto got_down = stats::downstream_domain_ratios(db, map);
    expect(problems, got_down.size() == want_down.size(),
           "downstream row count mismatch");
    for (size_t i = 0; i < want_down.size() && i < got_down.size(); ++i) {
        expect(problems,
               got_down[i].key == want_down[i].key &&
                   got_down[i].count == want_down[i].count &&
                   std::fabs(got_down[i].ratio - want_down[i].ratio) <= 1e-9,
               "downstream row differs at " + std::to_string(i));
    }

    // monthly timeline
    std::map<int, int> month_counts;
    for (const auto& row : ptm_rows) {
        if (!row["created_at"].is_string()) continue;
        std::string s = row["created_at"].get<std::string>();
        if (s.size() < 7 || s[4] != '-') continue;
        bool digits = true;
        for (int idx : {0, 1, 2, 3, 5, 6}) {
            if (!std::isdigit(static_cast<unsigned char>(s[static_cast<size_t>(idx)]))) {
                digits = false;
            }
        }
        if (!digits) continue;
        int y = std::stoi(s.substr(0, 4));
        int m = std::stoi(s.substr(5, 2));
        if (m < 1 || m > 12) continue;
        ++month_counts[y * 12 + (m - 1)];
    }
    std::vector<std::pair<std::string, int>> want_timeline;
    if (!month_counts.empty()) {
        for (int i = month_counts.begin()->first; i <= month_counts.rbegin()->first;
             ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%04d-%02d", i / 12, i % 12 + 1);
            auto it = month_counts.find(i);
            want_timeline.emplace_back(buf, it == month_counts.end() ? 0 : it->second);
        }
    }
    auto got_timeline = stats::monthly_timeline(db);
    expect(problems, got_timeline.size() == want_timeline.size(),
           "timeline length mismatch");
    for (size_t i = 0; i < want_timeline.size() && i < got_timeline.size(); ++i) {
        expect(problems,
               got_timeline[i].month == want_timeline[i].first &&
                   got_timeline[i].count == want_timeline[i].second,
               "timeline differs at " + want_timeline[i].first);
    }

    // parameter-count median
    std::vector<double> counts;
    for (const auto& [pid, payload] : payload_of) {
        if (!payload.contains("parameter_count")) continue;
        const json& v = payload["parameter_count"];
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
            counts.push_back(double(v.get<std::int64_t>()));
        } else if (v.is_string()) {
            std::string s = v.get<std::string>();
            if (!s.empty() &&
                s.find_first_not_of("0123456789") == std::string::npos) {
                counts.push_back(std::stod(s));
            }
        }
    }
    std::sort(counts.begin(), counts.end());
    double want_median = 0.0;
    if (!counts.empty()) {
        size_t mid = counts.size() / 2;
        want_median = counts.size() % 2 == 1
                          ? counts[mid]
                          : (counts[mid - 1] + counts[mid]) / 2.0;
    }
    stats::ParamStats got_params = stats::parameter_count_median(db);
    expect(problems, got_params.counted == int(counts.size()),
           "median sample size differs");
    expect(problems, std::fabs(got_params.median - want_median) <= 1e-9,
           "median differs");

    // field availability
    auto got_avail = stats::field_availability(db, schema);
    expect(problems, got_avail.size() == schema.fields().size(),
           "availability row count mismatch");
    for (const auto& row : got_avail) {
        int filled = 0;
        for (const auto& [pid, payload] : payload_of) {
            if (payload.contains(row.field) && oracle_filled(payload[row.field])) {
                ++filled;
            }
        }
        expect(problems, row.filled == filled && row.total == int(payload_of.size()),
               "availability differs for " + row.field);
        double want_ratio =
            payload_of.empty() ? 0.0 : double(filled) / double(payload_of.size());
        expect(problems, std::fabs(row.ratio - want_ratio) <= 1e-9,
               "availability ratio differs for " + row.field);
    }

    verdict(7, "statistics equal the brute-force recomputation from exported rows",
            problems);
}

TEST_CASE("criterion 8: ingest, export and re-ingest is a byte-stable fixed point") {
    std::vector<std::string> problems;
    TempDir tmp("roundtrip");
    std::string db_a = (tmp.path / "a.db").string();
    std::string db_b = (tmp.path / "b.db").string();
    std::string ex1 = (tmp.path / "ex1").string();
    std::string ex2 = (tmp.path / "ex2").string();
    std::string ex3 = (tmp.path / "ex3").string();

    // populate A through the real pipeline
    run_cli({"--db", db_a, "ingest", "--from", kHubDump}, problems);
    run_cli({"--db", db_a, "scan", "--corpus", kCorpus}, problems);
    run_cli({"--db", db_a, "map"}, problems);
    run_cli({"--db", db_a, "extract"}, problems);
    run_cli({"--db", db_a, "export", "--to", ex1}, problems);

    // a fresh database fed from the export reproduces it byte for byte
    run_cli({"--db", db_b, "ingest", "--from", ex1}, problems);
    run_cli({"--db", db_b, "export", "--to", ex2}, problems);

    // feeding the export back into its own source is a no-op
    run_cli({"--db", db_a, "ingest", "--from", ex1}, problems);
    run_cli({"--db", db_a, "export", "--to", ex3}, problems);

    const char* kFiles[] = {"ptm_package.jsonl",    "repository.jsonl",
                            "usage_record.jsonl",   "ptm_app_link.jsonl",
                            "ptm_ptm_link.jsonl",   "unmatched_name.jsonl",
                            "extracted_metadata.jsonl", "repo_scan_result.jsonl"};
    for (const char* f : kFiles) {
        std::string first = read_bytes(fs::path(ex1) / f);
        expect(problems, !first.empty() || std::string(f) == "ptm_ptm_link.jsonl",
               std::string(f) + " exported empty");
        expect(problems, first == read_bytes(fs::path(ex2) / f),
               std::string(f) + " differs after a fresh-database round trip");
        expect(problems, first == read_bytes(fs::path(ex3) / f),
               std::string(f) + " differs after re-ingesting into the source");
    }

    verdict(8, "export, ingest and re-export reproduce identical bytes", problems);
}
