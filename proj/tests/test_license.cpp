#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "ptmchain/license.hpp"

using namespace ptmchain;
using namespace ptmchain::license;

namespace {

std::filesystem::path data_dir() { return PTMCHAIN_DATA_DIR; }

Classifier shipped_classifier() { return Classifier::load(data_dir() / "licenses/classes.json"); }
Matrix shipped_matrix() { return Matrix::load(data_dir() / "licenses/matrix.json"); }

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("lic-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_CASE("raw strings classify to canonical tokens") {
    Classifier c = shipped_classifier();

    CHECK(c.classify(std::nullopt).category == Category::NoLicense);
    CHECK(c.classify("").category == Category::NoLicense);
    CHECK(c.classify("   ").category == Category::NoLicense);

    Class mit = c.classify("MIT");
    CHECK(mit.token == "mit");
    CHECK(mit.category == Category::Permissive);

    Class apache = c.classify("Apache License 2.0");
    CHECK(apache.token == "apache-2.0");
    CHECK(apache.category == Category::Permissive);

    Class gpl = c.classify("gpl-3.0");
    CHECK(gpl.token == "gpl-3.0-only");
    CHECK(gpl.category == Category::StrongCopyleft);

    CHECK(c.classify("lgpl-3.0").category == Category::WeakCopyleft);
    CHECK(c.classify("CC0 1.0").category == Category::PublicDomain);
    CHECK(c.classify("openrail").category == Category::Rail);

    Class multi = c.classify("mit or apache-2.0");
    CHECK(multi.category == Category::Multiple);
    Class multi2 = c.classify("GPL-2.0 AND MIT");
    CHECK(multi2.category == Category::Multiple);

    Class odd = c.classify("  My Custom EULA ");
    CHECK(odd.category == Category::Other);
    CHECK(odd.token == "my custom eula");
}

TEST_CASE("pair checks follow direction and overrides") {
    Classifier c = shipped_classifier();
    Matrix m = shipped_matrix();

    // permissive upstream flows into copyleft downstream
    auto r1 = m.check(c.classify("apache-2.0"), c.classify("gpl-3.0-only"));
    CHECK(r1.verdict == Verdict::Compatible);

    // copyleft upstream cannot relicense into permissive downstream
    auto r2 = m.check(c.classify("gpl-3.0-only"), c.classify("mit"));
    CHECK(r2.verdict == Verdict::Incompatible);

    // identical tokens are compatible with the fixed reason string
    auto r3 = m.check(c.classify("gpl-3.0-only"), c.classify("gpl-3.0-only"));
    CHECK(r3.verdict == Verdict::Compatible);
    CHECK(r3.reason == "identical license");

    // the GPL-2.0/GPL-3.0 conflict overrides the category default
    auto r4 = m.check(c.classify("gpl-2.0-only"), c.classify("gpl-3.0-only"));
    CHECK(r4.verdict == Verdict::Incompatible);
    auto r5 = m.check(c.classify("gpl-3.0-only"), c.classify("gpl-2.0-only"));
    CHECK(r5.verdict == Verdict::Incompatible);

    // strong copyleft may move to AGPL
    auto r6 = m.check(c.classify("gpl-3.0-only"), c.classify("agpl-3.0-only"));
    CHECK(r6.verdict == Verdict::Compatible);

    // a missing downstream license is never judged
    auto r7 = m.check(c.classify("mit"), c.classify(std::nullopt));
    CHECK(r7.verdict == Verdict::Unanalyzed);
    CHECK(r7.reason == "downstream license class is outside the analyzed set");
    auto r8 = m.check(c.classify(std::nullopt), c.classify("mit"));
    CHECK(r8.verdict == Verdict::Unanalyzed);
    CHECK(r8.reason == "upstream license class is outside the analyzed set");
}

TEST_CASE("every class pair gets a reasoned verdict") {
    Classifier c = shipped_classifier();
    Matrix m = shipped_matrix();

    const std::vector<std::string> tokens = {
        "mit",           "apache-2.0",     "bsd-3-clause",   "gpl-2.0-only",
        "gpl-3.0-only",  "agpl-3.0-only",  "lgpl-3.0-only",  "mpl-2.0",
        "cc0-1.0",       "unlicense",      "openrail",       "bigscience-openrail-m",
        "",              "mit or gpl-3.0", "some eula",
    };
    for (const auto& up : tokens) {
        Class u = c.classify(up);
        for (const auto& down : tokens) {
            Class d = c.classify(down);
            auto r = m.check(u, d);
            INFO(up << " -> " << down);
            CHECK_FALSE(r.reason.empty());
            bool analyzable = u.category != Category::NoLicense &&
                              u.category != Category::Multiple && u.category != Category::Other;
            if (analyzable && u.token == d.token) CHECK(r.verdict == Verdict::Compatible);
            if (u.category == Category::Permissive || u.category == Category::PublicDomain)
                CHECK(r.verdict != Verdict::Incompatible);
            if (u.category == Category::StrongCopyleft &&
                (d.category == Category::Permissive || d.category == Category::WeakCopyleft))
                CHECK(r.verdict == Verdict::Incompatible);
        }
    }
}

TEST_CASE("reference texts are recognized") {
    Fingerprints fp = Fingerprints::load(data_dir() / "licenses/texts");
    CHECK(fp.reference_count() == 8);

    std::ifstream in(data_dir() / "licenses/texts/mit.txt", std::ios::binary);
    std::string mit((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE_FALSE(mit.empty());

    auto hit = fp.match("Project Foo\n\n" + mit + "\n\nContact: foo@example.com\n");
    REQUIRE(hit.has_value());
    CHECK(*hit == "mit");

    CHECK_FALSE(fp.match("This project has no licensing information at all.").has_value());
}

TEST_CASE("repository license detection covers the edge cases") {
    Fingerprints fp = Fingerprints::load(data_dir() / "licenses/texts");
    Classifier c = shipped_classifier();

    std::ifstream in(data_dir() / "licenses/texts/apache-2.0.txt", std::ios::binary);
    std::string apache((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ifstream in2(data_dir() / "licenses/texts/mit.txt", std::ios::binary);
    std::string mit((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());

    SECTION("no license file") {
        TempDir t;
        write_file(t.path / "README.md", "# hello\n");
        Class got = detect_repo_license(t.path, fp, c);
        CHECK(got.category == Category::NoLicense);
        CHECK(got.token == "no-license");
    }
    SECTION("single recognized file, case-insensitive name") {
        TempDir t;
        write_file(t.path / "license.TXT", apache);
        Class got = detect_repo_license(t.path, fp, c);
        CHECK(got.token == "apache-2.0");
        CHECK(got.category == Category::Permissive);
    }
    SECTION("COPYING works too") {
        TempDir t;
        write_file(t.path / "COPYING", mit);
        CHECK(detect_repo_license(t.path, fp, c).token == "mit");
    }
    SECTION("two files with two licenses") {
        TempDir t;
        write_file(t.path / "LICENSE", apache);
        write_file(t.path / "LICENSE.md", mit);
        Class got = detect_repo_license(t.path, fp, c);
        CHECK(got.category == Category::Multiple);
        CHECK(got.token == "multiple");
    }
    SECTION("two files, same license") {
        TempDir t;
        write_file(t.path / "LICENSE", mit);
        write_file(t.path / "COPYING", mit);
        CHECK(detect_repo_license(t.path, fp, c).token == "mit");
    }
    SECTION("unrecognized text") {
        TempDir t;
        write_file(t.path / "LICENSE", "You may use this for good, not evil.\n");
        Class got = detect_repo_license(t.path, fp, c);
        CHECK(got.category == Category::Other);
        CHECK(got.token == "unrecognized");
    }
}

TEST_CASE("link flows aggregate into exact percentages") {
    Classifier c = shipped_classifier();
    Matrix m = shipped_matrix();
    store::Store db = store::Store::open_memory();

    auto mk_ptm = [&](const std::string& name, std::optional<std::string> lic) {
        PtmPackage p;
        p.registry = Registry::HuggingFace;
        p.name = name;
        p.license_raw = std::move(lic);
        return db.put_ptm(p);
    };
    auto mk_repo = [&](const std::string& full, std::optional<std::string> lic) {
        Repository r;
        r.full_name = full;
        r.license_raw = std::move(lic);
        return db.put_repo(r);
    };

    std::int64_t apache_ptm = mk_ptm("apache-model", "apache-2.0");
    std::int64_t gpl_ptm = mk_ptm("gpl-model", "gpl-3.0-only");
    std::int64_t mit_ptm = mk_ptm("mit-model", "mit");

    std::int64_t apache_repo1 = mk_repo("a/one", "apache-2.0");
    std::int64_t apache_repo2 = mk_repo("b/two", "apache-2.0");
    std::int64_t mit_repo = mk_repo("c/three", "mit");
    std::int64_t gpl_repo = mk_repo("d/four", "gpl-3.0-only");
    std::int64_t bare1 = mk_repo("e/five", std::nullopt);
    std::int64_t bare2 = mk_repo("f/six", std::nullopt);
    std::int64_t bare3 = mk_repo("g/seven", std::nullopt);
    std::int64_t bare4 = mk_repo("h/eight", std::nullopt);

    // one usage record per link so evidence exists
    std::vector<std::int64_t> repos = {apache_repo1, apache_repo2, mit_repo, gpl_repo,
                                       bare1,        bare2,        bare3,   bare4};
    std::vector<std::int64_t> ptms = {apache_ptm, apache_ptm, gpl_ptm, mit_ptm,
                                      mit_ptm,    mit_ptm,    gpl_ptm, apache_ptm};
    std::vector<PtmAppLink> links;
    for (size_t i = 0; i < repos.size(); ++i) {
        UsageRecord u;
        u.repo_id = repos[i];
        u.file = "m.py";
        u.line = 1;
        u.signature_id = "transformers.from_pretrained";
        u.library = "transformers";
        u.model_name = "x";
        db.add_usage_records({u});
        auto usage = db.usage_for_repo(repos[i]);
        PtmAppLink l;
        l.repo_id = repos[i];
        l.ptm_id = ptms[i];
        l.evidence = {usage.front().id};
        links.push_back(l);
    }
    db.replace_links(links);

    FlowReport report = license_flows(db, c, m);
    CHECK(report.total_links == 8);
    // 2 of 8 apache->apache
    CHECK(report.identical_pct == 25.0);
    // gpl->mit only
    CHECK(report.incompatible_pct == 12.5);
    // the four repos without a license
    CHECK(report.unanalyzed_pct == 50.0);
    CHECK(report.no_license_downstream_pct == 50.0);

    REQUIRE_FALSE(report.rows.empty());
    int summed = 0;
    for (const auto& row : report.rows) summed += row.count;
    CHECK(summed == report.total_links);
    for (size_t i = 1; i < report.rows.size(); ++i) {
        auto key = [](const FlowRow& r) { return std::make_pair(r.ptm_license, r.repo_license); };
        CHECK(key(report.rows[i - 1]) < key(report.rows[i]));
    }
    for (const auto& row : report.rows) {
        if (row.ptm_license == "gpl-3.0-only" && row.repo_license == "mit")
            CHECK(row.verdict == Verdict::Incompatible);
        if (row.repo_license == "no-license") CHECK(row.verdict == Verdict::Unanalyzed);
    }
}
