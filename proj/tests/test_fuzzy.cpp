#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "colab/fuzzy.hpp"
#include "support/oracles.hpp"

#include <random>
#include <string>
#include <vector>

using namespace colab;

TEST_CASE("levenshtein basics") {
    CHECK(fuzzy::levenshtein("", "abc") == 3);
    CHECK(fuzzy::levenshtein("abc", "") == 3);
    CHECK(fuzzy::levenshtein("abc", "abc") == 0);
    CHECK(fuzzy::levenshtein("", "") == 0);
    CHECK(fuzzy::levenshtein("kitten", "sitting") ==
          oracles::levenshtein_full_table(U"kitten", U"sitting"));
    CHECK(fuzzy::levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("levenshtein counts code points, not bytes") {
    // Two-byte characters: one substitution, not two.
    CHECK(fuzzy::levenshtein("héllo", "hållo") == 1);
    CHECK(fuzzy::decode_utf8("héllo").size() == 5);
    // Invalid bytes decode to one replacement character each.
    CHECK(fuzzy::decode_utf8("a\xFF\xFE" "b").size() == 4);
}

TEST_CASE("partial similarity documented cases") {
    CHECK(fuzzy::partial_similarity("abc", "abc") == doctest::Approx(100.0));
    CHECK(fuzzy::partial_similarity("abc", "xxabcxx") == 100.0);
    CHECK(fuzzy::partial_similarity("abd", "xxabcxx") == doctest::Approx(66.6666666667));
    // Exactness against the one-edit window: (1 - 1/3) * 100.
    CHECK(fuzzy::partial_similarity("abd", "xxabcxx") == (1.0 - 1.0 / 3.0) * 100.0);
    // Empty pattern scores 100 by definition.
    CHECK(fuzzy::partial_similarity("", "anything") == 100.0);
    CHECK(fuzzy::partial_similarity("", "") == 100.0);
    // Swap normalization: argument order is irrelevant.
    CHECK(fuzzy::partial_similarity("xxabcxx", "abc") == 100.0);
}

TEST_CASE("diversity documented cases") {
    CHECK(fuzzy::diversity("same", "same") == 0.0);
    CHECK(fuzzy::diversity("aaa", "bbb") == 100.0);
    CHECK(fuzzy::diversity("abd", "xxabcxx") == doctest::Approx(33.3333333333));
    CHECK(fuzzy::diversity("", "") == 0.0);
    // Substring containment means zero diversity.
    CHECK(fuzzy::diversity("bc", "abcd") == 0.0);
}

namespace {

std::string random_string(std::mt19937& rng, std::size_t max_len, int alphabet) {
    // A couple of multi-byte letters keep the Unicode path honest.
    static const std::vector<std::string> kAlphabet = {"a", "b", "c", "d",
                                                       "e", "f", "\xCE\xB1", "\xCE\xB2"};
    std::size_t len = rng() % (max_len + 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i)
        s += kAlphabet[rng() % static_cast<std::size_t>(alphabet)];
    return s;
}

} // namespace

TEST_CASE("randomized oracle equivalence and metric properties") {
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 1200; ++trial) {
        int alphabet = 2 + static_cast<int>(rng() % 7); // 2..8
        std::string a = random_string(rng, 64, alphabet);
        std::string b = random_string(rng, 64, alphabet);

        auto ua = fuzzy::decode_utf8(a);
        auto ub = fuzzy::decode_utf8(b);

        // Levenshtein axioms.
        std::size_t d = fuzzy::levenshtein(a, b);
        CHECK(d == oracles::levenshtein_full_table(ua, ub));
        CHECK(d == fuzzy::levenshtein(b, a));
        CHECK(fuzzy::levenshtein(a, a) == 0);
        std::size_t lo = ua.size() > ub.size() ? ua.size() - ub.size() : ub.size() - ua.size();
        CHECK(d >= lo);
        CHECK(d <= std::max(ua.size(), ub.size()));

        // Exact agreement with the window-enumeration oracle.
        double sim = fuzzy::partial_similarity(a, b);
        CHECK(sim == oracles::partial_similarity_bruteforce(a, b));
        CHECK(sim >= 0.0);
        CHECK(sim <= 100.0);

        double div = fuzzy::diversity(a, b);
        CHECK(div == 100.0 - sim);
        CHECK(div == fuzzy::diversity(b, a));
        CHECK(fuzzy::diversity(a, a) == 0.0);
    }
}

TEST_CASE("levenshtein triangle inequality") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        std::string a = random_string(rng, 24, 4);
        std::string b = random_string(rng, 24, 4);
        std::string c = random_string(rng, 24, 4);
        CHECK(fuzzy::levenshtein(a, c) <=
              fuzzy::levenshtein(a, b) + fuzzy::levenshtein(b, c));
    }
}

TEST_CASE("exhaustive small-string agreement with the oracle") {
    // Every pair of strings over {a, b} up to length 4.
    std::vector<std::string> all;
    all.emplace_back("");
    for (std::size_t len = 1; len <= 4; ++len) {
        for (unsigned bits = 0; bits < (1u << len); ++bits) {
            std::string s;
            for (std::size_t i = 0; i < len; ++i) s += (bits >> i) & 1 ? 'b' : 'a';
            all.push_back(s);
        }
    }
    for (const auto& a : all) {
        for (const auto& b : all) {
            CHECK(fuzzy::partial_similarity(a, b) ==
                  oracles::partial_similarity_bruteforce(a, b));
        }
    }
}

TEST_CASE("substring containment always gives diversity 0") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::string b = random_string(rng, 40, 6);
        if (b.empty()) continue;
        auto ub = fuzzy::decode_utf8(b);
        std::size_t start = rng() % ub.size();
        std::size_t len = 1 + rng() % (ub.size() - start);
        std::u32string sub = ub.substr(start, len);
        CHECK(fuzzy::diversity(sub, ub) == 0.0);
    }
}

TEST_CASE("patterns longer than 64 code points use the fallback path") {
    std::string a(70, 'a');
    std::string b = std::string(10, 'c') + std::string(68, 'a') + std::string(30, 'c');
    CHECK(fuzzy::partial_similarity(a, b) == oracles::partial_similarity_bruteforce(a, b));
    std::string c(90, 'a');
    c[40] = 'b';
    CHECK(fuzzy::partial_similarity(std::string(80, 'a'), c) ==
          oracles::partial_similarity_bruteforce(std::string(80, 'a'), c));
}
